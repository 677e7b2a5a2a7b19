# Unit tests for mcpinns
