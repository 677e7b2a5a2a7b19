# Integration tests for mcpinns
