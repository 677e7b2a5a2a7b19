# mcpinns test suite
