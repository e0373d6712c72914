// bindings land with the python module
