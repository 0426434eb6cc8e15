
# Tests package initialization
