
# Handlers package initialization
