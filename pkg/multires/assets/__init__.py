
# Assets package initialization
