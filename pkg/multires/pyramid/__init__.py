
# Pyramid package initialization
