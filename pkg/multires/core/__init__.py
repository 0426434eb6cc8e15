
# Core package initialization
