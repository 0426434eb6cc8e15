
# Mask package initialization
