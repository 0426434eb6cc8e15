
# Metrics package initialization
