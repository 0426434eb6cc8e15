# Scene package initialization
