# Initialize unit tests package
