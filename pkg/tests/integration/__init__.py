# Initialize integration tests package
