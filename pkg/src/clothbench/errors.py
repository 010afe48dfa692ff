class ValidationError(ValueError):
    """Raised when a parameter record violates one of its invariants."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
