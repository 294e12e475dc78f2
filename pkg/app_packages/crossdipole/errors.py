class ConfigError(ValueError):
    """A configuration value is unknown or out of range. `key` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message

    def __reduce__(self):
        return type(self), (self.key, self.message)


class InsufficientDataError(ValueError):
    pass


class ErfiOverflowError(OverflowError):
    def __init__(self, x: float, saturation: float):
        super().__init__(
            f"erfi({x}) overflows: |x| must not exceed {saturation}"
        )
        self.x = x
        self.saturation = saturation


class ResidueError(ArithmeticError):
    """A closed form evaluated in complex arithmetic left a non-negligible imaginary part."""
