class InvalidStrategyError(ValueError):
    """A strategy violates simplex or sequence-form constraints."""


class MissingLocalStrategyError(KeyError):
    pass


class UnknownGameError(ValueError):
    pass


class UnknownVariantError(ValueError):
    pass
