class InputError(ValueError):
    """Rejected input: bad window, malformed file, violated precondition."""


class CheckFailure(AssertionError):
    """A mathematical property check found a counterexample."""
