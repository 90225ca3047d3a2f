"""Exception types shared across the package."""


class WidthlabError(Exception):
    """Base class for all widthlab errors."""


class ValidationError(WidthlabError, ValueError):
    """A model or parameter set violates a documented invariant."""


class ParseError(WidthlabError, ValueError):
    """A measure-spec document or CSV stream could not be parsed."""


class ResourceLimitError(WidthlabError, RuntimeError):
    """An enumeration or partition exceeded its configured cap."""


class SolverError(WidthlabError, RuntimeError):
    """A root search or fit could not produce a usable result."""
