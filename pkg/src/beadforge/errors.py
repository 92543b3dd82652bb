"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its admissible range or malformed."""


class CutSequenceError(ValueError):
    """A cut sequence references atoms out of range or out of order."""


class ResourceError(RuntimeError):
    """A request exceeds the supported problem size (e.g. enumeration depth)."""


class LabelBudgetError(RuntimeError):
    """The label supply was exhausted before an embedding step could proceed."""
