"""Exception hierarchy shared by every module."""


class NcwbError(ValueError):
    """Base class for all library errors."""


class NotHermitian(NcwbError):
    pass


class DimensionMismatch(NcwbError):
    pass


class OutOfRange(NcwbError):
    pass


class InvalidPovm(NcwbError):
    pass


class NotStochastic(NcwbError):
    pass


class InvalidPartition(NcwbError):
    pass


class WeightError(NcwbError):
    pass


class NumericalFailure(NcwbError):
    pass


class LabelMismatch(NcwbError):
    pass


class InvalidModel(NcwbError):
    pass


class TooLarge(NcwbError):
    pass


class NotProjective(NcwbError):
    pass


class InvalidValuation(NcwbError):
    pass


class InvalidProblem(NcwbError):
    pass


class ConstructionFailure(NcwbError):
    pass


class SchemaError(NcwbError):
    """Malformed JSON input. ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
