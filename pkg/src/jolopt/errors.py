"""Exception hierarchy. Every error carries a stable machine-readable code."""


class JoloptError(Exception):
    """Base class; ``code`` is stable across releases, the message is not."""

    code = "ERROR"

    def __init__(self, message: str):
        super().__init__(f"{self.code}: {message}")
        self.message = message


class ScheduleInvalid(JoloptError):
    code = "SCHEDULE_INVALID"


class ConstantsInvalid(JoloptError):
    code = "CONSTANTS_INVALID"


class DimMismatch(JoloptError):
    code = "DIM_MISMATCH"


class NoConvergence(JoloptError):
    code = "NO_CONVERGENCE"


class InfeasibleRegion(JoloptError):
    code = "INFEASIBLE_REGION"


class NonfiniteGradient(JoloptError):
    code = "NONFINITE_GRADIENT"


class InstanceInvalid(JoloptError):
    code = "INSTANCE_INVALID"


class SpecInvalid(JoloptError):
    code = "SPEC_INVALID"


class WeightsInvalid(JoloptError):
    code = "WEIGHTS_INVALID"


class AllExcluded(JoloptError):
    code = "ALL_EXCLUDED"


class ZeroObjective(JoloptError):
    code = "ZERO_OBJECTIVE"


class RefInvalid(JoloptError):
    code = "REF_INVALID"


class DataFormatError(JoloptError):
    """Base for ingestion failures; subclasses pin the exact defect."""

    code = "DATA_FORMAT"


class BadHeader(DataFormatError):
    code = "BAD_HEADER"


class MissingCell(DataFormatError):
    code = "MISSING_CELL"


class NonPositivePrice(DataFormatError):
    code = "NON_POSITIVE_PRICE"


class IrregularTimestamps(DataFormatError):
    code = "IRREGULAR_TIMESTAMPS"


class NegativeCapacity(DataFormatError):
    code = "NEGATIVE_CAPACITY"
