"""Exception hierarchy shared by every module.

Each exception carries the process exit code the command line front end
uses when it escapes a command.
"""


class MorphicError(Exception):
    exit_code = 1

    @property
    def name(self):
        return type(self).__name__

    def to_dict(self):
        return {"error": self.name, "message": str(self)}


class SpecError(MorphicError):
    exit_code = 2


class SpecNotFound(SpecError):
    pass


class InvalidSpecDocument(SpecError):
    pass


class InvalidMorphism(SpecError):
    pass


class NotProlongable(SpecError):
    pass


class InfiniteBlock(MorphicError):
    exit_code = 3


class HorizonExceeded(MorphicError):
    exit_code = 4


class PrecisionExhausted(HorizonExceeded):
    pass


class PatternDegenerate(MorphicError):
    exit_code = 2


class NonPrimitive(MorphicError):
    exit_code = 5


class DegenerateDenominator(MorphicError):
    exit_code = 5


class LambdaNotGreaterThanOne(MorphicError):
    exit_code = 5


class ConstructionError(MorphicError):
    exit_code = 5


class NotPerron(ConstructionError):
    pass


class InvalidParams(ConstructionError):
    pass


class UsageError(SpecError):
    """Bad command line."""


class ExactUnavailable(HorizonExceeded):
    """An exact value was requested but only an estimate is available."""
