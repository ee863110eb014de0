"""Exception hierarchy shared by every module."""


class BundleCalcError(Exception):
    """Base class for all errors raised by bundlecalc."""


class InvalidSpaceError(BundleCalcError, ValueError):
    pass


class DimensionMismatchError(BundleCalcError, ValueError):
    pass


class DegenerateNormError(BundleCalcError, ValueError):
    """A seminorm was given where a genuine norm is required."""


class NotAMorphismError(BundleCalcError, ValueError):
    """A per-atom map fails the 1-Lipschitz requirement on a positive-weight atom."""


class TensorUndefinedError(BundleCalcError, ValueError):
    pass


class AbsoluteContinuityError(BundleCalcError, ValueError):
    pass


class NoLiftError(BundleCalcError, ValueError):
    pass


class OverlapError(BundleCalcError, ValueError):
    pass


class InstanceError(BundleCalcError):
    """Raised when an instance file fails to parse or validate.

    ``errors`` holds ``(json_pointer, message)`` pairs.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = ["{}: {}".format(ptr or "/", msg) for ptr, msg in self.errors]
        super().__init__("\n".join(lines))
