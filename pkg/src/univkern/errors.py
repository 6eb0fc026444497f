"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`UnivKernError` so the CLI can map it to exit status 1.
"""


class UnivKernError(Exception):
    """Base class for all library errors."""

    #: short module tag prefixed to CLI messages
    module = "univkern"


class MeasureError(UnivKernError, ValueError):
    module = "measures"


class NonzeroTotalMass(MeasureError):
    """The measure does not have zero total mass within tolerance."""


class ZeroMeasure(MeasureError):
    """The measure has zero total variation."""


class KernelError(UnivKernError, ValueError):
    module = "kernels"


class AsymmetricSpectralMeasure(KernelError):
    """Spectral measure not symmetric under negation; the kernel would be complex."""


class DuplicatePoints(KernelError):
    pass


class NotSeriesKernel(KernelError):
    pass


class ClassifyError(UnivKernError, ValueError):
    module = "classify"


class FlagContradiction(ClassifyError):
    """A numeric spot-check refuted a declared flag."""


class ProbeError(UnivKernError, ValueError):
    module = "probe"


class SingularSystem(ProbeError):
    pass


class GapIntersectsSupport(ProbeError):
    pass


class GapContainsZero(ProbeError):
    pass


class ConfigError(UnivKernError, ValueError):
    module = "cli"


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnknownFamily(ConfigError):
    pass


class InvalidValue(ConfigError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
