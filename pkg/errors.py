"""
Exception hierarchy shared by the library, the CLI and the HTTP service
"""


class BBLabError(Exception):
    """Base class for all library errors"""


class LengthMismatch(BBLabError, ValueError):
    """Truth table length is not 2^n"""


class NonBooleanValue(BBLabError, ValueError):
    """Truth table entry outside {-1, +1}"""


class BadTable(BBLabError, ValueError):
    """Truth table text could not be parsed"""


class BadBias(BBLabError, ValueError):
    """Bias p outside the guarded interval"""


class CoordinateOutOfRange(BBLabError, ValueError):
    """Coordinate index outside 1..n"""


class BiasMismatch(BBLabError, ValueError):
    """Spectra computed under different biases"""


class SizeMismatch(BBLabError, ValueError):
    """Spectra over different coordinate counts"""


class NotNormalized(BBLabError, ValueError):
    """Squared coefficients do not sum to 1"""


class EpsOutOfRange(BBLabError, ValueError):
    """Noise or moment parameter outside its range"""


class ZeroSpectrum(BBLabError, ValueError):
    """All coefficients are zero"""


class AssignmentOverlapsAlive(BBLabError, ValueError):
    """Restriction assigns a coordinate that is alive"""


class BadChain(BBLabError, ValueError):
    """Chain order is not a permutation of 1..n"""


class StepOutOfRange(BBLabError, ValueError):
    """Chain step outside 1..n"""


class SourceUnavailable(BBLabError):
    """Function source cannot be read"""


class TooLarge(BBLabError):
    """Requested sweep exceeds the configured size limit"""


class TooLargeForLedger(BBLabError):
    """Proof ledger requested above its size limit"""


class ConstantStart(BBLabError, ValueError):
    """Local refinement started from a constant function"""


class ConfigMismatch(BBLabError, ValueError):
    """Reports produced under different configurations"""
