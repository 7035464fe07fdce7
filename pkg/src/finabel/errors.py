"""Exception types shared across the library."""


class FinabelError(Exception):
    """Base class for every error raised by this package."""


# -- group construction / subgroup machinery ---------------------------------

class ZeroModulus(FinabelError):
    """A cyclic factor was requested with modulus < 1."""


class OverMaxOrder(FinabelError):
    """Requested group order exceeds the configured cap."""


class DimensionMismatch(FinabelError):
    """Element or character coordinates do not fit the group."""


class ParentMismatch(FinabelError):
    """Two subgroups of different parent groups were combined."""


class OverEnumerationCap(FinabelError):
    """Subgroup enumeration requested beyond the configured order cap."""


# -- dense transforms ---------------------------------------------------------

class SideMismatch(FinabelError):
    """Transform direction does not match the function's side tag."""


class GroupMismatch(FinabelError):
    """Binary operation on functions living on different groups."""


# -- rounding calculus --------------------------------------------------------

class NotRealValued(FinabelError):
    """Operation requires a real-valued function."""


class TooCloseToHalf(FinabelError):
    """Distance to the integers is too close to 1/2 for a unique rounding."""


# -- linear programming -------------------------------------------------------

class Infeasible(FinabelError):
    """The LP constraints are contradictory."""


class Unbounded(FinabelError):
    """The LP objective is unbounded below (signals a solver misuse)."""


class OverLpCap(FinabelError):
    """LP tableau exceeds the configured size cap."""


class LpInternalError(FinabelError):
    """The solver reached a state that should be impossible."""


# -- decompositions and chains ------------------------------------------------

class RoundingTooFar(FinabelError):
    """Input is too far from integer-valued for chain construction."""


class DecompositionFailed(FinabelError):
    """No coset-structured decomposition could be produced."""


# -- certificates -------------------------------------------------------------

class PreconditionRounding(FinabelError):
    """Certificate admission threshold on the rounding distance failed."""


class DepthExceeded(FinabelError):
    """Certificate recursion failed to shed mass and hit the depth cap."""


class NBelowSeparation(FinabelError):
    """Discretization resolution below the frequency separation point."""


# -- pipelines ----------------------------------------------------------------

class LevelMismatch(FinabelError):
    """Transform range is not contained in the prescribed level values."""


class NotEnoughSpectrum(FinabelError):
    """Not enough disjoint spectral sets for the requested levels."""


class NormExceedsOne(FinabelError):
    """Synthesized measure norm exceeds one (warning-grade condition)."""


class Unrepresentable(FinabelError):
    """Log-domain sequence construction left double range.

    Carries ``max_length``, the longest representable prefix.
    """

    def __init__(self, message: str, max_length: int):
        super().__init__(message)
        self.max_length = max_length


# -- configuration ------------------------------------------------------------

class ConfigError(FinabelError):
    """Invalid configuration value."""
