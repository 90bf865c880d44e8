"""Exception taxonomy for the laboratory.

Every error raised by this package derives from :class:`KvwaveError` so that
callers (and the CLI) can catch one base class and report a one-line
diagnostic.
"""

from __future__ import annotations


class KvwaveError(Exception):
    """Base class for all package-specific errors."""


# ---------------------------------------------------------------------------
# Parameter / model validation
# ---------------------------------------------------------------------------

class NonPositiveC(KvwaveError):
    """Wave-speed coefficient c must be strictly positive."""


class NegativeD(KvwaveError):
    """Damping amplitude d must be nonnegative."""


class EmptySupport(KvwaveError):
    """Damping support interval is empty or inverted."""


class ValidationError(KvwaveError):
    """A parameter combination is invalid for the requested purpose."""


# ---------------------------------------------------------------------------
# Discretization / linear algebra
# ---------------------------------------------------------------------------

class MisalignedSupport(KvwaveError):
    """Damping-support endpoints do not coincide with mesh nodes."""


class SingularMass(KvwaveError):
    """Mass matrix factorization failed (should not happen for a valid mesh)."""


class DimensionMismatch(KvwaveError):
    """State vectors have inconsistent lengths."""


class NearSingularShift(KvwaveError):
    """Banded LU of the shifted system met a pivot below threshold."""


class ResidualTooLarge(KvwaveError):
    """Shifted solve failed the enforced backward-residual bound."""


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

class EmptyWindow(KvwaveError):
    """Decay-fit window selects too few usable samples."""


class NonPositiveEnergy(KvwaveError):
    """Decay fit encountered a sample with nonpositive energy."""


class EnergyBalanceError(KvwaveError):
    """Integrated dissipation failed to account for the energy drop."""


# ---------------------------------------------------------------------------
# Iterative estimators
# ---------------------------------------------------------------------------

class NoConvergence(KvwaveError):
    """Iteration budget exhausted before the tolerance was met."""


# ---------------------------------------------------------------------------
# Quasimode construction / audits
# ---------------------------------------------------------------------------

class DegenerateDenominator(KvwaveError):
    """Interface-matching system is numerically singular."""


class SinThetaDegenerate(KvwaveError):
    """sin(theta) is too close to zero for the mode index requested."""


class MeshTooCoarse(KvwaveError):
    """Mesh under-resolves the oscillation of the requested mode."""


class RegistryMiss(KvwaveError):
    """Requested expansion name is not in the audit registry."""


# ---------------------------------------------------------------------------
# Configuration / CLI
# ---------------------------------------------------------------------------

class ParseError(KvwaveError):
    """Configuration text is syntactically malformed."""
