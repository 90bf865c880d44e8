"""Continuous-level model definitions.

The system under study couples two wave fields u and v on the interval
(-1, 1) with homogeneous Dirichlet boundary conditions:

    u_tt - (u_x + a(x) u_tx)_x + v_t = 0,
    v_tt - c v_xx            - u_t = 0,

where a(x) = d on a closed subinterval (default [0, 1]) and 0 elsewhere.
The viscoelastic term acts only through the first field and only on the
support of a; the zeroth-order coupling exchanges energy between the
fields.  The natural energy is

    E(t) = 1/2 * Int( |u_t|^2 + |v_t|^2 + |u_x|^2 + c |v_x|^2 ) dx,

and along solutions E'(t) = -Int a(x) |u_tx|^2 dx <= 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySupport, NegativeD, NonPositiveC, ValidationError

__all__ = [
    "ModelParams",
    "DampingProfile",
    "validate_params",
    "energy_density",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the coupled system.

    c : wave-speed coefficient of the second field (real > 0).
    d : viscoelastic damping amplitude (real >= 0; 0 gives the
        conservative system used as a test oracle).
    damping_support : closed interval [x_l, x_r] inside [-1, 1] on which
        the damping coefficient equals d.
    """

    c: float = 4.0
    d: float = 1.0
    damping_support: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        if not (self.c > 0):
            raise NonPositiveC(f"wave-speed coefficient must be > 0, got c={self.c}")
        if self.d < 0:
            raise NegativeD(f"damping amplitude must be >= 0, got d={self.d}")
        x_l, x_r = self.damping_support
        if not (x_l < x_r):
            raise EmptySupport(
                f"damping support must be a nonempty interval, got [{x_l}, {x_r}]"
            )
        if x_l < -1.0 - 1e-12 or x_r > 1.0 + 1e-12:
            raise EmptySupport(
                f"damping support must lie inside [-1, 1], got [{x_l}, {x_r}]"
            )

    @property
    def profile(self) -> "DampingProfile":
        return DampingProfile(self.d, self.damping_support)


@dataclass(frozen=True)
class DampingProfile:
    """Piecewise-constant damping coefficient a(x) = d * indicator(support)."""

    d: float
    support: tuple[float, float] = (0.0, 1.0)

    def evaluate(self, x):
        """Pointwise value of a(x); accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        x_l, x_r = self.support
        out = np.where((x >= x_l) & (x <= x_r), self.d, 0.0)
        if out.ndim == 0:
            return float(out)
        return out

    __call__ = evaluate


def validate_params(params: ModelParams, purpose: str = "simulate") -> None:
    """Check that parameters fit the requested experiment.

    purpose="simulate": any params accepted (construction already enforces
    c > 0, d >= 0, valid support).

    purpose="quasimode": the blow-up construction additionally needs c > 1
    (the two wave families must have distinct propagation speeds, with the
    second strictly faster).  A warning is emitted when sin(2*sqrt(c)*n*pi)
    can approach zero along integers n without 2*sqrt(c) itself being an
    integer: in that borderline case individual mode indices may fall into
    the phase-degenerate regime and will be rejected per-index downstream.
    """
    if purpose not in ("simulate", "quasimode"):
        raise ValidationError(f"unknown validation purpose {purpose!r}")
    if purpose == "quasimode":
        if not (params.c > 1):
            raise ValidationError(
                f"quasimode experiments require c > 1, got c={params.c}"
            )
        if params.d == 0:
            raise ValidationError("quasimode experiments require d > 0, got d=0")
        root = 2.0 * math.sqrt(params.c)
        if abs(root - round(root)) > 1e-9:
            # 2*sqrt(c) integral makes the relevant phase exactly periodic in n
            # and keeps it safely away from the degenerate zeros.
            warnings.warn(
                "2*sqrt(c) is not an integer: the interface phase "
                "sin(theta) may degenerate for some mode indices; "
                "such indices are rejected individually.",
                stacklevel=2,
            )


def energy_density(ux, vx, w, z, c: float):
    """Pointwise energy density 1/2 (|w|^2 + |z|^2 + |ux|^2 + c |vx|^2).

    w and z are the velocities of the two fields, ux/vx their space
    derivatives.  Accepts scalars or arrays (broadcast together).
    """
    ux = np.asarray(ux)
    vx = np.asarray(vx)
    w = np.asarray(w)
    z = np.asarray(z)
    out = 0.5 * (
        np.abs(w) ** 2 + np.abs(z) ** 2 + np.abs(ux) ** 2 + c * np.abs(vx) ** 2
    )
    if out.ndim == 0:
        return float(out)
    return out
