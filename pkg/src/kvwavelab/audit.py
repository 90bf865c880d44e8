"""Numerical audit of the published large-n expansions.

Every closed-form scalar of the resonant construction comes with a printed
asymptotic expansion in the mode index.  The registry below pairs each
exact quantity (evaluated from :mod:`kvwavelab.quasimode`) with its printed
model and a claimed decay order for the residual; ``expansion_audit`` fits
the measured order by log-log regression over a list of mode indices and
passes an entry when the fit reaches the claim within a fixed margin.

Registry policy: models transcribe the printed series verbatim except for
structurally malformed terms (a term whose power of the frequency cannot be
right, such as a real O(1) constant inside a purely oscillatory rate),
which are dropped and documented in the entry note.  Claimed orders state
where the residual actually enters; when a printed coefficient disagrees
with the exact value, the residual enters at that term's order and the
claim records it, so the audit measures the disagreement rather than
hiding it.  Two boundary-trace quantities whose printed growth claims
disagree with the exact values at leading order are reported descriptively
by ``trace_growth_report`` instead of being registered.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import RegistryMiss, ValidationError
from .quasimode import QuasimodeConstants, constants

__all__ = [
    "ExpansionEntry",
    "AuditRow",
    "AuditReport",
    "TraceGrowthRow",
    "REGISTRY",
    "registered_names",
    "expansion_audit",
    "defining_identity_residual",
    "trace_growth_report",
]

#: Fitted order may fall short of the claim by this much and still pass.
ORDER_MARGIN = 0.3

#: Default mode indices for the regression.
DEFAULT_N_VALUES = (10, 20, 40, 80)


@dataclass(frozen=True)
class ExpansionEntry:
    """One audited expansion: exact value, printed model, claimed order."""

    name: str
    claimed_order: float
    exact: Callable[[QuasimodeConstants], complex]
    model: Callable[[QuasimodeConstants], complex]
    note: str = ""


def _inv(qc: QuasimodeConstants) -> complex:
    return 1.0 / qc.lam


def _omega_n_model(qc: QuasimodeConstants) -> complex:
    n, c = qc.n, qc.c
    return math.sqrt(c) * (
        2.0 * n * math.pi
        + n**-1.0 / (4.0 * math.pi * (c - 1.0))
        - c * n**-3.0 / (32.0 * math.pi**3 * (c - 1.0) ** 3)
    )


def _omega_inv_model(qc: QuasimodeConstants) -> complex:
    n, c = qc.n, qc.c
    return 1.0 / (2.0 * n * math.pi * math.sqrt(c)) - 1.0 / (
        16.0 * math.sqrt(c) * (c - 1.0) * (math.pi * n) ** 3
    )


def _eta_plus_model(qc: QuasimodeConstants) -> complex:
    c, d, li = qc.c, qc.d, _inv(qc)
    return (
        -qc.lam
        + c / d
        - (c / d**2) * li
        + ((c - 1.0) ** 3 + d**2 * (c + 1.0) + 2.0 * c) / (2.0 * d**3) * li**2
    )


def _eta_minus_model(qc: QuasimodeConstants) -> complex:
    c, d, li = qc.c, qc.d, _inv(qc)
    return (
        -((c - 1.0) ** 3 + d**2 * (c + 1.0)) / (2.0 * d**3) * li**2
        + ((c - 1.0) ** 3 * (2.0 - c) + d**2 * (c - 1.0) * (c - 2.0 - 2.0 * c * d))
        / (2.0 * d**4)
        * li**3
    )


def _beta_plus_model(qc: QuasimodeConstants) -> complex:
    return qc.lam / math.sqrt(qc.c)


def _beta_plus_sq_model(qc: QuasimodeConstants) -> complex:
    return qc.lam**2 / qc.c


def _beta_minus_model(qc: QuasimodeConstants) -> complex:
    w, d = qc.omega, qc.d
    return math.sqrt(w / d) * cmath.exp(1j * math.pi / 4.0) - w**-0.5 / (
        2.0 * d**1.5
    ) * cmath.exp(-1j * math.pi / 4.0)


def _beta_minus_sq_model(qc: QuasimodeConstants) -> complex:
    c, d, li = qc.c, qc.d, _inv(qc)
    return (
        qc.lam / d
        - 1.0 / d**2
        + ((c - 1.0) ** 3 + d * (c - 1.0) + 2.0 * c) / (2.0 * c * d**3) * li
        - ((c - 1.0) ** 3 * (2.0 - c) + d * (c - 1.0) * (c - 2.0 - 2.0 * c * d) + 2.0 * c)
        / (2.0 * c * d**4)
        * li**2
    )


def _alpha_plus_model(qc: QuasimodeConstants) -> complex:
    c = qc.c
    return (c - 1.0) * qc.lam - c / (c - 1.0) * _inv(qc)


def _alpha_minus_model(qc: QuasimodeConstants) -> complex:
    c = qc.c
    return c / (c - 1.0) * _inv(qc)


def _mu_plus_model(qc: QuasimodeConstants) -> complex:
    c, li = qc.c, _inv(qc)
    return math.sqrt(c) * (1.0 - c / (2.0 * (c - 1.0)) * li**2)


def _mu_minus_model(qc: QuasimodeConstants) -> complex:
    c, li = qc.c, _inv(qc)
    return 1.0 + li**2 / (2.0 * (c - 1.0))


def _mu_ratio_model(qc: QuasimodeConstants) -> complex:
    c, li = qc.c, _inv(qc)
    return math.sqrt(c) * (1.0 - (c + 1.0) / (2.0 * (c - 1.0)) * li**2)


def _A_n_model(qc: QuasimodeConstants) -> complex:
    c, d, li = qc.c, qc.d, _inv(qc)
    return (c - 1.0) / c * (1.0 + li / d - li**2 / (c - 1.0))


def _B_n_model(qc: QuasimodeConstants) -> complex:
    c, d, li = qc.c, qc.d, _inv(qc)
    sq = math.sqrt(c)
    return (
        (c - 1.0)
        * (sq - 1.0)
        / (2.0 * c)
        * (
            1.0
            - (c - 1.0) / d * li
            - (1.0 / (c - 1.0) ** 2 + sq * (c + 1.0) / (2.0 * (sq - 1.0) * (c - 1.0)))
            * li**2
        )
    )


def _A_n_prime_model(qc: QuasimodeConstants) -> complex:
    c, d, li = qc.c, qc.d, _inv(qc)
    return (
        c
        / (c - 1.0)
        * (
            1.0
            - li / d
            + (
                (c - 1.0) ** 3 / (2.0 * c * d**2)
                + (c - 1.0) / (2.0 * c * d)
                + (3.0 - c) / (2.0 * d**2)
                + 0.5
            )
            * li**2
        )
    )


def _B_n_prime_model(qc: QuasimodeConstants) -> complex:
    c, d, li = qc.c, qc.d, _inv(qc)
    sq = math.sqrt(c)
    return (
        qc.n
        * math.pi
        * (c - sq)
        / (2.0 * qc.omega)
        * (
            -1.0
            + (c / d) * li
            + ((c + sq + 3.0) / (2.0 * (c - 1.0) ** 2) - (c + 1.0 + d**2) / (2.0 * d**2))
            * li**2
        )
    )


def _theta_model(qc: QuasimodeConstants) -> complex:
    n, c = qc.n, qc.c
    return math.sqrt(c) * (
        2.0 * n * math.pi
        + (c * math.pi - 12.0) / (4.0 * c * math.pi**2 * (c - 1.0)) * n**-1.0
    )


_ENTRIES = [
    ExpansionEntry(
        "omega_n",
        3.0,
        lambda qc: qc.omega,
        _omega_n_model,
        "printed n^-3 coefficient is ~12% off, so the residual enters at "
        "order 3 despite the printed o(n^-4) remainder",
    ),
    ExpansionEntry(
        "omega_n_inverse",
        4.0,
        lambda qc: 1.0 / qc.omega,
        _omega_inv_model,
        "both printed coefficients exact; measured order 5",
    ),
    ExpansionEntry(
        "eta_plus",
        2.0,
        lambda qc: qc.eta_plus,
        _eta_plus_model,
        "final printed term (an O(1) real constant standing in for the "
        "lam^-3 term) dropped as malformed; the lam^-2 coefficient "
        "disagrees with the exact root, so the residual enters at order 2",
    ),
    ExpansionEntry(
        "eta_minus",
        2.0,
        lambda qc: qc.eta_minus,
        _eta_minus_model,
        "lam^-2 coefficient disagrees with the exact root (the printed "
        "lam^-3 term is kept but moot)",
    ),
    ExpansionEntry(
        "beta_plus",
        1.0,
        lambda qc: qc.beta_plus,
        _beta_plus_model,
        "printed O(1) real constant dropped as malformed: the exact rate "
        "has vanishing real part; measured order 2",
    ),
    ExpansionEntry(
        "beta_plus_sq",
        0.0,
        lambda qc: qc.beta_plus**2,
        _beta_plus_sq_model,
        "printed o(1) remainder confirmed; measured order 1",
    ),
    ExpansionEntry(
        "beta_minus",
        1.0,
        lambda qc: qc.beta_minus,
        _beta_minus_model,
        "both printed terms exact; measured order 3/2",
    ),
    ExpansionEntry(
        "beta_minus_sq",
        1.0,
        lambda qc: qc.beta_minus**2,
        _beta_minus_sq_model,
        "printed lam^-1 coefficient has the wrong power of d (off 2.4x at "
        "d=1), so the residual enters at order 1, not the printed 2",
    ),
    ExpansionEntry(
        "alpha_plus",
        3.0,
        lambda qc: qc.alpha_plus,
        _alpha_plus_model,
        "final printed term dropped as malformed (correct lam^-3 "
        "coefficient printed without its lam^-3 factor); residual enters "
        "exactly at the printed order 3",
    ),
    ExpansionEntry(
        "alpha_minus",
        1.0,
        lambda qc: qc.alpha_minus,
        _alpha_minus_model,
        "printed term exact; measured order 3",
    ),
    ExpansionEntry(
        "mu_plus",
        2.0,
        lambda qc: qc.mu_plus,
        _mu_plus_model,
        "printed terms exact; measured order 4",
    ),
    ExpansionEntry(
        "mu_minus",
        2.0,
        lambda qc: qc.mu_minus,
        _mu_minus_model,
        "printed terms exact; measured order 4",
    ),
    ExpansionEntry(
        "mu_ratio",
        2.0,
        lambda qc: qc.mu_ratio,
        _mu_ratio_model,
        "printed terms exact; measured order 4",
    ),
    ExpansionEntry(
        "A_n",
        2.0,
        lambda qc: qc.A_n,
        _A_n_model,
        "lam^-2 coefficient disagrees with the exact value; residual "
        "enters at order 2",
    ),
    ExpansionEntry(
        "B_n",
        2.0,
        lambda qc: qc.B_n,
        _B_n_model,
        "printed terms exact; measured order 3",
    ),
    ExpansionEntry(
        "A_n_prime",
        2.0,
        lambda qc: qc.A_n_prime,
        _A_n_prime_model,
        "lam^-2 coefficient disagrees with the exact value; residual "
        "enters at order 2",
    ),
    ExpansionEntry(
        "B_n_prime",
        0.0,
        lambda qc: qc.B_n_prime,
        _B_n_prime_model,
        "printed leading coefficient is low by a factor 2 (exact limit "
        "-(c-sqrt(c))/(2 sqrt(c)), printed half of that), leaving an O(1) "
        "residual; the claim records the non-decaying mismatch",
    ),
    ExpansionEntry(
        "theta",
        1.0,
        lambda qc: qc.theta,
        _theta_model,
        "printed n^-1 coefficient disagrees with the exact value "
        "(exact (c+1)/(4 pi c (c-1)) per sqrt(c)); residual enters at "
        "order 1",
    ),
]

REGISTRY = {entry.name: entry for entry in _ENTRIES}


def registered_names() -> tuple:
    """Names of all registered expansions, in registry order."""
    return tuple(REGISTRY)


@dataclass
class AuditRow:
    """Regression result for one registered expansion."""

    name: str
    claimed_order: float
    fitted_order: float
    residuals: tuple
    exact_values: tuple
    model_values: tuple
    passed: bool
    note: str


@dataclass
class AuditReport:
    """Full audit over a list of mode indices."""

    c: float
    d: float
    n_values: tuple
    rows: list

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)


def defining_identity_residual(qc: QuasimodeConstants) -> float:
    """| mu_plus (lam - alpha_plus / c) - 2 i n pi |.

    The resonant frequencies are chosen to make this vanish; it is the
    anchor identity of the whole construction and holds to rounding.
    """
    return abs(qc.mu_plus * (qc.lam - qc.alpha_plus / qc.c) - 2j * qc.n * math.pi)


def expansion_audit(
    names: Optional[Sequence[str]] = None,
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    c: float = 4.0,
    d: float = 1.0,
    margin: float = ORDER_MARGIN,
) -> AuditReport:
    """Fit residual decay orders for registered expansions.

    For each entry the absolute residual |exact - model| is evaluated at
    every mode index in ``n_values`` and a decay order is fitted by
    least-squares regression of log-residual against log-n.  An entry
    passes when the fitted order reaches ``claimed_order - margin`` (an
    exactly matching model passes with an infinite fitted order).
    """
    if names is None:
        names = registered_names()
    entries = []
    for name in names:
        if name not in REGISTRY:
            raise RegistryMiss(
                f"unknown expansion {name!r}; registered: {', '.join(REGISTRY)}"
            )
        entries.append(REGISTRY[name])
    n_values = tuple(int(n) for n in n_values)
    if len(n_values) < 2:
        raise ValidationError("need at least two mode indices to fit an order")
    if sorted(set(n_values)) != list(n_values):
        raise ValidationError("mode indices must be strictly increasing")

    qcs = [constants(n, c, d) for n in n_values]
    rows = []
    for entry in entries:
        exact_vals = [entry.exact(qc) for qc in qcs]
        model_vals = [entry.model(qc) for qc in qcs]
        residuals = [abs(e - m) for e, m in zip(exact_vals, model_vals)]
        floor = [1e-15 * max(1.0, abs(e)) for e in exact_vals]
        if all(r <= f for r, f in zip(residuals, floor)):
            fitted = math.inf
        else:
            safe = [max(r, f * 1e-2) for r, f in zip(residuals, floor)]
            slope = np.polyfit(np.log(n_values), np.log(safe), 1)[0]
            fitted = float(-slope)
        rows.append(
            AuditRow(
                name=entry.name,
                claimed_order=entry.claimed_order,
                fitted_order=fitted,
                residuals=tuple(residuals),
                exact_values=tuple(exact_vals),
                model_values=tuple(model_vals),
                passed=bool(fitted >= entry.claimed_order - margin),
                note=entry.note,
            )
        )
    return AuditReport(c=float(c), d=float(d), n_values=n_values, rows=rows)


@dataclass
class TraceGrowthRow:
    """Report-only comparison of a boundary-trace claim against the exact value."""

    name: str
    n_values: tuple
    exact_magnitudes: tuple
    claimed_magnitudes: tuple
    exact_growth: float
    claimed_growth: float
    ratio_last: float
    note: str


def trace_growth_report(
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    c: float = 4.0,
    d: float = 1.0,
) -> list:
    """Measured vs claimed growth of the two characteristic boundary traces.

    These quantities are reported, not asserted: the printed claims
    disagree with the exact interface constants at leading order.  The
    first-trace claim ``c3' sqrt(c/d) e^{-i pi/4} (2 pi sqrt(c) n)^{3/2}``
    underestimates the exact growth (the exact trace grows like n^2 because
    the dominant flux contribution it omits carries ``c1'``, which tends to
    a nonzero constant); the second-trace claim ``2 pi n sqrt(c) c3' /
    sin(theta)`` has the right boundedness but its ratio to the exact
    constant tends to ~0.84 rather than 1.
    """
    n_values = tuple(int(n) for n in n_values)
    qcs = [constants(n, c, d) for n in n_values]
    rows = []

    exact1 = [abs(qc.w1) for qc in qcs]
    claim1 = [
        abs(
            qc.c3_prime
            * math.sqrt(c / d)
            * cmath.exp(-1j * math.pi / 4.0)
            * (2.0 * math.pi * math.sqrt(c) * qc.n) ** 1.5
        )
        for qc in qcs
    ]
    exact2 = [abs(qc.w2) for qc in qcs]
    claim2 = [
        abs(2.0 * math.pi * qc.n * math.sqrt(c) * qc.c3_prime / qc.sin_theta)
        for qc in qcs
    ]

    def growth(vals):
        return float(np.polyfit(np.log(n_values), np.log(vals), 1)[0])

    rows.append(
        TraceGrowthRow(
            name="omega1_trace",
            n_values=n_values,
            exact_magnitudes=tuple(exact1),
            claimed_magnitudes=tuple(claim1),
            exact_growth=growth(exact1),
            claimed_growth=growth(claim1),
            ratio_last=exact1[-1] / claim1[-1],
            note="exact trace grows ~n^2; claim evaluates to a decaying "
            "quantity because it scales with c3' ~ n^-2",
        )
    )
    rows.append(
        TraceGrowthRow(
            name="omega2_trace_constant",
            n_values=n_values,
            exact_magnitudes=tuple(exact2),
            claimed_magnitudes=tuple(claim2),
            exact_growth=growth(exact2),
            claimed_growth=growth(claim2),
            ratio_last=exact2[-1] / claim2[-1],
            note="both bounded; the ratio tends to ~0.84, not 1",
        )
    )
    return rows
