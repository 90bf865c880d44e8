"""Resolvent-norm estimation along the imaginary axis and spectral probes.

Operator norms are measured in the energy inner product: the estimated
quantity is the largest singular value of R = (i beta - A)^-1 as a map of
the energy space H into itself.  Writing H for the (block-diagonal SPD)
Gram operator of that inner product, the H-adjoint of R is H^-1 R* H, so

    T = H^-1 R* H R

is self-adjoint positive in the H-geometry with largest eigenvalue
sigma_max(R)^2.  A block power iteration on T needs, per iteration and per
block column, one forward banded solve, one conjugate-transposed banded
solve (same factorization), one application of H, and one SPD solve with H
(cached banded Cholesky factors).  A block of width 2 with Rayleigh-Ritz
extraction keeps the iteration robust when the two leading singular values
nearly tie.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NoConvergence, ValidationError
from .fem import (
    GramMatrices,
    ShiftedSolver,
    StateBlock,
    apply_H,
    energy_inner,
    energy_norm,
    generator_apply,
    random_state,
    solve_H,
)

__all__ = [
    "ResolventSample",
    "PolyBoundReport",
    "SpectrumEstimate",
    "resolvent_norm",
    "scan",
    "poly_bound_probe",
    "spectrum_probe",
    "scan_workers",
]

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class ResolventSample:
    """One frequency sample of the energy-norm resolvent estimate."""

    beta: float
    norm_estimate: float
    iterations: int
    converged: bool
    mesh_N: int = 0


@dataclass(frozen=True)
class PolyBoundReport:
    """sup over a scan of beta^(-gamma) * norm, with its location."""

    gamma: float
    sup_value: float
    argmax_beta: float
    samples: tuple[ResolventSample, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class SpectrumEstimate:
    """Nearest-eigenvalue estimate from shift-invert iteration."""

    shift: complex
    eigenvalue: complex
    residual: float
    iterations: int


def _h_orthonormalize(cols: list[StateBlock], G: GramMatrices) -> list[StateBlock]:
    """Modified Gram-Schmidt in the H inner product; drops rank-deficient columns."""
    out: list[StateBlock] = []
    for x in cols:
        y = x.copy()
        for q in out:
            y = y - energy_inner(y, q, G) * q
        # one re-orthogonalization pass for stability
        for q in out:
            y = y - energy_inner(y, q, G) * q
        nrm = float(energy_norm(y, G))
        if nrm > 1e-300:
            out.append(y * (1.0 / nrm))
    return out


def resolvent_norm(
    beta: float,
    G: GramMatrices,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    strict: bool = True,
    residual_tol: float | None = None,
) -> ResolventSample:
    """Estimate |(i beta - A)^-1| in the energy operator norm.

    Block power iteration (block width 2) on the H-self-adjoint operator
    T = H^-1 R* H R; the Rayleigh-Ritz value is monotonically nondecreasing
    and convergence is declared when its relative increment stays below tol
    on two consecutive iterations.  With strict=True an exhausted iteration
    budget raises NoConvergence; otherwise the sample is returned flagged
    as unconverged.
    """
    solver = ShiftedSolver(1j * beta, G, residual_tol=residual_tol)
    m = G.mesh.m
    rng = np.random.default_rng(seed)
    block = _h_orthonormalize(
        [random_state(m, rng), random_state(m, rng)], G
    )
    nu_prev = 0.0
    nu = 0.0
    quiet = 0
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        b = len(block)
        # stack block columns for batched solves
        Xb = StateBlock(
            np.stack([q.u for q in block], axis=1),
            np.stack([q.v for q in block], axis=1),
            np.stack([q.w for q in block], axis=1),
            np.stack([q.z for q in block], axis=1),
        )
        Yb = solver.solve(Xb)
        ys = [Yb.column(j) for j in range(b)]
        C = np.empty((b, b), dtype=complex)
        for i in range(b):
            for j in range(b):
                C[i, j] = energy_inner(ys[j], ys[i], G)
        C = 0.5 * (C + C.conj().T)
        evals = np.linalg.eigvalsh(C)
        nu = float(evals[-1])
        rel_inc = abs(nu - nu_prev) / nu if nu > 0 else 0.0
        if nu > 0 and rel_inc <= tol:
            quiet += 1
            if quiet >= 2:
                converged = True
                break
        else:
            quiet = 0
        nu_prev = nu
        Zb = solver.solve_adjoint(apply_H(Yb, G))
        Wb = solve_H(Zb, G)
        block = _h_orthonormalize([Wb.column(j) for j in range(b)], G)
        if not block:  # R annihilated the block (cannot happen for invertible R)
            break
    if not converged and strict:
        raise NoConvergence(
            f"resolvent norm at beta={beta} did not converge in {max_iter} "
            f"iterations (last relative increment above {tol:.1e})"
        )
    return ResolventSample(
        beta=float(beta),
        norm_estimate=float(np.sqrt(max(nu, 0.0))),
        iterations=iterations,
        converged=converged,
        mesh_N=G.mesh.N,
    )


def scan_workers() -> int:
    """Worker count for scans: KVWAVELAB_THREADS if set, else the CPU count."""
    env = os.environ.get("KVWAVELAB_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValidationError(
                f"KVWAVELAB_THREADS must be an integer, got {env!r}"
            ) from exc
        if n < 1:
            raise ValidationError(f"KVWAVELAB_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def scan(
    beta_grid: Sequence[float],
    G: GramMatrices | Callable[[float], GramMatrices],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    workers: Optional[int] = None,
    residual_tol: float | None = None,
) -> list[ResolventSample]:
    """Per-frequency resolvent norms over a grid, in parallel.

    G may be a fixed set of Gram matrices or a callable beta -> matrices
    (used to resolve sharp quasimode peaks on finer meshes than the bulk of
    the grid).  Band factorizations run in LAPACK, which releases the GIL,
    so a thread pool parallelizes effectively; results come back in grid
    order and depend only on (grid, matrices, seed).
    """
    betas = [float(b) for b in beta_grid]
    if not betas:
        return []
    if sorted(betas) != betas:
        raise ValidationError("beta grid must be sorted ascending")
    factory = G if callable(G) else (lambda _beta: G)

    def one(beta: float) -> ResolventSample:
        return resolvent_norm(
            beta,
            factory(beta),
            tol=tol,
            max_iter=max_iter,
            seed=seed,
            strict=False,
            residual_tol=residual_tol,
        )

    n_workers = workers if workers is not None else scan_workers()
    n_workers = max(1, min(n_workers, len(betas)))
    if n_workers == 1:
        return [one(b) for b in betas]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(one, betas))


def poly_bound_probe(
    gamma: float,
    beta_grid: Sequence[float],
    G: GramMatrices | Callable[[float], GramMatrices],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    workers: Optional[int] = None,
    samples: Optional[Sequence[ResolventSample]] = None,
    residual_tol: float | None = None,
) -> PolyBoundReport:
    """sup over the grid of beta^(-gamma) * resolvent norm.

    Pass precomputed samples to reweight an existing scan without
    re-estimating the norms.
    """
    if gamma < 0:
        raise ValidationError(f"gamma must be >= 0, got {gamma}")
    if samples is None:
        samples = scan(
            beta_grid,
            G,
            tol=tol,
            max_iter=max_iter,
            seed=seed,
            workers=workers,
            residual_tol=residual_tol,
        )
    if not samples:
        raise ValidationError("poly_bound_probe needs a nonempty scan")
    weighted = [s.norm_estimate * s.beta ** (-gamma) for s in samples]
    k = int(np.argmax(weighted))
    return PolyBoundReport(
        gamma=float(gamma),
        sup_value=float(weighted[k]),
        argmax_beta=float(samples[k].beta),
        samples=tuple(samples),
    )


def spectrum_probe(
    shift: complex,
    G: GramMatrices,
    tol: float = 1e-8,
    max_iter: int = 200,
    seed: int = 0,
) -> SpectrumEstimate:
    """Nearest eigenvalue of the discrete generator to a complex shift.

    Shift-invert subspace iteration of block width 2: eigenvalues of the
    real generator come in conjugate pairs, so at real shifts the two
    nearest eigenvalues tie in modulus and defeat single-vector iteration;
    a two-dimensional H-orthonormal block with Rayleigh-Ritz extraction
    converges in both cases.  The returned value is the Ritz value nearest
    the shift; convergence is measured by the H-norm eigenresidual
    |A y - theta y|_H / |y|_H.
    """
    solver = ShiftedSolver(shift, G)
    m = G.mesh.m
    rng = np.random.default_rng(seed)
    block = _h_orthonormalize([random_state(m, rng), random_state(m, rng)], G)
    best: Optional[tuple[complex, float]] = None
    for iteration in range(1, max_iter + 1):
        # inverse iteration: apply (shift - A)^-1 to each block column
        Xb = StateBlock(
            np.stack([q.u for q in block], axis=1),
            np.stack([q.v for q in block], axis=1),
            np.stack([q.w for q in block], axis=1),
            np.stack([q.z for q in block], axis=1),
        )
        Yb = solver.solve(Xb)
        block = _h_orthonormalize([Yb.column(j) for j in range(Yb.u.shape[1])], G)
        # Rayleigh-Ritz on A over the block span
        b = len(block)
        P = np.empty((b, b), dtype=complex)
        applied = [generator_apply(q, G) for q in block]
        for i in range(b):
            for j in range(b):
                P[i, j] = energy_inner(applied[j], block[i], G)
        theta, vecs = np.linalg.eig(P)
        order = np.argsort(np.abs(theta - shift))
        theta = theta[order]
        vecs = vecs[:, order]
        # assemble the Ritz vector for the nearest Ritz value
        a = vecs[:, 0]
        y = block[0] * a[0]
        for j in range(1, b):
            y = y + block[j] * a[j]
        y_norm = float(energy_norm(y, G))
        Ay = generator_apply(y, G)
        r = StateBlock(
            Ay.u - theta[0] * y.u,
            Ay.v - theta[0] * y.v,
            Ay.w - theta[0] * y.w,
            Ay.z - theta[0] * y.z,
        )
        res = float(energy_norm(r, G)) / max(y_norm, 1e-300)
        if best is None or res < best[1]:
            best = (complex(theta[0]), res)
        if res <= tol:
            return SpectrumEstimate(
                shift=complex(shift),
                eigenvalue=complex(theta[0]),
                residual=res,
                iterations=iteration,
            )
    assert best is not None
    raise NoConvergence(
        f"spectrum probe at shift {shift} reached {max_iter} iterations; "
        f"best residual {best[1]:.3e} for eigenvalue {best[0]:.6g}"
    )
