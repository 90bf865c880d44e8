"""Acceptance criteria: one test per criterion, at the stated tolerances.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line
per criterion.  Two criteria (06, 07) pin the coarse 64n-element mesh
family; on those meshes the P1 consistent-mass dispersion error detunes
the discrete resonance faster than the resonance peak narrows, so the
discrete norms fall where the continuum norms grow.  The package
implements those experiments faithfully and the tests fail honestly; the
companion converged-mesh experiments (test_quasimode, criterion 09's
refined scan) demonstrate the genuine blow-up.
"""

import time

import numpy as np
import pytest

from conftest import dense_generator, dense_H, dense_matrices
from kvwavelab.audit import (
    DEFAULT_N_VALUES,
    defining_identity_residual,
    expansion_audit,
)
from kvwavelab.cli import build_beta_grid, refined_gram_factory
from kvwavelab.evolution import cn_step, simulate
from kvwavelab.fem import (
    ShiftedSolver,
    assemble,
    dissipation_rate,
    energy_inner,
    energy_norm,
    generator_apply,
    make_mesh,
    random_state,
    shifted_solve,
    smooth_state,
)
from kvwavelab.model import ModelParams
from kvwavelab.quasimode import blowup_experiment, constants, default_mesh_rule
from kvwavelab.resolvent import poly_bound_probe, resolvent_norm, scan


def test_criterion_01_dissipativity_identity():
    """Re<AX,X>_H + w*Ka w = 0 to 1e-12 relative, 1000 states, N in {16,64,256}, <10 s."""
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    params = ModelParams(c=4.0, d=1.0)
    worst = 0.0
    for N in (16, 64, 256):
        G = assemble(make_mesh(N), params)
        for _ in range(1000):
            X = random_state(N - 1, rng)
            lhs = float(np.real(energy_inner(generator_apply(X, G), X, G)))
            rate = dissipation_rate(X, G)
            scale = max(rate, energy_norm(X, G) ** 2)
            worst = max(worst, abs(lhs + rate) / scale)
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12, f"worst relative defect {worst:.3e}"
    assert elapsed < 10.0, f"took {elapsed:.1f} s"


def test_criterion_02_crank_nicolson_contraction():
    """1000 random CN steps contract to 1+1e-10; with d=0, isometry to 1e-10."""
    rng = np.random.default_rng(1)
    G = assemble(make_mesh(64), ModelParams(c=4.0, d=1.0))
    dt = 0.01
    solver = ShiftedSolver(2.0 / dt, G)
    for _ in range(1000):
        X = random_state(63, rng)
        Xp = cn_step(X, dt, G, solver=solver)
        assert energy_norm(Xp, G) <= energy_norm(X, G) * (1.0 + 1e-10)
    G0 = assemble(make_mesh(64), ModelParams(c=4.0, d=0.0))
    solver0 = ShiftedSolver(2.0 / dt, G0)
    for _ in range(200):
        X = random_state(63, rng)
        Xp = cn_step(X, dt, G0, solver=solver0)
        assert abs(energy_norm(Xp, G0) / energy_norm(X, G0) - 1.0) <= 1e-10


def test_criterion_03_energy_balance():
    """c=4, d=1, N=200, T=50, dt=h/4: |E(0)-E(T)-Int| <= 1e-4 E(0), <60 s."""
    start = time.perf_counter()
    mesh = make_mesh(200)
    G = assemble(mesh, ModelParams(c=4.0, d=1.0))
    X0 = smooth_state(mesh, seed=0)
    trace = simulate(X0, 50.0, mesh.h / 4.0, G)
    elapsed = time.perf_counter() - start
    defect = trace.balance_defect()
    assert defect <= 1e-4 * trace.E[0], f"balance defect {defect:.3e}"
    assert elapsed < 60.0, f"took {elapsed:.1f} s"


def test_criterion_04_stationary_boundedness():
    """|A^-1 F|/|F| varies < 5% across N in {64,128,256} for 10 smooth F."""
    params = ModelParams(c=4.0, d=1.0)
    grams = {N: assemble(make_mesh(N), params) for N in (64, 128, 256)}
    for seed in range(10):
        ratios = []
        for N, G in grams.items():
            F = smooth_state(G.mesh, seed=seed)
            X = shifted_solve(0.0, F, G)
            ratios.append(energy_norm(X, G) / energy_norm(F, G))
        spread = (max(ratios) - min(ratios)) / (0.5 * (max(ratios) + min(ratios)))
        assert spread < 0.05, f"seed {seed}: ratios {ratios}, spread {spread:.3%}"


def test_criterion_05_resolvent_norm_oracle():
    """Power iteration matches dense H-weighted SVD at N=16 to 1e-8, 10 betas, <30 s."""
    start = time.perf_counter()
    params = ModelParams(c=4.0, d=1.0)
    N = 16
    m = N - 1
    G = assemble(make_mesh(N), params)
    M, K, Ka = dense_matrices(N, params)
    A = dense_generator(M, K, Ka, params.c)
    H = dense_H(M, K, params.c)
    L = np.linalg.cholesky(H)
    Linv_T = np.linalg.inv(L.T)
    rng = np.random.default_rng(2)
    betas = rng.uniform(0.0, 50.0, size=10)
    for beta in betas:
        R = np.linalg.inv(1j * beta * np.eye(4 * m) - A)
        exact = float(np.linalg.svd(L.T @ R @ Linv_T, compute_uv=False)[0])
        est = resolvent_norm(float(beta), G, tol=1e-12, max_iter=5000)
        rel = abs(est.norm_estimate - exact) / exact
        assert rel <= 1e-8, f"beta={beta:.4f}: relative error {rel:.2e}"
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"took {elapsed:.1f} s"


def test_criterion_06_blowup_witness_on_contract_meshes():
    """64n meshes, n in {2,4,8,16}: |v1_x| strictly increasing (ratio >= 1.2),
    forcing norms within +-10% of the n=16 value, < 5 min.

    Known to fail: see the module docstring (mesh-dispersion detuning)."""
    start = time.perf_counter()
    result = blowup_experiment((2, 4, 8, 16), mesh_rule=default_mesh_rule)
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"took {elapsed:.1f} s"
    forcing = [r.forcing_norm for r in result.rows]
    reference = forcing[-1]
    for n, fn in zip((2, 4, 8, 16), forcing):
        assert abs(fn / reference - 1.0) <= 0.10, (
            f"forcing norm at n={n} is {fn:.4f}, "
            f"{abs(fn / reference - 1.0):.1%} from the n=16 value {reference:.4f}"
        )
    norms = [r.vx_norm for r in result.rows]
    ratios = result.growth_ratios()
    assert all(r >= 1.2 for r in ratios), (
        f"discrete |v1_x| norms {[f'{v:.4f}' for v in norms]} do not grow: "
        f"consecutive ratios {[f'{r:.3f}' for r in ratios]} (need >= 1.2); "
        "the 64n meshes detune the resonance (dispersion error ~ (omega h)^2 "
        "exceeds the peak width ~ n^-2 scaled)"
    )


def test_criterion_07_closed_form_vs_discrete_resolvent():
    """n=4, N=1024: relative L2(-1,0) mismatch of v1_x <= 3%, < 60 s.

    Known to fail: see the module docstring (same detuning as criterion 06;
    converged 512 n^2 meshes reach ~1% agreement)."""
    start = time.perf_counter()
    result = blowup_experiment((4,), mesh_rule=lambda n: 256 * n)
    elapsed = time.perf_counter() - start
    assert result.rows[0].mesh_N == 1024
    assert elapsed < 60.0, f"took {elapsed:.1f} s"
    mismatch = result.rows[0].closed_form_mismatch
    assert mismatch <= 0.03, (
        f"relative v1_x mismatch at n=4, N=1024 is {mismatch:.2%} (need <= 3%); "
        f"discrete norm {result.rows[0].vx_norm:.4f} vs closed form "
        f"{result.rows[0].closed_form_vx_norm:.4f}"
    )


def test_criterion_08_expansion_audit():
    """Every registered expansion passes p-hat >= claimed - 0.3; defining
    identity <= 1e-10 n; < 10 s."""
    start = time.perf_counter()
    report = expansion_audit()
    failed = [
        (r.name, r.claimed_order, r.fitted_order)
        for r in report.rows
        if not r.passed
    ]
    assert not failed, f"failing expansions: {failed}"
    for n in DEFAULT_N_VALUES:
        res = defining_identity_residual(constants(n))
        assert res <= 1e-10 * n, f"defining identity at n={n}: {res:.3e}"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f} s"


def test_criterion_09_polynomial_bound_probe():
    """gamma=12 sup over beta in [1,300] (resonances inserted) is finite and
    attained at the left grid edge; gamma=0 running max along omega_n grows."""
    params = ModelParams(c=4.0, d=1.0)
    betas, inserted = build_beta_grid(1.0, 300.0, 60, c=4.0, n_max=40)
    factory = refined_gram_factory(params, 256, inserted)
    samples = scan(betas, factory, seed=0, residual_tol=1e-6)
    probe12 = poly_bound_probe(12.0, betas, factory, samples=samples)
    assert np.isfinite(probe12.sup_value)
    assert probe12.argmax_beta == betas[0] == 1.0, (
        f"gamma=12 sup attained at beta={probe12.argmax_beta}, not the left edge"
    )
    by_beta = {s.beta: s for s in samples}
    resonant = sorted(inserted.items(), key=lambda kv: kv[1])  # by mode index
    running = 0.0
    for beta, n in resonant:
        norm = by_beta[beta].norm_estimate
        assert norm > running, (
            f"resolvent norm {norm:.4g} at omega_{n}={beta:.3f} does not "
            f"exceed the running max {running:.4g}"
        )
        running = norm


def test_criterion_10_strong_stability_witness():
    """5 seeded smooth data at N=200: E(T)/E(0) strictly decreasing across
    T in {25,50,100,200}."""
    mesh = make_mesh(200)
    G = assemble(mesh, ModelParams(c=4.0, d=1.0))
    checkpoints = (25.0, 50.0, 100.0, 200.0)
    for seed in range(5):
        X0 = smooth_state(mesh, seed=seed)
        trace = simulate(X0, 200.0, mesh.h, G)
        fractions = []
        for T in checkpoints:
            k = int(np.argmin(np.abs(trace.t - T)))
            fractions.append(trace.E[k] / trace.E[0])
        assert all(b < a for a, b in zip(fractions, fractions[1:])), (
            f"seed {seed}: energy fractions {fractions} not strictly decreasing"
        )
        assert fractions[-1] < 1.0
