"""Resolvent-norm estimation against dense energy-norm SVD oracles."""

import numpy as np
import pytest

from conftest import dense_generator, dense_H, dense_matrices
from kvwavelab.errors import NoConvergence, ValidationError
from kvwavelab.fem import assemble, make_mesh
from kvwavelab.model import ModelParams
from kvwavelab.resolvent import (
    PolyBoundReport,
    ResolventSample,
    poly_bound_probe,
    resolvent_norm,
    scan,
    scan_workers,
    spectrum_probe,
)


def dense_energy_norm_of_resolvent(beta, N, params):
    """|(i beta - A)^-1| in the H norm via dense Cholesky + SVD."""
    m = N - 1
    M, K, Ka = dense_matrices(N, params)
    A = dense_generator(M, K, Ka, params.c)
    H = dense_H(M, K, params.c)
    R = np.linalg.inv(1j * beta * np.eye(4 * m) - A)
    L = np.linalg.cholesky(H)
    T = L.T @ R @ np.linalg.inv(L.T)
    return float(np.linalg.svd(T, compute_uv=False)[0])


class TestResolventNorm:
    @pytest.mark.parametrize("beta", [0.7, 5.0, 19.3])
    def test_matches_dense_svd(self, beta):
        params = ModelParams()
        G = assemble(make_mesh(16), params)
        sample = resolvent_norm(beta, G, tol=1e-12, max_iter=2000)
        exact = dense_energy_norm_of_resolvent(beta, 16, params)
        assert sample.converged
        assert sample.norm_estimate == pytest.approx(exact, rel=1e-8)

    def test_deterministic_given_seed(self):
        G = assemble(make_mesh(32), ModelParams())
        a = resolvent_norm(4.2, G, seed=11)
        b = resolvent_norm(4.2, G, seed=11)
        assert a.norm_estimate == b.norm_estimate
        assert a.iterations == b.iterations

    def test_reflection_symmetry(self):
        # the generator is real, so norms at +-beta coincide
        G = assemble(make_mesh(24), ModelParams())
        up = resolvent_norm(7.7, G, tol=1e-10, max_iter=2000)
        down = resolvent_norm(-7.7, G, tol=1e-10, max_iter=2000)
        assert up.norm_estimate == pytest.approx(down.norm_estimate, rel=1e-7)

    def test_strict_budget_exhaustion_raises(self):
        G = assemble(make_mesh(16), ModelParams())
        with pytest.raises(NoConvergence):
            resolvent_norm(3.0, G, tol=1e-16, max_iter=3, strict=True)

    def test_nonstrict_flags_unconverged(self):
        G = assemble(make_mesh(16), ModelParams())
        sample = resolvent_norm(3.0, G, tol=1e-16, max_iter=3, strict=False)
        assert not sample.converged
        assert sample.norm_estimate > 0.0


class TestScan:
    def test_grid_order_and_mesh_record(self):
        G = assemble(make_mesh(16), ModelParams())
        betas = [1.0, 2.0, 4.0]
        samples = scan(betas, G, workers=1)
        assert [s.beta for s in samples] == betas
        assert all(s.mesh_N == 16 for s in samples)

    def test_parallel_equals_serial(self):
        G = assemble(make_mesh(32), ModelParams())
        betas = list(np.linspace(1.0, 20.0, 8))
        serial = scan(betas, G, workers=1)
        parallel = scan(betas, G, workers=4)
        for a, b in zip(serial, parallel):
            assert a.norm_estimate == b.norm_estimate
            assert a.iterations == b.iterations

    def test_rejects_unsorted_grid(self):
        G = assemble(make_mesh(8), ModelParams())
        with pytest.raises(ValidationError):
            scan([3.0, 1.0], G)

    def test_per_beta_matrix_factory(self):
        params = ModelParams()
        coarse = assemble(make_mesh(16), params)
        fine = assemble(make_mesh(32), params)
        samples = scan(
            [1.0, 2.0],
            lambda beta: fine if beta == 2.0 else coarse,
            workers=1,
        )
        assert samples[0].mesh_N == 16
        assert samples[1].mesh_N == 32

    def test_workers_env_control(self, monkeypatch):
        monkeypatch.setenv("KVWAVELAB_THREADS", "5")
        assert scan_workers() == 5
        monkeypatch.setenv("KVWAVELAB_THREADS", "abc")
        with pytest.raises(ValidationError):
            scan_workers()
        monkeypatch.setenv("KVWAVELAB_THREADS", "0")
        with pytest.raises(ValidationError):
            scan_workers()
        monkeypatch.delenv("KVWAVELAB_THREADS")
        assert scan_workers() >= 1


class TestPolyBoundProbe:
    def test_weighting_and_argmax(self):
        samples = [
            ResolventSample(beta=1.0, norm_estimate=10.0, iterations=1, converged=True),
            ResolventSample(beta=2.0, norm_estimate=30.0, iterations=1, converged=True),
            ResolventSample(beta=4.0, norm_estimate=50.0, iterations=1, converged=True),
        ]
        report = poly_bound_probe(2.0, [1.0, 2.0, 4.0], None, samples=samples)
        # weights: 10, 7.5, 3.125 -> sup at beta=1
        assert report.sup_value == pytest.approx(10.0)
        assert report.argmax_beta == 1.0
        flat = poly_bound_probe(0.0, [1.0, 2.0, 4.0], None, samples=samples)
        assert flat.sup_value == pytest.approx(50.0)
        assert flat.argmax_beta == 4.0

    def test_gamma_validation(self):
        with pytest.raises(ValidationError):
            poly_bound_probe(-1.0, [1.0], None, samples=[])

    def test_empty_scan_rejected(self):
        with pytest.raises(ValidationError):
            poly_bound_probe(1.0, [], None, samples=[])

    def test_end_to_end_with_matrices(self):
        G = assemble(make_mesh(16), ModelParams())
        report = poly_bound_probe(1.0, [1.0, 5.0, 10.0], G, workers=1)
        assert isinstance(report, PolyBoundReport)
        assert report.sup_value > 0.0
        assert report.argmax_beta in (1.0, 5.0, 10.0)
        assert len(report.samples) == 3


class TestSpectrumProbe:
    def test_matches_dense_eigenvalue(self):
        params = ModelParams()
        N = 8
        m = N - 1
        G = assemble(make_mesh(N), params)
        M, K, Ka = dense_matrices(N, params)
        A = dense_generator(M, K, Ka, params.c)
        eigs = np.linalg.eigvals(A)
        shift = 0.0 + 6.0j
        expected = eigs[np.argmin(np.abs(eigs - shift))]
        est = spectrum_probe(shift, G)
        assert est.eigenvalue == pytest.approx(expected, rel=1e-7)
        assert est.residual <= 1e-7

    def test_conjugate_symmetry(self):
        G = assemble(make_mesh(16), ModelParams())
        up = spectrum_probe(0.0 + 9.0j, G)
        down = spectrum_probe(0.0 - 9.0j, G)
        assert down.eigenvalue == pytest.approx(np.conj(up.eigenvalue), rel=1e-6)

    def test_real_shift_handles_conjugate_pair(self):
        # at a real shift the nearest pair ties in modulus; the block
        # iteration must still converge to one member of the pair
        params = ModelParams()
        N = 8
        G = assemble(make_mesh(N), params)
        M, K, Ka = dense_matrices(N, params)
        A = dense_generator(M, K, Ka, params.c)
        eigs = np.linalg.eigvals(A)
        est = spectrum_probe(-0.5, G)
        assert est.residual <= 1e-7
        assert np.min(np.abs(eigs - est.eigenvalue)) <= 1e-6 * max(
            1.0, abs(est.eigenvalue)
        )

    def test_eigenvalues_have_negative_real_part(self):
        # dissipativity pushes the discrete spectrum into the open left
        # half plane (0 is in the resolvent set)
        G = assemble(make_mesh(24), ModelParams())
        for shift in (2.0j, 6.0j, 11.0j):
            est = spectrum_probe(shift, G)
            assert est.eigenvalue.real < 0.0
