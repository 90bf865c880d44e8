"""Expansion audit registry: orders, known coefficient slips, trace report."""

import math

import numpy as np
import pytest

from kvwavelab.audit import (
    DEFAULT_N_VALUES,
    REGISTRY,
    defining_identity_residual,
    expansion_audit,
    registered_names,
    trace_growth_report,
)
from kvwavelab.errors import RegistryMiss, ValidationError
from kvwavelab.quasimode import constants

EXPECTED_NAMES = {
    "omega_n",
    "omega_n_inverse",
    "eta_plus",
    "eta_minus",
    "beta_plus",
    "beta_plus_sq",
    "beta_minus",
    "beta_minus_sq",
    "alpha_plus",
    "alpha_minus",
    "mu_plus",
    "mu_minus",
    "mu_ratio",
    "A_n",
    "B_n",
    "A_n_prime",
    "B_n_prime",
    "theta",
}


class TestRegistry:
    def test_all_documented_expansions_registered(self):
        assert set(registered_names()) == EXPECTED_NAMES
        assert len(REGISTRY) == 18

    def test_every_entry_carries_a_note(self):
        for entry in REGISTRY.values():
            assert entry.note


class TestExpansionAudit:
    def test_all_pass_at_reference_parameters(self):
        report = expansion_audit()
        assert report.n_values == DEFAULT_N_VALUES
        assert len(report.rows) == 18
        assert report.all_passed
        for row in report.rows:
            assert row.fitted_order >= row.claimed_order - 0.3

    def test_selected_orders_are_sharp(self):
        # entries whose printed coefficients are exact overshoot their
        # claimed order; entries with a coefficient slip sit exactly at it
        report = expansion_audit()
        by_name = {r.name: r for r in report.rows}
        assert by_name["mu_minus"].fitted_order == pytest.approx(4.0, abs=0.1)
        assert by_name["omega_n_inverse"].fitted_order == pytest.approx(5.0, abs=0.1)
        assert by_name["beta_minus"].fitted_order == pytest.approx(1.5, abs=0.1)
        assert by_name["A_n"].fitted_order == pytest.approx(2.0, abs=0.1)
        assert by_name["theta"].fitted_order == pytest.approx(1.0, abs=0.1)

    def test_leading_factor_slip_measured_as_constant_residual(self):
        # the printed leading coefficient of B_n' is half the exact limit,
        # so the relative residual is Theta(1); the audit verifies that the
        # mismatch does not decay rather than hiding it
        report = expansion_audit(names=["B_n_prime"])
        row = report.rows[0]
        assert row.claimed_order == 0.0
        assert abs(row.fitted_order) <= 0.15
        rel = [
            res / abs(exact)
            for res, exact in zip(row.residuals, row.exact_values)
        ]
        assert all(0.4 <= r <= 0.6 for r in rel)

    def test_subset_and_unknown_names(self):
        report = expansion_audit(names=["omega_n", "theta"])
        assert [r.name for r in report.rows] == ["omega_n", "theta"]
        with pytest.raises(RegistryMiss):
            expansion_audit(names=["omega_misprint"])

    def test_mode_index_validation(self):
        with pytest.raises(ValidationError):
            expansion_audit(n_values=(10,))
        with pytest.raises(ValidationError):
            expansion_audit(n_values=(20, 10))

    def test_margin_tightening_fails_slipped_entries(self):
        # with zero margin the entries sitting exactly at their claimed
        # order (finite-n bias pulls the fit slightly below) would fail;
        # the fixed 0.3 margin absorbs that bias and nothing else
        strict = expansion_audit(margin=-0.5)
        by_name = {r.name: r for r in strict.rows}
        assert not by_name["omega_n"].passed  # fitted 3.0 < 3.0 + 0.5
        loose = expansion_audit(margin=0.3)
        assert all(r.passed for r in loose.rows)

    def test_second_parameter_point(self):
        # the registry is not tuned to one parameter pair: the d-sensitive
        # entries still pass at d=2 (where the beta_minus_sq coefficient
        # typo almost cancels)
        report = expansion_audit(c=4.0, d=2.0)
        failed = [r.name for r in report.rows if not r.passed]
        assert failed == []


class TestDefiningIdentity:
    @pytest.mark.parametrize("n", [10, 20, 40, 80])
    def test_machine_level(self, n):
        qc = constants(n)
        assert defining_identity_residual(qc) <= 1e-10 * n


class TestTraceGrowthReport:
    def test_measured_disagreement_reported(self):
        rows = trace_growth_report()
        by_name = {r.name: r for r in rows}
        first = by_name["omega1_trace"]
        # exact first trace grows ~n^2 while the printed claim decays
        assert first.exact_growth == pytest.approx(2.0, abs=0.1)
        assert first.claimed_growth < 0.0
        assert first.ratio_last > 100.0
        second = by_name["omega2_trace_constant"]
        # both bounded, but the claimed constant is ~20% high
        assert abs(second.exact_growth) < 0.15
        assert second.ratio_last == pytest.approx(0.836, abs=0.02)

    def test_report_carries_magnitudes(self):
        rows = trace_growth_report(n_values=(10, 20))
        for row in rows:
            assert len(row.exact_magnitudes) == 2
            assert all(v > 0 for v in row.exact_magnitudes)
            assert all(math.isfinite(v) for v in row.claimed_magnitudes)
