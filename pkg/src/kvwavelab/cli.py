"""Command-line front door: run experiments, emit CSV tables and figures.

Each command reads one :class:`~kvwavelab.config.RunConfig` (from a config
file, ``--set`` overrides, and defaults), runs the corresponding
experiment, writes its table(s) under the output directory, renders a
figure next to each table unless ``plot=false``, and prints a one-line
summary.  Output bytes depend only on the configuration, never on clocks
or host state, so identical invocations diff clean.

Exit codes: 0 success, 1 the audit command found a failing registered
expansion, 2 configuration or runtime error (one-line diagnostic on
stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Callable, Optional, Sequence

import numpy as np

from . import audit as audit_mod
from . import evolution, fem, quasimode, resolvent
from .config import COMMANDS, RunConfig, apply_overrides, parse_config
from .errors import EmptyWindow, KvwaveError, ValidationError
from .report import plot_series, write_csv

__all__ = ["main", "run", "build_beta_grid", "refined_gram_factory"]


# ---------------------------------------------------------------------------
# scan helpers (shared with the acceptance tests)
# ---------------------------------------------------------------------------

def build_beta_grid(
    beta_min: float,
    beta_max: float,
    beta_points: int,
    c: float = 4.0,
    n_max: int = 0,
) -> tuple:
    """Uniform frequency grid, optionally with resonant frequencies inserted.

    Returns (betas, inserted) where betas is the sorted union of the
    uniform grid and the resonant frequencies omega_n <= beta_max for
    n = 1..n_max, and inserted maps each inserted beta back to its mode
    index.  Resonance peaks are a few mesh cells wide, so sampling the
    exact omega_n is the only reliable way a coarse uniform grid sees
    them.
    """
    betas = set(float(b) for b in np.linspace(beta_min, beta_max, beta_points))
    inserted = {}
    for n in range(1, n_max + 1):
        w = quasimode.omega_n(n, c)
        if beta_min <= w <= beta_max:
            w = float(w)
            inserted[w] = n
            betas.add(w)
    return sorted(betas), inserted


def refined_gram_factory(
    params,
    base_N: int,
    inserted: dict,
    mesh_rule: Callable[[int], int] = quasimode.converged_mesh_rule,
) -> Callable[[float], fem.GramMatrices]:
    """Per-frequency Gram matrices: fine meshes at resonances, base elsewhere.

    At an inserted resonant frequency the consistent-mass dispersion error
    detunes coarse meshes off the peak, so those frequencies are assembled
    on mesh_rule(n) elements (never coarser than the base mesh); every
    other frequency uses the base mesh.  Assemblies are cached per mesh
    size.
    """
    base = fem.assemble(fem.make_mesh(base_N), params)
    cache = {}

    def factory(beta: float) -> fem.GramMatrices:
        n = inserted.get(float(beta))
        if n is None:
            return base
        size = max(base_N, mesh_rule(n))
        if size not in cache:
            cache[size] = fem.assemble(fem.make_mesh(size), params)
        return cache[size]

    return factory


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _out(config: RunConfig, name: str) -> str:
    return os.path.join(config.output, name)


def _base_metadata(config: RunConfig) -> dict:
    return {
        "command": config.command,
        "c": config.c,
        "d": config.d,
        "seed": config.seed,
    }


def _cmd_simulate(config: RunConfig) -> int:
    mesh = fem.make_mesh(config.N)
    G = fem.assemble(mesh, config.params)
    dt = config.dt if config.dt is not None else mesh.h / 4.0
    X0 = fem.smooth_state(mesh, seed=config.seed)
    trace = evolution.simulate(X0, config.T, dt, G)

    meta = _base_metadata(config)
    meta.update(
        N=config.N,
        T=config.T,
        dt=dt,
        energy_initial=float(trace.E[0]),
        energy_final=float(trace.E[-1]),
        dissipated_total=trace.dissipated_total,
        balance_defect=trace.balance_defect(),
    )
    try:
        fit = evolution.fit_decay(trace, (config.T / 10.0, config.T))
        meta["decay_slope"] = fit.slope
    except (ValidationError, EmptyWindow):
        fit = None
    rows = [
        (float(t), float(e), float(dd))
        for t, e, dd in zip(trace.t, trace.E, trace.D)
    ]
    path = write_csv(_out(config, "trace.csv"), ["t", "E", "D"], rows, meta)
    if config.plot:
        plot_series(
            _out(config, "trace.png"),
            [r[0] for r in rows[1:]],
            {
                "E(t)": [r[1] for r in rows[1:]],
                "|D(t)|": [abs(r[2]) for r in rows[1:]],
            },
            xlabel="t",
            ylabel="energy / dissipation",
            title=f"energy decay  c={config.c} d={config.d} N={config.N}",
            logy=True,
        )
    slope_txt = f", decay slope {fit.slope:+.3f}" if fit is not None else ""
    print(
        f"simulate: E(0)={trace.E[0]:.6g} -> E({config.T:g})={trace.E[-1]:.6g}, "
        f"balance defect {trace.balance_defect():.3e}{slope_txt} -> {path}"
    )
    return 0


def _cmd_scan(config: RunConfig) -> int:
    n_max = config.n_max if config.insert_quasimodes else 0
    betas, inserted = build_beta_grid(
        config.beta_min, config.beta_max, config.beta_points, config.c, n_max
    )
    residual_tol = config.residual_tol
    if residual_tol is None and inserted:
        # resonant solves amplify the forcing by orders of magnitude; the
        # achievable relative defect on the fine meshes used there sits
        # well above the strict default
        residual_tol = 1e-6
    if inserted:
        G = refined_gram_factory(config.params, config.N, inserted)
    else:
        G = fem.assemble(fem.make_mesh(config.N), config.params)
    samples = resolvent.scan(betas, G, seed=config.seed, residual_tol=residual_tol)
    probe = resolvent.poly_bound_probe(
        config.gamma, betas, G, seed=config.seed, samples=samples
    )

    meta = _base_metadata(config)
    meta.update(
        N=config.N,
        beta_min=config.beta_min,
        beta_max=config.beta_max,
        beta_points=config.beta_points,
        insert_quasimodes=config.insert_quasimodes,
        n_max=n_max,
        gamma=config.gamma,
        sup_value=probe.sup_value,
        argmax_beta=probe.argmax_beta,
    )
    rows = [
        (s.beta, s.norm_estimate, s.iterations, s.converged, s.mesh_N)
        for s in samples
    ]
    path = write_csv(
        _out(config, "scan.csv"),
        ["beta", "norm", "iterations", "converged", "mesh_N"],
        rows,
        meta,
    )
    if config.plot:
        plot_series(
            _out(config, "scan.png"),
            [s.beta for s in samples],
            {"resolvent norm": [s.norm_estimate for s in samples]},
            xlabel="beta",
            ylabel="|(i beta - A)^-1|_H",
            title=f"resolvent scan  c={config.c} d={config.d}",
            logy=True,
        )
    print(
        f"scan: sup beta^-{config.gamma:g} * norm = {probe.sup_value:.6g} "
        f"at beta={probe.argmax_beta:.6g} ({len(samples)} samples) -> {path}"
    )
    return 0


def _cmd_quasimode(config: RunConfig) -> int:
    n_list = config.n_list or (2, 4, 8, 16)
    mesh_rule = (
        quasimode.converged_mesh_rule
        if config.mesh_rule == "converged"
        else quasimode.default_mesh_rule
    )
    residual_tol = config.residual_tol if config.residual_tol is not None else 1e-6
    result = quasimode.blowup_experiment(
        n_list,
        c=config.c,
        d=config.d,
        mesh_rule=mesh_rule,
        residual_tol=residual_tol,
    )
    ratios = result.growth_ratios()

    meta = _base_metadata(config)
    meta.update(
        mesh_rule=config.mesh_rule,
        residual_tol=residual_tol,
        growth_ratios=",".join(f"{r:.6g}" for r in ratios),
    )
    header = [
        "n",
        "mesh_N",
        "omega",
        "vx_norm",
        "closed_form_vx_norm",
        "closed_form_mismatch",
        "forcing_norm",
        "forcing_norm_exact",
        "w1_magnitude",
        "w2_magnitude",
    ]
    rows = [
        (
            r.n,
            r.mesh_N,
            r.omega,
            r.vx_norm,
            r.closed_form_vx_norm,
            r.closed_form_mismatch,
            r.forcing_norm,
            r.forcing_norm_exact,
            r.w1_magnitude,
            r.w2_magnitude,
        )
        for r in result.rows
    ]
    path = write_csv(_out(config, "blowup.csv"), header, rows, meta)
    if config.plot:
        plot_series(
            _out(config, "blowup.png"),
            [r.n for r in result.rows],
            {
                "discrete |v1_x|": [r.vx_norm for r in result.rows],
                "closed form |v1_x|": [r.closed_form_vx_norm for r in result.rows],
                "forcing |F|_H": [r.forcing_norm for r in result.rows],
            },
            xlabel="mode index n",
            ylabel="norm",
            title=f"resolvent blow-up along resonances  c={config.c} d={config.d}",
            logx=True,
            logy=True,
        )
    ratio_txt = ", ".join(f"{r:.3f}" for r in ratios) if ratios else "n/a"
    print(
        f"quasimode: |v1_x| = "
        + ", ".join(f"{r.vx_norm:.4g}" for r in result.rows)
        + f" (growth ratios {ratio_txt}) -> {path}"
    )
    return 0


def _cmd_audit(config: RunConfig) -> int:
    n_values = config.n_list or audit_mod.DEFAULT_N_VALUES
    report = audit_mod.expansion_audit(n_values=n_values, c=config.c, d=config.d)
    qcs = [quasimode.constants(n, config.c, config.d) for n in report.n_values]

    meta = _base_metadata(config)
    meta.update(
        n_values=",".join(str(n) for n in report.n_values),
        registered=len(report.rows),
        passed=sum(1 for r in report.rows if r.passed),
    )
    header = [
        "n",
        "quantity",
        "exact",
        "model",
        "residual",
        "claimed_order",
        "fitted_order",
        "passed",
    ]
    rows = []
    for row in report.rows:
        for n, e, m, res in zip(
            report.n_values, row.exact_values, row.model_values, row.residuals
        ):
            rows.append(
                (
                    n,
                    row.name,
                    complex(e),
                    complex(m),
                    float(res),
                    row.claimed_order,
                    row.fitted_order,
                    row.passed,
                )
            )
    for qc in qcs:
        res = audit_mod.defining_identity_residual(qc)
        rows.append(
            (
                qc.n,
                "defining_identity",
                2j * np.pi * qc.n,
                qc.mu_plus * (qc.lam - qc.alpha_plus / qc.c),
                res,
                float("nan"),
                float("nan"),
                res <= 1e-10 * qc.n,
            )
        )
    path = write_csv(_out(config, "audit.csv"), header, rows, meta)

    trace_rows = audit_mod.trace_growth_report(
        n_values=report.n_values, c=config.c, d=config.d
    )
    trows = []
    for row in trace_rows:
        for n, e, cl in zip(
            row.n_values, row.exact_magnitudes, row.claimed_magnitudes
        ):
            trows.append((row.name, n, e, cl))
    tmeta = _base_metadata(config)
    for row in trace_rows:
        tmeta[f"{row.name}_exact_growth"] = row.exact_growth
        tmeta[f"{row.name}_claimed_growth"] = row.claimed_growth
        tmeta[f"{row.name}_ratio_last"] = row.ratio_last
    tpath = write_csv(
        _out(config, "trace_growth.csv"),
        ["name", "n", "exact_magnitude", "claimed_magnitude"],
        trows,
        tmeta,
    )

    if config.plot:
        plot_series(
            _out(config, "audit.png"),
            list(report.n_values),
            {
                row.name: [max(r, 1e-18) for r in row.residuals]
                for row in report.rows
            },
            xlabel="mode index n",
            ylabel="|exact - model|",
            title=f"expansion residuals  c={config.c} d={config.d}",
            logx=True,
            logy=True,
        )

    failed = [r.name for r in report.rows if not r.passed]
    for row in trace_rows:
        print(
            f"audit: {row.name}: exact growth n^{row.exact_growth:.2f}, "
            f"claimed growth n^{row.claimed_growth:.2f}, "
            f"exact/claimed at n={row.n_values[-1]}: {row.ratio_last:.4g} "
            f"(reported, not asserted)"
        )
    if failed:
        print(
            f"audit: {len(failed)}/{len(report.rows)} registered expansions "
            f"FAILED ({', '.join(failed)}) -> {path}"
        )
        return 1
    print(
        f"audit: {len(report.rows)}/{len(report.rows)} registered expansions "
        f"passed -> {path}, {tpath}"
    )
    return 0


def _cmd_spectrum(config: RunConfig) -> int:
    G = fem.assemble(fem.make_mesh(config.N), config.params)
    est = resolvent.spectrum_probe(config.shift, G, seed=config.seed)

    meta = _base_metadata(config)
    meta.update(N=config.N)
    rows = [
        (
            config.shift.real,
            config.shift.imag,
            est.eigenvalue.real,
            est.eigenvalue.imag,
            est.residual,
            est.iterations,
        )
    ]
    path = write_csv(
        _out(config, "spectrum.csv"),
        [
            "shift_real",
            "shift_imag",
            "eigenvalue_real",
            "eigenvalue_imag",
            "residual",
            "iterations",
        ],
        rows,
        meta,
    )
    if config.plot:
        plot_series(
            _out(config, "spectrum.png"),
            [est.eigenvalue.real],
            {"eigenvalue": [est.eigenvalue.imag]},
            xlabel="Re",
            ylabel="Im",
            title=f"nearest eigenvalue to {config.shift:g}",
        )
    print(
        f"spectrum: eigenvalue nearest {config.shift:g} is "
        f"{est.eigenvalue:.10g} (residual {est.residual:.2e}) -> {path}"
    )
    return 0


def _cmd_stationary(config: RunConfig) -> int:
    n_forcings = 10
    rows = []
    ratios_by_forcing: dict = {}
    for N in config.N_list:
        mesh = fem.make_mesh(N)
        G = fem.assemble(mesh, config.params)
        for j in range(n_forcings):
            F = fem.smooth_state(mesh, seed=config.seed + j)
            X = fem.shifted_solve(0.0, F, G)
            ratio = fem.energy_norm(X, G) / fem.energy_norm(F, G)
            rows.append((N, j, float(ratio)))
            ratios_by_forcing.setdefault(j, []).append(float(ratio))
    spreads = [
        (max(r) - min(r)) / (0.5 * (max(r) + min(r)))
        for r in ratios_by_forcing.values()
    ]
    max_spread = max(spreads)

    meta = _base_metadata(config)
    meta.update(
        N_list=",".join(str(n) for n in config.N_list),
        forcings=n_forcings,
        max_relative_spread=max_spread,
    )
    path = write_csv(
        _out(config, "stationary.csv"), ["N", "forcing_index", "ratio"], rows, meta
    )
    if config.plot:
        plot_series(
            _out(config, "stationary.png"),
            list(config.N_list),
            {
                f"forcing {j}": ratios_by_forcing[j]
                for j in sorted(ratios_by_forcing)
            },
            xlabel="mesh N",
            ylabel="|A^-1 F|_H / |F|_H",
            title=f"stationary solve boundedness  c={config.c} d={config.d}",
        )
    print(
        f"stationary: |A^-1 F|/|F| across N={list(config.N_list)} varies by "
        f"at most {100.0 * max_spread:.3g}% over {n_forcings} forcings -> {path}"
    )
    return 0


_DISPATCH = {
    "simulate": _cmd_simulate,
    "scan": _cmd_scan,
    "quasimode": _cmd_quasimode,
    "audit": _cmd_audit,
    "spectrum": _cmd_spectrum,
    "stationary": _cmd_stationary,
}


def run(config: RunConfig) -> int:
    """Execute one validated configuration; returns the exit code."""
    os.makedirs(config.output, exist_ok=True)
    return _DISPATCH[config.command](config)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kvwavelab",
        description=(
            "Numerical laboratory for a 1-D coupled wave system with "
            "locally distributed Kelvin-Voigt damping."
        ),
    )
    parser.add_argument("command", choices=COMMANDS, help="experiment to run")
    parser.add_argument(
        "--config",
        metavar="PATH",
        help="config file (key=value lines or one JSON object); "
        "the positional command overrides any command key in the file",
    )
    parser.add_argument(
        "--set",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        dest="overrides",
        help="override one config key (repeatable)",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return 2
        else:
            text = ""
        config = parse_config(text, command=args.command)
        config = apply_overrides(config, args.overrides)
        return run(config)
    except KvwaveError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
