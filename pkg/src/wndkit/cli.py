"""Command-line pipeline: validate -> operators -> dissipativity -> simulate.

Configuration is a single JSON document; all numerics are 64-bit floats.
CSV output uses 17-significant-digit decimals so regression files are
byte-stable, and random initial data comes from a counter-based generator
keyed by the recorded seed, so identical config plus seed reproduces output
byte for byte.

Exit codes: 0 success, 1 analysis failure (valid input, negative finding),
2 input error, 3 runtime blow-up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import navier_stokes as ns
from .averaging import (
    build_resonance_table,
    cyclic_residual,
    diffusion_csv_rows,
    resonance_csv_rows,
)
from .dissipativity import analyze_dissipativity, report_directions
from .solver import BlowUpError, build_operators, simulate
from .spectral import FrequencyLattice, spectrum_csv_rows
from .state import SpectralState, random_real_state, state_from_modes
from .system import (
    SpecShapeError,
    SystemSpec,
    spec_from_dict,
    spec_to_dict,
    validate_entropy_structure,
)

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_INPUT = 2
EXIT_BLOWUP = 3


class ConfigError(ValueError):
    pass


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (np.floating,)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def write_keyvalue(path: Path, mapping: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for key, value in mapping.items():
            handle.write(f"{key} = {_fmt(value)}\n")


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


class Run:
    """Resolved configuration: spec (plus gas model when preset-based) and knobs."""

    def __init__(self, config: dict, seed_override: int | None = None, threads: int = 1):
        self.config = config
        self.threads = threads
        system = config.get("system")
        self.model: ns.CnsModel | None = None
        if isinstance(system, str):
            try:
                self.model = ns.build_preset(system)
            except KeyError as exc:
                raise ConfigError(str(exc)) from exc
            self.spec = self.model.spec
        elif isinstance(system, dict):
            try:
                self.spec = spec_from_dict(system)
            except (SpecShapeError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad inline system spec: {exc}") from exc
        else:
            raise ConfigError("config needs 'system': preset name or inline spec mapping")

        self.lattice_k = int(config.get("lattice_k", 4))
        if self.lattice_k < 1:
            raise ConfigError("lattice_k must be >= 1")
        res = config.get("resonance", {})
        self.resonance_tol = float(res.get("tolerance", 1e-9))
        self.use_exact_rule = bool(res.get("exact_rule", self.model is not None))
        if self.use_exact_rule and self.model is None:
            raise ConfigError("exact_rule requires a gas-dynamics preset system")
        sim = config.get("simulation", {})
        self.dt = sim.get("dt")
        if self.dt is not None:
            self.dt = float(self.dt)
            if self.dt <= 0.0:
                raise ConfigError("dt must be positive")
        self.t_end = float(sim.get("t_end", 1.0))
        self.integrator = str(sim.get("integrator", "if_rk4"))
        self.diagnostics_every = int(sim.get("diagnostics_every", 10))
        self.sobolev_orders = [float(s) for s in sim.get("sobolev_orders", [1.0])]
        self.initial_cfg = dict(
            sim.get("initial", {"type": "random", "seed": 0, "decay": 3.0, "amplitude": 0.1})
        )
        if self.initial_cfg.get("type", "random") == "random":
            if "seed" not in self.initial_cfg and "seed" in sim:
                self.initial_cfg["seed"] = int(sim["seed"])
            if seed_override is not None:
                self.initial_cfg["seed"] = int(seed_override)
        diss = config.get("dissipativity", {})
        self.alpha_grid = diss.get("alpha_grid", 32)
        self.direction_count = int(diss.get("direction_count", 200))

    def lattice(self) -> FrequencyLattice:
        return FrequencyLattice(self.spec.dim, self.lattice_k)

    def exact_rule(self):
        if self.use_exact_rule and self.model is not None:
            return ns.make_exact_resonance_rule(self.model)
        return None

    def alphas(self) -> np.ndarray:
        if isinstance(self.alpha_grid, int):
            return np.logspace(-2, 2, self.alpha_grid)
        return np.asarray([float(a) for a in self.alpha_grid])

    def initial_state(self, lattice: FrequencyLattice) -> SpectralState:
        cfg = self.initial_cfg
        kind = cfg.get("type", "random")
        if kind == "random":
            return random_real_state(
                lattice,
                self.spec.ncomp,
                seed=int(cfg.get("seed", 0)),
                decay=float(cfg.get("decay", 3.0)),
                amplitude=float(cfg.get("amplitude", 0.1)),
            )
        if kind == "modes":
            entries = []
            for item in cfg.get("entries", []):
                coeff = np.asarray(item["coeff_re"], dtype=float) + 1j * np.asarray(
                    item.get("coeff_im", np.zeros(self.spec.ncomp)), dtype=float
                )
                entries.append((tuple(int(c) for c in item["mode"]), coeff))
            return state_from_modes(lattice, self.spec.ncomp, entries)
        if kind == "zero":
            return state_from_modes(lattice, self.spec.ncomp, [])
        raise ConfigError(f"unknown initial condition type {kind!r}")


def cmd_validate(run: Run, outdir: Path) -> int:
    report = validate_entropy_structure(run.spec)
    payload = report.as_dict()
    payload["worst_direction"] = " ".join(_fmt(x) for x in report.worst_direction)
    write_keyvalue(outdir / "entropy_report.txt", payload)
    with open(outdir / "system_spec.json", "w", encoding="utf-8") as handle:
        json.dump(spec_to_dict(run.spec), handle, indent=1)
    print(f"entropy structure: {'PASS' if report.passed else 'FAIL'} "
          f"(asymmetry {report.max_asymmetry:.3e}, diffusion floor {report.min_diffusion_eigenvalue:.3e})")
    return EXIT_OK if report.passed else EXIT_FINDING


def cmd_operators(run: Run, outdir: Path) -> int:
    report = validate_entropy_structure(run.spec)
    if not report.passed:
        print("entropy validation failed; refusing to build operators", file=sys.stderr)
        return EXIT_FINDING
    lattice = run.lattice()
    ops = build_operators(
        run.spec, lattice, resonance_tol=run.resonance_tol, exact_rule=run.exact_rule()
    )
    write_csv(outdir / "averaged_diffusion.csv", diffusion_csv_rows(ops.avg))
    write_csv(outdir / "spectrum.csv", spectrum_csv_rows(ops.spectrum))
    residuals = []
    if ops.table is not None:
        write_csv(outdir / "resonance_table.csv", resonance_csv_rows(ops.table))
        for trial in range(10):
            states = [
                random_real_state(lattice, run.spec.ncomp, seed=1000 + 3 * trial + j, decay=2.0)
                for j in range(3)
            ]
            residuals.append([trial, cyclic_residual(run.spec, ops.spectrum, ops.table, *states)])
        write_csv(outdir / "cyclic_residuals.csv", [["trial", "residual"]] + residuals)
        print(f"resonance triples: {len(ops.table)}; "
              f"max cyclic residual {max(r[1] for r in residuals):.3e}")
    else:
        print("quadratic kernel is zero; no resonance table")
    return EXIT_OK


def cmd_dissipativity(run: Run, outdir: Path) -> int:
    lattice = run.lattice()
    ops = build_operators(run.spec, lattice, with_quadratic=False)
    report = analyze_dissipativity(
        run.spec, lattice, ops.avg, alphas=run.alphas(), extra_directions=run.direction_count
    )
    write_keyvalue(outdir / "dissipativity_report.txt", report.as_dict())
    if report.beta_by_alpha:
        write_csv(outdir / "beta_by_alpha.csv", [["alpha", "beta"]] + [list(p) for p in report.beta_by_alpha])
    if report.beta_per_direction:
        header = [f"dir{i}" for i in range(run.spec.dim)] + ["beta"]
        rows = [[*xi, beta] for xi, beta in report.beta_per_direction]
        write_csv(outdir / "beta_by_direction.csv", [header] + rows)
    status = "strictly dissipative" if report.criterion_ok and report.delta > 0 else "criterion failed"
    print(f"{status}: delta = {report.delta:.6g}, empirical = {report.delta_empirical:.6g}, "
          f"kawashima = {report.kawashima_ok}")
    return EXIT_OK if report.criterion_ok and report.delta > 0 else EXIT_FINDING


def cmd_simulate(run: Run, outdir: Path) -> int:
    lattice = run.lattice()
    ops = build_operators(
        run.spec, lattice, resonance_tol=run.resonance_tol, exact_rule=run.exact_rule()
    )
    initial = run.initial_state(lattice)
    snapdir = outdir / "snapshots"
    snapdir.mkdir(exist_ok=True)
    dt = run.dt
    if dt is None:
        # keep the nonlinear stage error dominant: resolve the fastest frequency
        dt = min(1e-3, 0.1 / ops.omega_max) if ops.omega_max > 0 else 1e-3
    try:
        snapshots, series = simulate(
            ops,
            initial,
            t_end=run.t_end,
            dt=dt,
            method=run.integrator,
            diagnostics_every=run.diagnostics_every,
            sobolev_orders=run.sobolev_orders,
        )
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        write_keyvalue(outdir / "blowup.txt", {
            "mode": " ".join(str(c) for c in exc.mode),
            "time": exc.time,
            "magnitude": exc.magnitude,
        })
        return EXIT_BLOWUP
    write_csv(outdir / "diagnostics.csv", series.csv_rows())
    with open(outdir / "energy.dat", "w", encoding="utf-8") as handle:
        for t, e in zip(series.times, series.energy):
            handle.write(f"{_fmt(t)} {_fmt(e)}\n")
    for snap in snapshots:
        rows = []
        for i, mode in enumerate(lattice):
            for comp in range(run.spec.ncomp):
                val = snap.coeffs[i, comp]
                rows.append([*mode, comp, float(val.real), float(val.imag)])
        write_csv(snapdir / f"state_t{snap.time:.6f}.csv", rows)
    print(f"simulated to t = {series.times[-1]:.6g}; final energy {series.energy[-1]:.6e}; "
          f"max budget residual {np.abs(series.budget_residual).max():.3e}")
    return EXIT_OK


def cmd_wcns_report(run: Run, outdir: Path) -> int:
    if run.model is None:
        print("wcns-report requires a gas-dynamics preset system", file=sys.stderr)
        return EXIT_INPUT
    lattice = run.lattice()
    if lattice.radius < 5:
        lattice = FrequencyLattice(run.spec.dim, 5)
    ops = build_operators(run.spec, lattice, exact_rule=ns.make_exact_resonance_rule(run.model))
    report = ns.wcns_coupling_report(run.model, ops.spectrum, ops.table)
    with open(outdir / "wcns_report.json", "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=1)
    print(f"c0 = {report['sound_speed']:.12g}, nu_bar = {report['acoustic_diffusivity']:.12g}, "
          f"triples = {report['n_triples']}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "operators": cmd_operators,
    "dissipativity": cmd_dissipativity,
    "simulate": cmd_simulate,
    "wcns-report": cmd_wcns_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="wndkit", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (default: config outputs.directory)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (reductions stay ordered)")
    parser.add_argument("--seed", type=int, default=None, help="override the random initial-data seed")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("WNDKIT_THREADS", "1"))
    if threads < 1:
        print("thread count must be >= 1", file=sys.stderr)
        return EXIT_INPUT

    try:
        config = load_config(args.config)
        run = Run(config, seed_override=args.seed, threads=threads)
    except (ConfigError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = args.out or config.get("outputs", {}).get("directory", "out")
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](run, outdir)
    except ConfigError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
