"""Config parsing, CSV and report emission, and the exprabelo command line.

The config format is flat ``key = value`` text with ``#`` comments. Floats
are printed everywhere with 17 significant digits so every file round-trips
bit for bit; diagnostics go to stderr and data goes to files only.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .grid_field import _PRESET_PARAMS, InitialDataSpec, build_grid
from .scheme import FLUXES, SchemeConfig
from .solver import DiagnosticsSeries, RunConfig, RunResult, Snapshot, run_simulation
from .verifiers import (
    BalanceReport,
    ConvergenceReport,
    EPSILON_LADDER,
    EntropyReport,
    MassBalanceReport,
    MmsReport,
    RiemannCheck,
    StabilityReport,
    SupMonitorReport,
    burgers_sanity,
    dense_snapshot_times,
    epsilon_convergence,
    expansion_shock_field,
    grid_convergence,
    kruzhkov_on_field,
    kruzhkov_residual,
    l1_stability_check,
    lp_balance_ladder,
    lp_balance_residual,
    mass_balance_identity,
    mass_balance_ladder,
    run_ladder,
)

CSV_HEADER = "t,x,v,u,P"
SWEEP_WORKERS = 4


def _fmt(x: float) -> str:
    return "%.17g" % (float(x),)


def _fmt_list(values) -> str:
    return ",".join(_fmt(v) for v in values)


def _fmt_bool(flag: bool) -> str:
    return "true" if flag else "false"


# ---------------------------------------------------------------------------
# config documents
# ---------------------------------------------------------------------------

_SCALAR_KEYS = {
    "grid.x_min": float,
    "grid.x_max": float,
    "grid.n_cells": int,
    "init.preset": str,
    "scheme.flux": str,
    "scheme.epsilon": float,
    "scheme.cfl": float,
    "scheme.v_floor": float,
    "run.T": float,
    "run.snapshots": "float_list",
    "diag.alphas": "float_list",
    "seed": int,
}
_REQUIRED_KEYS = ("grid.x_min", "grid.x_max", "grid.n_cells", "init.preset", "run.T")


def _parse_scalar(kind, key: str, raw: str, line_no: int):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            value = float(raw)
            if value != value:
                raise ValueError("nan")
            return value
        if kind == "float_list":
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"malformed value {raw!r} for {key}", line_no) from None
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse a flat key = value document into a validated run configuration.

    Unknown keys, duplicates, and malformed numbers are rejected with the
    offending line number; invariant violations (grid alignment, CFL range,
    preset parameters) surface from the constructors they belong to.
    """
    pairs: dict[str, tuple[str, int]] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", line_no)
        if key in pairs:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        pairs[key] = (value, line_no)

    for key in _REQUIRED_KEYS:
        if key not in pairs:
            raise ConfigError(f"missing required key {key!r}")

    preset_raw, preset_line = pairs["init.preset"]
    if preset_raw not in _PRESET_PARAMS:
        raise ConfigError(
            f"unknown preset {preset_raw!r}; expected one of {sorted(_PRESET_PARAMS)}",
            preset_line,
        )
    init_keys = {f"init.{name}" for name in _PRESET_PARAMS[preset_raw]}

    for key, (_, line_no) in pairs.items():
        if key not in _SCALAR_KEYS and key not in init_keys:
            raise ConfigError(f"unknown key {key!r}", line_no)

    def get(key: str, default):
        if key not in pairs:
            return default
        raw, line_no = pairs[key]
        return _parse_scalar(_SCALAR_KEYS.get(key, float), key, raw, line_no)

    flux = get("scheme.flux", "godunov")
    if flux not in FLUXES:
        raise ConfigError(
            f"unknown flux {flux!r}; expected one of {list(FLUXES)}",
            pairs["scheme.flux"][1],
        )
    init_params = {
        name: _parse_scalar(float, f"init.{name}", *pairs[f"init.{name}"])
        for name in _PRESET_PARAMS[preset_raw]
        if f"init.{name}" in pairs
    }
    grid = build_grid(
        get("grid.x_min", None), get("grid.x_max", None), get("grid.n_cells", None)
    )
    scheme = SchemeConfig(
        flux=flux,
        epsilon=get("scheme.epsilon", 0.0),
        cfl=get("scheme.cfl", 0.4),
        v_floor=get("scheme.v_floor", 1e-12),
    )
    return RunConfig(
        grid=grid,
        init=InitialDataSpec(preset_raw, init_params),
        scheme=scheme,
        final_time=get("run.T", None),
        snapshot_times=get("run.snapshots", ()),
        diagnostic_alphas=get("diag.alphas", (0.0, 1.0, 2.0)),
        seed=get("seed", 0),
    )


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def write_snapshot_csv(snapshot: Snapshot, path) -> None:
    """One row per cell: t,x,v,u,P at 17 significant digits, LF endings."""
    t = _fmt(snapshot.time)
    rows = [CSV_HEADER]
    for x, v, u, p in zip(
        snapshot.x,
        snapshot.field_v.values,
        snapshot.field_u.values,
        snapshot.p.cell_values,
    ):
        rows.append(f"{t},{_fmt(x)},{_fmt(v)},{_fmt(u)},{_fmt(p)}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def read_snapshot_csv(path) -> tuple:
    """Read back a snapshot CSV as (t, x, v, u, P) float arrays, bitwise."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing snapshot header {CSV_HEADER!r}")
    data = np.array(
        [[float(tok) for tok in line.split(",")] for line in lines[1:]],
        dtype=np.float64,
    )
    if data.ndim != 2 or data.shape[1] != 5:
        raise ValueError(f"{path}: expected 5 columns")
    return tuple(np.ascontiguousarray(data[:, j]) for j in range(5))


def write_diagnostics_csv(series: DiagnosticsSeries, path) -> None:
    """Per-step diagnostics table, one fixed column block per alpha."""
    header = [
        "time",
        "dt",
        "sup_u",
        "sup_u_x",
        "mass",
        "boundary_flux",
        "p_left",
        "p_right",
        "clip_count",
    ]
    for a in series.alphas:
        tag = "%g" % a
        header += [f"lp_a{tag}", f"dissipation_a{tag}", f"source_a{tag}"]
    rows = [",".join(header)]
    for i in range(series.times.size):
        cells = [
            _fmt(series.times[i]),
            _fmt(series.dts[i]),
            _fmt(series.sup_u[i]),
            _fmt(series.sup_u_x[i]),
            _fmt(series.mass[i]),
            _fmt(series.boundary_flux[i]),
            _fmt(series.p_left[i]),
            _fmt(series.p_right[i]),
            str(int(series.clip_counts[i])),
        ]
        for a in series.alphas:
            cells += [
                _fmt(series.lp_norms[a][i]),
                _fmt(series.dissipation[a][i]),
                _fmt(series.source_integral[a][i]),
            ]
        rows.append(",".join(cells))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# report emission: comment block + deterministic key=value section
# ---------------------------------------------------------------------------

def _balance_items(r: BalanceReport) -> tuple[str, list]:
    items = [
        ("balance.alpha", _fmt(r.alpha)),
        ("balance.initial_norm", _fmt(r.initial_norm)),
        ("balance.terminal_residual", _fmt(r.terminal_residual)),
        ("balance.max_residual", _fmt(r.max_residual)),
        ("balance.relative_terminal", _fmt(r.relative_terminal)),
    ]
    if r.order is not None:
        items.append(("balance.order", _fmt(r.order)))
        items.append(("balance.level_cells", ",".join(str(n) for n in r.level_cells)))
        items.append(("balance.level_terminals", _fmt_list(r.level_terminals)))
    items.append(("balance.pass", _fmt_bool(r.passed)))
    return f"power balance, alpha = {r.alpha:g}", items


def _mass_items(r: MassBalanceReport) -> tuple[str, list]:
    items = [
        ("mass_balance.initial_mass", _fmt(r.initial_mass)),
        ("mass_balance.terminal_residual", _fmt(r.terminal_residual)),
        ("mass_balance.max_residual", _fmt(r.max_residual)),
        ("mass_balance.relative_max", _fmt(r.relative_max)),
    ]
    if r.order is not None:
        items.append(("mass_balance.order", _fmt(r.order)))
        items.append(("mass_balance.level_cells", ",".join(str(n) for n in r.level_cells)))
        items.append(("mass_balance.level_maxima", _fmt_list(r.level_maxima)))
    items.append(("mass_balance.pass", _fmt_bool(r.passed)))
    return "mass balance with integration-by-parts closure", items


def _sup_items(r: SupMonitorReport) -> tuple[str, list]:
    items = [
        ("sup_monitor.sup_u0", _fmt(r.sup_u0)),
        ("sup_monitor.max_sup_u", _fmt(r.max_sup_u)),
        ("sup_monitor.worst_excess", _fmt(r.worst_excess)),
        ("sup_monitor.tol", _fmt(r.tol)),
        ("sup_monitor.violated", _fmt_bool(r.violated)),
    ]
    if r.violated:
        items.append(("sup_monitor.first_violation_time", _fmt(r.first_violation_time)))
        items.append(("sup_monitor.violation_location", _fmt(r.violation_location)))
    return "running maximum of u against its initial value", items


def _entropy_items(r: EntropyReport) -> tuple[str, list]:
    items = [
        ("entropy.family", r.family),
        ("entropy.n_phi", str(r.n_phi)),
        ("entropy.dx", _fmt(r.dx)),
        ("entropy.tolerance", _fmt(r.tolerance)),
        ("entropy.min_value", _fmt(r.min_value)),
        ("entropy.margin_ratio", _fmt(r.margin_ratio)),
        ("entropy.levels", _fmt_list(r.levels)),
        ("entropy.min_by_level", _fmt_list(r.min_by_level)),
        ("entropy.pass", _fmt_bool(r.passed)),
    ]
    return "Kruzhkov weak-form certificate", items


def _stability_items(r: StabilityReport) -> tuple[str, list]:
    items = [
        ("stability.R", _fmt(r.R)),
        ("stability.T", _fmt(r.T)),
        ("stability.C0", _fmt(r.c0)),
        ("stability.CT", _fmt(r.c_of_t)),
        ("stability.sup_u0", _fmt(r.sup_u0)),
        ("stability.sup_w0", _fmt(r.sup_w0)),
        ("stability.max_measured", _fmt(r.max_measured)),
        ("stability.min_margin", _fmt(r.min_margin)),
        ("stability.wide_window_clipped", _fmt_bool(r.wide_window_clipped)),
        ("stability.times", _fmt_list(r.sample_times)),
        ("stability.measured", _fmt_list(r.measured)),
        ("stability.bound", _fmt_list(r.bound)),
        ("stability.bound_wide", _fmt_list(r.bound_wide)),
        ("stability.margins", _fmt_list(r.margins)),
        ("stability.pass", _fmt_bool(r.passed)),
    ]
    return "L1 stability of u against the Gronwall envelope", items


def _convergence_items(r: ConvergenceReport) -> tuple[str, list]:
    items = [
        ("convergence.kind", r.kind),
        ("convergence.params", _fmt_list(r.params)),
    ]
    for i, d in enumerate(r.distances, start=1):
        items.append((f"convergence.distance_{i}", _fmt(d)))
    if r.cauchy is not None:
        for i, d in enumerate(r.cauchy, start=1):
            items.append((f"convergence.cauchy_{i}", _fmt(d)))
    if r.order is not None:
        items.append(("convergence.order", _fmt(r.order)))
    items.append(("convergence.monotone", _fmt_bool(r.monotone)))
    items.append(("convergence.pass", _fmt_bool(r.monotone)))
    return f"{r.kind} ladder in L1 at final time", items


def _riemann_items(r: RiemannCheck) -> tuple[str, list]:
    items = [
        ("burgers.n_cells", str(r.n_cells)),
        ("burgers.dx", _fmt(r.dx)),
        ("burgers.shock_position_error", _fmt(r.shock_position_error)),
        ("burgers.shock_tol", _fmt(r.shock_tol)),
        ("burgers.rarefaction_l1_error", _fmt(r.rarefaction_l1_error)),
        ("burgers.rarefaction_tol", _fmt(r.rarefaction_tol)),
        ("burgers.pass", _fmt_bool(r.passed)),
    ]
    return "source-free Riemann sanity against exact solutions", items


def _mms_items(r: MmsReport) -> tuple[str, list]:
    items = [
        ("mms.cells", ",".join(str(n) for n in r.n_ladder)),
        ("mms.errors", _fmt_list(r.errors)),
        ("mms.pair_orders", _fmt_list(r.pair_orders)),
        ("mms.order", _fmt(r.order)),
        ("mms.pass", _fmt_bool(r.passed)),
    ]
    return "manufactured-solution L1 order", items


_REPORT_DISPATCH = (
    (BalanceReport, _balance_items),
    (MassBalanceReport, _mass_items),
    (SupMonitorReport, _sup_items),
    (EntropyReport, _entropy_items),
    (StabilityReport, _stability_items),
    (ConvergenceReport, _convergence_items),
    (RiemannCheck, _riemann_items),
    (MmsReport, _mms_items),
)


def report_text(report) -> str:
    """Render a verifier report as a comment header plus key=value lines."""
    for cls, renderer in _REPORT_DISPATCH:
        if isinstance(report, cls):
            title, items = renderer(report)
            lines = [f"# {title}"]
            lines += [f"{key}={value}" for key, value in items]
            return "\n".join(lines) + "\n"
    raise TypeError(f"no report format for {type(report).__name__}")


def write_report(report, path) -> None:
    Path(path).write_text(report_text(report), encoding="utf-8", newline="\n")


def read_report(path) -> dict:
    """Parse a report file back into a {key: string} mapping."""
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _status(message: str) -> None:
    print(message, file=sys.stderr)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_report_items(run: RunResult) -> str:
    d = run.diagnostics
    lines = [
        "# run summary",
        f"run.T={_fmt(d.times[-1])}",
        f"run.n_cells={run.grid.n_cells}",
        f"run.dx={_fmt(run.grid.dx)}",
        f"run.steps={d.times.size - 1}",
        f"run.snapshots={len(run.snapshots)}",
        f"run.clip_total={int(np.sum(d.clip_counts))}",
        f"run.mass_initial={_fmt(d.mass[0])}",
        f"run.mass_final={_fmt(d.mass[-1])}",
        f"run.sup_u_initial={_fmt(d.sup_u[0])}",
        f"run.sup_u_final={_fmt(d.sup_u[-1])}",
        f"run.boundary_flux_max={_fmt(np.max(d.boundary_flux))}",
    ]
    return "\n".join(lines) + "\n"


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    run = run_simulation(cfg)
    for i, snap in enumerate(run.snapshots):
        write_snapshot_csv(snap, out / f"snapshot_{i:04d}.csv")
    write_diagnostics_csv(run.diagnostics, out / "diagnostics.csv")
    (out / "run.report").write_text(_run_report_items(run), encoding="utf-8", newline="\n")
    _status(
        f"simulate: {len(run.snapshots)} snapshot file(s), diagnostics.csv and "
        f"run.report written to {out}"
    )
    return 0


def _parse_int_ladder(raw: str) -> tuple:
    return tuple(int(tok) for tok in raw.split(",") if tok.strip())


def _parse_float_ladder(raw: str) -> tuple:
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


def _cmd_verify_balance(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    ok = True
    if args.ladder:
        ns = _parse_int_ladder(args.ladder)
        runs = run_ladder(cfg, ns, max_workers=SWEEP_WORKERS)
        reports = [lp_balance_ladder(runs, a) for a in cfg.diagnostic_alphas]
        mass_rep = mass_balance_ladder(runs)
    else:
        run = run_simulation(cfg)
        reports = [lp_balance_residual(run, a) for a in cfg.diagnostic_alphas]
        mass_rep = mass_balance_identity(run)
    for rep in reports:
        write_report(rep, out / f"balance_a{rep.alpha:g}.report")
        ok = ok and rep.passed
        _status(
            f"verify balance: alpha={rep.alpha:g} relative terminal residual "
            f"{rep.relative_terminal:.3e} ({'pass' if rep.passed else 'FAIL'})"
        )
    write_report(mass_rep, out / "mass_balance.report")
    ok = ok and mass_rep.passed
    _status(
        f"verify balance: mass identity relative residual {mass_rep.relative_max:.3e} "
        f"({'pass' if mass_rep.passed else 'FAIL'})"
    )
    return 0 if ok else 1


def _cmd_verify_entropy(args) -> int:
    out = _out_dir(args)
    if args.fixture == "expansion-shock":
        grid, times, u_matrix = expansion_shock_field()
        rep = kruzhkov_on_field(grid, times, u_matrix)
        label = "expansion-shock fixture"
    else:
        if args.config is None:
            raise ConfigError("verify entropy needs a config file or --fixture")
        cfg = load_config(args.config)
        dense = dense_snapshot_times(cfg.grid, cfg.final_time)
        run = run_simulation(replace(cfg, snapshot_times=dense))
        rep = kruzhkov_residual(run)
        label = args.config
    write_report(rep, out / "entropy.report")
    _status(
        f"verify entropy: {label} min weak value {rep.min_value:.3e} vs "
        f"tolerance -{rep.tolerance:.3e} ({'pass' if rep.passed else 'FAIL'})"
    )
    return 0 if rep.passed else 1


def _cmd_verify_stability(args) -> int:
    if args.cfg2 is None:
        raise ConfigError("verify stability needs --cfg2 with the comparison config")
    cfg_u = load_config(args.config)
    cfg_w = load_config(args.cfg2)
    out = _out_dir(args)
    times = tuple(sorted(set(cfg_u.snapshot_times) | {0.0}))
    sample = tuple(t for t in times if t > 0.0)
    if not sample:
        raise ConfigError("stability needs at least one positive snapshot time")
    run_u = run_simulation(replace(cfg_u, snapshot_times=times))
    run_w = run_simulation(replace(cfg_w, snapshot_times=times))
    rep = l1_stability_check(run_u, run_w, R=args.R, T=cfg_u.final_time, sample_times=sample)
    write_report(rep, out / "stability.report")
    _status(
        f"verify stability: max measured {rep.max_measured:.3e}, min margin "
        f"{rep.min_margin:.3e} ({'pass' if rep.passed else 'FAIL'})"
    )
    return 0 if rep.passed else 1


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args)
    if args.axis == "epsilon":
        ladder = _parse_float_ladder(args.ladder) if args.ladder else EPSILON_LADDER
        rep = epsilon_convergence(cfg, ladder, max_workers=SWEEP_WORKERS)
        rows = ["epsilon,l1_distance_to_limit"]
        rows += [f"{_fmt(e)},{_fmt(d)}" for e, d in zip(rep.params, rep.distances)]
    else:
        if args.ladder:
            ns = _parse_int_ladder(args.ladder)
        else:
            n = cfg.grid.n_cells
            ns = (n, 2 * n, 4 * n)
        rep = grid_convergence(cfg, ns, max_workers=SWEEP_WORKERS)
        rows = ["n_cells_coarse,l1_distance_to_refined"]
        rows += [f"{n},{_fmt(d)}" for n, d in zip(rep.params, rep.distances)]
    write_report(rep, out / f"sweep_{args.axis}.report")
    (out / "ladder.csv").write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
    _status(
        f"sweep {args.axis}: distances {[float('%.3e' % d) for d in rep.distances]} "
        f"monotone={rep.monotone}"
    )
    return 0 if rep.monotone else 1


def _cmd_burgers_sanity(args) -> int:
    out = _out_dir(args)
    rep = burgers_sanity(args.cells)
    write_report(rep, out / "burgers.report")
    _status(
        f"burgers-sanity: shock error {rep.shock_position_error:.3e} (tol "
        f"{rep.shock_tol:.3e}), rarefaction error {rep.rarefaction_l1_error:.3e} "
        f"(tol {rep.rarefaction_tol:.3e}) ({'pass' if rep.passed else 'FAIL'})"
    )
    return 0 if rep.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exprabelo",
        description="Finite-volume laboratory for the exp-Rabelo equation in v = e^u.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one configuration and dump CSV output")
    p_sim.add_argument("config", help="path to a key = value config file")
    p_sim.add_argument("--out", required=True, help="output directory")

    p_ver = sub.add_parser("verify", help="run one verifier and write its report")
    p_ver.add_argument("check", choices=("balance", "entropy", "stability"))
    p_ver.add_argument("config", nargs="?", help="path to a config file")
    p_ver.add_argument("--out", required=True)
    p_ver.add_argument("--cfg2", help="comparison config (stability only)")
    p_ver.add_argument("--R", type=float, default=2.0, help="stability window radius")
    p_ver.add_argument("--ladder", help="comma list of cell counts (balance only)")
    p_ver.add_argument(
        "--fixture",
        choices=("expansion-shock",),
        help="built-in analytic field instead of a run (entropy only)",
    )

    p_sweep = sub.add_parser("sweep", help="run a refinement ladder")
    p_sweep.add_argument("axis", choices=("epsilon", "grid"))
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--ladder", help="comma list overriding the default ladder")

    p_bs = sub.add_parser("burgers-sanity", help="check the source-free Riemann cases")
    p_bs.add_argument("--out", required=True)
    p_bs.add_argument("--cells", type=int, default=1024)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Parse argv and run one subcommand; returns the process exit status.

    0 means every requested check passed, 1 means a verification failed, and
    2 means the invocation or configuration was unusable.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "verify":
            if args.check == "balance":
                if args.config is None:
                    raise ConfigError("verify balance needs a config file")
                return _cmd_verify_balance(args)
            if args.check == "entropy":
                return _cmd_verify_entropy(args)
            return _cmd_verify_stability(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_burgers_sanity(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> None:
    raise SystemExit(dispatch(argv))
