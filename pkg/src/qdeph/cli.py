"""Config-driven command line runner.

Subcommands:

    trace <config>      solve the full kinetic equation, write trajectory
                        (and breakdown) CSVs
    figure fig1|fig2    canned comparison presets over Omega t in [0, 10]
    sweep <config> --axis k --values v1,v2,...
                        one comparison row per axis value
    compare <config>    comparison report for the config's parameters

Configs are line-oriented ``key = value`` text with ``#`` comments. All
frequencies are in units of the cutoff (omega_c = 1) and times in units of
its inverse; the qubit splitting enters as omega0_over_cutoff and the
temperature as beta_omega0. Exit codes: 0 success, 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .model import (
    QubitBathParams,
    a_init,
    breakdown_grid,
)
from .solver import (
    SolverConfig,
    SolverError,
    solve_full_equation,
)
from .spectral import QuadratureConfig, QuadratureError, SpectralDensity

TIE_EPSILON = 1e-12
_FLOAT_FMT = "%.17g"
_trapz = getattr(np, "trapezoid", None) or np.trapz


def _fmt(v) -> str:
    # adding 0.0 folds IEEE negative zero into "0"
    return _FLOAT_FMT % (float(v) + 0.0)

_REQUIRED_KEYS = ("omega0_over_cutoff", "beta_omega0", "sigma3_mean",
                  "lambda", "s", "t_max_cutoff_units", "n_steps")
_OPTIONAL_KEYS = ("abs_tol", "rel_tol", "initial_coherence_re",
                  "initial_coherence_im")
_OUTPUT_KINDS = ("trajectory", "breakdown", "comparison")
_SWEEP_AXES = ("lambda", "beta", "sigma3_mean", "s", "t_max")

_FIGURE_PRESETS = {
    "fig1": {"beta_omega0": 0.1, "sigma3_mean": 0.2},
    "fig2": {"beta_omega0": 5.0, "sigma3_mean": 0.99},
}
_FIGURE_COUPLING = 1.0 / 3.0
_FIGURE_POINTS = 200
_FIGURE_T_MAX = 10.0


class ConfigError(ValueError):
    """Scenario text or command arguments are invalid."""


@dataclass(frozen=True)
class Scenario:
    """A fully-validated run: physics, solver and quadrature settings."""

    params: QubitBathParams
    solver: SolverConfig
    quadrature: QuadratureConfig
    outputs: tuple = ("trajectory", "breakdown")
    label: str = "scenario"
    ic_explicit: bool = False

    def __post_init__(self):
        if not self.label:
            raise ConfigError("label must be non-empty")
        for kind in self.outputs:
            if kind not in _OUTPUT_KINDS:
                raise ConfigError(f"unknown output kind {kind!r}")


@dataclass(frozen=True)
class ComparisonReport:
    """Three correlational-decoherence curves and their distances.

    l2_* are discrete L2 distances sqrt(trapz((curve - exact)^2, t)) of the
    plain (zn) and renormalized curves from the exact one; winner is the
    curve with the smaller distance, "tie" within TIE_EPSILON.
    """

    times: np.ndarray
    gamma_cor: np.ndarray
    gamma_cor_renorm: np.ndarray
    gamma_cor_exact: np.ndarray
    l2_zn: float
    l2_renorm: float
    winner: str
    a_init_value: float


# ---------------------------------------------------------------------------
# config parsing

def parse_config(text: str, label: str = "scenario",
                 outputs: tuple = ("trajectory", "breakdown")) -> Scenario:
    """Parse key = value scenario text into a validated Scenario.

    Raises ConfigError naming the offending key and line for unknown keys,
    bad numbers, duplicates, out-of-range values, and missing required keys.
    """
    raw: dict[str, float] = {}
    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_KEYS)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', "
                              f"got {stripped!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            raw[key] = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: key {key!r}: "
                              f"not a number: {value!r}") from None

    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required key: {key}")

    n_steps_f = raw["n_steps"]
    if n_steps_f != int(n_steps_f):
        raise ConfigError(f"key 'n_steps': must be an integer, got {n_steps_f}")

    ic = None
    ic_explicit = ("initial_coherence_re" in raw
                   or "initial_coherence_im" in raw)
    if ic_explicit:
        ic = complex(raw.get("initial_coherence_re", 0.0),
                     raw.get("initial_coherence_im", 0.0))

    omega0 = raw["omega0_over_cutoff"]
    try:
        spectral = SpectralDensity(coupling=raw["lambda"], omega_c=1.0,
                                   s=raw["s"])
        if not omega0 > 0.0:
            raise ValueError(
                f"omega0_over_cutoff must be > 0, got {omega0}")
        params = QubitBathParams(omega0=omega0,
                                 beta=raw["beta_omega0"] / omega0,
                                 sigma3_mean=raw["sigma3_mean"],
                                 spectral=spectral,
                                 initial_coherence=ic)
        solver = SolverConfig(t_max=raw["t_max_cutoff_units"],
                              n_steps=int(n_steps_f))
        quadrature = QuadratureConfig(abs_tol=raw.get("abs_tol", 1e-10),
                                      rel_tol=raw.get("rel_tol", 1e-10))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    return Scenario(params=params, solver=solver, quadrature=quadrature,
                    outputs=tuple(outputs), label=label,
                    ic_explicit=ic_explicit)


def render_scenario(s: Scenario) -> str:
    """Inverse of parse_config (used for round-trip checks)."""
    p = s.params
    lines = [
        "omega0_over_cutoff = " + _FLOAT_FMT % p.omega0,
        "beta_omega0 = " + _FLOAT_FMT % (p.beta * p.omega0),
        "sigma3_mean = " + _FLOAT_FMT % p.sigma3_mean,
        "lambda = " + _FLOAT_FMT % p.spectral.coupling,
        "s = " + _FLOAT_FMT % p.spectral.s,
        "t_max_cutoff_units = " + _FLOAT_FMT % s.solver.t_max,
        "n_steps = %d" % s.solver.n_steps,
        "abs_tol = " + _FLOAT_FMT % s.quadrature.abs_tol,
        "rel_tol = " + _FLOAT_FMT % s.quadrature.rel_tol,
    ]
    if s.ic_explicit:
        lines.append("initial_coherence_re = "
                     + _FLOAT_FMT % p.initial_coherence.real)
        lines.append("initial_coherence_im = "
                     + _FLOAT_FMT % p.initial_coherence.imag)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reports

def build_comparison(params: QubitBathParams, t_max: float,
                     cfg: QuadratureConfig,
                     n_points: int = _FIGURE_POINTS) -> ComparisonReport:
    """Comparison of zn / renormalized correlational curves vs the exact one."""
    ts = np.linspace(0.0, t_max, n_points)
    bds = breakdown_grid(params, ts, cfg)
    gc = np.array([b.gamma_cor for b in bds])
    gcr = np.array([b.gamma_cor_renorm for b in bds])
    gce = np.array([b.gamma_cor_exact for b in bds])
    l2_zn = float(math.sqrt(_trapz((gc - gce) ** 2, ts)))
    l2_renorm = float(math.sqrt(_trapz((gcr - gce) ** 2, ts)))
    if l2_renorm < l2_zn - TIE_EPSILON:
        winner = "renormalized"
    elif l2_zn < l2_renorm - TIE_EPSILON:
        winner = "zn"
    else:
        winner = "tie"
    return ComparisonReport(times=ts, gamma_cor=gc, gamma_cor_renorm=gcr,
                            gamma_cor_exact=gce, l2_zn=l2_zn,
                            l2_renorm=l2_renorm, winner=winner,
                            a_init_value=a_init(params))


# ---------------------------------------------------------------------------
# output writers (all content is assembled before any file is opened)

def _write_text(path: Path, content: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(content)
    return path


def _trajectory_csv(traj) -> str:
    lines = ["t,re_coherence,im_coherence,abs_coherence,watchdog_flag"]
    for t, y, flag in zip(traj.times, traj.values, traj.watchdog):
        lines.append(",".join([
            _fmt(t), _fmt(y.real), _fmt(y.imag),
            _fmt(abs(y)), "%d" % flag]))
    return "\n".join(lines) + "\n"


def _breakdown_csv(bds) -> str:
    lines = ["t,chi,chi_renorm,gamma_vac,gamma_th,gamma_cor,"
             "gamma_cor_renorm,gamma_cor_exact,f_of_t"]
    for b in bds:
        lines.append(",".join(_fmt(v) for v in (
            b.t, b.chi, b.chi_renorm, b.gamma_vac, b.gamma_th, b.gamma_cor,
            b.gamma_cor_renorm, b.gamma_cor_exact, b.f_of_t)))
    return "\n".join(lines) + "\n"


def _comparison_csv(report: ComparisonReport) -> str:
    lines = ["t,gamma_cor,gamma_cor_renorm,gamma_cor_exact"]
    for row in zip(report.times, report.gamma_cor, report.gamma_cor_renorm,
                   report.gamma_cor_exact):
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _report_json(report: ComparisonReport, label: str) -> str:
    return json.dumps({
        "label": label,
        "a_init": report.a_init_value,
        "l2_zn": report.l2_zn,
        "l2_renorm": report.l2_renorm,
        "winner": report.winner,
        "tie_epsilon": TIE_EPSILON,
        "n_points": int(report.times.size),
        "t_max": float(report.times[-1]),
    }, indent=2, sort_keys=True) + "\n"


def _plot_script(label: str, csv_name: str) -> str:
    """Gnuplot text: exact solid, renormalized dashed, zn dotted."""
    return "\n".join([
        f"# correlational decoherence comparison for {label}",
        "set datafile separator ','",
        "set xlabel 'Omega t'",
        "set ylabel 'correlational decoherence'",
        "set key top left",
        f"plot '{csv_name}' every ::1 using 1:4 with lines lw 2 dt 1 "
        "title 'exact', \\",
        f"     '{csv_name}' every ::1 using 1:3 with lines lw 2 dt 2 "
        "title 'renormalized', \\",
        f"     '{csv_name}' every ::1 using 1:2 with lines lw 2 dt 3 "
        "title 'ZN'",
    ]) + "\n"


# ---------------------------------------------------------------------------
# commands

def run_trace(s: Scenario, outdir) -> list[Path]:
    """Solve the scenario and write its requested output files."""
    outdir = Path(outdir)
    traj = solve_full_equation(s.params, s.solver, s.quadrature)
    contents: list[tuple[Path, str]] = []
    if "trajectory" in s.outputs:
        contents.append((outdir / f"{s.label}_trajectory.csv",
                         _trajectory_csv(traj)))
    if "breakdown" in s.outputs:
        bds = breakdown_grid(s.params, traj.times, s.quadrature)
        contents.append((outdir / f"{s.label}_breakdown.csv",
                         _breakdown_csv(bds)))
    if "comparison" in s.outputs:
        report = build_comparison(s.params, s.solver.t_max, s.quadrature)
        contents.append((outdir / f"{s.label}_comparison.csv",
                         _comparison_csv(report)))
        contents.append((outdir / f"{s.label}_report.json",
                         _report_json(report, s.label)))
    if traj.watchdog_triggered:
        count = int(np.sum(traj.watchdog))
        print(f"WARN: coherence modulus exceeded its initial value at "
              f"{count} of {traj.times.size} samples (watchdog)",
              file=sys.stderr)
    return [_write_text(path, content) for path, content in contents]


def run_figure(preset: str, outdir,
               coupling: Optional[float] = None) -> tuple[ComparisonReport, list[Path]]:
    """Produce the canned comparison dataset and plot script for a preset."""
    if preset not in _FIGURE_PRESETS:
        raise ConfigError(f"unknown figure preset {preset!r}")
    outdir = Path(outdir)
    knobs = _FIGURE_PRESETS[preset]
    lam = _FIGURE_COUPLING if coupling is None else coupling
    params = QubitBathParams(
        omega0=1.0, beta=knobs["beta_omega0"],
        sigma3_mean=knobs["sigma3_mean"],
        spectral=SpectralDensity(coupling=lam, omega_c=1.0, s=1.0))
    report = build_comparison(params, _FIGURE_T_MAX, QuadratureConfig())
    csv_name = f"{preset}_curves.csv"
    paths = [
        _write_text(outdir / csv_name, _comparison_csv(report)),
        _write_text(outdir / f"{preset}_report.json",
                    _report_json(report, preset)),
        _write_text(outdir / f"{preset}.gp", _plot_script(preset, csv_name)),
    ]
    return report, paths


def _sweep_scenario(base: Scenario, axis: str, value: float) -> Scenario:
    p = base.params
    if axis == "lambda":
        spectral = dataclasses.replace(p.spectral, coupling=value)
        params = dataclasses.replace(p, spectral=spectral)
    elif axis == "s":
        spectral = dataclasses.replace(p.spectral, s=value)
        params = dataclasses.replace(p, spectral=spectral)
    elif axis == "beta":
        params = dataclasses.replace(p, beta=value)
    elif axis == "sigma3_mean":
        if base.ic_explicit:
            params = dataclasses.replace(p, sigma3_mean=value)
        else:
            # let the default initial coherence track the new Bloch bound
            params = dataclasses.replace(p, sigma3_mean=value,
                                         initial_coherence=None)
    elif axis == "t_max":
        solver = dataclasses.replace(base.solver, t_max=value)
        return dataclasses.replace(base, solver=solver)
    else:
        raise ConfigError(f"axis must be one of {_SWEEP_AXES}, got {axis!r}")
    return dataclasses.replace(base, params=params)


def _sweep_row(base: Scenario, axis: str, value: float) -> str:
    fields = [_fmt(value)]
    try:
        s = _sweep_scenario(base, axis, value)
        report = build_comparison(s.params, s.solver.t_max, s.quadrature)
        correction = float(report.gamma_cor_renorm[-1] - report.gamma_cor[-1])
        fields += [_fmt(report.a_init_value),
                   _fmt(report.l2_zn), _fmt(report.l2_renorm),
                   report.winner, _fmt(correction), "ok", ""]
    except Exception as exc:  # per-point failures stay in-row
        msg = str(exc).splitlines()[0].replace(",", ";")
        fields += ["nan", "nan", "nan", "", "nan", "error", msg]
    return ",".join(fields)


def run_sweep(base: Scenario, axis: str, values, outdir,
              jobs: int = 1) -> list[Path]:
    """One comparison row per axis value; output order follows input order."""
    if axis not in _SWEEP_AXES:
        raise ConfigError(f"axis must be one of {_SWEEP_AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")

    if jobs == 1:
        rows = [_sweep_row(base, axis, v) for v in values]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda v: _sweep_row(base, axis, v), values))

    header = (f"{axis},a_init,l2_zn,l2_renorm,winner,"
              "renorm_correction,status,message")
    content = "\n".join([header] + rows) + "\n"
    path = Path(outdir) / f"{base.label}_sweep_{axis}.csv"
    return [_write_text(path, content)]


# ---------------------------------------------------------------------------
# entry point

def _load_scenario(args) -> Scenario:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    label = args.label or path.stem
    outputs = ("trajectory", "breakdown")
    if getattr(args, "outputs", None):
        outputs = tuple(k.strip() for k in args.outputs.split(",") if k.strip())
    return parse_config(text, label=label, outputs=outputs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qdeph",
        description="Pure-dephasing qubit coherence: kinetic-equation solver "
                    "and decoherence comparisons.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_trace = sub.add_parser("trace", help="solve and dump trajectory CSVs")
    p_trace.add_argument("config")
    p_trace.add_argument("--outdir", default=".")
    p_trace.add_argument("--label", default=None)
    p_trace.add_argument("--outputs", default=None,
                         help="comma list from {trajectory,breakdown,comparison}")

    p_fig = sub.add_parser("figure", help="canned comparison presets")
    p_fig.add_argument("preset", choices=sorted(_FIGURE_PRESETS))
    p_fig.add_argument("--outdir", default=".")
    p_fig.add_argument("--coupling", "--lambda", dest="coupling", type=float,
                       default=None, help="override the preset coupling")

    p_sweep = sub.add_parser("sweep", help="comparison rows along one axis")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True, choices=_SWEEP_AXES)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated numbers")
    p_sweep.add_argument("--outdir", default=".")
    p_sweep.add_argument("--label", default=None)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_cmp = sub.add_parser("compare", help="comparison report for a config")
    p_cmp.add_argument("config")
    p_cmp.add_argument("--outdir", default=".")
    p_cmp.add_argument("--label", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "trace":
            for path in run_trace(_load_scenario(args), args.outdir):
                print(path)
        elif args.command == "figure":
            report, paths = run_figure(args.preset, args.outdir,
                                       coupling=args.coupling)
            for path in paths:
                print(path)
            print(f"a_init = {report.a_init_value:.6f}, "
                  f"l2_zn = {report.l2_zn:.6g}, "
                  f"l2_renorm = {report.l2_renorm:.6g}, "
                  f"winner = {report.winner}")
        elif args.command == "sweep":
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError:
                raise ConfigError(
                    f"--values must be comma-separated numbers, "
                    f"got {args.values!r}") from None
            scenario = _load_scenario(args)
            for path in run_sweep(scenario, args.axis, values, args.outdir,
                                  jobs=args.jobs):
                print(path)
        elif args.command == "compare":
            s = _load_scenario(args)
            report = build_comparison(s.params, s.solver.t_max, s.quadrature)
            paths = [
                _write_text(Path(args.outdir) / f"{s.label}_comparison.csv",
                            _comparison_csv(report)),
                _write_text(Path(args.outdir) / f"{s.label}_report.json",
                            _report_json(report, s.label)),
            ]
            for path in paths:
                print(path)
            print(f"a_init = {report.a_init_value:.6f}, winner = {report.winner}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, SolverError, ValueError,
            ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
