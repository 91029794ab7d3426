"""Command-line surface: config ingestion, the five workflows, CSV
emission, and optional gnuplot script generation.

Configs are flat ``key = value`` text under ``[material]``, ``[numerics]``
and ``[output]`` headers (see README for a worked example).  All outputs
are deterministic: fixed column order, 17 significant digits, LF line
endings, no timestamps.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fields, pencil
from . import terzaghi as terzaghi_mod
from .sweep import sweep as run_prestress_sweep
from .errors import (
    ConfigError,
    CriticalPrestress,
    DegenerateBasis,
    InsufficientBracket,
    MismatchedParams,
    NoSignChange,
    NotAnEigenvalue,
    PositivityViolation,
    SolverError,
    SpectrumExhausted,
    StabilityError,
    UndeterminedConstant,
    WeightsUnresolvable,
)
from .material import MaterialParams

_MATERIAL_FLOATS = (
    "lambda_lame",
    "mu_lame",
    "biot_M",
    "biot_b",
    "K_ss",
    "M_sg",
    "K_sf",
    "darcy_D",
    "darcy_alpha",
    "depth_L",
    "k1",
    "k2",
    "k3",
    "k4",
    "mf0",
    "p0_ext",
    "dp_ext",
)

DEFAULT_T_SAMPLES = (0.0, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.5, 1.0, 5.0)


@dataclass(frozen=True)
class NumericsConfig:
    modes: int | None = None
    trunc_target: float | None = None
    lambda_min: float | None = None
    grid: int = 2000
    weights: str = "resolved"
    allow_unstable: bool = False
    p0_min: float | None = None
    p0_max: float | None = None
    p0_count: int = 21


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    x_points: int = 201
    t_samples: tuple[float, ...] = DEFAULT_T_SAMPLES


@dataclass(frozen=True)
class RunConfig:
    material: MaterialParams
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def search_window(self) -> pencil.SearchWindow:
        return pencil.SearchWindow(
            lambda_min=self.numerics.lambda_min, grid=self.numerics.grid
        )


def parse_config(path: str | Path) -> RunConfig:
    """Read and validate a run configuration file.

    Unknown sections are ignored, which lets a ``summary.txt`` produced by
    ``solve`` re-parse as a valid config.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (biot_M, K_ss, ...)
    read = cp.read(str(path))
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if "material" not in cp:
        raise ConfigError("config is missing the [material] section")

    mat_kwargs = {}
    for key in cp["material"]:
        if key not in _MATERIAL_FLOATS:
            raise ConfigError(f"unknown material key {key!r}")
        mat_kwargs[key] = cp["material"].getfloat(key)
    try:
        material = MaterialParams(**mat_kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad material block: {exc}") from exc
    except PositivityViolation as exc:
        raise ConfigError(f"bad material block: {exc}") from exc

    num = NumericsConfig()
    if "numerics" in cp:
        sec = cp["numerics"]
        modes = sec.getint("modes", fallback=None)
        trunc = sec.getfloat("trunc_target", fallback=None)
        if modes is not None and trunc is not None:
            raise ConfigError("set either modes or trunc_target, not both")
        num = NumericsConfig(
            modes=modes,
            trunc_target=trunc,
            lambda_min=sec.getfloat("lambda_min", fallback=None),
            grid=sec.getint("grid", fallback=2000),
            weights=sec.get("weights", fallback="resolved"),
            allow_unstable=sec.getboolean("allow_unstable", fallback=False),
            p0_min=sec.getfloat("p0_min", fallback=None),
            p0_max=sec.getfloat("p0_max", fallback=None),
            p0_count=sec.getint("p0_count", fallback=21),
        )
        if num.weights not in ("resolved", "paper-literal"):
            raise ConfigError(f"unknown weights mode {num.weights!r}")

    out = OutputConfig()
    if "output" in cp:
        sec = cp["output"]
        t_raw = sec.get("t_samples", fallback=None)
        if t_raw is not None:
            t_samples = tuple(float(v) for v in t_raw.replace(",", " ").split())
        else:
            t_samples = DEFAULT_T_SAMPLES
        out = OutputConfig(
            directory=sec.get("directory", fallback="out"),
            x_points=sec.getint("x_points", fallback=201),
            t_samples=t_samples,
        )
    if out.x_points < 2:
        raise ConfigError("x_points must be at least 2")
    if not out.t_samples or any(
        b < a for a, b in zip(out.t_samples, out.t_samples[1:])
    ):
        raise ConfigError("t_samples must be nonempty and sorted ascending")
    if any(t < 0.0 for t in out.t_samples):
        raise ConfigError("t_samples must be nonnegative")
    return RunConfig(material=material, numerics=num, output=out)


def _echo_config(cfg: RunConfig) -> str:
    """Canonical [material]/[numerics]/[output] text that re-parses to an
    equivalent RunConfig."""
    lines = ["[material]"]
    for key in _MATERIAL_FLOATS:
        val = getattr(cfg.material, key)
        if val is not None:
            lines.append(f"{key} = {val:.17g}")
    lines.append("")
    lines.append("[numerics]")
    n = cfg.numerics
    if n.modes is not None:
        lines.append(f"modes = {n.modes}")
    if n.trunc_target is not None:
        lines.append(f"trunc_target = {n.trunc_target:.17g}")
    if n.lambda_min is not None:
        lines.append(f"lambda_min = {n.lambda_min:.17g}")
    lines.append(f"grid = {n.grid}")
    lines.append(f"weights = {n.weights}")
    lines.append(f"allow_unstable = {str(n.allow_unstable).lower()}")
    if n.p0_min is not None:
        lines.append(f"p0_min = {n.p0_min:.17g}")
    if n.p0_max is not None:
        lines.append(f"p0_max = {n.p0_max:.17g}")
    lines.append(f"p0_count = {n.p0_count}")
    lines.append("")
    lines.append("[output]")
    lines.append(f"directory = {cfg.output.directory}")
    lines.append(f"x_points = {cfg.output.x_points}")
    lines.append("t_samples = " + " ".join(f"{t:.17g}" for t in cfg.output.t_samples))
    return "\n".join(lines) + "\n"


def _solve_field(cfg: RunConfig) -> fields.SolutionField:
    return fields.solve(
        cfg.material,
        modes=cfg.numerics.modes,
        trunc_target=cfg.numerics.trunc_target,
        weights_mode=cfg.numerics.weights,
        allow_unstable=cfg.numerics.allow_unstable,
        search=cfg.search_window(),
    )


def _spectrum_csv(field_: fields.SolutionField) -> str:
    lines = ["k,lambda_k,norm_sq,p_k"]
    for k, pair in enumerate(field_.spectrum):
        lines.append(
            f"{k},{pair.lambda_k:.17g},{pair.norm_sq:.17g},{field_.fourier[k]:.17g}"
        )
    return "\n".join(lines) + "\n"


def _write(outdir: Path, name: str, text: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / name).write_text(text, encoding="utf-8", newline="\n")


def _plot_script(csvs: dict[str, str]) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set grid",
    ]
    for fname, using in csvs.items():
        lines.append(f"plot '{fname}' using {using} with lines")
        lines.append("pause -1")
    return "\n".join(lines) + "\n"


def run_solve(cfg: RunConfig, outdir: Path, plot: bool = False) -> None:
    field_ = _solve_field(cfg)
    xs = np.linspace(0.0, 1.0, cfg.output.x_points)
    table = field_.profile(xs, cfg.output.t_samples)
    _write(outdir, "profiles.csv", table.to_csv())
    _write(outdir, "spectrum.csv", _spectrum_csv(field_))

    t_ref = cfg.output.t_samples[min(1, len(cfg.output.t_samples) - 1)]
    resid = fields.boundary_residuals(field_, t_ref)
    ode_max = max(
        pencil.ode_residual(pair, field_.coeffs, np.linspace(0.0, 1.0, 11))
        for pair in field_.spectrum[: field_.modes_used]
    ) if field_.modes_used else 0.0
    bc_max = max(
        float(pencil.bc_residuals(pair, field_.coeffs).max())
        for pair in field_.spectrum[: field_.modes_used]
    ) if field_.modes_used else 0.0

    lines = ["[summary]"]
    lines.append(f"V_bar = {field_.V_bar:.17g}")
    lines.append(f"V_in = {field_.V_in:.17g}")
    lines.append(f"W_in = {field_.W_in:.17g}")
    lines.append(f"regime = {field_.regime.tag}")
    lines.append(f"modes_used = {field_.modes_used}")
    lines.append(f"datum_sup = {field_.datum_sup:.17g}")
    lines.append(f"max_mode_ode_residual = {ode_max:.17g}")
    lines.append(f"max_mode_bc_residual = {bc_max:.17g}")
    lines.append(f"max_field_bc_residual_at_t{t_ref:g} = {max(resid.values()):.17g}")
    lines.append("")
    summary = "\n".join(lines) + "\n" + _echo_config(cfg)
    _write(outdir, "summary.txt", summary)
    if plot:
        _write(outdir, "plot-solve.gp", _plot_script({"profiles.csv": "1:5"}))


def run_spectrum(cfg: RunConfig, outdir: Path, plot: bool = False) -> None:
    field_ = _solve_field(cfg)
    _write(outdir, "spectrum.csv", _spectrum_csv(field_))
    if plot:
        _write(outdir, "plot-spectrum.gp", _plot_script({"spectrum.csv": "1:2"}))


def run_terzaghi(cfg: RunConfig, outdir: Path, plot: bool = False) -> None:
    p = terzaghi_mod.TerzaghiParams.from_material(cfg.material)
    xs = np.linspace(0.0, 1.0, cfg.output.x_points)
    cols_x, cols_t, cols_m = [], [], []
    for t in cfg.output.t_samples:
        cols_x.append(xs)
        cols_t.append(np.full(xs.shape, t))
        cols_m.append(np.atleast_1d(terzaghi_mod.terzaghi_series(p, xs, t)))
    mf = np.concatenate(cols_m)
    table = fields.ProfileTable(
        x=np.concatenate(cols_x),
        t=np.concatenate(cols_t),
        V=np.zeros(mf.shape),
        eps=p.eps_gain * mf - p.eps_shift,
        mf=mf,
    )
    _write(outdir, "terzaghi.csv", table.to_csv())
    if plot:
        _write(outdir, "plot-terzaghi.gp", _plot_script({"terzaghi.csv": "1:5"}))


def run_compare(cfg: RunConfig, outdir: Path, plot: bool = False) -> None:
    if cfg.material.p0_ext != 0.0:
        raise ConfigError("compare requires p0_ext = 0 (no prestress)")
    field_ = _solve_field(cfg)
    p = terzaghi_mod.TerzaghiParams.from_material(cfg.material)
    lines = ["t,sup_full,sup_interior,layer_width_0,layer_width_1"]
    for t in cfg.output.t_samples:
        if t <= 0.0:
            continue
        rec = terzaghi_mod.compare(field_, p, t)
        lines.append(rec.to_csv_row())
    _write(outdir, "compare.csv", "\n".join(lines) + "\n")
    if plot:
        _write(outdir, "plot-compare.gp", _plot_script({"compare.csv": "1:2"}))


def run_sweep(cfg: RunConfig, outdir: Path, plot: bool = False) -> None:
    n = cfg.numerics
    if n.p0_min is None or n.p0_max is None:
        raise ConfigError("sweep requires p0_min and p0_max in [numerics]")
    p0s = np.linspace(n.p0_min, n.p0_max, n.p0_count)
    result = run_prestress_sweep(cfg.material, p0s)
    text = result.to_csv()
    text += f"# threshold_estimate,{result.threshold_estimate:.17g}\n"
    _write(outdir, "sweep.csv", text)
    if plot:
        _write(outdir, "plot-sweep.gp", _plot_script({"sweep.csv": "1:3"}))


_COMMANDS = {
    "solve": run_solve,
    "spectrum": run_spectrum,
    "terzaghi": run_terzaghi,
    "compare": run_compare,
    "sweep": run_sweep,
}

_EXIT_STABILITY = (CriticalPrestress, UndeterminedConstant, StabilityError)
_EXIT_NUMERICAL = (
    InsufficientBracket,
    WeightsUnresolvable,
    SpectrumExhausted,
    NotAnEigenvalue,
    DegenerateBasis,
    NoSignChange,
    MismatchedParams,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sgconsol",
        description="Second-gradient consolidation solver (spectral pencil method)",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run config")
    parser.add_argument("--out", default=None, help="output directory override")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--modes", type=int, default=None)
    group.add_argument("--trunc-target", type=float, default=None)
    parser.add_argument("--allow-unstable", action="store_true")
    parser.add_argument("--weights", choices=("resolved", "paper-literal"), default=None)
    parser.add_argument("--plot", action="store_true", help="emit a gnuplot script")
    parser.add_argument("--seed", type=int, default=None, help="accepted, unused")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        num = cfg.numerics
        if args.modes is not None:
            num = replace(num, modes=args.modes, trunc_target=None)
        if args.trunc_target is not None:
            num = replace(num, trunc_target=args.trunc_target, modes=None)
        if args.allow_unstable:
            num = replace(num, allow_unstable=True)
        if args.weights is not None:
            num = replace(num, weights=args.weights)
        cfg = RunConfig(material=cfg.material, numerics=num, output=cfg.output)
        outdir = Path(args.out) if args.out else Path(cfg.output.directory)
        _COMMANDS[args.command](cfg, outdir, plot=args.plot)
    except ConfigError as exc:
        print(f"ERROR:Config: {exc}", file=sys.stderr)
        return 2
    except _EXIT_STABILITY as exc:
        print(f"ERROR:{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except _EXIT_NUMERICAL as exc:
        print(f"ERROR:{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except SolverError as exc:
        print(f"ERROR:{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
