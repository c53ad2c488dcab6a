"""Batch driver: ``hybridbem {solve,sweep,validate} CONFIG [--workers N] [--out DIR] [--quiet]``.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 validation
threshold exceeded.  The default worker count comes from ``HSBEM_WORKERS``.
"""

import argparse
import json
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cavity import (
    CavityProblem,
    Region,
    cavity_residuals,
    classify_point,
    eval_total_field_cavity,
    flat_cavity,
    half_disc_cavity,
    intensity_sum,
    resonator_cavity,
    solve_cavity_with_scatterers,
)
from .config import ConfigError, RunConfig, load_config, parse_beta, parse_config
from .geometry import WaveParams, discretize_circle, panel_count, point_in_curves
from .halfspace import (
    HalfspaceProblem,
    SolverError,
    assemble_and_solve,
    boundary_residuals,
    eval_total_field,
    make_wall,
)
from .oracles import ErrorReport, image_bem_scatterer, image_field_empty, l1_relative_errors, relative_error
from .sommerfeld import TruncationParams

__all__ = ["main", "build_problem", "grid_points", "header", "config_from_header",
           "run_solve", "run_sweep", "run_validate", "EXIT"]

EXIT = {"ok": 0, "config": 2, "solver": 3, "threshold": 4}
ENV_WORKERS = "HSBEM_WORKERS"
HEADER_LINES = 8


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------

def _circles(specs, k, per_wavelength):
    out = []
    for c in specs:
        n = c.get("panels") or panel_count(2 * np.pi * c["radius"], k, per_wavelength, minimum=8)
        out.append(discretize_circle(c["center"], c["radius"], int(n)))
    return out


def _extent(cfg: RunConfig) -> float:
    return max(abs(cfg.grid["x"][0]), abs(cfg.grid["x"][1]))


def build_problem(cfg: RunConfig, k=None, M0N0=None):
    """Problem object for wavenumber ``k`` (default: the config's) and optional (M0, N0).

    Meshes are generated at ``cfg.max_k()`` so that every point of a frequency
    sweep uses the same discretization.
    """
    k = cfg.k if k is None else float(k)
    t = dict(cfg.trunc)
    if M0N0 is not None:
        t["M0"], t["N0"] = float(M0N0[0]), float(M0N0[1])
    trunc = TruncationParams(t["M0"], t["N0"], t["a"])
    k_mesh = max(cfg.max_k(), k)
    m, g = cfg.mesh, cfg.geometry
    wave = WaveParams.from_k(k, cfg.wave["c"])
    beta = parse_beta(cfg.beta, k)
    if not cfg.is_cavity:
        wall = make_wall(trunc.M0, k_mesh, m["per_wavelength"])
        return HalfspaceProblem(wave, g["source"], wall, _circles(g["circles"], k_mesh, m["per_wavelength"]),
                                trunc, beta, m["quad_order"], extent=_extent(cfg),
                                points_per_period=m["points_per_period"])
    cav = g["cavity"]
    common = dict(per_wavelength=m["per_wavelength"], corner_fraction=m["corner_fraction"],
                  ratio=m["ratio"], virtual_radius=cav["virtual_radius"])
    wave_mesh = WaveParams.from_k(k_mesh, cfg.wave["c"])
    if cav["shape"] == "half_disc":
        base = half_disc_cavity(wave_mesh, trunc, cavity_radius=cav["cavity_radius"], **common)
    elif cav["shape"] == "flat":
        base = flat_cavity(wave_mesh, trunc, **common)
    else:
        base = resonator_cavity(wave_mesh, trunc, center_depth=cav["center_depth"],
                                opening=cav["opening"], **common)
    return CavityProblem(
        wave, base.wall, base.cavity, base.virtual,
        source1=g["source1"], source2=g["source2"],
        scatterers1=_circles(g["scatterers1"], k_mesh, m["per_wavelength"]),
        scatterers2=_circles(g["scatterers2"], k_mesh, m["per_wavelength"]),
        trunc=trunc, beta=beta, quad_order=m["quad_order"], extent=_extent(cfg),
        points_per_period=m["points_per_period"],
    )


def _mask(cfg, pts):
    mode = cfg.grid["mask"]
    if mode is None:
        return np.ones(len(pts), dtype=bool)
    col, sign = {"right": (0, 1), "left": (0, -1), "upper": (1, 1), "lower": (1, -1)}[mode]
    return sign * pts[:, col] > 0


def grid_points(cfg: RunConfig, problem):
    """Fluid lattice points of the configured grid (row-major in x, then y).

    Returns the points and, for cavity problems, their regions.
    """
    gx, gy, (nx, ny) = cfg.grid["x"], cfg.grid["y"], cfg.grid["shape"]
    X, Y = np.meshgrid(np.linspace(gx[0], gx[1], nx), np.linspace(gy[0], gy[1], ny), indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    pts = pts[_mask(cfg, pts)]
    if isinstance(problem, CavityProblem):
        reg = classify_point(problem, pts)
        ok = (reg == Region.OMEGA1) | (reg == Region.OMEGA2)
        srcs = [s for s in (problem.source1, problem.source2) if s is not None]
    else:
        reg = None
        ok = (pts[:, 1] > 0) & ~point_in_curves(pts, problem.scatterers)
        srcs = [problem.source]
    for s in srcs:
        ok &= np.hypot(*(pts - s).T) > 1e-9
    return pts[ok], (None if reg is None else reg[ok])


def _solve(problem):
    if isinstance(problem, CavityProblem):
        return solve_cavity_with_scatterers(problem)
    return assemble_and_solve(problem)


def _field(problem, dens, pts, reg):
    if isinstance(problem, CavityProblem):
        return eval_total_field_cavity(problem, dens, pts, reg)
    return eval_total_field(problem, dens, pts)


def _oracle(cfg: RunConfig, problem, pts):
    """Image-method reference field; raises ConfigError where none applies."""
    if isinstance(problem, CavityProblem):
        if cfg.geometry["cavity"]["shape"] != "flat" or problem.scatterers1 or problem.scatterers2:
            raise ConfigError("oracle not applicable: the image method needs a flat wall without "
                              "cavity or cavity scatterers")
        src = problem.source1 if problem.source1 is not None else problem.source2
        return image_field_empty(src, problem.k, pts)
    if not problem.scatterers:
        return image_field_empty(problem.source, problem.k, pts)
    return image_bem_scatterer(problem.scatterer, problem.source, problem.k, quad_order=problem.quad_order,
                               points=pts)


def _residual_max(problem, dens, eps):
    if isinstance(problem, CavityProblem):
        _, rw, _, rc = cavity_residuals(problem, dens, eps)
        return max(rw.max(initial=0.0), rc.max(initial=0.0))
    rw, rs = boundary_residuals(problem, dens, eps)
    return max(rw.max(initial=0.0), rs.max(initial=0.0))


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    return f"{v:.17g}"


def header(cfg: RunConfig, command: str) -> str:
    """Eight comment lines echoing the full effective config."""
    d = cfg.to_dict()
    j = lambda o: json.dumps(o, sort_keys=True, separators=(",", ":"))  # noqa: E731
    lines = [
        f"# hybridbem {__version__} {command}",
        f"# kind: {j(d['kind'])}",
        f"# wave: {j(d['wave'])}",
        f"# sweep: {j(d['sweep'])}",
        f"# trunc+beta: {j({'trunc': d['trunc'], 'beta': d['beta']})}",
        f"# mesh: {j(d['mesh'])}",
        f"# geometry: {j(d['geometry'])}",
        f"# grid+validate+output: {j({k: d[k] for k in ('grid', 'validate', 'output')})}",
    ]
    assert len(lines) == HEADER_LINES
    return "\n".join(lines) + "\n"


def config_from_header(text: str) -> RunConfig:
    """Rebuild the config from the header block of an output file."""
    d = {}
    for line in text.splitlines()[1:HEADER_LINES]:
        key, _, body = line[2:].partition(": ")
        val = json.loads(body)
        if "+" in key:
            d.update(val)
        else:
            d[key] = val
    return parse_config(d)


def _write_csv(path: Path, cfg, command, columns, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header(cfg, command))
        fh.write(",".join(columns) + "\n")
        for r in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in r) + "\n")


def _write_summary(path: Path, cfg, command, entries):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header(cfg, command))
        for key, val in entries:
            fh.write(f"{key}: {val}\n")


def _density_rows(problem, dens):
    rows = []

    def add(name, mesh, vals):
        for i, (p, v) in enumerate(zip(mesh.midpoints, vals)):
            rows.append((name, str(i), p[0], p[1], v.real, v.imag))

    if isinstance(problem, CavityProblem):
        add("sigma0", problem.wall, dens.sigma0)
        add("sigma1", problem.cavity, dens.sigma1)
        add("sigma2", problem.virtual, dens.sigma2)
        add("mu", problem.virtual, dens.mu)
        if len(dens.sigma_s1):
            add("sigma_s1", problem.scatterer1, dens.sigma_s1)
        if len(dens.sigma_s2):
            add("sigma_s2", problem.scatterer2, dens.sigma_s2)
    else:
        add("sigma_wall", problem.wall, dens.sigma_wall)
        if len(dens.sigma_scat):
            add("sigma_scat", problem.scatterer, dens.sigma_scat)
    for i, (lam, v) in enumerate(zip(problem.rule.lam, dens.xi)):
        rows.append(("xi", str(i), lam.real, lam.imag, v.real, v.imag))
    return rows


def _residual_rows(problem, dens, eps):
    rows = []
    if isinstance(problem, CavityProblem):
        xw, rw, xc, rc = cavity_residuals(problem, dens, eps)
        rows += [("wall", p[0], p[1], r) for p, r in zip(xw, rw)]
        rows += [("cavity", p[0], p[1], r) for p, r in zip(xc, rc)]
    else:
        rw, rs = boundary_residuals(problem, dens, eps)
        rows += [("wall", p[0], p[1], r) for p, r in zip(problem.wall.midpoints, rw)]
        rows += [("scatterer", p[0], p[1], r) for p, r in zip(problem.scatterer.midpoints, rs)]
    return rows


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def run_solve(cfg: RunConfig, out: Path):
    """Solve once; write field, densities, residuals and a summary."""
    t0 = time.perf_counter()
    problem = build_problem(cfg)
    dens = _solve(problem)
    pts, reg = grid_points(cfg, problem)
    u = _field(problem, dens, pts, reg)
    eps = cfg.validate["eps"]
    res = _residual_rows(problem, dens, eps)
    pre = cfg.output["prefix"]
    _write_csv(out / f"{pre}_field.csv", cfg, "solve", ["x", "y", "re_u", "im_u", "abs2_u"],
               [(p[0], p[1], v.real, v.imag, abs(v) ** 2) for p, v in zip(pts, u)])
    _write_csv(out / f"{pre}_densities.csv", cfg, "solve", ["block", "index", "x", "y", "re", "im"],
               _density_rows(problem, dens))
    _write_csv(out / f"{pre}_residuals.csv", cfg, "solve", ["boundary", "x", "y", "residual"],
               [(b, x, y, r) for b, x, y, r in res])
    entries = [
        ("unknowns", sum(len(a) for a in _density_blocks(dens))),
        ("rcond", _fmt(dens.rcond)),
        ("max_residual", _fmt(max((r[3] for r in res), default=0.0))),
        ("residual_eps", _fmt(eps)),
        ("field_points", len(pts)),
        ("intensity_sum", _fmt(float(np.sum(np.abs(u) ** 2)))),
        ("time_assemble_s", f"{dens.timings.get('assemble', 0.0):.3f}"),
        ("time_solve_s", f"{dens.timings.get('solve', 0.0):.3f}"),
        ("time_total_s", f"{time.perf_counter() - t0:.3f}"),
    ]
    _write_summary(out / f"{pre}_summary.txt", cfg, "solve", entries)
    return dict(entries)


def _density_blocks(dens):
    if hasattr(dens, "sigma0"):
        return (dens.sigma0, dens.sigma1, dens.sigma2, dens.mu, dens.sigma_s1, dens.sigma_s2, dens.xi)
    return (dens.sigma_wall, dens.sigma_scat, dens.xi)


def _sweep_point(cfg_dict, value):
    """Worker job: one sweep point, returns (metric, rcond)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = parse_config(cfg_dict)
    if cfg.sweep["param"] == "M0N0":
        problem = build_problem(cfg, M0N0=value)
    else:
        k = value if cfg.sweep["param"] == "k" else value / cfg.wave["c"]
        problem = build_problem(cfg, k=k)
    dens = _solve(problem)
    pts, reg = grid_points(cfg, problem)
    if cfg.kind == "validate-vs-image":
        metric = relative_error(_field(problem, dens, pts, reg), _oracle(cfg, problem, pts))
    elif isinstance(problem, CavityProblem):
        metric = intensity_sum(problem, dens, cfg.grid["x"], cfg.grid["y"], tuple(cfg.grid["shape"]),
                               None if cfg.grid["mask"] is None else (lambda p: _mask(cfg, p)))
    else:
        metric = float(np.sum(np.abs(_field(problem, dens, pts, reg)) ** 2))
    return float(metric), float(dens.rcond)


def run_sweep(cfg: RunConfig, out: Path, workers=1):
    """One row per sweep value, written in parameter order."""
    if cfg.sweep is None:
        raise ConfigError("the sweep command needs a 'sweep' section")
    t0 = time.perf_counter()
    values = cfg.sweep_values()
    d = cfg.to_dict()
    if workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_point, [d] * len(values), values))
    else:
        results = [_sweep_point(d, v) for v in values]
    metric = "relative_error" if cfg.kind == "validate-vs-image" else "intensity_sum"
    if cfg.sweep["param"] == "M0N0":
        cols = ["M0", "N0", metric, "rcond"]
        rows = [(v[0], v[1], m, r) for v, (m, r) in zip(values, results)]
    else:
        cols = [cfg.sweep["param"], metric, "rcond"]
        rows = [(v, m, r) for v, (m, r) in zip(values, results)]
    pre = cfg.output["prefix"]
    _write_csv(out / f"{pre}_sweep.csv", cfg, "sweep", cols, rows)
    ms = np.array([m for m, _ in results])
    i = int(np.argmax(ms))
    entries = [
        ("points", len(values)),
        ("metric", metric),
        ("max_value", _fmt(ms[i])),
        ("argmax", str(values[i])),
        ("median_value", _fmt(float(np.median(ms)))),
        ("min_rcond", _fmt(min(r for _, r in results))),
        ("workers", workers),
        ("time_total_s", f"{time.perf_counter() - t0:.3f}"),
    ]
    _write_summary(out / f"{pre}_summary.txt", cfg, "sweep", entries)
    return dict(entries)


def run_validate(cfg: RunConfig, out: Path):
    """Compare against the image-method oracle; returns (report, passed)."""
    t0 = time.perf_counter()
    problem = build_problem(cfg)
    pts, reg = grid_points(cfg, problem)
    ref = _oracle(cfg, problem, pts)
    dens = _solve(problem)
    u = _field(problem, dens, pts, reg)
    l1r, l1i = l1_relative_errors(u, ref)
    report = ErrorReport(relative_error(u, ref), l1r, l1i,
                         _residual_max(problem, dens, cfg.validate["eps"]), len(pts))
    pre = cfg.output["prefix"]
    _write_csv(out / f"{pre}_errors.csv", cfg, "validate",
               ["x", "y", "re_u", "im_u", "re_ref", "im_ref", "abs_err"],
               [(p[0], p[1], a.real, a.imag, b.real, b.imag, abs(a - b)) for p, a, b in zip(pts, u, ref)])
    passed = report.relative_error <= cfg.validate["threshold"]
    entries = [(k, _fmt(v) if isinstance(v, float) else v) for k, v in report.as_dict().items()]
    entries += [("threshold", _fmt(cfg.validate["threshold"])), ("passed", str(passed).lower()),
                ("rcond", _fmt(dens.rcond)), ("time_total_s", f"{time.perf_counter() - t0:.3f}")]
    _write_summary(out / f"{pre}_summary.txt", cfg, "validate", entries)
    return report, passed


def _default_workers() -> int:
    raw = os.environ.get(ENV_WORKERS, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{ENV_WORKERS} must be positive")
    return n


def _parser():
    p = argparse.ArgumentParser(prog="hybridbem", description="Hybrid BEM for half-space and cavity scattering.")
    p.add_argument("command", choices=["solve", "sweep", "validate"])
    p.add_argument("config", help="YAML run configuration")
    p.add_argument("--workers", type=int, default=None, help=f"worker processes (default ${ENV_WORKERS} or 1)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--quiet", action="store_true", help="suppress progress output and warnings")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    say = (lambda *a: None) if args.quiet else (lambda *a: print(*a, file=sys.stderr))
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = load_config(args.config)
        for w in caught:
            say(f"warning: {w.message}")
        workers = _default_workers() if args.workers is None else args.workers
        if workers < 1:
            raise ConfigError("--workers must be positive")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            summary = run_solve(cfg, out)
        elif args.command == "sweep":
            summary = run_sweep(cfg, out, workers)
        else:
            report, passed = run_validate(cfg, out)
            summary = report.as_dict()
            if not passed:
                say(f"validation failed: relative error {report.relative_error:.3e} > "
                    f"{cfg.validate['threshold']:.3e}")
                return EXIT["threshold"]
        for key, val in summary.items():
            say(f"{key}: {val}")
        return EXIT["ok"]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT["config"]
    except (SolverError, ValueError, np.linalg.LinAlgError, MemoryError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT["solver"]


if __name__ == "__main__":
    sys.exit(main())

