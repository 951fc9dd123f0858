"""``clab`` command-line front end.

Exit codes: 0 ok (including degenerate-with-flag), 2 spec/parse error,
3 frame degeneracy, 4 non-global section, 5 not integrable.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import congruence as cg
from ._parallel import map_rows
from .complex_points import index_sum
from .errors import (DegenerateCurvature, DegenerateFrame, DegenerateShear, ExprSyntaxError,
                     FocalPoint, NonGlobalSection, NotIntegrable, PathInconsistent, SpecError)
from .integrals import chart_coords, convergence_ladder
from .io import Report, RunConfig, build_section, parse_complex, read_spec, write_csv, write_obj
from .sachs import (SachsInitialData, evolve_closed_form, evolve_direct, focal_points,
                    integrate_rk4, realize_line, rk4_steps, sachs_residual)
from .spin import frame_denominator, param_jet, spin
from .surface import line_directions, mesh, reconstruct

EXIT_OK, EXIT_PARSE, EXIT_FRAME, EXIT_NONGLOBAL, EXIT_NOT_INTEGRABLE = 0, 2, 3, 4, 5
FRAME_EPS = 1e-12


def _summary(x) -> Dict[str, float]:
    if x.size == 0:
        return {"min": None, "max": None, "mean": None}
    return {"min": float(np.min(x)), "max": float(np.max(x)), "mean": float(np.mean(x))}


def _companion(cfg: RunConfig, suffix: str) -> Optional[Path]:
    return None if cfg.out is None else Path(cfg.out).with_suffix(suffix)


# ---------------------------------------------------------------------------
# analyze

def _sample_sphere(sec, theta, phi, r):
    T, Ph = np.meshgrid(theta, phi, indexing="ij")
    north, coord, _ = chart_coords(T, Ph)
    out = {k: np.empty(T.shape, dtype=complex) for k in ("rho", "sigma", "K", "delta", "D", "scale")}
    for chart, mask in (("N", north), ("S", ~north)):
        if not np.any(mask):
            continue
        sd = spin(param_jet(sec, chart, coord[mask], r), check=False)
        P, M = sd.dplusF, sd.dminusF
        out["rho"][mask], out["sigma"][mask] = sd.rho, sd.sigma
        out["K"][mask], out["delta"][mask] = sd.K, sd.delta
        out["D"][mask] = frame_denominator(P, M)
        out["scale"][mask] = 1 + np.abs(P) ** 2 + np.abs(M) ** 2
    return tuple(out[k] for k in ("rho", "sigma", "K", "delta", "D", "scale")) + (
        np.where(north, "N", "S"), coord)


def cmd_analyze(cfg: RunConfig) -> Report:
    """Sample rho, sigma, K, Delta and the twist class on a sphere grid.

    The grid has ``grid`` colatitudes and ``2 grid`` longitudes at cell
    midpoints; each node is evaluated in the chart where it is canonical.
    """
    sec = build_section(cfg.spec, cfg.seed)
    n, tol, r = cfg.grid or 32, cfg.tol or 1e-10, cfg.r or 0.0
    rep = Report("analyze", cfg.echo())
    theta = (np.arange(n) + 0.5) * np.pi / n
    phi = (np.arange(2 * n) + 0.5) * np.pi / n
    rho, sigma, K, delta, D, scale, charts, coord = map_rows(
        lambda t: _sample_sphere(sec, t, phi, r), theta, threads=cfg.threads)
    focal = np.abs(D.real) < FRAME_EPS * scale.real
    frac = float(np.mean(focal))
    rep.results["degenerate_fraction"] = frac
    if frac > 0.5:
        rep.warn(DegenerateFrame(f"focal at {frac:.1%} of nodes (r={r:g})"))
        rep.exit_code = EXIT_FRAME
        return rep
    if np.any(focal):
        rep.warn(DegenerateFrame(f"{int(focal.sum())} focal node(s) excluded from summary"))
    ok = ~focal
    twisting = np.abs(rho.imag) > tol
    rep.results.update({
        "nodes": int(focal.size),
        "abs_sigma": _summary(np.abs(sigma[ok])),
        "im_rho": _summary(rho.imag[ok]),
        "K": _summary(K.real[ok]),
        "twisting_fraction": float(np.mean(twisting[ok])),
        "integrable_fraction": float(np.mean(~twisting[ok])),
    })
    T, Ph = np.meshgrid(theta, phi, indexing="ij")
    rows = []
    for idx in np.ndindex(T.shape):
        good = bool(ok[idx])
        rows.append({
            "theta": float(T[idx]), "phi": float(Ph[idx]), "chart": str(charts[idx]),
            "coord_re": float(coord[idx].real), "coord_im": float(coord[idx].imag),
            "rho_re": float(rho[idx].real) if good else "", "rho_im": float(rho[idx].imag) if good else "",
            "sigma_re": float(sigma[idx].real) if good else "",
            "sigma_im": float(sigma[idx].imag) if good else "",
            "K": float(K[idx].real) if good else "", "delta": float(delta[idx].real),
            "twist": ("twisting" if twisting[idx] else "integrable") if good else "focal",
        })
    path = _companion(cfg, ".csv")
    if path is not None:
        write_csv(path, rows)
        rep.results["csv"] = str(path)
    return rep


# ---------------------------------------------------------------------------
# gauss-bonnet

def cmd_gauss_bonnet(cfg: RunConfig) -> Report:
    """Total curvature over a ladder of quadrature grids ending at ``grid x 2 grid``."""
    sec = build_section(cfg.spec, cfg.seed)
    n, r = cfg.grid or 128, cfg.r or 0.0
    rep = Report("gauss-bonnet", cfg.echo())
    sizes = [(m, 2 * m) for m in (16, 32, 64) if m < n] + [(n, 2 * n)]
    try:
        ladder = convergence_ladder(sec, sizes, r=r, threads=cfg.threads)
    except (DegenerateCurvature, DegenerateFrame) as exc:
        rep.warn(exc)
        rep.exit_code = EXIT_FRAME
        return rep
    target = 4 * math.pi
    value = ladder[-1][2]
    rep.tables["convergence"] = [{"n_theta": a, "n_phi": b, "value": v, "abs_error": e,
                                  "rel_error": e / target} for a, b, v, e in ladder]
    first, last = ladder[0][3], ladder[-1][3]
    rep.results.update({
        "value": value, "target": target, "abs_error": abs(value - target),
        "rel_error": abs(value - target) / target,
        "error_ratio_first_last": (first / last) if last > 0 else None,
    })
    return rep


# ---------------------------------------------------------------------------
# indices

def cmd_indices(cfg: RunConfig) -> Report:
    """Complex points, their indices and the total."""
    sec = build_section(cfg.spec, cfg.seed)
    grid = cfg.grid or 64
    if grid < 32:
        raise SpecError("indices needs grid >= 32")
    rep = Report("indices", cfg.echo())
    try:
        res = index_sum(sec, grid=grid, tol=cfg.tol or 1e-10, r=cfg.r)
    except DegenerateShear as exc:
        rep.warn(exc)
        rep.results.update({"degenerate": True, "total_index": None, "count": None})
        return rep
    rep.results.update({"degenerate": False, "total_index": res.total_index,
                        "count": len(res.zeros), "r": res.r})
    rep.tables["zeros"] = [{"chart": z.point.chart, "xi": z.point.xi, "index": z.index,
                            "residual": z.residual, "direction": z.point.direction()}
                           for z in res.zeros]
    return rep


# ---------------------------------------------------------------------------
# surface

def cmd_surface(cfg: RunConfig) -> Report:
    """Orthogonal surface over a chart rectangle, exported as OBJ.

    Reads an optional ``"surface": {"rect": [u0, u1, v0, v1], "chart": "N",
    "r0": 0.0}`` block from the congruence spec; ``--r`` overrides ``r0`` and ``--grid``
    sets the number of nodes per side.
    """
    sec = build_section(cfg.spec, cfg.seed)
    sconf = cfg.spec.get("surface", {})
    rect = tuple(float(x) for x in sconf.get("rect", (-1.0, 1.0, -1.0, 1.0)))
    chart = sconf.get("chart", "N")
    r0 = cfg.r if cfg.r is not None else float(sconf.get("r0", 0.0))
    n = cfg.grid or int(sconf.get("n", 33))
    if len(rect) != 4 or chart not in cg.CHARTS:
        raise SpecError("surface needs rect = [u0, u1, v0, v1] and chart 'N' or 'S'")
    rep = Report("surface", cfg.echo())
    try:
        field = reconstruct(sec, rect, n, r0, chart, twist_tol=cfg.tol or 1e-10)
    except NotIntegrable as exc:
        rep.warn(exc)
        rep.results["max_twist"] = exc.max_twist
        rep.exit_code = EXIT_NOT_INTEGRABLE
        return rep
    except PathInconsistent as exc:
        rep.warn(exc)
        rep.results["path_residual"] = exc.residual
        rep.exit_code = EXIT_NOT_INTEGRABLE
        return rep
    m = mesh(sec, field)
    normals = np.einsum("ij,ij->i", m.face_normals, line_directions(field).reshape(-1, 3)[m.faces[:, 0]])
    rep.results.update({
        "n": n, "vertices": int(len(m.vertices)), "faces": int(len(m.faces)),
        "path_residual": field.residual, "max_twist": field.max_twist,
        "r_min": float(field.r.min()), "r_max": float(field.r.max()),
        "faces_along_lines": bool(np.all(normals > 0)),
    })
    if cfg.spec.get("family") == "point_sphere":
        centre = np.asarray(cfg.spec["p"], float) + np.asarray(cfg.spec.get("translate", [0, 0, 0]), float)
        dist = np.linalg.norm(m.vertices - centre, axis=1)
        rep.results["sphere"] = {"centre": centre, "radius_min": float(dist.min()),
                                 "radius_max": float(dist.max()),
                                 "spread": float(dist.max() - dist.min())}
    path = _companion(cfg, ".obj")
    if path is not None:
        write_obj(path, m.vertices, m.faces, comment=f"clab surface n={n} chart={chart}")
        rep.results["obj"] = str(path)
    return rep


# ---------------------------------------------------------------------------
# sachs

def _sachs_lines(cfg: RunConfig):
    sconf = cfg.spec.get("sachs", {})
    lines = []
    for k, item in enumerate(sconf.get("initial", [])):
        init = SachsInitialData(parse_complex(item.get("rho0"), "rho0"),
                                parse_complex(item.get("sigma0"), "sigma0"))
        k0 = abs(init.rho0) ** 2 - abs(init.sigma0) ** 2
        lines.append((f"initial[{k}]", init, realize_line(init) if k0 != 0 else None))
    if "family" in cfg.spec:
        sec = build_section(cfg.spec, cfg.seed)
        points = sconf.get("points", [["N", 0], ["N", 0.5], ["N", [0, 0.5]], ["S", [0.3, -0.2]]]
                           if not lines else [])
        for chart, coord in points:
            if chart not in cg.CHARTS:
                raise SpecError(f"sachs point chart must be 'N' or 'S', got {chart!r}")
            pj = param_jet(sec, chart, parse_complex(coord, "point"))
            try:
                init = SachsInitialData.from_param_jet(pj)
            except DegenerateFrame as exc:
                raise SpecError(f"line {chart}:{coord} is focal at r = 0: {exc}") from None
            lines.append((f"{chart}:{coord}", init, pj))
    if not lines:
        raise SpecError("sachs needs 'sachs.initial' data or a congruence family")
    return lines


def _rel(a, b):
    return abs(a - b) / (1 + abs(b))


def cmd_sachs(cfg: RunConfig) -> Report:
    """Closed-form, direct and RK4 evolution of (rho, sigma) along lines."""
    sconf = cfg.spec.get("sachs", {})
    r_end = cfg.r if cfg.r is not None else float(sconf.get("r_end", 2.0))
    samples = int(sconf.get("samples", 9))
    rep = Report("sachs", cfg.echo())
    lines = _sachs_lines(cfg)
    rs = np.linspace(0.0, r_end, samples)
    maxima = {"direct": 0.0, "rk4": 0.0, "residual": 0.0}
    rep.tables["lines"] = []
    for label, init, pj in lines:
        roots = focal_points(init)
        rep.tables["lines"].append({"line": label, "rho0": init.rho0, "sigma0": init.sigma0,
                                    "focal_points": roots})
        rows = []
        state, r_prev, rk_alive = (init.rho0, init.sigma0), 0.0, True
        for r in rs:
            r = float(r)
            row = {"r": r}
            if rk_alive and r != r_prev:
                try:
                    state = integrate_rk4(SachsInitialData(*state), r - r_prev,
                                          rk4_steps(r - r_prev))
                except FocalPoint:
                    rk_alive = False
            r_prev = r
            crossed = any(min(0.0, r) < f < max(0.0, r) for f in roots)
            try:
                rho, sigma = evolve_closed_form(init, r)
            except FocalPoint as exc:
                rep.warn(exc)
                rk_alive = False
                rows.append(row)
                continue
            if crossed:
                rk_alive = False
            row.update({"rho_closed": rho, "sigma_closed": sigma})
            if pj is not None:
                d_rho, d_sigma = evolve_direct(pj, r)
                res = sachs_residual(pj, r)
                row.update({"rho_direct": d_rho, "sigma_direct": d_sigma,
                            "err_direct": max(_rel(d_rho, rho), _rel(d_sigma, sigma)),
                            "residual_rho": res[0], "residual_sigma": res[1]})
                maxima["direct"] = max(maxima["direct"], row["err_direct"])
                maxima["residual"] = max(maxima["residual"], *res)
            if rk_alive:
                row.update({"rho_rk4": state[0], "sigma_rk4": state[1],
                            "err_rk4": max(_rel(state[0], rho), _rel(state[1], sigma))})
                maxima["rk4"] = max(maxima["rk4"], row["err_rk4"])
            rows.append(row)
        rep.tables[f"evolution {label}"] = rows
    rep.results.update({"lines": len(lines), "r_end": r_end,
                        "max_rel_err_direct": maxima["direct"],
                        "max_rel_err_rk4": maxima["rk4"],
                        "max_residual": maxima["residual"]})
    return rep


# ---------------------------------------------------------------------------

COMMANDS: Dict[str, Callable[[RunConfig], Report]] = {
    "analyze": cmd_analyze,
    "gauss-bonnet": cmd_gauss_bonnet,
    "indices": cmd_indices,
    "surface": cmd_surface,
    "sachs": cmd_sachs,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", required=True,
                        help="congruence spec: a JSON file path or an inline JSON object")
    common.add_argument("--grid", type=int, default=None, help="grid size (>= 8)")
    common.add_argument("--tol", type=float, default=None, help="tolerance (> 0)")
    common.add_argument("--r", type=float, default=None,
                        help="distance along the lines (meaning depends on the command)")
    common.add_argument("--out", default=None,
                        help="report path; CSV/OBJ companions are written beside it")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0, help="seed for random families")
    parser = argparse.ArgumentParser(prog="clab", description="Line congruence analysis.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or "").splitlines()[0])
    return parser


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = RunConfig(read_spec(args.spec), args.grid, args.tol, args.r, args.out,
                        args.threads, args.seed)
        if args.out:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        rep = COMMANDS[args.command](cfg)
    except (SpecError, ExprSyntaxError) as exc:
        print(f"clab: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_PARSE
    except NonGlobalSection as exc:
        rep = Report(args.command, cfg.echo())
        rep.warn(exc)
        rep.results["transition_residual"] = exc.residual
        rep.exit_code = EXIT_NONGLOBAL
    rep.wall_time = time.perf_counter() - start
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return rep.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
