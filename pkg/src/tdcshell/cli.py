"""Command-line front end: benchmark runs, custom problems, sweeps.

A run is described by a JSON config file and/or flags (flags win). Results
land in the output directory: a fixed-schema convergence CSV, a summary
JSON with timings and diagnostics, optional VTK exports and system dumps.
The config actually used is copied alongside for provenance.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
import time
from pathlib import Path

from . import __version__, benchmarks
from . import assembly as asm
from . import geometry as geo
from . import mechanics as mech
from . import nurbs
from . import postprocess as post
from . import solver as solver_mod

_GEOMETRY_KINDS = {
    "plate": geo.plate,
    "cylinder_panel": geo.cylinder_panel,
    "hyperbolic_paraboloid": geo.hyperbolic_paraboloid,
    "flower_shell": geo.flower_shell,
    "sphere_patch": geo.sphere_patch,
}


def _parse_int_list(text):
    return [int(tok) for tok in str(text).split(",") if tok != ""]


def _parse_constraint(text):
    if text == "lagrange":
        return "lagrange", 1e8
    if text.startswith("penalty:"):
        return "penalty", float(text.split(":", 1)[1])
    if text == "penalty":
        return "penalty", 1e8
    raise ValueError(f"constraint must be 'lagrange' or 'penalty:<alpha>', got {text!r}")


def _edge_condition_from_config(spec):
    if isinstance(spec, str):
        return asm.EdgeCondition.named(spec)
    cons = [asm.DirectionalConstraint(f, d, v)
            for f, d, v in (tuple(c) + (0.0,) * (3 - len(c)) for c in spec.get("constraints", []))]
    return asm.EdgeCondition(constraints=cons,
                             traction=spec.get("traction"),
                             moment=spec.get("moment"),
                             name=spec.get("name", "custom"))


def build_custom_problem(cfg, degree, n_elems, constraint_mode, penalty_alpha, qbump):
    gspec = dict(cfg["geometry"])
    kind = gspec.pop("kind")
    if kind == "nurbs":
        patch = nurbs.NurbsPatch.from_json(json.dumps(gspec["patch"]))
        geom = geo.NurbsGeometry(patch, wrap_r=gspec.get("wrap_r", False))
    else:
        geom = _GEOMETRY_KINDS[kind](**gspec)
    m = cfg["material"]
    mat = mech.Material(E=m["E"], nu=m["nu"], thickness=m["thickness"],
                        alpha_s=m.get("alpha_s", 1.0))
    edges = {name: _edge_condition_from_config(spec)
             for name, spec in cfg.get("edges", {}).items()}
    patch = nurbs.make_field_patch(degree, n_elems, domain=geom.domain)
    return asm.ShellProblem(geom=geom, patch=patch, material=mat,
                            load_f=tuple(cfg.get("load_f", (0, 0, 0))),
                            load_c=tuple(cfg.get("load_c", (0, 0, 0))),
                            edges=edges, constraint_mode=constraint_mode,
                            penalty_alpha=penalty_alpha, qbump=qbump,
                            name=cfg.get("name", "custom"))


def _run_custom(cfg, p_list, n_list, constraint_mode, penalty_alpha, qbump):
    rows = []
    for p in p_list:
        prev = None
        for n in n_list:
            t0 = time.perf_counter()
            row = {"case": cfg.get("name", "custom"), "p": p, "n": n}
            try:
                problem = build_custom_problem(cfg, p, n, constraint_mode, penalty_alpha, qbump)
                sol = solver_mod.solve_problem(problem)
                rn = post.residual_norms(problem, sol)
                en = post.stored_energy(problem, sol)
            except Exception as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
                rows.append(row)
                prev = None
                continue
            area = post.surface_area(problem.geom)
            row.update({
                "h": float(area**0.5) / n, "dofs": sol.system.dofmap.total_dofs,
                "qoi_name": "energy", "qoi": en.elastic_energy,
                "qoi_normalized": None,
                "eps_force_rel": rn.eps_force_rel,
                "eps_moment_abs": rn.eps_moment_abs,
                "energy": en.elastic_energy, "preasymptotic": False,
                "solver_residual": sol.report.residual_norm_rel,
                "runtime_s": time.perf_counter() - t0,
            })
            if prev is not None and prev["n"] * 2 == n:
                import numpy as np
                for key, okey in (("eps_force_rel", "order_force"),
                                  ("eps_moment_abs", "order_moment")):
                    e0, e1 = prev.get(key), row.get(key)
                    if e0 and e1 and e0 > 0 and e1 > 0:
                        row[okey] = float(np.log2(e0 / e1))
            rows.append(row)
            prev = row
    return rows


def make_parser():
    ps = argparse.ArgumentParser(
        prog="tdcshell",
        description="Reissner-Mindlin shell solver on NURBS surfaces "
                    "(tangential differential calculus formulation)")
    ps.add_argument("--case", choices=benchmarks.CASES, help="built-in benchmark case")
    ps.add_argument("--problem", type=Path, help="JSON problem/config file")
    ps.add_argument("--p", help="degree or comma list, e.g. 4 or 3,4,5")
    ps.add_argument("--n", help="elements per side or comma list")
    ps.add_argument("--constraint", help="lagrange (default) or penalty:<alpha>")
    ps.add_argument("--qbump", type=int, help="extra Gauss points per direction")
    ps.add_argument("--geometry", choices=("default", "analytic", "fitted", "nurbs"),
                    help="benchmark geometry representation")
    ps.add_argument("--out", type=Path, default=Path("tdcshell-out"), help="output directory")
    ps.add_argument("--vtk", action="store_true", help="write a VTK surface export per cell")
    ps.add_argument("--dump-system", action="store_true",
                    help="write matrix/rhs in MatrixMarket format per cell")
    ps.add_argument("--version", action="version", version=f"tdcshell {__version__}")
    return ps


def run(args) -> int:
    cfg = {}
    if args.problem is not None:
        try:
            cfg = json.loads(Path(args.problem).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(json.dumps({"error": "bad-config", "detail": str(exc)}), file=sys.stderr)
            return 2
    case = args.case or cfg.get("case")
    if case is None and "geometry" not in cfg:
        print(json.dumps({"error": "bad-config",
                          "detail": "need --case or a problem file with 'case' or 'geometry'"}),
              file=sys.stderr)
        return 2

    p_list = _parse_int_list(args.p if args.p is not None else cfg.get("p", 4))
    n_list = _parse_int_list(args.n if args.n is not None else cfg.get("n", 8))
    constraint = args.constraint if args.constraint is not None else cfg.get("constraint", "lagrange")
    try:
        mode, alpha = _parse_constraint(constraint)
    except ValueError as exc:
        print(json.dumps({"error": "bad-config", "detail": str(exc)}), file=sys.stderr)
        return 2
    qbump = args.qbump if args.qbump is not None else int(cfg.get("qbump", 0))
    geometry = args.geometry or cfg.get("geometry_variant", "default")
    for p in p_list:
        if not 2 <= p <= 6:
            print(f"warning: degree {p} outside the validated range [2, 6]", file=sys.stderr)
    if any(n < 1 for n in n_list):
        print(json.dumps({"error": "bad-config", "detail": "n must be >= 1"}), file=sys.stderr)
        return 2

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.problem is not None:
        shutil.copy(args.problem, out / Path(args.problem).name)
    resolved = {"case": case, "p": p_list, "n": n_list, "constraint": constraint,
                "qbump": qbump, "geometry_variant": geometry, "vtk": bool(args.vtk),
                "dump_system": bool(args.dump_system)}
    (out / "resolved-config.json").write_text(json.dumps(resolved, indent=2, sort_keys=True) + "\n")

    t0 = time.perf_counter()
    try:
        if case is not None:
            rows = post.convergence_study(case, p_list, n_list, constraint_mode=mode,
                                          penalty_alpha=alpha, qbump=qbump,
                                          geometry=geometry)
        else:
            rows = _run_custom(cfg, p_list, n_list, mode, alpha, qbump)
    except Exception as exc:
        print(json.dumps({"error": "run-failed", "detail": f"{type(exc).__name__}: {exc}"}),
              file=sys.stderr)
        return 1

    post.write_csv(rows, out / "convergence.csv")

    for row in rows:
        if "error" in row or not (args.vtk or args.dump_system):
            continue
        p, n = row["p"], row["n"]
        if case is not None:
            problem = benchmarks.make_problem(case, p, n, mode, alpha, qbump, geometry)
        else:
            problem = build_custom_problem(cfg, p, n, mode, alpha, qbump)
        sol = solver_mod.solve_problem(problem)
        if args.vtk:
            post.export_vtk(problem, sol, out / f"{problem.name}_p{p}_n{n}.vtk")
        if args.dump_system:
            solver_mod.dump_system(sol.system, out / f"system_p{p}_n{n}.mtx",
                                   out / f"rhs_p{p}_n{n}.mtx")

    summary = {
        "version": __version__, "config": resolved,
        "wall_time_s": time.perf_counter() - t0,
        "rows": rows,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True,
                                                 default=float) + "\n")

    for row in rows:
        if "error" in row:
            print(f"p={row['p']} n={row['n']}: ERROR {row['error']}")
            continue
        qn = row.get("qoi_normalized")
        norm = f"  normalized={qn:.6f}" if qn is not None else ""
        ef = row.get("eps_force_rel")
        res = f"  eps_F={ef:.3e}" if ef is not None and ef == ef else ""
        print(f"p={row['p']} n={row['n']}: {row['qoi_name']}={row['qoi']:.6e}{norm}{res}"
              f"  energy={row['energy']:.6e}  dofs={row['dofs']}"
              f"  [{row['runtime_s']:.1f}s]")
    ref = benchmarks.REFERENCES.get(case)
    if ref is not None:
        print(f"reference {benchmarks.QOI_NAMES[case]} = {ref}")
    print(f"artifacts written to {out}")
    return 0


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
