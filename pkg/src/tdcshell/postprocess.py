"""Solution evaluation, residual-error norms, energy and study drivers.

The strong-form residuals integrate the pointwise force and moment
equilibrium of the discrete solution over the surface; they need second
parametric derivatives of the fields and third derivatives of the
geometry. Two algebraically equivalent expansions of the force residual
(physical membrane-force form and effective-force form) are evaluated
side by side as a consistency check.
"""
from __future__ import annotations

import csv
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import mechanics as mech
from . import nurbs
from .assembly import gauss_1d
from .errors import CapabilityError
from .solver import ShellSolution, solve_problem

_CSV_COLUMNS = ["case", "p", "n", "h", "dofs", "qoi_name", "qoi", "qoi_normalized",
                "eps_force_rel", "eps_moment_abs", "energy", "order_force",
                "order_moment", "preasymptotic", "solver_residual"]


@dataclass
class ResidualNorms:
    """L2 norms of the strong-form equilibrium residuals.

    The force norm is relative (scaled by the L2 norm of the area load);
    the moment norm is absolute. force_reference_zero flags a vanishing
    load norm, in which case eps_force_rel is NaN. forms_rel_diff reports
    the relative disagreement of the two force-residual expansions.
    """

    eps_force_rel: float
    eps_moment_abs: float
    force_reference_zero: bool = False
    forms_rel_diff: float = 0.0


@dataclass
class EnergyReport:
    elastic_energy: float
    membrane: float
    bending: float
    shear: float


def _bsym(X):
    return 0.5 * (X + np.swapaxes(X, -1, -2))


def _fields_on_points(patch, coeffs, ids, tab, second=False):
    """Field values/derivatives from basis tables on one element."""
    ca = coeffs[ids]
    val = tab[0, 0] @ ca
    d1 = np.stack([tab[1, 0] @ ca, tab[0, 1] @ ca], axis=-1)
    if not second:
        return val, d1, None
    d2 = np.stack([tab[2, 0] @ ca, tab[1, 1] @ ca, tab[0, 2] @ ca], axis=-1)
    return val, d1, d2


def _grad_dir(Dpar, B):
    """Directional surface gradient (rows tangential) from parametric d1."""
    return np.einsum("mid,mxd->mix", Dpar, B)


class _StrongForm:
    """Pointwise strong-form quantities of a discrete state on one batch."""

    def __init__(self, fb, mat, u, w, Du, Dw, D2u, D2w, f, c):
        if not fb.has_jet:
            raise CapabilityError("strong-form evaluation needs frames with dH data")
        B = fb.B
        gu = _grad_dir(Du, B)
        gw = _grad_dir(Dw, B)
        Du_r = np.stack([D2u[..., 0], D2u[..., 1]], axis=-1)
        Du_s = np.stack([D2u[..., 1], D2u[..., 2]], axis=-1)
        Dw_r = np.stack([D2w[..., 0], D2w[..., 1]], axis=-1)
        Dw_s = np.stack([D2w[..., 1], D2w[..., 2]], axis=-1)
        gu_d = {a: _grad_dir(Dpar, B) + _grad_dir(Du, Ba)
                for a, Dpar, Ba in (("r", Du_r, fb.B_r), ("s", Du_s, fb.B_s))}
        gw_d = {a: _grad_dir(Dpar, B) + _grad_dir(Dw, Ba)
                for a, Dpar, Ba in (("r", Dw_r, fb.B_r), ("s", Dw_s, fb.B_s))}

        mu, lam, t = mat.mu, mat.lam, mat.thickness
        P, Q, H, n = fb.P, fb.Q, fb.H, fb.n
        Pd = {"r": fb.P_r, "s": fb.P_s}
        Qd = {"r": fb.Q_r, "s": fb.Q_s}
        Hd = {"r": fb.H_r, "s": fb.H_s}
        nd = {"r": fb.n_r, "s": fb.n_s}
        wd = {"r": Dw[..., 0], "s": Dw[..., 1]}

        outer = mech.outer

        def stress(eps):
            tr = np.einsum("...ii->...", eps)
            return 2 * mu * eps + lam * tr[..., None, None] * P

        def stress_d(eps, eps_a, Pa):
            tr = np.einsum("...ii->...", eps)
            tra = np.einsum("...ii->...", eps_a)
            return 2 * mu * eps_a + lam * (tra[..., None, None] * P + tr[..., None, None] * Pa)

        eps_m = _bsym(P @ gu)
        eps_b = _bsym(H @ gu + P @ gw)
        eps_s = _bsym(Q @ gu + outer(n, w))
        self.m = (t**3 / 12.0) * stress(eps_b)
        self.n_eff = t * stress(eps_m)
        self.q = 2.0 * mat.shear_stiffness * eps_s
        self.n_real = self.n_eff + H @ self.m

        md, ned, qd, nrd = {}, {}, {}, {}
        for a in ("r", "s"):
            em_a = _bsym(Pd[a] @ gu + P @ gu_d[a])
            eb_a = _bsym(Hd[a] @ gu + H @ gu_d[a] + Pd[a] @ gw + P @ gw_d[a])
            es_a = _bsym(Qd[a] @ gu + Q @ gu_d[a] + outer(nd[a], w) + outer(n, wd[a]))
            md[a] = (t**3 / 12.0) * stress_d(eps_b, eb_a, Pd[a])
            ned[a] = t * stress_d(eps_m, em_a, Pd[a])
            qd[a] = 2.0 * mat.shear_stiffness * es_a
            nrd[a] = ned[a] + Hd[a] @ self.m + H @ md[a]

        def div(Ar, As):
            return (np.einsum("mjk,mk->mj", Ar, B[:, :, 0])
                    + np.einsum("mjk,mk->mj", As, B[:, :, 1]))

        self.div_m = div(md["r"], md["s"])
        self.div_n_eff = div(ned["r"], ned["s"])
        self.div_q = div(qd["r"], qd["s"])
        self.div_n_real = div(nrd["r"], nrd["s"])
        self.qn = np.einsum("mij,mj->mi", self.q, n)

        self.res_force = (self.div_n_real + np.einsum("mij,mj->mi", Q, self.div_q)
                          + np.einsum("mij,mj->mi", H, self.qn) + f)
        curv_term = np.einsum("mijk,mji->mk", fb.dH, self.m)
        self.res_force_eff = (self.div_n_eff + np.einsum("mij,mj->mi", H, self.div_m)
                              + curv_term + np.einsum("mij,mj->mi", Q, self.div_q)
                              + np.einsum("mij,mj->mi", H, self.qn) + f)
        self.res_moment = (np.einsum("mij,mj->mi", P, self.div_m) - self.qn + c)
        self.fb = fb


def _element_tables(patch, coeffs_u, coeffs_w, xr, xs, second):
    ids, R = nurbs.eval_basis_grid(patch, xr, xs, max_deriv=2 if second else 1)
    u, Du, D2u = _fields_on_points(patch, coeffs_u, ids, R, second)
    w, Dw, D2w = _fields_on_points(patch, coeffs_w, ids, R, second)
    return u, Du, D2u, w, Dw, D2w


def _iter_elements(problem, bump):
    patch = problem.patch
    pr, ps = patch.degrees
    ngr, ngs = pr + 1 + bump, ps + 1 + bump
    for span_r in patch.kv_r.spans:
        xr, wr = gauss_1d(ngr, span_r)
        for span_s in patch.kv_s.spans:
            xs, ws = gauss_1d(ngs, span_s)
            Rg = np.repeat(xr, ngs)
            Sg = np.tile(xs, ngr)
            cw = np.outer(wr, ws).ravel()
            yield xr, xs, Rg, Sg, cw


def strong_form_on_element(problem, solution: ShellSolution, xr, xs):
    """Strong-form quantities at tensor points inside one knot span."""
    uc, wc = solution.coefficients()
    u, Du, D2u, w, Dw, D2w = _element_tables(problem.patch, uc, wc, xr, xs, second=True)
    Rg = np.repeat(np.atleast_1d(xr), len(np.atleast_1d(xs)))
    Sg = np.tile(np.atleast_1d(xs), len(np.atleast_1d(xr)))
    fb = geo.frames_grid(problem.geom, xr, xs, need_dH=True)
    f = problem.f_fn()(fb.x)
    c = problem.c_fn()(fb.x)
    return _StrongForm(fb, problem.material, u, w, Du, Dw, D2u, D2w, f, c)


def residual_norms(problem, solution: ShellSolution, bump=2) -> ResidualNorms:
    """Integrated strong-form residual errors of a solved problem."""
    uc, wc = solution.coefficients()
    mat = problem.material
    f_fn, c_fn = problem.f_fn(), problem.c_fn()
    int_force = 0.0
    int_moment = 0.0
    int_f = 0.0
    int_diff = 0.0
    for xr, xs, Rg, Sg, cw in _iter_elements(problem, problem.qbump + bump):
        u, Du, D2u, w, Dw, D2w = _element_tables(problem.patch, uc, wc, xr, xs, second=True)
        fb = geo.frames_grid(problem.geom, xr, xs, need_dH=True)
        f = f_fn(fb.x)
        c = c_fn(fb.x)
        sf = _StrongForm(fb, mat, u, w, Du, Dw, D2u, D2w, f, c)
        dA = cw * fb.sqrt_det_g
        int_force += np.sum(dA * np.einsum("mi,mi->m", sf.res_force, sf.res_force))
        int_moment += np.sum(dA * np.einsum("mi,mi->m", sf.res_moment, sf.res_moment))
        int_f += np.sum(dA * np.einsum("mi,mi->m", f, f))
        d = sf.res_force - sf.res_force_eff
        int_diff += np.sum(dA * np.einsum("mi,mi->m", d, d))

    zero_ref = int_f <= 0.0
    eps_f = float("nan") if zero_ref else float(np.sqrt(int_force / int_f))
    diff = float(np.sqrt(int_diff / int_force)) if int_force > 0 else 0.0
    return ResidualNorms(eps_force_rel=eps_f, eps_moment_abs=float(np.sqrt(int_moment)),
                         force_reference_zero=bool(zero_ref), forms_rel_diff=diff)


def evaluate_solution(problem, solution: ShellSolution, r):
    """Field state and stress resultants at one parameter point."""
    uc, wc = solution.coefficients()
    ev = nurbs.eval_basis(problem.patch, r, max_deriv=1)
    frame = geo.frame_at(problem.geom, r)
    ua, wa = uc[ev.active_indices], wc[ev.active_indices]
    u = ev.values @ ua
    w = ev.values @ wa
    Du = np.stack([ev.d1[:, 0] @ ua, ev.d1[:, 1] @ ua], axis=-1)
    Dw = np.stack([ev.d1[:, 0] @ wa, ev.d1[:, 1] @ wa], axis=-1)
    state = mech.FieldPointState(u=u, w=w, grad_u_dir=Du @ frame.B.T,
                                 grad_w_dir=Dw @ frame.B.T)
    return state, mech.stress_resultants(frame, problem.material, state)


def displacement_at(problem, solution: ShellSolution, r):
    state, _ = evaluate_solution(problem, solution, r)
    return state.u


def stored_energy(problem, solution: ShellSolution) -> EnergyReport:
    """Elastic energy by quadrature of resultant-strain products."""
    uc, wc = solution.coefficients()
    mat = problem.material
    parts = np.zeros(3)
    for xr, xs, Rg, Sg, cw in _iter_elements(problem, problem.qbump):
        u, Du, _, w, Dw, _ = _element_tables(problem.patch, uc, wc, xr, xs, second=False)
        fb = geo.frames_grid(problem.geom, xr, xs)
        gu = _grad_dir(Du, fb.B)
        gw = _grad_dir(Dw, fb.B)
        em, eb, es = mech.strain_kernel(fb.P, fb.Q, fb.H, fb.n, gu, gw, w)
        e_m, e_b, e_s = mech.energy_density(mat, em, eb, es, fb.P)
        dA = cw * fb.sqrt_det_g
        parts += [np.sum(dA * e_m), np.sum(dA * e_b), np.sum(dA * e_s)]
    return EnergyReport(elastic_energy=float(parts.sum()), membrane=float(parts[0]),
                        bending=float(parts[1]), shear=float(parts[2]))


def energy_from_matrix(solution: ShellSolution):
    """Energy as half the elastic-block quadratic form (cross-check path)."""
    sl = solution.system.dofmap.slices
    x = solution.vector[:sl["w"].stop]
    K = solution.system.k_physical[:sl["w"].stop, :sl["w"].stop]
    return 0.5 * float(x @ (K @ x))


def tangentiality_measure(problem, solution: ShellSolution):
    """Constraint quality: integral of (w.n)^2 over integral of |w|^2."""
    uc, wc = solution.coefficients()
    num = den = 0.0
    for xr, xs, Rg, Sg, cw in _iter_elements(problem, problem.qbump):
        _, _, _, w, _, _ = _element_tables(problem.patch, uc, wc, xr, xs, second=False)
        fb = geo.frames_grid(problem.geom, xr, xs)
        dA = cw * fb.sqrt_det_g
        wn = np.einsum("mi,mi->m", w, fb.n)
        num += np.sum(dA * wn**2)
        den += np.sum(dA * np.einsum("mi,mi->m", w, w))
    return num / den if den > 0 else 0.0


def surface_area(geom, n_gauss=8, n_cells=8):
    """Patch area by composite Gauss quadrature of the area element."""
    (r0, r1), (s0, s1) = geom.domain
    total = 0.0
    for i in range(n_cells):
        a = r0 + (r1 - r0) * i / n_cells
        b = r0 + (r1 - r0) * (i + 1) / n_cells
        xr, wr = gauss_1d(n_gauss, (a, b))
        for j in range(n_cells):
            c = s0 + (s1 - s0) * j / n_cells
            d = s0 + (s1 - s0) * (j + 1) / n_cells
            xs, ws = gauss_1d(n_gauss, (c, d))
            fb = geo.frames_grid(geom, xr, xs)
            total += np.sum(np.outer(wr, ws).ravel() * fb.sqrt_det_g)
    return total


def principal_moments(resultants: mech.StressResultants):
    """Two nonzero eigenvalues of the moment tensor, descending."""
    m = resultants.m
    ev = np.linalg.eigvalsh(0.5 * (m + m.T))
    idx = np.argsort(np.abs(ev))
    small, keep = ev[idx[0]], ev[idx[1:]]
    mx = np.abs(ev).max()
    if mx > 0 and abs(small) > 1e-8 * mx:
        warnings.warn(f"moment tensor has no numerically zero eigenvalue "
                      f"(smallest {small:.3e} vs max {mx:.3e})")
    return float(keep.max()), float(keep.min())


def richardson(values, ratio=2.0):
    """Extrapolate a sequence at three successive refinements e_h, e_h/2, e_h/4."""
    e0, e1, e2 = values
    d0, d1 = e1 - e0, e2 - e1
    if d1 == 0 or d0 * d1 <= 0:
        return e2
    q = np.log(abs(d0 / d1)) / np.log(ratio)
    return e2 + d1 / (ratio**q - 1.0)


def convergence_study(case, p_list, n_list, constraint_mode="lagrange",
                      penalty_alpha=1e8, qbump=0, compute_residuals=True,
                      geometry="default"):
    """Solve a (p, n) sweep of a benchmark; returns a list of row dicts."""
    from . import benchmarks

    rows = []
    for p in p_list:
        prev = None
        for n in n_list:
            t0 = time.perf_counter()
            row = {"case": case, "p": p, "n": n}
            try:
                problem = benchmarks.make_problem(case, p, n, constraint_mode,
                                                  penalty_alpha, qbump, geometry)
                sol = solve_problem(problem)
            except Exception as exc:  # record and continue the sweep
                row.update({"error": f"{type(exc).__name__}: {exc}"})
                rows.append(row)
                prev = None
                continue
            area = surface_area(problem.geom)
            row["h"] = float(np.sqrt(area)) / n
            row["dofs"] = sol.system.dofmap.total_dofs
            row["qoi_name"] = benchmarks.QOI_NAMES[case]
            ref = benchmarks.REFERENCES[case]
            if case == "flower":
                qoi = stored_energy(problem, sol).elastic_energy
            else:
                pts = benchmarks.qoi_points(case)
                uz = [displacement_at(problem, sol, pt)[2] for pt in pts]
                qoi = uz[int(np.argmax(np.abs(uz)))]
                if case == "scordelis_lo":
                    qoi = float(np.max(np.abs(uz)))
            row["qoi"] = float(qoi)
            row["qoi_normalized"] = float(abs(qoi) / abs(ref)) if case != "hyperbolic_paraboloid" \
                else float(qoi / ref)
            if compute_residuals:
                rn = residual_norms(problem, sol)
                row["eps_force_rel"] = rn.eps_force_rel
                row["eps_moment_abs"] = rn.eps_moment_abs
            row["energy"] = stored_energy(problem, sol).elastic_energy if case != "flower" \
                else row["qoi"]
            row["preasymptotic"] = n in benchmarks.PREASYMPTOTIC_N.get(case, ())
            row["solver_residual"] = sol.report.residual_norm_rel
            row["runtime_s"] = time.perf_counter() - t0
            if prev is not None and compute_residuals and prev["n"] * 2 == n:
                for key, okey in (("eps_force_rel", "order_force"),
                                  ("eps_moment_abs", "order_moment")):
                    e0, e1 = prev.get(key), row.get(key)
                    if e0 and e1 and e0 > 0 and e1 > 0 and np.isfinite(e0) and np.isfinite(e1):
                        row[okey] = float(np.log2(e0 / e1))
            rows.append(row)
            prev = row
    return rows


def write_csv(rows, path):
    """Fixed-schema CSV; runtimes are omitted so identical configs give identical bytes."""
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return f"{v:.10e}"
        return str(v)

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for row in rows:
            writer.writerow([fmt(row.get(c)) for c in _CSV_COLUMNS])


def export_vtk(problem, solution: ShellSolution, path, samples_per_element=4):
    """Legacy-VTK surface export: quad sampling grid with u, w, m1, m2 data."""
    patch = problem.patch
    rs = []
    for kv in (patch.kv_r, patch.kv_s):
        pts = []
        for a, b in kv.spans:
            pts.extend(np.linspace(a, b, samples_per_element, endpoint=False))
        pts.append(kv.domain[1])
        rs.append(np.array(pts))
    Rv, Sv = rs
    nrp, nsp = len(Rv), len(Sv)
    uc, wc = solution.coefficients()

    X = np.empty((nrp * nsp, 3))
    U = np.empty((nrp * nsp, 3))
    W = np.empty((nrp * nsp, 3))
    M1 = np.empty(nrp * nsp)
    M2 = np.empty(nrp * nsp)
    k = 0
    for r in Rv:
        for s in Sv:
            state, res = evaluate_solution(problem, solution, (r, s))
            frame = geo.frame_at(problem.geom, (r, s))
            X[k] = frame.x
            U[k] = state.u
            W[k] = state.w
            M1[k], M2[k] = principal_moments(res)
            k += 1

    quads = []
    for i in range(nrp - 1):
        for j in range(nsp - 1):
            a = i * nsp + j
            quads.append((a, a + nsp, a + nsp + 1, a + 1))

    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{problem.name} surface sampling\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(X)} double\n")
        for p in X:
            fh.write(f"{p[0]:.10e} {p[1]:.10e} {p[2]:.10e}\n")
        fh.write(f"CELLS {len(quads)} {5 * len(quads)}\n")
        for q in quads:
            fh.write("4 " + " ".join(str(i) for i in q) + "\n")
        fh.write(f"CELL_TYPES {len(quads)}\n")
        fh.write("\n".join(["9"] * len(quads)) + "\n")
        fh.write(f"POINT_DATA {len(X)}\n")
        for name, arr in (("u", U), ("w", W)):
            fh.write(f"VECTORS {name} double\n")
            for v in arr:
                fh.write(f"{v[0]:.10e} {v[1]:.10e} {v[2]:.10e}\n")
        for name, arr in (("m1", M1), ("m2", M2)):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{v:.10e}" for v in arr) + "\n")
