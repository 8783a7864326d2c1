"""Assembly of the discrete shell saddle-point system.

Unknowns are ordered block-wise as [u, w, lambda_n, lambda_u, lambda_w]:
middle-surface displacement, difference vector, the surface multiplier
enforcing w . n = 0, and boundary multipliers enforcing Dirichlet data on
u and w. Element integrals use Gauss-Legendre rules per knot span; all
loops run in a fixed order so assembled matrices are reproducible.

Patches whose geometry closes on itself in the r direction (wrap_r) are
handled by identifying the last control-point column with the first one;
the system is assembled on the full grid and then reduced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import geometry as geo
from . import mechanics as mech
from . import nurbs

EDGE_ORDER = ("r_min", "r_max", "s_min", "s_max")

_GLOBAL_DIRS = {"x": np.array([1.0, 0.0, 0.0]),
                "y": np.array([0.0, 1.0, 0.0]),
                "z": np.array([0.0, 0.0, 1.0])}

_VOIGT_W = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
_VOIGT_TR = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])


def gauss_1d(n_points, span=(0.0, 1.0)):
    """Gauss-Legendre nodes and weights on an interval."""
    if n_points < 1:
        raise ValueError("quadrature rule needs at least one point")
    x, w = np.polynomial.legendre.leggauss(n_points)
    a, b = span
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def quadrature_rule(p_r, p_s, order_bump=0, span=((0.0, 1.0), (0.0, 1.0))):
    """Tensor Gauss-Legendre rule with p+1+bump points per direction.

    Returns (points, weights): points has shape (m, 2) ordered row-major
    over (r, s); weights sum to the span area.
    """
    if p_r < 1 or p_s < 1:
        raise ValueError("degrees must be >= 1")
    if order_bump < 0:
        raise ValueError("order_bump must be >= 0")
    xr, wr = gauss_1d(p_r + 1 + order_bump, span[0])
    xs, ws = gauss_1d(p_s + 1 + order_bump, span[1])
    pts = np.stack([np.repeat(xr, len(xs)), np.tile(xs, len(xr))], axis=1)
    return pts, np.outer(wr, ws).ravel()


def _as_vec_fn(val) -> Callable:
    if callable(val):
        return val
    vec = np.asarray(val, dtype=float).reshape(3)
    return lambda x: np.broadcast_to(vec, (x.shape[0], 3)).copy()


def _as_scalar_fn(val) -> Callable:
    if callable(val):
        return val
    v = float(val)
    return lambda x: np.full(x.shape[0], v)


@dataclass
class DirectionalConstraint:
    """One scalar Dirichlet constraint: field . direction = value on an edge.

    direction is a global axis name ('x','y','z'), a boundary-local name
    ('nb' co-normal, 'tb' tangent, 'n' surface normal), or an explicit
    3-vector. value is a constant or a callable of position (m,3)->(m,).
    """

    field: str
    direction: object
    value: object = 0.0

    def direction_at(self, t_b, n_b, n):
        if isinstance(self.direction, str):
            if self.direction in _GLOBAL_DIRS:
                d = _GLOBAL_DIRS[self.direction]
                return np.broadcast_to(d, t_b.shape).copy()
            return {"nb": n_b, "tb": t_b, "n": n}[self.direction]
        d = np.asarray(self.direction, dtype=float).reshape(3)
        return np.broadcast_to(d / np.linalg.norm(d), t_b.shape).copy()


@dataclass
class EdgeCondition:
    """Boundary data for one patch edge: constraints plus Neumann loads."""

    constraints: list = field(default_factory=list)
    traction: object = None
    moment: object = None
    name: str = "custom"

    @staticmethod
    def named(name):
        if name == "clamped":
            cons = [DirectionalConstraint(f, d) for f in ("u", "w") for d in ("x", "y", "z")]
        elif name == "simply_supported":
            cons = [DirectionalConstraint("u", d) for d in ("x", "y", "z")]
        elif name == "symmetry":
            cons = [DirectionalConstraint("u", "nb"), DirectionalConstraint("w", "nb")]
        elif name == "free":
            cons = []
        else:
            raise ValueError(f"unknown edge condition {name!r}")
        return EdgeCondition(constraints=cons, name=name)


@dataclass
class ShellProblem:
    """Complete problem definition: geometry, field basis, material, loads, BCs."""

    geom: geo.GeometryMap
    patch: nurbs.NurbsPatch
    material: mech.Material
    load_f: object = (0.0, 0.0, 0.0)
    load_c: object = (0.0, 0.0, 0.0)
    edges: dict = field(default_factory=dict)
    constraint_mode: str = "lagrange"
    penalty_alpha: float = 1e8
    qbump: int = 0
    name: str = "shell_problem"

    def __post_init__(self):
        if self.constraint_mode not in ("lagrange", "penalty"):
            raise ValueError("constraint_mode must be 'lagrange' or 'penalty'")
        if self.constraint_mode == "penalty" and not 1e6 <= self.penalty_alpha <= 1e10:
            raise ValueError("penalty_alpha must lie in [1e6, 1e10]")
        if self.qbump < 0:
            raise ValueError("qbump must be >= 0")
        active = ("s_min", "s_max") if self.geom.wrap_r else EDGE_ORDER
        for e in self.edges:
            if e not in active:
                raise ValueError(f"edge {e!r} not part of the boundary for this geometry")
        for e in active:
            self.edges.setdefault(e, EdgeCondition.named("free"))
        pd = self.patch.domain
        gd = self.geom.domain
        if not np.allclose(pd, gd):
            raise ValueError(f"field patch domain {pd} does not match geometry domain {gd}")

    def f_fn(self):
        return _as_vec_fn(self.load_f)

    def c_fn(self):
        return _as_vec_fn(self.load_c)


@dataclass
class _MultBlock:
    edge: str
    constraint: DirectionalConstraint
    offset_full: int
    offset_red: int
    slots: np.ndarray
    n_full: int
    n_red: int

    def slot_position(self, k):
        i = np.searchsorted(self.slots, k)
        if i < len(self.slots) and self.slots[i] == k:
            return int(i)
        return -1


class DofMap:
    """Block layout [u, w, lambda_n, lambda_u, lambda_w] over the field basis.

    Grid DOFs are attached to control points (row-major ids, 3 slots for u
    and w, 1 for lambda_n); boundary multiplier DOFs exist per Dirichlet
    edge, per constrained direction, per basis function with nonzero trace
    on that edge. For wrapped patches the seam column is identified and a
    0/1 reduction matrix maps reduced unknowns to the full grid.
    """

    def __init__(self, problem: ShellProblem):
        patch = problem.patch
        self.nr, self.ns = patch.n_basis
        self.n_cp = self.nr * self.ns
        self.wrap = problem.geom.wrap_r
        self.has_lambda_n = problem.constraint_mode == "lagrange"
        nr_red = self.nr - 1 if self.wrap else self.nr
        self.n_cp_red = nr_red * self.ns
        F, Fr = self.n_cp, self.n_cp_red

        n_ln = F if self.has_lambda_n else 0
        n_ln_red = Fr if self.has_lambda_n else 0
        self.offs_full = {"u": 0, "w": 3 * F, "lambda_n": 6 * F}
        self.offs_red = {"u": 0, "w": 3 * Fr, "lambda_n": 6 * Fr}
        pos_full = 6 * F + n_ln
        pos_red = 6 * Fr + n_ln_red

        self.mult_blocks: list[_MultBlock] = []
        for fld in ("u", "w"):
            for edge in EDGE_ORDER:
                cond = problem.edges.get(edge)
                if cond is None:
                    continue
                for con in cond.constraints:
                    if con.field != fld:
                        continue
                    n_edge = self.ns if edge.startswith("r") else self.nr
                    slots = np.array([k for k in range(n_edge)
                                      if k not in self._corner_drops(problem, edge, con)],
                                     dtype=int)
                    n_full = len(slots)
                    n_red = n_full
                    if self.wrap and edge.startswith("s"):
                        n_red = n_full - 1
                    self.mult_blocks.append(
                        _MultBlock(edge, con, pos_full, pos_red, slots, n_full, n_red))
                    pos_full += n_full
                    pos_red += n_red
        self.total_full = pos_full
        self.total_dofs = pos_red

        first_w = next((i for i, b in enumerate(self.mult_blocks) if b.constraint.field == "w"),
                       len(self.mult_blocks))
        lu0 = self.mult_blocks[0].offset_red if self.mult_blocks else pos_red
        lw0 = (self.mult_blocks[first_w].offset_red if first_w < len(self.mult_blocks) else pos_red)
        self.slices = {
            "u": slice(0, 3 * Fr),
            "w": slice(3 * Fr, 6 * Fr),
            "lambda_n": slice(6 * Fr, 6 * Fr + n_ln_red),
            "lambda_u": slice(lu0, lw0),
            "lambda_w": slice(lw0, pos_red),
        }
        self._reduction = self._build_reduction() if self.wrap else None

    def _corner_drops(self, problem, edge, con):
        """Corner multiplier slots made redundant by an adjacent edge.

        When two edges meeting at a corner constrain the same field along
        the same global axis, the corner functional appears in both edge
        systems; one copy is dropped (always from the s-side edge) to keep
        the multiplier columns independent.
        """
        drops = set()
        if edge.startswith("r"):
            return drops
        if not (isinstance(con.direction, str) and con.direction in _GLOBAL_DIRS):
            return drops
        for other, slot in (("r_min", 0), ("r_max", self.nr - 1)):
            oc = problem.edges.get(other)
            if oc and any(c.field == con.field and c.direction == con.direction
                          for c in oc.constraints):
                drops.add(slot)
        return drops

    def grid_dof(self, block, gid, comp=0):
        ncomp = 3 if block in ("u", "w") else 1
        return self.offs_full[block] + ncomp * gid + comp

    def _reduced_gid(self, gid):
        ir, is_ = divmod(gid, self.ns)
        if self.wrap and ir == self.nr - 1:
            ir = 0
        return ir * self.ns + is_

    def _build_reduction(self):
        rows, cols = [], []
        for block, ncomp in (("u", 3), ("w", 3), ("lambda_n", 1)):
            if block == "lambda_n" and not self.has_lambda_n:
                continue
            for gid in range(self.n_cp):
                rg = self._reduced_gid(gid)
                for c in range(ncomp):
                    rows.append(self.offs_full[block] + ncomp * gid + c)
                    cols.append(self.offs_red[block] + ncomp * rg + c)
        for blk in self.mult_blocks:
            for pos, k in enumerate(blk.slots):
                kr = pos
                if self.wrap and blk.edge.startswith("s") and k == self.nr - 1:
                    kr = blk.slot_position(0)
                rows.append(blk.offset_full + pos)
                cols.append(blk.offset_red + kr)
        vals = np.ones(len(rows))
        return sp.coo_matrix((vals, (rows, cols)),
                             shape=(self.total_full, self.total_dofs)).tocsr()

    def reduce_matrix(self, A):
        if self._reduction is None:
            return A
        C = self._reduction
        return (C.T @ A @ C).tocsr()

    def reduce_vector(self, b):
        if self._reduction is None:
            return b
        return self._reduction.T @ b

    def expand(self, solution):
        """Field coefficients on the full control grid from a reduced vector.

        Returns (u_coeffs, w_coeffs), each of shape (n_cp, 3).
        """
        if self._reduction is not None:
            full = self._reduction @ solution
        else:
            full = solution
        F = self.n_cp
        return full[:3 * F].reshape(F, 3), full[3 * F:6 * F].reshape(F, 3)

    def edge_mult_slot(self, edge, gid):
        """Multiplier slot (within an edge block) of a full-grid function id."""
        ir, is_ = divmod(gid, self.ns)
        return is_ if edge.startswith("r") else ir

    def on_edge(self, edge, gid):
        ir, is_ = divmod(gid, self.ns)
        return {"r_min": ir == 0, "r_max": ir == self.nr - 1,
                "s_min": is_ == 0, "s_max": is_ == self.ns - 1}[edge]


@dataclass
class SaddleSystem:
    """Assembled symmetric block system (constraint blocks pre-scaled).

    Constraint rows and columns are multiplied by mult_scale to balance
    magnitudes against the elastic block; the solver undoes the scaling, so
    reported solutions are in physical units. k_physical holds the pure
    elastic [u, w] block (without any penalty term) for energy checks.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap
    mult_scale: float
    k_physical: sp.csr_matrix
    problem: ShellProblem


class _TripletBuffer:
    """COO accumulator flushed to CSR in bounded-size chunks."""

    def __init__(self, n, flush_at=12_000_000):
        self.n = n
        self.rows, self.cols, self.vals = [], [], []
        self.count = 0
        self.flush_at = flush_at
        self.acc = None

    def add(self, rows, cols, vals):
        self.rows.append(np.asarray(rows, dtype=np.int32).ravel())
        self.cols.append(np.asarray(cols, dtype=np.int32).ravel())
        self.vals.append(np.asarray(vals, dtype=float).ravel())
        self.count += self.rows[-1].size
        if self.count >= self.flush_at:
            self.flush()

    def flush(self):
        if not self.rows:
            return
        mat = sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(self.n, self.n)).tocsr()
        self.acc = mat if self.acc is None else self.acc + mat
        self.rows, self.cols, self.vals = [], [], []
        self.count = 0

    def matrix(self):
        self.flush()
        return self.acc if self.acc is not None else sp.csr_matrix((self.n, self.n))

    def matrix_symmetric(self):
        """Full symmetric matrix from upper-triangle-only contributions."""
        U = self.matrix()
        return U + U.T - sp.diags(U.diagonal())


def _voigt(S):
    return np.stack([S[..., 0, 0], S[..., 1, 1], S[..., 2, 2],
                     S[..., 0, 1], S[..., 0, 2], S[..., 1, 2]], axis=-1)


def _sym_outer_voigt(V, gN):
    """Voigt strains of sym(V[:, :, c] o gN[:, a, :]) for every dof (a, c).

    V: (m, 3, 3) whose column c is the component-direction image; gN:
    (m, na, 3) tangential shape gradients. Returns (m, 3*na, 6) with dof
    index a*3 + c.
    """
    O = np.einsum("mic,maj->macij", V, gN)
    S = 0.5 * (O + np.swapaxes(O, -1, -2))
    v = _voigt(S)
    m, na = gN.shape[:2]
    return v.reshape(m, 3 * na, 6)


try:
    from scipy.linalg.blas import dsyrk as _dsyrk
except ImportError:  # pragma: no cover
    _dsyrk = None


def _elastic_strain_factors(mat, fb, N, gN, na):
    """Scaled strain-factor matrix F with K_e = F F^T (per element).

    Each quadrature point contributes 20 columns: voigt membrane, bending
    and shear strains scaled by the square roots of their stiffness factors
    plus two trace columns for the Lame term; rows are the element DOFs
    ordered [u(a, comp), w(a, comp)].
    """
    m = len(fb)
    t = mat.thickness
    sw = np.sqrt(_VOIGT_W)
    E_mem = _sym_outer_voigt(fb.P, gN)      # membrane (u) == bending (w) operator
    E_b_u = _sym_outer_voigt(fb.H, gN)
    E_s_u = _sym_outer_voigt(fb.Q, gN)
    eye = np.broadcast_to(np.eye(3), (m, 3, 3))
    nsym = _voigt(0.5 * (np.einsum("mi,mjc->mcij", fb.n, eye)
                         + np.einsum("mic,mj->mcij", eye, fb.n)))
    E_s_w = np.einsum("ma,mcv->macv", N, nsym).reshape(m, 3 * na, 6)

    nd = 6 * na
    F = np.zeros((m, nd, 20))
    c_m, c_b, c_s = np.sqrt(2 * mat.mu * t), np.sqrt(2 * mat.mu * t**3 / 12), np.sqrt(2 * mat.shear_stiffness)
    l_m, l_b = np.sqrt(mat.lam * t), np.sqrt(mat.lam * t**3 / 12)
    F[:, :3 * na, 0:6] = c_m * (E_mem * sw)
    F[:, :3 * na, 6] = l_m * (E_mem @ _VOIGT_TR)
    F[:, :3 * na, 7:13] = c_b * (E_b_u * sw)
    F[:, 3 * na:, 7:13] = c_b * (E_mem * sw)
    F[:, :3 * na, 13] = l_b * (E_b_u @ _VOIGT_TR)
    F[:, 3 * na:, 13] = l_b * (E_mem @ _VOIGT_TR)
    F[:, :3 * na, 14:20] = c_s * (E_s_u * sw)
    F[:, 3 * na:, 14:20] = c_s * (E_s_w * sw)
    return F


def _syrk_upper(F):
    """Upper triangle of F F^T (F given as (nd, k))."""
    if _dsyrk is not None:
        return _dsyrk(1.0, F, lower=0)
    return F @ F.T


def assemble(problem: ShellProblem) -> SaddleSystem:
    """Assemble the saddle-point system for a shell problem."""
    patch = problem.patch
    geom = problem.geom
    mat = problem.material
    dm = DofMap(problem)
    pr, ps = patch.degrees
    ngr, ngs = pr + 1 + problem.qbump, ps + 1 + problem.qbump

    N_full = dm.total_full
    ebuf = _TripletBuffer(N_full)   # elastic block, upper triangle only
    cbuf = _TripletBuffer(N_full)   # multiplier couplings / penalty, full
    rhs = np.zeros(N_full)
    f_fn = problem.f_fn()
    c_fn = problem.c_fn()
    penalty = problem.constraint_mode == "penalty"

    spans_r, spans_s = patch.kv_r.spans, patch.kv_s.spans
    tabs_r = [nurbs.ders_table_1d(patch.kv_r, gauss_1d(ngr, s)[0], 1) for s in spans_r]
    tabs_s = [nurbs.ders_table_1d(patch.kv_s, gauss_1d(ngs, s)[0], 1) for s in spans_s]
    w_r = [gauss_1d(ngr, s)[1] for s in spans_r]
    w_s = [gauss_1d(ngs, s)[1] for s in spans_s]
    x_r = [gauss_1d(ngr, s)[0] for s in spans_r]
    x_s = [gauss_1d(ngs, s)[0] for s in spans_s]

    F_cp = dm.n_cp
    iu0, iu1 = np.triu_indices(6 * (pr + 1) * (ps + 1))
    for er, span_r in enumerate(spans_r):
        for es, span_s in enumerate(spans_s):
            ids, R = nurbs.rational_from_tables(
                patch, tabs_r[er][0], tabs_s[es][0], tabs_r[er][1], tabs_s[es][1], 1)
            na = len(ids)
            fb = geo.frames_grid(geom, x_r[er], x_s[es])
            cw = np.outer(w_r[er], w_s[es]).ravel() * fb.sqrt_det_g

            N = R[0, 0]
            dN = np.stack([R[1, 0], R[0, 1]], axis=-1)
            gN = np.einsum("mxd,mad->max", fb.B, dN)

            Ffac = _elastic_strain_factors(mat, fb, N, gN, na)
            Ffac *= np.sqrt(cw)[:, None, None]
            nd = 6 * na
            Fmat = np.ascontiguousarray(np.swapaxes(Ffac, 0, 1).reshape(nd, -1))
            Ke = _syrk_upper(Fmat)

            udofs = (3 * ids[:, None] + np.arange(3)).ravel()
            wdofs = udofs + 3 * F_cp
            edofs = np.concatenate([udofs, wdofs])
            ebuf.add(edofs[iu0], edofs[iu1], Ke[iu0, iu1])

            fv = f_fn(fb.x)
            cv = c_fn(fb.x)
            rhs[udofs] += np.einsum("m,ma,mc->ac", cw, N, fv).ravel()
            rhs[wdofs] += np.einsum("m,ma,mc->ac", cw, N, cv).ravel()

            if dm.has_lambda_n:
                L = np.einsum("m,ma,mc,mb->acb", cw, N, fb.n, N).reshape(3 * na, na)
                ldofs = dm.offs_full["lambda_n"] + ids
                cbuf.add(np.repeat(wdofs, na), np.tile(ldofs, 3 * na), L)
                cbuf.add(np.repeat(ldofs, 3 * na), np.tile(wdofs, na), L.T)
            if penalty:
                D = np.einsum("ma,mc->mac", N, fb.n).reshape(len(fb), 3 * na)
                Kp = problem.penalty_alpha * ((D * cw[:, None]).T @ D)
                cbuf.add(np.repeat(wdofs, 3 * na), np.tile(wdofs, 3 * na), Kp)

    _assemble_boundary(problem, dm, cbuf, rhs)

    K_elastic = ebuf.matrix_symmetric()
    K = dm.reduce_matrix(K_elastic + cbuf.matrix())
    b = dm.reduce_vector(rhs)
    nphys = dm.slices["w"].stop
    K_phys = dm.reduce_matrix(K_elastic)[:nphys, :nphys].tocsr()

    diag = np.abs(K.diagonal()[:nphys])
    scale = float(diag[diag > 0].mean()) if np.any(diag > 0) else 1.0
    s = np.ones(dm.total_dofs)
    s[nphys:] = scale
    S = sp.diags(s)
    K = (S @ K @ S).tocsr()
    b = S @ b
    return SaddleSystem(matrix=K, rhs=b, dofmap=dm, mult_scale=scale,
                        k_physical=K_phys, problem=problem)


def _assemble_boundary(problem, dm, kbuf, rhs):
    patch = problem.patch
    geom = problem.geom
    pr, ps = patch.degrees
    F = dm.n_cp
    blocks_by_edge = {}
    for blk in dm.mult_blocks:
        blocks_by_edge.setdefault(blk.edge, []).append(blk)

    for edge in EDGE_ORDER:
        cond = problem.edges.get(edge)
        if cond is None:
            continue
        blocks = blocks_by_edge.get(edge, [])
        has_neumann = cond.traction is not None or cond.moment is not None
        if not blocks and not has_neumann:
            continue
        kv_t = patch.kv_s if edge.startswith("r") else patch.kv_r
        n_t = (max(pr, ps) + 1 + problem.qbump)
        for span in kv_t.spans:
            tv, tw = gauss_1d(n_t, span)
            t_b, n_b, ds, fb = geo.boundary_frames_grid(geom, edge, tv)
            cw = tw * ds
            if edge.startswith("r"):
                rvals = [geom.domain[0][0] if edge == "r_min" else geom.domain[0][1]]
                ids, R = nurbs.eval_basis_grid(patch, rvals, tv, max_deriv=0)
            else:
                svals = [geom.domain[1][0] if edge == "s_min" else geom.domain[1][1]]
                ids, R = nurbs.eval_basis_grid(patch, tv, svals, max_deriv=0)
            N = R[0, 0]
            na = len(ids)

            if cond.traction is not None:
                pv = _as_vec_fn(cond.traction)(fb.x)
                udofs = (3 * ids[:, None] + np.arange(3)).ravel()
                rhs[udofs] += np.einsum("m,ma,mc->ac", cw, N, pv).ravel()
            if cond.moment is not None:
                mv = _as_vec_fn(cond.moment)(fb.x)
                wdofs = 3 * F + (3 * ids[:, None] + np.arange(3)).ravel()
                rhs[wdofs] += np.einsum("m,ma,mc->ac", cw, N, mv).ravel()

            if not blocks:
                continue
            trace_mask = np.array([dm.on_edge(edge, g) for g in ids])
            tr_ids = ids[trace_mask]
            slots = np.array([dm.edge_mult_slot(edge, g) for g in tr_ids])
            for blk in blocks:
                con = blk.constraint
                pos = np.array([blk.slot_position(k) for k in slots])
                keep = pos >= 0
                if not np.any(keep):
                    continue
                Ntr = N[:, trace_mask][:, keep]
                mdofs = blk.offset_full + pos[keep]
                dirs = con.direction_at(t_b, n_b, fb.n)
                fdofs = (3 * ids[:, None] + np.arange(3)).ravel()
                if con.field == "w":
                    fdofs = fdofs + 3 * F
                nb = len(mdofs)
                L = np.einsum("m,ma,mc,mb->acb", cw, N, dirs, Ntr).reshape(3 * na, nb)
                kbuf.add(np.repeat(fdofs, nb), np.tile(mdofs, 3 * na), L)
                kbuf.add(np.repeat(mdofs, 3 * na), np.tile(fdofs, nb), L.T)
                gv = _as_scalar_fn(con.value)(fb.x)
                rhs[mdofs] += np.einsum("m,mb->b", cw * gv, Ntr)
