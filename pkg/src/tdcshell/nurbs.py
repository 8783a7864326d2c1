"""Tensor-product NURBS bases on rectangular parameter domains.

Evaluation supplies mixed parametric derivatives up to order 3; knot
insertion and degree elevation preserve the mapped geometry pointwise so a
patch can be refined without moving the surface.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DomainError

_SNAP = 1e-10

# Mixed-derivative orders (a, b) = (d/dr^a, d/ds^b), graded by total order.
_ORDERS = [
    (0, 0),
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
]


def find_span(knots, p, u):
    """Index k of the knot span with knots[k] <= u < knots[k+1].

    The right end of the domain maps to the last nontrivial span.
    """
    n = len(knots) - p - 1
    if u >= knots[n]:
        k = n - 1
        while knots[k] == knots[k + 1]:
            k -= 1
        return k
    lo, hi = p, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if u < knots[mid]:
            hi = mid
        else:
            lo = mid
    return lo


def bspline_ders(knots, p, span, u, nders):
    """B-spline basis values and derivatives at one point (Cox-de Boor).

    Returns an array of shape (nders+1, p+1): row k holds the k-th
    derivatives of the p+1 functions active on the span. Rows beyond the
    degree are zero.
    """
    ndu = np.ones((p + 1, p + 1))
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    for j in range(1, p + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    nd = min(nders, p)
    ders = np.zeros((nders + 1, p + 1))
    ders[0] = ndu[:, p]

    a = np.ones((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1

    fac = float(p)
    for k in range(1, nd + 1):
        ders[k] *= fac
        fac *= p - k
    return ders


@dataclass(frozen=True)
class KnotVector:
    """Clamped (open) knot vector of a given polynomial degree."""

    degree: int
    knots: np.ndarray

    def __post_init__(self):
        kn = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", kn)
        p = self.degree
        if p < 1:
            raise ValueError("degree must be >= 1")
        if len(kn) < 2 * (p + 1):
            raise ValueError("knot vector too short for degree")
        if np.any(np.diff(kn) < 0):
            raise ValueError("knots must be nondecreasing")
        if not (np.allclose(kn[: p + 1], kn[0]) and np.allclose(kn[-p - 1:], kn[-1])):
            raise ValueError("knot vector must be clamped (ends repeated degree+1 times)")

    @property
    def n_basis(self):
        return len(self.knots) - self.degree - 1

    @property
    def domain(self):
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def breakpoints(self):
        return np.unique(self.knots)

    @property
    def spans(self):
        bp = self.breakpoints
        return list(zip(bp[:-1], bp[1:]))

    @property
    def n_spans(self):
        return len(self.breakpoints) - 1

    def greville(self):
        p = self.degree
        return np.array([self.knots[i + 1: i + p + 1].mean() for i in range(self.n_basis)])

    def snap(self, u):
        a, b = self.domain
        tol = _SNAP * max(1.0, abs(a), abs(b))
        if u < a - tol or u > b + tol:
            raise DomainError(f"parameter {u} outside knot domain [{a}, {b}]")
        return min(max(u, a), b)


def uniform_knot_vector(degree, n_spans, domain=(0.0, 1.0)):
    """Clamped knot vector with n_spans equal knot spans."""
    a, b = domain
    interior = a + (b - a) * np.arange(1, n_spans) / n_spans
    knots = np.concatenate([np.full(degree + 1, a), interior, np.full(degree + 1, b)])
    return KnotVector(degree, knots)


@dataclass(frozen=True)
class NurbsPatch:
    """Tensor-product rational patch: basis data plus a 3D control net.

    control_points has shape (n_r, n_s, 3) and weights (n_r, n_s); all
    weights must be positive. Global basis ids are row-major over the
    control grid: id = i_r * n_s + i_s.
    """

    kv_r: KnotVector
    kv_s: KnotVector
    control_points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        cp = np.asarray(self.control_points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "control_points", cp)
        object.__setattr__(self, "weights", w)
        nr, ns = self.kv_r.n_basis, self.kv_s.n_basis
        if cp.shape != (nr, ns, 3):
            raise ValueError(f"control grid must have shape {(nr, ns, 3)}, got {cp.shape}")
        if w.shape != (nr, ns):
            raise ValueError(f"weight grid must have shape {(nr, ns)}, got {w.shape}")
        if np.any(w <= 0):
            raise ValueError("all weights must be positive")

    @property
    def degrees(self):
        return self.kv_r.degree, self.kv_s.degree

    @property
    def n_basis(self):
        return self.kv_r.n_basis, self.kv_s.n_basis

    @property
    def domain(self):
        return self.kv_r.domain, self.kv_s.domain

    def homogeneous(self):
        """Control net in homogeneous form (w*x, w*y, w*z, w), shape (n_r, n_s, 4)."""
        hw = np.empty(self.weights.shape + (4,))
        hw[..., :3] = self.control_points * self.weights[..., None]
        hw[..., 3] = self.weights
        return hw

    def to_json(self):
        return json.dumps({
            "degree_r": self.kv_r.degree,
            "degree_s": self.kv_s.degree,
            "knots_r": self.kv_r.knots.tolist(),
            "knots_s": self.kv_s.knots.tolist(),
            "control_points": self.control_points.tolist(),
            "weights": self.weights.tolist(),
        })

    @staticmethod
    def from_json(text):
        d = json.loads(text)
        return NurbsPatch(
            KnotVector(d["degree_r"], np.array(d["knots_r"])),
            KnotVector(d["degree_s"], np.array(d["knots_s"])),
            np.array(d["control_points"]),
            np.array(d["weights"]),
        )


def _patch_from_homogeneous(kv_r, kv_s, hw):
    w = hw[..., 3]
    cp = hw[..., :3] / w[..., None]
    return NurbsPatch(kv_r, kv_s, cp, w)


def make_field_patch(degree, n_spans, domain=((0.0, 1.0), (0.0, 1.0))):
    """Unit-weight patch used as a discrete field basis.

    Control points sit on the Greville grid in the parameter plane; they
    carry no geometric meaning when the geometry comes from an analytic map.
    """
    kv_r = uniform_knot_vector(degree, n_spans, domain[0])
    kv_s = uniform_knot_vector(degree, n_spans, domain[1])
    gr, gs = kv_r.greville(), kv_s.greville()
    cp = np.zeros((kv_r.n_basis, kv_s.n_basis, 3))
    cp[..., 0] = gr[:, None]
    cp[..., 1] = gs[None, :]
    return NurbsPatch(kv_r, kv_s, cp, np.ones((kv_r.n_basis, kv_s.n_basis)))


@dataclass
class BasisEval:
    """Active rational basis values and parametric derivatives at a point.

    d1 columns are (d/dr, d/ds); d2 columns (rr, rs, ss); d3 columns
    (rrr, rrs, rss, sss). Arrays beyond the requested order are None.
    """

    active_indices: np.ndarray
    values: np.ndarray
    d1: np.ndarray | None = None
    d2: np.ndarray | None = None
    d3: np.ndarray | None = None


def _grid_active_ids(patch, span_r, span_s):
    pr, ps = patch.degrees
    ns = patch.kv_s.n_basis
    ir = np.arange(span_r - pr, span_r + 1)
    is_ = np.arange(span_s - ps, span_s + 1)
    return (ir[:, None] * ns + is_[None, :]).ravel(), ir, is_


def ders_table_1d(kv: KnotVector, vals, max_deriv):
    """1D derivative tables at points sharing one span: (span, (m, 4, p+1))."""
    vals = np.array([kv.snap(v) for v in np.atleast_1d(np.asarray(vals, dtype=float))])
    span = find_span(kv.knots, kv.degree, vals[0])
    tab = np.stack([bspline_ders(kv.knots, kv.degree, span, v, max_deriv) for v in vals])
    return span, tab


def rational_from_tables(patch, span_r, span_s, tab_r, tab_s, max_deriv):
    """Rational basis tables from per-direction B-spline tables.

    tab_r/tab_s come from ders_table_1d. Returns (active_ids, tables) with
    tables[(a, b)] of shape (mr*ms, n_active), points row-major over (r, s).
    """
    ids, ir, is_ = _grid_active_ids(patch, span_r, span_s)
    w = patch.weights[np.ix_(ir, is_)].ravel()

    orders = [(a, b) for (a, b) in _ORDERS if a + b <= max_deriv]
    wB = {}
    W = {}
    for (a, b) in orders:
        t = np.einsum("mi,nj->mnij", tab_r[:, a, :], tab_s[:, b, :])
        t = t.reshape(tab_r.shape[0] * tab_s.shape[0], -1) * w
        wB[a, b] = t
        W[a, b] = t.sum(axis=1)

    R = {}
    W00 = W[0, 0][:, None]
    for (a, b) in orders:
        acc = wB[a, b]
        for c in range(a + 1):
            for d in range(b + 1):
                if (c, d) == (a, b):
                    continue
                acc = acc - comb(a, c) * comb(b, d) * R[c, d] * W[a - c, b - d][:, None]
        R[a, b] = acc / W00
    return ids, R


def eval_basis_grid(patch, rvals, svals, max_deriv=1):
    """Rational basis (and derivatives) on a tensor grid of points.

    All rvals must lie in a single knot span of kv_r, all svals in a single
    span of kv_s. Returns (active_ids, tables) where tables maps derivative
    order (a, b) to an array of shape (len(rvals)*len(svals), n_active),
    points ordered row-major over (r, s).
    """
    if not 0 <= max_deriv <= 3:
        raise ValueError("max_deriv must be in 0..3")
    span_r, tab_r = ders_table_1d(patch.kv_r, rvals, max_deriv)
    span_s, tab_s = ders_table_1d(patch.kv_s, svals, max_deriv)
    return rational_from_tables(patch, span_r, span_s, tab_r, tab_s, max_deriv)


def eval_basis(patch, r, max_deriv=1):
    """Active rational basis functions at one parameter point.

    Parameters
    ----------
    patch : NurbsPatch
    r : (2,) sequence, parameter point (r, s)
    max_deriv : int in 0..3, highest total derivative order requested
    """
    ids, R = eval_basis_grid(patch, [r[0]], [r[1]], max_deriv)
    ev = BasisEval(active_indices=ids, values=R[0, 0][0])
    if max_deriv >= 1:
        ev.d1 = np.stack([R[1, 0][0], R[0, 1][0]], axis=1)
    if max_deriv >= 2:
        ev.d2 = np.stack([R[2, 0][0], R[1, 1][0], R[0, 2][0]], axis=1)
    if max_deriv >= 3:
        ev.d3 = np.stack([R[3, 0][0], R[2, 1][0], R[1, 2][0], R[0, 3][0]], axis=1)
    return ev


def map_point(patch, r, s):
    """Physical point of the patch map at parameter (r, s)."""
    ids, R = eval_basis_grid(patch, [r], [s], 0)
    cp = patch.control_points.reshape(-1, 3)[ids]
    return R[0, 0][0] @ cp


def _insert_knot_1d(knots, p, coeffs, u):
    """Boehm insertion of a single knot; coeffs has the basis axis first."""
    k = find_span(knots, p, u)
    n = coeffs.shape[0]
    out = np.empty((n + 1,) + coeffs.shape[1:])
    out[: k - p + 1] = coeffs[: k - p + 1]
    out[k + 1:] = coeffs[k:]
    for i in range(k - p + 1, k + 1):
        alpha = (u - knots[i]) / (knots[i + p] - knots[i])
        out[i] = alpha * coeffs[i] + (1.0 - alpha) * coeffs[i - 1]
    return np.insert(knots, k + 1, u), out


def _insert_knots_axis(patch_kv, coeffs, new_knots):
    knots = patch_kv.knots.copy()
    for u in sorted(new_knots):
        knots, coeffs = _insert_knot_1d(knots, patch_kv.degree, coeffs, u)
    return KnotVector(patch_kv.degree, knots), coeffs


def refine_uniform(patch, n_per_side):
    """Insert knots so the patch has n_per_side uniform spans per direction.

    The surface map is unchanged pointwise. Existing interior knots must
    already lie on the uniform target grid.
    """
    if n_per_side < 1:
        raise ValueError("n_per_side must be >= 1")
    hw = patch.homogeneous()
    kvs = [patch.kv_r, patch.kv_s]
    for axis in (0, 1):
        kv = kvs[axis]
        a, b = kv.domain
        targets = a + (b - a) * np.arange(1, n_per_side) / n_per_side
        existing = kv.breakpoints[1:-1]
        tol = 1e-12 * max(1.0, abs(a), abs(b))
        for e in existing:
            if len(targets) == 0 or np.min(np.abs(targets - e)) > tol:
                raise ValueError("existing interior knots do not lie on the uniform target grid")
        missing = [t for t in targets if len(existing) == 0 or np.min(np.abs(existing - t)) > tol]
        coeffs = hw if axis == 0 else np.swapaxes(hw, 0, 1)
        kv_new, coeffs = _insert_knots_axis(kv, coeffs, missing)
        hw = coeffs if axis == 0 else np.swapaxes(coeffs, 0, 1)
        kvs[axis] = kv_new
    return _patch_from_homogeneous(kvs[0], kvs[1], hw)


def _insertion_matrix(kv_coarse, knots_to_insert):
    """Matrix mapping coarse coefficients to the refined knot vector."""
    mat = np.eye(kv_coarse.n_basis)
    knots = kv_coarse.knots.copy()
    for u in sorted(knots_to_insert):
        knots, mat = _insert_knot_1d(knots, kv_coarse.degree, mat, u)
    return mat


def _bezier_elevate_1d(kv, coeffs, t):
    """Elevate one parametric direction by t degrees (exact, pointwise).

    Decomposes into Bezier segments, elevates each, then re-expresses the
    result in the maximally smooth elevated space by inverting the
    corresponding knot-insertion map (the system is consistent, so the
    least-squares solve is exact up to roundoff).
    """
    p = kv.degree
    a, b = kv.domain
    bp = kv.breakpoints
    interior = bp[1:-1]
    mult = {u: int(np.sum(np.isclose(kv.knots, u))) for u in interior}

    # Bezier decomposition: raise every interior multiplicity to p.
    to_insert = []
    for u in interior:
        to_insert.extend([u] * (p - mult[u]))
    knots = kv.knots.copy()
    bez = coeffs
    for u in sorted(to_insert):
        knots, bez = _insert_knot_1d(knots, p, bez, u)

    q = p + t
    n_seg = len(bp) - 1
    elev = np.empty((n_seg * q + 1,) + coeffs.shape[1:])
    coef = np.zeros((q + 1, p + 1))
    for i in range(q + 1):
        for j in range(max(0, i - t), min(p, i) + 1):
            coef[i, j] = comb(p, j) * comb(t, i - j) / comb(q, i)
    for seg in range(n_seg):
        pts = bez[seg * p: seg * p + p + 1]
        qts = np.tensordot(coef, pts, axes=(1, 0))
        start = seg * q
        if seg == 0:
            elev[start: start + q + 1] = qts
        else:
            elev[start + 1: start + q + 1] = qts[1:]

    smooth_knots = [a] * (q + 1)
    removable = []
    for u in interior:
        m_new = mult[u] + t
        smooth_knots.extend([u] * m_new)
        removable.extend([u] * (q - m_new))
    smooth_knots.extend([b] * (q + 1))
    kv_smooth = KnotVector(q, np.array(smooth_knots))

    mat = _insertion_matrix(kv_smooth, removable)
    sol, *_ = np.linalg.lstsq(mat, elev.reshape(elev.shape[0], -1), rcond=None)
    return kv_smooth, sol.reshape((kv_smooth.n_basis,) + coeffs.shape[1:])


def elevate_degree(patch, target_p):
    """Raise the patch degree to target_p in both directions.

    The mapped surface is preserved pointwise; interior continuity of the
    original patch is preserved as well.
    """
    pr, ps = patch.degrees
    if target_p < pr or target_p < ps:
        raise ValueError(f"target degree {target_p} below current degrees {(pr, ps)}")
    hw = patch.homogeneous()
    kvs = [patch.kv_r, patch.kv_s]
    for axis, p in ((0, pr), (1, ps)):
        t = target_p - p
        if t == 0:
            continue
        coeffs = hw if axis == 0 else np.swapaxes(hw, 0, 1)
        kv_new, coeffs = _bezier_elevate_1d(kvs[axis], coeffs, t)
        hw = coeffs if axis == 0 else np.swapaxes(coeffs, 0, 1)
        kvs[axis] = kv_new
    return _patch_from_homogeneous(kvs[0], kvs[1], hw)
