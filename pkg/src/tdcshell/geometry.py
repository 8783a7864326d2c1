"""Pointwise differential geometry of embedded middle surfaces.

All operators live in global Cartesian coordinates: projectors onto the
tangent plane, tangential gradients pulled back through the metric, the
shape operator (surface gradient of the unit normal) and its tangential
derivatives. Geometry may come from an analytic parametrization or from a
NURBS patch; both expose parametric derivatives up to order 3.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import nurbs
from .errors import CapabilityError, DegenerateGeometryError, DomainError

_EDGES = ("r_min", "r_max", "s_min", "s_max")

_JET3 = ("xrrr", "xrrs", "xrss", "xsss")


@dataclass
class MapJet:
    """Parametric derivatives of the surface map at a batch of points."""

    x: np.ndarray
    xr: np.ndarray
    xs: np.ndarray
    xrr: np.ndarray
    xrs: np.ndarray
    xss: np.ndarray
    xrrr: np.ndarray | None = None
    xrrs: np.ndarray | None = None
    xrss: np.ndarray | None = None
    xsss: np.ndarray | None = None


class GeometryMap:
    """Base class: a smooth map from a parameter rectangle into R^3."""

    kind = "analytic"

    def __init__(self, domain, wrap_r=False):
        self.domain = (tuple(float(v) for v in domain[0]),
                       tuple(float(v) for v in domain[1]))
        self.wrap_r = wrap_r

    def jet(self, R, S, order=2) -> MapJet:
        raise NotImplementedError

    def jet_grid(self, rvals, svals, order=2) -> MapJet:
        """Jet on a tensor grid of points, row-major over (r, s)."""
        rvals = np.atleast_1d(np.asarray(rvals, dtype=float))
        svals = np.atleast_1d(np.asarray(svals, dtype=float))
        return self.jet(np.repeat(rvals, len(svals)), np.tile(svals, len(rvals)), order)


class AnalyticGeometry(GeometryMap):
    """Geometry defined by a closed-form map with hand-coded derivatives."""

    def __init__(self, jet_fn: Callable, domain, wrap_r=False, name="analytic"):
        super().__init__(domain, wrap_r)
        self._jet_fn = jet_fn
        self.name = name

    def jet(self, R, S, order=2):
        R = np.atleast_1d(np.asarray(R, dtype=float))
        S = np.atleast_1d(np.asarray(S, dtype=float))
        return self._jet_fn(R, S, order)


class NurbsGeometry(GeometryMap):
    """Geometry given by the control net of a NURBS patch."""

    kind = "nurbs"

    def __init__(self, patch: nurbs.NurbsPatch, wrap_r=False, name="nurbs"):
        super().__init__(patch.domain, wrap_r)
        self.patch = patch
        self.name = name

    def _jet_from_tables(self, ids, R, m, order):
        cp = self.patch.control_points.reshape(-1, 3)[ids]
        jet = MapJet(R[0, 0] @ cp, R[1, 0] @ cp, R[0, 1] @ cp,
                     R[2, 0] @ cp, R[1, 1] @ cp, R[0, 2] @ cp)
        if order >= 3:
            jet.xrrr = R[3, 0] @ cp
            jet.xrrs = R[2, 1] @ cp
            jet.xrss = R[1, 2] @ cp
            jet.xsss = R[0, 3] @ cp
        return jet

    def jet_grid(self, rvals, svals, order=2):
        rvals = np.atleast_1d(np.asarray(rvals, dtype=float))
        svals = np.atleast_1d(np.asarray(svals, dtype=float))
        ids, R = nurbs.eval_basis_grid(self.patch, rvals, svals, max_deriv=min(order + 1, 3))
        return self._jet_from_tables(ids, R, len(rvals) * len(svals), order)

    def jet(self, R, S, order=2):
        R = np.atleast_1d(np.asarray(R, dtype=float))
        S = np.atleast_1d(np.asarray(S, dtype=float))
        parts = [self.jet_grid([r], [s], order) for r, s in zip(R, S)]
        out = MapJet(*(np.concatenate([getattr(p, f) for p in parts])
                       for f in ("x", "xr", "xs", "xrr", "xrs", "xss")))
        if order >= 3:
            for f in _JET3:
                setattr(out, f, np.concatenate([getattr(p, f) for p in parts]))
        return out


def plate(lx=1.0, ly=1.0):
    """Flat rectangle in the z=0 plane, (r, s) in [0,1]^2."""
    def jet_fn(R, S, order):
        m = len(R)
        z = np.zeros((m, 3))
        x = np.stack([lx * R, ly * S, np.zeros(m)], axis=1)
        xr = np.tile([lx, 0.0, 0.0], (m, 1))
        xs = np.tile([0.0, ly, 0.0], (m, 1))
        j = MapJet(x, xr, xs, z, z.copy(), z.copy())
        if order >= 3:
            j.xrrr = j.xrrs = j.xrss = j.xsss = z.copy()
        return j
    return AnalyticGeometry(jet_fn, ((0.0, 1.0), (0.0, 1.0)), name="plate")


def cylinder_panel(radius=25.0, length=50.0, angle_deg=80.0):
    """Cylindrical sector: angle about the y axis, r along the arc, s axial.

    The crown sits at (0, y, radius); the cross-product normal points
    radially outward (upward at the crown).
    """
    phi = np.deg2rad(angle_deg)

    def jet_fn(R, S, order):
        th = phi * (R - 0.5)
        sin, cos = np.sin(th), np.cos(th)
        zero = np.zeros_like(R)
        x = np.stack([radius * sin, length * S, radius * cos], axis=1)
        xr = np.stack([radius * phi * cos, zero, -radius * phi * sin], axis=1)
        xs = np.stack([zero, np.full_like(R, length), zero], axis=1)
        xrr = np.stack([-radius * phi**2 * sin, zero, -radius * phi**2 * cos], axis=1)
        j = MapJet(x, xr, xs, xrr, np.zeros_like(x), np.zeros_like(x))
        if order >= 3:
            j.xrrr = np.stack([-radius * phi**3 * cos, zero, radius * phi**3 * sin], axis=1)
            j.xrrs = np.zeros_like(x)
            j.xrss = np.zeros_like(x)
            j.xsss = np.zeros_like(x)
        return j
    return AnalyticGeometry(jet_fn, ((0.0, 1.0), (0.0, 1.0)), name="cylinder_panel")


def hyperbolic_paraboloid():
    """Saddle z = x^2 - y^2 over [-1/2, 1/2]^2, upward-leaning normal."""
    def jet_fn(R, S, order):
        x1 = R - 0.5
        y1 = S - 0.5
        one = np.ones_like(R)
        zero = np.zeros_like(R)
        x = np.stack([x1, y1, x1**2 - y1**2], axis=1)
        xr = np.stack([one, zero, 2 * x1], axis=1)
        xs = np.stack([zero, one, -2 * y1], axis=1)
        xrr = np.stack([zero, zero, 2 * one], axis=1)
        xss = np.stack([zero, zero, -2 * one], axis=1)
        j = MapJet(x, xr, xs, xrr, np.zeros_like(x), xss)
        if order >= 3:
            z3 = np.zeros_like(x)
            j.xrrr = j.xrrs = j.xrss = j.xsss = z3
        return j
    return AnalyticGeometry(jet_fn, ((0.0, 1.0), (0.0, 1.0)), name="hyperbolic_paraboloid")


def flower_shell(mean_radius=2.3, taper=0.8, ripple=0.3, n_petals=6):
    """Closed annular shell with rippled inner/outer boundaries on z = 0.

    theta = pi (r + 1) runs once around; the patch wraps in r. The radius
    at (r, s) is mean_radius - s (taper + ripple cos(n_petals theta)) and
    the height is 1 - s^2, so both s = +/-1 boundary curves lie in z = 0.
    """
    def jet_fn(R, S, order):
        th = np.pi * (R + 1.0)
        cth, sth = np.cos(th), np.sin(th)
        e = np.stack([cth, sth], axis=1)
        ep = np.stack([-sth, cth], axis=1)
        nt = n_petals
        g = taper + ripple * np.cos(nt * th)
        g1 = -ripple * nt * np.sin(nt * th)
        g2 = -ripple * nt**2 * np.cos(nt * th)
        g3 = ripple * nt**3 * np.sin(nt * th)
        rho = mean_radius - S * g
        rho_t = -S * g1
        rho_tt = -S * g2
        rho_ttt = -S * g3
        rho_s = -g
        rho_st = -g1
        rho_stt = -g2

        def polar(a, b):
            return a[:, None] * e + b[:, None] * ep

        zero = np.zeros_like(R)
        pi = np.pi
        xy = polar(rho, zero)
        x = np.column_stack([xy, 1.0 - S**2])
        xr = np.column_stack([pi * polar(rho_t, rho), zero])
        xs = np.column_stack([polar(rho_s, zero), -2.0 * S])
        xrr = np.column_stack([pi**2 * polar(rho_tt - rho, 2 * rho_t), zero])
        xrs = np.column_stack([pi * polar(rho_st, rho_s), zero])
        xss = np.column_stack([polar(np.zeros_like(R), zero), np.full_like(R, -2.0)])
        j = MapJet(x, xr, xs, xrr, xrs, xss)
        if order >= 3:
            j.xrrr = np.column_stack([pi**3 * polar(rho_ttt - 3 * rho_t, 3 * rho_tt - rho), zero])
            j.xrrs = np.column_stack([pi**2 * polar(rho_stt - rho_s, 2 * rho_st), zero])
            j.xrss = np.zeros_like(x)
            j.xsss = np.zeros_like(x)
        return j
    return AnalyticGeometry(jet_fn, ((-1.0, 1.0), (-1.0, 1.0)), wrap_r=True,
                            name="flower_shell")


def sphere_patch(radius=1.0, u_range=(0.2, 1.1), v_range=(0.1, 0.9)):
    """Patch of a sphere away from the poles (test geometry)."""
    u0, u1 = u_range
    v0, v1 = v_range

    def jet_fn(R, S, order):
        u = u0 + (u1 - u0) * R
        v = v0 + (v1 - v0) * S
        du, dv = u1 - u0, v1 - v0
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        x = radius * np.stack([cv * cu, cv * su, sv], axis=1)
        zero = np.zeros_like(R)
        xr = radius * du * np.stack([-cv * su, cv * cu, zero], axis=1)
        xs = radius * dv * np.stack([-sv * cu, -sv * su, cv], axis=1)
        xrr = radius * du**2 * np.stack([-cv * cu, -cv * su, zero], axis=1)
        xrs = radius * du * dv * np.stack([sv * su, -sv * cu, zero], axis=1)
        xss = radius * dv**2 * np.stack([-cv * cu, -cv * su, -sv], axis=1)
        j = MapJet(x, xr, xs, xrr, xrs, xss)
        if order >= 3:
            j.xrrr = radius * du**3 * np.stack([cv * su, -cv * cu, zero], axis=1)
            j.xrrs = radius * du**2 * dv * np.stack([sv * cu, sv * su, zero], axis=1)
            j.xrss = radius * du * dv**2 * np.stack([cv * su, -cv * cu, zero], axis=1)
            j.xsss = radius * dv**3 * np.stack([sv * cu, sv * su, -cv], axis=1)
        return j
    return AnalyticGeometry(jet_fn, ((0.0, 1.0), (0.0, 1.0)), name="sphere_patch")


class FrameBatch:
    """Geometric quantities at a batch of surface points (arrays lead with m).

    Always present: x, J, G, Ginv, sqrt_det_g, n, P, Q, B (= J G^-1), H,
    kappa. With the third-order jet also: parametric derivatives n_r, n_s,
    P_r, P_s, Q_r, Q_s, B_r, B_s, H_r, H_s, J_r, J_s and the tangential
    derivative stack dH with dH[:, i] the derivative of H in direction e_i.
    """

    def __init__(self, **kw):
        self.__dict__.update(kw)
        self.has_jet = "dH" in kw

    def __len__(self):
        return self.x.shape[0]

    def __getitem__(self, sl):
        """View of a point range (arrays are not copied)."""
        out = FrameBatch(**{k: v[sl] for k, v in self.__dict__.items()
                            if isinstance(v, np.ndarray)})
        out.has_jet = self.has_jet
        return out


def _cross(a, b):
    return np.cross(a, b)


def frames(geom: GeometryMap, R, S, need_dH=False) -> FrameBatch:
    """Evaluate surface frames at parameter points (R[i], S[i])."""
    jet = geom.jet(R, S, order=3 if need_dH else 2)
    return frames_from_jet(jet, need_dH)


def frames_grid(geom: GeometryMap, rvals, svals, need_dH=False) -> FrameBatch:
    """Frames on a tensor grid of parameter values, row-major over (r, s)."""
    jet = geom.jet_grid(rvals, svals, order=3 if need_dH else 2)
    return frames_from_jet(jet, need_dH)


def frames_from_jet(jet: MapJet, need_dH=False) -> FrameBatch:
    m = jet.x.shape[0]

    J = np.stack([jet.xr, jet.xs], axis=2)
    G = np.einsum("mia,mib->mab", J, J)
    detG = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] ** 2
    scale = np.maximum(G[:, 0, 0] * G[:, 1, 1], 1e-300)
    if np.any(detG <= 1e-24 * scale):
        raise DegenerateGeometryError("surface map is rank-deficient at a requested point")
    Ginv = np.empty_like(G)
    Ginv[:, 0, 0] = G[:, 1, 1]
    Ginv[:, 1, 1] = G[:, 0, 0]
    Ginv[:, 0, 1] = -G[:, 0, 1]
    Ginv[:, 1, 0] = -G[:, 1, 0]
    Ginv /= detG[:, None, None]

    c = _cross(jet.xr, jet.xs)
    nrm = np.linalg.norm(c, axis=1)
    n = c / nrm[:, None]
    eye = np.broadcast_to(np.eye(3), (m, 3, 3))
    Q = np.einsum("mi,mj->mij", n, n)
    P = eye - Q
    B = np.einsum("mia,mab->mib", J, Ginv)

    c_r = _cross(jet.xrr, jet.xs) + _cross(jet.xr, jet.xrs)
    c_s = _cross(jet.xrs, jet.xs) + _cross(jet.xr, jet.xss)

    def unit_d1(ca):
        return (ca - n * np.einsum("mi,mi->m", n, ca)[:, None]) / nrm[:, None]

    n_r = unit_d1(c_r)
    n_s = unit_d1(c_s)
    Np = np.stack([n_r, n_s], axis=2)
    H = np.einsum("mia,mab,mjb->mij", Np, Ginv, J)
    kappa = np.einsum("mii->m", H)

    fb = FrameBatch(x=jet.x, J=J, G=G, Ginv=Ginv, sqrt_det_g=np.sqrt(detG),
                    n=n, P=P, Q=Q, B=B, H=H, kappa=kappa)
    if not need_dH:
        return fb

    if jet.xrrr is None:
        raise CapabilityError("third-order map derivatives required for dH")
    c_rr = _cross(jet.xrrr, jet.xs) + 2 * _cross(jet.xrr, jet.xrs) + _cross(jet.xr, jet.xrrs)
    c_rs = _cross(jet.xrrs, jet.xs) + _cross(jet.xrr, jet.xss) + _cross(jet.xr, jet.xrss)
    c_ss = _cross(jet.xrss, jet.xs) + 2 * _cross(jet.xrs, jet.xss) + _cross(jet.xr, jet.xsss)

    dot = lambda a, b: np.einsum("mi,mi->m", a, b)
    m_r = dot(n, c_r)
    m_s = dot(n, c_s)

    def unit_d2(ca, cb, cab, ma, mb):
        mab = (dot(ca, cb) + dot(c, cab)) / nrm - ma * mb / nrm
        return (cab / nrm[:, None]
                - ca * (mb / nrm**2)[:, None] - cb * (ma / nrm**2)[:, None]
                - c * (mab / nrm**2)[:, None] + 2 * c * (ma * mb / nrm**3)[:, None])

    n_rr = unit_d2(c_r, c_r, c_rr, m_r, m_r)
    n_rs = unit_d2(c_r, c_s, c_rs, m_r, m_s)
    n_ss = unit_d2(c_s, c_s, c_ss, m_s, m_s)

    J_r = np.stack([jet.xrr, jet.xrs], axis=2)
    J_s = np.stack([jet.xrs, jet.xss], axis=2)
    Np_r = np.stack([n_rr, n_rs], axis=2)
    Np_s = np.stack([n_rs, n_ss], axis=2)

    def d_frame(Ja, Npa, na):
        G_a = np.einsum("mia,mib->mab", Ja, J) + np.einsum("mia,mib->mab", J, Ja)
        Ginv_a = -np.einsum("mab,mbc,mcd->mad", Ginv, G_a, Ginv)
        B_a = np.einsum("mia,mab->mib", Ja, Ginv) + np.einsum("mia,mab->mib", J, Ginv_a)
        H_a = (np.einsum("mia,mab,mjb->mij", Npa, Ginv, J)
               + np.einsum("mia,mab,mjb->mij", Np, Ginv_a, J)
               + np.einsum("mia,mab,mjb->mij", Np, Ginv, Ja))
        P_a = -(np.einsum("mi,mj->mij", na, n) + np.einsum("mi,mj->mij", n, na))
        return G_a, Ginv_a, B_a, H_a, P_a

    _, _, B_r, H_r, P_r = d_frame(J_r, Np_r, n_r)
    _, _, B_s, H_s, P_s = d_frame(J_s, Np_s, n_s)

    dH = (np.einsum("mi,mjk->mijk", B[:, :, 0], H_r)
          + np.einsum("mi,mjk->mijk", B[:, :, 1], H_s))

    fb.n_r, fb.n_s = n_r, n_s
    fb.J_r, fb.J_s = J_r, J_s
    fb.B_r, fb.B_s = B_r, B_s
    fb.H_r, fb.H_s = H_r, H_s
    fb.P_r, fb.P_s = P_r, P_s
    fb.Q_r, fb.Q_s = -P_r, -P_s
    fb.dH = dH
    fb.has_jet = True
    return fb


@dataclass
class SurfaceFrame:
    """Frame at a single surface point."""

    x: np.ndarray
    J: np.ndarray
    G: np.ndarray
    sqrt_det_g: float
    n: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    H: np.ndarray
    kappa: float
    dH: np.ndarray | None = None


def frame_at(geom: GeometryMap, r, need_dH=False) -> SurfaceFrame:
    """Surface frame at one parameter point (r, s)."""
    fb = frames(geom, [r[0]], [r[1]], need_dH=need_dH)
    return SurfaceFrame(
        x=fb.x[0], J=fb.J[0], G=fb.G[0], sqrt_det_g=float(fb.sqrt_det_g[0]),
        n=fb.n[0], P=fb.P[0], Q=fb.Q[0], B=fb.B[0], H=fb.H[0],
        kappa=float(fb.kappa[0]), dH=fb.dH[0] if need_dH else None)


def surface_grad_scalar(frame: SurfaceFrame, grad_param):
    """Tangential gradient of a scalar from its parametric gradient."""
    return frame.B @ np.asarray(grad_param, dtype=float)


def surface_grad_vector_dir(frame: SurfaceFrame, grad_param_rows):
    """Directional surface gradient of a vector field.

    Row i of the result is the tangential gradient of component i; the
    covariant gradient follows by left-multiplying with the projector P.
    """
    return np.asarray(grad_param_rows, dtype=float) @ frame.B.T


@dataclass
class BoundaryFrame:
    """Orthonormal boundary triad and line element at an edge point."""

    x: np.ndarray
    t_b: np.ndarray
    n_b: np.ndarray
    n: np.ndarray
    ds_scale: float


def edge_params(edge, T, domain):
    """Map an edge coordinate array to (R, S) parameter arrays."""
    (r0, r1), (s0, s1) = domain
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if edge == "r_min":
        return np.full_like(T, r0), T
    if edge == "r_max":
        return np.full_like(T, r1), T
    if edge == "s_min":
        return T, np.full_like(T, s0)
    if edge == "s_max":
        return T, np.full_like(T, s1)
    raise ValueError(f"edge must be one of {_EDGES}, got {edge!r}")


def _edge_range_check(geom, edge, T):
    rng = geom.domain[0] if edge.startswith("s") else geom.domain[1]
    if np.any(T < rng[0] - 1e-10) or np.any(T > rng[1] + 1e-10):
        raise DomainError("edge parameter outside edge range")


def _boundary_from_frames(fb: FrameBatch, edge):
    axis = 1 if edge.startswith("r") else 0
    tau = fb.J[:, :, axis]
    ds = np.linalg.norm(tau, axis=1)
    if np.any(ds < 1e-14):
        raise DegenerateGeometryError("degenerate edge tangent")
    t_b = tau / ds[:, None]
    n_b = np.cross(fb.n, t_b)
    out_param = {"r_min": (-1.0, 0.0), "r_max": (1.0, 0.0),
                 "s_min": (0.0, -1.0), "s_max": (0.0, 1.0)}[edge]
    out_phys = fb.J[:, :, 0] * out_param[0] + fb.J[:, :, 1] * out_param[1]
    flip = np.einsum("mi,mi->m", n_b, out_phys) < 0
    t_b[flip] *= -1.0
    n_b[flip] *= -1.0
    return t_b, n_b, ds, fb


def boundary_frames(geom: GeometryMap, edge, T, need_dH=False):
    """Boundary triads at points along an edge; also returns surface frames.

    The co-normal n_b = n x t_b points out of the parameter rectangle.
    """
    T = np.atleast_1d(np.asarray(T, dtype=float))
    R, S = edge_params(edge, T, geom.domain)
    _edge_range_check(geom, edge, T)
    fb = frames(geom, R, S, need_dH=need_dH)
    return _boundary_from_frames(fb, edge)


def boundary_frames_grid(geom: GeometryMap, edge, T, need_dH=False):
    """Like boundary_frames, but for edge points within one knot span."""
    T = np.atleast_1d(np.asarray(T, dtype=float))
    _edge_range_check(geom, edge, T)
    (r0, r1), (s0, s1) = geom.domain
    if edge == "r_min":
        fb = frames_grid(geom, [r0], T, need_dH)
    elif edge == "r_max":
        fb = frames_grid(geom, [r1], T, need_dH)
    elif edge == "s_min":
        fb = frames_grid(geom, T, [s0], need_dH)
    else:
        fb = frames_grid(geom, T, [s1], need_dH)
    return _boundary_from_frames(fb, edge)


def boundary_frame_at(geom: GeometryMap, edge, param) -> BoundaryFrame:
    """Boundary triad at a single point of a patch edge."""
    t_b, n_b, ds, fb = boundary_frames(geom, edge, [param])
    return BoundaryFrame(x=fb.x[0], t_b=t_b[0], n_b=n_b[0], n=fb.n[0],
                         ds_scale=float(ds[0]))


def fit_nurbs_geometry(geom: GeometryMap, degree, n_spans) -> NurbsGeometry:
    """L2-fit of a geometry map onto a uniform spline space (isoparametric use).

    For maps that close on themselves in r, the fit runs in the
    seam-identified space so the control net closes exactly. The returned
    geometry approximates the input to the spline approximation order.
    """
    patch = nurbs.make_field_patch(degree, n_spans, domain=geom.domain)
    nr, ns = patch.n_basis
    F = nr * ns
    if geom.wrap_r:
        red = np.arange(F).reshape(nr, ns)
        red[-1] = red[0]
        red_ids = red.ravel()
        n_red = (nr - 1) * ns
    else:
        red_ids = np.arange(F)
        n_red = F
    M = np.zeros((n_red, n_red))
    b = np.zeros((n_red, 3))
    ng = degree + 3
    from .assembly import gauss_1d  # deferred to avoid a module cycle

    for span_r in patch.kv_r.spans:
        xr, wr = gauss_1d(ng, span_r)
        for span_s in patch.kv_s.spans:
            xs, ws = gauss_1d(ng, span_s)
            ids, R = nurbs.eval_basis_grid(patch, xr, xs, 0)
            N = R[0, 0]
            cw = np.outer(wr, ws).ravel()
            xj = geom.jet_grid(xr, xs, order=2).x
            rids = red_ids[ids]
            M[np.ix_(rids, rids)] += np.einsum("m,ma,mb->ab", cw, N, N)
            b[rids] += np.einsum("m,ma,mc->ac", cw, N, xj)
    coeff = np.linalg.solve(M, b)
    cp = coeff[red_ids].reshape(nr, ns, 3)
    fitted = nurbs.NurbsPatch(patch.kv_r, patch.kv_s, cp, np.ones((nr, ns)))
    return NurbsGeometry(fitted, wrap_r=geom.wrap_r,
                         name=f"{getattr(geom, 'name', 'map')}_fit_p{degree}_n{n_spans}")
