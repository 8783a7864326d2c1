import numpy as np
import pytest

from tdcshell import assembly as asm
from tdcshell import geometry as geo
from tdcshell import mechanics as mech
from tdcshell import nurbs


def quarter_arc_patch(radius=2.5, length=1.0):
    """Exact 90-degree arc (x-z plane) times a straight segment in y."""
    c45 = np.cos(np.pi / 4)
    kv_r = nurbs.KnotVector(2, np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0]))
    kv_s = nurbs.KnotVector(1, np.array([0.0, 0.0, 1.0, 1.0]))
    cp = np.zeros((3, 2, 3))
    cp[0] = [[radius, 0, 0], [radius, length, 0]]
    cp[1] = [[radius, 0, radius], [radius, length, radius]]
    cp[2] = [[0, 0, radius], [0, length, radius]]
    w = np.array([[1.0, 1.0], [c45, c45], [1.0, 1.0]])
    return nurbs.NurbsPatch(kv_r, kv_s, cp, w)


def plate_clamped_edges():
    """Clamp for flat plates: full u, tangential w.

    On a flat geometry the surface multiplier already pins the normal
    component of w everywhere, so constraining it again on the edges would
    make the multiplier set rank-deficient.
    """
    cons = [asm.DirectionalConstraint("u", d) for d in ("x", "y", "z")]
    cons += [asm.DirectionalConstraint("w", d) for d in ("x", "y")]
    return {e: asm.EdgeCondition(constraints=list(cons), name="clamped_plate")
            for e in asm.EDGE_ORDER}


def clamped_plate_problem(degree=3, n=4, thickness=0.02, load=(0.0, 0.0, -1e-3)):
    return asm.ShellProblem(
        geom=geo.plate(), patch=nurbs.make_field_patch(degree, n),
        material=mech.Material(E=200.0, nu=0.3, thickness=thickness),
        load_f=load, edges=plate_clamped_edges(), name="clamped_plate")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def component_resultants(frame, mat, state):
    """Entry-by-entry evaluation of the published component formulas."""
    H, Q, P, n = frame.H, frame.Q, frame.P, frame.n
    gu, gw, w = state.grad_u_dir, state.grad_w_dir, state.w
    DB, DM, DS = mat.bending_stiffness, mat.membrane_stiffness, mat.shear_stiffness
    nu = mat.nu
    ku = H @ gu

    mdir = np.zeros((3, 3))
    ndir = np.zeros((3, 3))
    for i in range(3):
        o = [k for k in range(3) if k != i]
        mdir[i, i] = DB * (gw[i, i] + ku[i, i]
                           + nu * (gw[o[0], o[0]] + gw[o[1], o[1]]
                                   + ku[o[0], o[0]] + ku[o[1], o[1]]))
        ndir[i, i] = DM * (gu[i, i] + nu * (gu[o[0], o[0]] + gu[o[1], o[1]]))
    for i, j in ((0, 1), (0, 2), (1, 2)):
        mdir[i, j] = mdir[j, i] = DB * (1 - nu) / 2 * (gw[i, j] + gw[j, i] + ku[i, j] + ku[j, i])
        ndir[i, j] = ndir[j, i] = DM * (1 - nu) / 2 * (gu[i, j] + gu[j, i])

    qu = Q @ gu
    q = np.zeros((3, 3))
    for i in range(3):
        q[i, i] = 2 * DS * (n[i] * w[i] + qu[i, i])
    for i, j in ((0, 1), (0, 2), (1, 2)):
        q[i, j] = q[j, i] = DS * (n[i] * w[j] + n[j] * w[i] + qu[i, j] + qu[j, i])

    m = P @ mdir @ P
    n_eff = P @ ndir @ P
    return m, n_eff, n_eff + H @ m, q


def membrane_patch_test_problem(degree, n, sig=((2.0, 0.7), (0.7, -1.0))):
    """Flat plate under a constant plane-stress state, exact affine solution."""
    E, nu, t = 100.0, 0.3, 0.1
    mat = mech.Material(E=E, nu=nu, thickness=t)
    sig = np.asarray(sig)
    C = np.array([[1, -nu, 0], [-nu, 1, 0], [0, 0, 2 * (1 + nu)]]) / E
    exx, eyy, gxy = C @ np.array([sig[0, 0], sig[1, 1], sig[0, 1]])
    grad = np.array([[exx, gxy / 2], [gxy / 2, eyy]])

    def u_exact(x):
        return np.stack([grad[0, 0] * x[:, 0] + grad[0, 1] * x[:, 1],
                         grad[1, 0] * x[:, 0] + grad[1, 1] * x[:, 1],
                         np.zeros(len(x))], axis=1)

    n_eff = t * np.array([[sig[0, 0], sig[0, 1], 0],
                          [sig[1, 0], sig[1, 1], 0], [0, 0, 0]])

    def traction(nb):
        return lambda x: np.broadcast_to(n_eff @ nb, (x.shape[0], 3)).copy()

    dirichlet = asm.EdgeCondition(constraints=[
        asm.DirectionalConstraint("u", "x", lambda x: u_exact(x)[:, 0]),
        asm.DirectionalConstraint("u", "y", lambda x: u_exact(x)[:, 1]),
        asm.DirectionalConstraint("u", "z", 0.0),
        asm.DirectionalConstraint("w", "x", 0.0)], name="exact")
    edges = {
        "r_min": dirichlet,
        "r_max": asm.EdgeCondition(traction=traction(np.array([1.0, 0, 0]))),
        "s_min": asm.EdgeCondition(traction=traction(np.array([0.0, -1.0, 0]))),
        "s_max": asm.EdgeCondition(traction=traction(np.array([0.0, 1.0, 0]))),
    }
    prob = asm.ShellProblem(geom=geo.plate(), patch=nurbs.make_field_patch(degree, n),
                            material=mat, load_f=(0.0, 0.0, 0.0), edges=edges,
                            name="patch_test")
    return prob, u_exact, sig
