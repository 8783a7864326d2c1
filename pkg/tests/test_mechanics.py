import numpy as np
import pytest

from tdcshell import geometry as geo
from tdcshell import mechanics as mech

from conftest import component_resultants


def random_state(frame, rng):
    Du = rng.standard_normal((3, 2))
    Dw = rng.standard_normal((3, 2))
    return mech.FieldPointState(
        u=rng.standard_normal(3), w=rng.standard_normal(3),
        grad_u_dir=Du @ frame.B.T, grad_w_dir=Dw @ frame.B.T)


def test_material_constants():
    mat = mech.Material(E=100.0, nu=0.25, thickness=0.2, alpha_s=5.0 / 6.0)
    assert np.isclose(mat.bending_stiffness, 100 * 0.2**3 / (12 * (1 - 0.0625)))
    assert np.isclose(mat.membrane_stiffness, 100 * 0.2 / (1 - 0.0625))
    assert np.isclose(mat.shear_stiffness, 5 / 6 * 100 * 0.2 / (2 * 1.25))
    assert np.isclose(mat.mu, 100 / 2.5)
    assert np.isclose(mat.lam, 100 * 0.25 / (1 - 0.0625))
    assert mech.Material(E=1.0, nu=0.3, thickness=1.0).alpha_s == 1.0
    for bad in (dict(E=-1, nu=0.3, thickness=1.0),
                dict(E=1, nu=0.7, thickness=1.0),
                dict(E=1, nu=0.3, thickness=0.0)):
        with pytest.raises(ValueError):
            mech.Material(**bad)


def test_plate_membrane_only_state():
    f = geo.frame_at(geo.plate(), (0.4, 0.6))
    grad_u = np.array([[0.3, 0.1, 0.0], [-0.2, 0.5, 0.0], [0.0, 0.0, 0.0]])
    st = mech.FieldPointState(u=np.zeros(3), w=np.zeros(3),
                              grad_u_dir=grad_u, grad_w_dir=np.zeros((3, 3)))
    s = mech.strains(f, st)
    assert np.abs(s.eps_bend).max() == 0.0
    assert np.abs(s.eps_shear).max() == 0.0
    assert np.allclose(s.eps_mem, 0.5 * (grad_u + grad_u.T))


def test_plate_constant_rotation_is_pure_shear():
    f = geo.frame_at(geo.plate(), (0.2, 0.9))
    w = np.array([0.7, -0.3, 0.0])
    st = mech.FieldPointState(u=np.zeros(3), w=w,
                              grad_u_dir=np.zeros((3, 3)), grad_w_dir=np.zeros((3, 3)))
    s = mech.strains(f, st)
    assert np.abs(s.eps_bend).max() == 0.0
    assert np.allclose(s.eps_shear, 0.5 * (np.outer(f.n, w) + np.outer(w, f.n)))


def test_rigid_motion_gives_zero_strain(rng):
    cyl = geo.cylinder_panel(25.0, 50.0, 80.0)
    f = geo.frame_at(cyl, tuple(rng.random(2)))
    # translation
    st = mech.FieldPointState(u=rng.standard_normal(3), w=np.zeros(3),
                              grad_u_dir=np.zeros((3, 3)), grad_w_dir=np.zeros((3, 3)))
    s = mech.strains(f, st)
    for e in (s.eps_mem, s.eps_bend, s.eps_shear):
        assert np.abs(e).max() < 1e-15
    # rotation pair: u = omega x x, w = omega x n
    om = rng.standard_normal(3)
    Om = np.array([[0, -om[2], om[1]], [om[2], 0, -om[0]], [-om[1], om[0], 0]])
    st = mech.FieldPointState(u=np.cross(om, f.x), w=np.cross(om, f.n),
                              grad_u_dir=Om @ f.P, grad_w_dir=Om @ f.H)
    s = mech.strains(f, st)
    for e in (s.eps_mem, s.eps_bend, s.eps_shear):
        assert np.abs(e).max() < 1e-12 * (1 + np.abs(om).max())
    assert np.abs(mech.shear_angle(f, st)).max() < 1e-12


def test_pure_stretch_plate_resultants():
    a = 0.01
    mat = mech.Material(E=100.0, nu=0.3, thickness=0.1)
    f = geo.frame_at(geo.plate(), (0.5, 0.5))
    grad_u = np.zeros((3, 3))
    grad_u[0, 0] = a
    st = mech.FieldPointState(u=np.zeros(3), w=np.zeros(3),
                              grad_u_dir=grad_u, grad_w_dir=np.zeros((3, 3)))
    res = mech.stress_resultants(f, mat, st)
    DM = mat.membrane_stiffness
    assert np.isclose(res.n_eff[0, 0], DM * a)
    assert np.isclose(res.n_eff[1, 1], DM * mat.nu * a)
    assert abs(res.n_eff[2, 2]) < 1e-15
    assert np.abs(res.m).max() == 0.0
    assert np.abs(res.q).max() == 0.0


def test_zero_state_zero_resultants():
    mat = mech.Material(E=10.0, nu=0.3, thickness=0.1)
    f = geo.frame_at(geo.flower_shell(), (0.3, 0.2))
    st = mech.FieldPointState(u=np.zeros(3), w=np.zeros(3),
                              grad_u_dir=np.zeros((3, 3)), grad_w_dir=np.zeros((3, 3)))
    res = mech.stress_resultants(f, mat, st)
    for t in (res.m, res.n_eff, res.n_real, res.q):
        assert np.abs(t).max() == 0.0


def test_tensor_form_equals_component_form(rng):
    mat = mech.Material(E=4.32e8, nu=0.3, thickness=0.25)
    for g in (geo.cylinder_panel(25.0, 50.0, 80.0), geo.flower_shell()):
        (r0, r1), (s0, s1) = g.domain
        for _ in range(25):
            f = geo.frame_at(g, (rng.uniform(r0, r1), rng.uniform(s0, s1)))
            st = random_state(f, rng)
            res = mech.stress_resultants(f, mat, st)
            ref = component_resultants(f, mat, st)
            for got, want in zip((res.m, res.n_eff, res.n_real, res.q), ref):
                scale = max(np.abs(want).max(), 1.0)
                assert np.abs(got - want).max() < 1e-12 * scale


def test_resultant_invariants(rng):
    mat = mech.Material(E=100.0, nu=0.3, thickness=0.2)
    f = geo.frame_at(geo.cylinder_panel(5.0, 3.0, 60.0), (0.3, 0.7))
    st = random_state(f, rng)
    res = mech.stress_resultants(f, mat, st)
    for t in (res.m, res.n_eff):
        scale = np.abs(t).max()
        assert np.abs(t - t.T).max() < 1e-10 * scale
        assert np.abs(t @ f.n).max() < 1e-10 * scale
    assert np.abs(f.P @ res.q @ f.P).max() < 1e-10 * np.abs(res.q).max()
    assert np.allclose(res.n_real, res.n_eff + f.H @ res.m)
    # physical membrane force keeps one zero eigenvalue
    ev = np.linalg.eigvals(res.n_real)
    assert np.abs(ev).min() < 1e-8 * np.abs(ev).max()


def test_shear_angle():
    f = geo.frame_at(geo.cylinder_panel(25.0, 50.0, 80.0), (0.6, 0.4))
    rng = np.random.default_rng(7)
    Du = rng.standard_normal((3, 2))
    gu = Du @ f.B.T
    # Kirchhoff-Love-like: w = -(grad u)^T n gives zero shear angle
    w = -gu.T @ f.n
    st = mech.FieldPointState(u=np.zeros(3), w=w, grad_u_dir=gu,
                              grad_w_dir=np.zeros((3, 3)))
    assert np.abs(mech.shear_angle(f, st)).max() < 1e-14
    # u = 0 means gamma = w
    st2 = mech.FieldPointState(u=np.zeros(3), w=w, grad_u_dir=np.zeros((3, 3)),
                               grad_w_dir=np.zeros((3, 3)))
    assert np.allclose(mech.shear_angle(f, st2), w)
    # general consistency
    st3 = random_state(f, rng)
    gamma = mech.shear_angle(f, st3)
    assert np.allclose(gamma - st3.w, st3.grad_u_dir.T @ f.n)


def test_energy_density_nonnegative(rng):
    mat = mech.Material(E=50.0, nu=0.25, thickness=0.1)
    for g in (geo.plate(), geo.cylinder_panel(5.0, 3.0, 60.0)):
        for _ in range(50):
            f = geo.frame_at(g, tuple(rng.random(2)))
            st = random_state(f, rng)
            s = mech.strains(f, st)
            e_m, e_b, e_s = mech.energy_density(mat, s.eps_mem, s.eps_bend,
                                                s.eps_shear, f.P)
            assert e_m >= -1e-14 and e_b >= -1e-14 and e_s >= -1e-14
