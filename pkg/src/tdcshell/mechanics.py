"""Shell kinematics, constitutive law and thickness-integrated resultants.

Displacement of the shell body is u + zeta*w with u the middle-surface
deflection and w the difference vector describing the rotation of the
normal. Strains and stress resultants are expressed through tangential
operators in global Cartesian coordinates; directional gradients are used
throughout (the double projection in the in-plane stress makes covariant
and directional gradients interchangeable there).

Kernel functions accept arrays with arbitrary leading batch dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Material:
    """Isotropic linear-elastic shell material with zero normal stress.

    alpha_s is the transverse shear correction factor: 5/6 is the classical
    choice, 1.0 the default used by the bundled benchmark definitions.
    """

    E: float
    nu: float
    thickness: float
    alpha_s: float = 1.0

    def __post_init__(self):
        if self.E <= 0:
            raise ValueError("Young's modulus must be positive")
        if not 0.0 <= self.nu <= 0.5:
            raise ValueError("Poisson ratio must lie in [0, 0.5]")
        if self.thickness <= 0:
            raise ValueError("thickness must be positive")

    @property
    def mu(self):
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self):
        """Lame-type constant for the plane-stress reduced law."""
        return self.E * self.nu / (1.0 - self.nu**2)

    @property
    def bending_stiffness(self):
        return self.E * self.thickness**3 / (12.0 * (1.0 - self.nu**2))

    @property
    def membrane_stiffness(self):
        return self.E * self.thickness / (1.0 - self.nu**2)

    @property
    def shear_stiffness(self):
        return self.alpha_s * self.E * self.thickness / (2.0 * (1.0 + self.nu))


@dataclass
class FieldPointState:
    """Displacement, difference vector and their directional gradients."""

    u: np.ndarray
    w: np.ndarray
    grad_u_dir: np.ndarray
    grad_w_dir: np.ndarray


@dataclass
class StrainState:
    eps_mem: np.ndarray
    eps_bend: np.ndarray
    eps_shear: np.ndarray


@dataclass
class StressResultants:
    """Moment, effective/physical membrane force and transverse shear tensors."""

    m: np.ndarray
    n_eff: np.ndarray
    n_real: np.ndarray
    q: np.ndarray


def sym(X):
    return 0.5 * (X + np.swapaxes(X, -1, -2))


def outer(a, b):
    return np.einsum("...i,...j->...ij", a, b)


def membrane_strain(P, grad_u):
    return sym(P @ grad_u)


def bending_strain(P, H, grad_u, grad_w):
    return sym(H @ grad_u + P @ grad_w)


def shear_strain(Q, n, grad_u, w):
    return sym(Q @ grad_u + outer(n, w))


def inplane_stress(mu, lam, P, eps):
    """Plane-stress law applied to an in-plane strain tensor."""
    tr = np.einsum("...ii->...", eps)
    return 2.0 * mu * eps + lam * tr[..., None, None] * P


def strain_kernel(P, Q, H, n, grad_u, grad_w, w):
    return (membrane_strain(P, grad_u),
            bending_strain(P, H, grad_u, grad_w),
            shear_strain(Q, n, grad_u, w))


def resultant_kernel(mat: Material, P, H, eps_mem, eps_bend, eps_shear):
    """Thickness-integrated stress resultants from the strain split."""
    t = mat.thickness
    m = (t**3 / 12.0) * inplane_stress(mat.mu, mat.lam, P, eps_bend)
    n_eff = t * inplane_stress(mat.mu, mat.lam, P, eps_mem)
    q = 2.0 * mat.shear_stiffness * eps_shear
    return m, n_eff, n_eff + H @ m, q


def strains(frame, state: FieldPointState) -> StrainState:
    """Membrane, bending and transverse shear strain at one surface point."""
    em, eb, es = strain_kernel(frame.P, frame.Q, frame.H, frame.n,
                               state.grad_u_dir, state.grad_w_dir, state.w)
    return StrainState(em, eb, es)


def stress_resultants(frame, mat: Material, state: FieldPointState) -> StressResultants:
    """Stress resultants at one surface point."""
    em, eb, es = strain_kernel(frame.P, frame.Q, frame.H, frame.n,
                               state.grad_u_dir, state.grad_w_dir, state.w)
    m, n_eff, n_real, q = resultant_kernel(mat, frame.P, frame.H, em, eb, es)
    return StressResultants(m=m, n_eff=n_eff, n_real=n_real, q=q)


def shear_angle(frame, state: FieldPointState):
    """Transverse shear rotation gamma = w + (grad_u_dir)^T n."""
    return state.w + state.grad_u_dir.T @ frame.n


def energy_density(mat: Material, eps_mem, eps_bend, eps_shear, P):
    """Elastic energy per unit area, split into (membrane, bending, shear)."""
    t = mat.thickness
    ddot = lambda a, b: np.einsum("...ij,...ij->...", a, b)
    e_m = 0.5 * t * ddot(eps_mem, inplane_stress(mat.mu, mat.lam, P, eps_mem))
    e_b = 0.5 * (t**3 / 12.0) * ddot(eps_bend, inplane_stress(mat.mu, mat.lam, P, eps_bend))
    e_s = mat.shear_stiffness * ddot(eps_shear, eps_shear)
    return e_m, e_b, e_s
