"""Transversely isotropic linear elasticity under plane strain.

The constitutive law is parameterized by the five constants
(lambda, mu_t, mu_l, alpha, beta) plus the derived gamma = 2(mu_l - mu_t),
with a single in-plane fibre direction.  Engineering input uses the
transverse Young modulus E_t, the stiffness ratio p = E_l/E_t, the shear
ratio q = mu_l/mu_t and the two Poisson ratios.

The in-plane law is stored as a 3x3 Voigt matrix acting on engineering
strain (eps_11, eps_22, 2*eps_12); with that convention the matrix is the
Jacobian of the stored energy, so its smallest eigenvalue is the pointwise
coercivity constant used by the discretization diagnostics.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominatorError, SingularMatrixError


@dataclass(frozen=True)
class EngineeringConstants:
    """Engineering description of a transversely isotropic material.

    Attributes
    ----------
    E_t : float
        Young's modulus transverse to the fibre (stress units). Must be
        meaningful (> 0) for a stable material; constructors do not reject
        unstable inputs, `stability_check` reports on them.
    p : float
        Stiffness ratio E_l / E_t (fibre vs transverse).
    q : float
        Shear ratio mu_l / mu_t.
    nu_t, nu_l : float
        Poisson ratios transverse to and along the fibre.
    """

    E_t: float
    p: float
    q: float
    nu_t: float
    nu_l: float

    @classmethod
    def special(cls, E_t, p, nu):
        """Equal Poisson ratios and q = 1: the three-parameter family."""
        return cls(E_t=float(E_t), p=float(p), q=1.0, nu_t=float(nu), nu_l=float(nu))


@dataclass(frozen=True)
class MaterialParams:
    """The five-constant law plus the derived gamma.

    gamma is stored as exactly 2*(mu_l - mu_t); isotropy corresponds to
    alpha == beta == gamma == 0.
    """

    lam: float
    mu_t: float
    mu_l: float
    alpha: float
    beta: float
    gamma: float

    def is_isotropic(self, tol=0.0):
        scale = max(abs(self.lam), abs(self.mu_t), 1.0)
        return (abs(self.alpha) <= tol * scale
                and abs(self.beta) <= tol * scale
                and abs(self.gamma) <= tol * scale)


_ANGLE_GRID = math.pi / 2 ** 40  # ~2.9e-12 rad


class FiberDirection:
    """Unit in-plane fibre direction.

    The fibre is a direction, not an orientation: angles are reduced modulo
    pi into [0, pi) and snapped onto a grid of pi / 2^40 (~3e-12 rad, far
    below any physically meaningful resolution).  The snap makes an angle
    and its opposite reduce to bit-identical direction data, so every
    downstream computation is exactly invariant under angle -> angle + pi
    rather than merely invariant up to roundoff, which extreme stiffness
    contrasts would otherwise amplify.

    Attributes
    ----------
    angle : float
        Angle between the x-axis and the fibre, in [0, pi).
    a : ndarray, shape (2,)
        Unit direction vector (cos angle, sin angle).
    M : ndarray, shape (2, 2)
        Structural tensor a (x) a: symmetric, rank 1, trace 1.
    """

    __slots__ = ("angle", "a", "M")

    def __init__(self, angle):
        reduced = math.fmod(float(angle), math.pi)  # fmod is exact
        if reduced < 0.0:
            reduced += math.pi
        reduced = round(reduced / _ANGLE_GRID) * _ANGLE_GRID
        if reduced >= math.pi:
            reduced = 0.0
        a = np.array([math.cos(reduced), math.sin(reduced)])
        M = np.outer(a, a)
        a.flags.writeable = False
        M.flags.writeable = False
        object.__setattr__(self, "angle", reduced)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "M", M)

    def __setattr__(self, name, value):
        raise AttributeError("FiberDirection is immutable")

    def __repr__(self):
        return f"FiberDirection(angle={self.angle!r})"


@dataclass(frozen=True)
class StabilityReport:
    """Pass/fail of each pointwise stability condition on the moduli."""

    et_positive: bool          # E_t > 0
    mu_t_positive: bool        # mu_t > 0
    mu_l_positive: bool        # mu_l > 0
    p_exceeds_nul_sq: bool     # p > nu_l^2
    denominator_positive: bool  # (1 - nu_t) p - 2 nu_l^2 > 0

    @property
    def ok(self):
        return (self.et_positive and self.mu_t_positive and self.mu_l_positive
                and self.p_exceeds_nul_sq and self.denominator_positive)


def derive_params(ec):
    """Convert engineering constants to the five-constant law.

    Parameters
    ----------
    ec : EngineeringConstants

    Returns
    -------
    MaterialParams

    Raises
    ------
    DegenerateDenominatorError
        If (1 + nu_t)((1 - nu_t) p - 2 nu_l^2) vanishes (relative to E_t),
        which is the stability boundary of the conversion.
    """
    nu_t, nu_l, p, q = ec.nu_t, ec.nu_l, ec.p, ec.q
    den = (1.0 + nu_t) * ((1.0 - nu_t) * p - 2.0 * nu_l ** 2)
    if abs(den) < 1e-14 * abs(ec.E_t):
        raise DegenerateDenominatorError(
            f"conversion denominator {den} is degenerate for E_t={ec.E_t}, "
            f"p={p}, nu_t={nu_t}, nu_l={nu_l}")
    mu_t = ec.E_t / (2.0 * (1.0 + nu_t))
    mu_l = q * mu_t
    lam = (nu_t * p + nu_l ** 2) * ec.E_t / den
    alpha = ((nu_l - nu_t + nu_t * nu_l) * p - nu_l ** 2) * ec.E_t / den
    beta = ((1.0 - nu_t ** 2) * p ** 2
            + (-2.0 * nu_t * nu_l + 2.0 * q * nu_t - 2.0 * nu_l + 1.0 - 2.0 * q) * p
            - (1.0 - 4.0 * q) * nu_l ** 2) * ec.E_t / den
    gamma = 2.0 * (mu_l - mu_t)
    return MaterialParams(lam=lam, mu_t=mu_t, mu_l=mu_l,
                          alpha=alpha, beta=beta, gamma=gamma)


def derive_params_special(E_t, p, nu):
    """Three-parameter conversion for nu_l = nu_t = nu and q = 1.

    Agrees with `derive_params` on the restricted inputs; kept as a separate
    closed form because the benchmark sweeps live entirely in this family.
    """
    den = (1.0 + nu) * ((1.0 - nu) * p - 2.0 * nu ** 2)
    if abs(den) < 1e-14 * abs(E_t):
        raise DegenerateDenominatorError(
            f"conversion denominator {den} is degenerate for E_t={E_t}, "
            f"p={p}, nu={nu}")
    mu = E_t / (2.0 * (1.0 + nu))
    lam = nu * (p + nu) * E_t / den
    alpha = nu ** 2 * (p - 1.0) * E_t / den
    beta = (p - 1.0) * ((1.0 - nu ** 2) * p - 3.0 * nu ** 2) * E_t / den
    return MaterialParams(lam=lam, mu_t=mu, mu_l=mu,
                          alpha=alpha, beta=beta, gamma=0.0)


def stability_check(ec):
    """Evaluate the pointwise stability conditions on engineering constants.

    Reporting only: never raises, constructors never reject.
    """
    # sign tests written multiplicatively so nu_t = -1 cannot divide by zero
    return StabilityReport(
        et_positive=ec.E_t > 0.0,
        mu_t_positive=ec.E_t * (1.0 + ec.nu_t) > 0.0,
        mu_l_positive=ec.q * ec.E_t * (1.0 + ec.nu_t) > 0.0,
        p_exceeds_nul_sq=ec.p > ec.nu_l ** 2,
        denominator_positive=(1.0 - ec.nu_t) * ec.p - 2.0 * ec.nu_l ** 2 > 0.0,
    )


def voigt_matrix(params, fiber):
    """Plane-strain 3x3 stiffness on (eps_11, eps_22, 2*eps_12).

    Closed-form entries; `apply_stress` is the independent tensor-expression
    route, and the two are cross-checked in the test suite.
    """
    m1 = fiber.M[0, 0]
    m2 = fiber.M[1, 1]
    m3 = fiber.M[0, 1]
    lam, mu = params.lam, params.mu_t
    al, be, ga = params.alpha, params.beta, params.gamma
    t = np.array([1.0, 1.0, 0.0])
    m = np.array([m1, m2, m3])
    C = (lam * np.outer(t, t)
         + 2.0 * mu * np.diag([1.0, 1.0, 0.5])
         + be * np.outer(m, m)
         + al * (np.outer(t, m) + np.outer(m, t))
         + ga * np.array([[2.0 * m1, 0.0, m3],
                          [0.0, 2.0 * m2, m3],
                          [m3, m3, 0.5]]))
    return C


def apply_stress(params, fiber, eps):
    """Stress from a 2x2 symmetric strain via the tensor expression.

    sigma = lam tr(eps) I + 2 mu_t eps + beta (M:eps) M
            + alpha ((M:eps) I + tr(eps) M) + gamma (eps M + M eps)
    """
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (2, 2):
        raise ValueError(f"strain must be 2x2, got shape {eps.shape}")
    if abs(eps[0, 1] - eps[1, 0]) > 1e-12 * max(1.0, np.abs(eps).max()):
        raise ValueError("strain must be symmetric")
    M = fiber.M
    I = np.eye(2)
    tr = eps[0, 0] + eps[1, 1]
    m_eps = np.tensordot(M, eps)  # M : eps
    sigma = (params.lam * tr * I
             + 2.0 * params.mu_t * eps
             + params.beta * m_eps * M
             + params.alpha * (m_eps * I + tr * M)
             + params.gamma * (eps @ M + M @ eps))
    return sigma


def compliance_matrix(params, fiber):
    """Inverse of the plane-strain Voigt matrix.

    Raises
    ------
    SingularMatrixError
        If the stiffness is not positive definite (stability failed).
    """
    C = voigt_matrix(params, fiber)
    evals = np.linalg.eigvalsh(C)
    if evals[0] <= 1e-12 * max(abs(evals[-1]), 1e-300):
        raise SingularMatrixError(
            f"stiffness matrix is not positive definite (eigenvalues {evals})")
    return np.linalg.inv(C)


def min_eigenvalue(vm):
    """Smallest eigenvalue of a symmetric 3x3 Voigt matrix.

    Uses the closed form for the axis-aligned (block-diagonal) case and a
    general symmetric solver otherwise.
    """
    vm = np.asarray(vm, dtype=float)
    scale = np.abs(vm).max()
    if abs(vm - vm.T).max() > 1e-12 * max(scale, 1e-300):
        raise ValueError("Voigt matrix must be symmetric")
    if abs(vm[0, 2]) <= 1e-14 * scale and abs(vm[1, 2]) <= 1e-14 * scale:
        # normal/shear decoupled: 2x2 block eigenvalues via trace and det
        half_tr = 0.5 * (vm[0, 0] + vm[1, 1])
        rad = math.hypot(0.5 * (vm[0, 0] - vm[1, 1]), vm[0, 1])
        return min(half_tr - rad, vm[2, 2])
    return float(np.linalg.eigvalsh(vm)[0])
