import math

import numpy as np
import pytest

from tidg.analysis import AnalyticField
from tidg.material import EngineeringConstants, FiberDirection, derive_params
from tidg.mesh import classify_edges, rect_mesh


def random_stable_material(rng, p_range=(1.0, 1e4), nu=0.3):
    """Engineering constants sampled inside the stability region."""
    p = float(np.exp(rng.uniform(np.log(p_range[0]), np.log(p_range[1]))))
    q = float(rng.uniform(0.5, 2.0))
    return EngineeringConstants(E_t=1.0, p=p, q=q, nu_t=nu, nu_l=nu)


def quadratic_field():
    """A generic vector-valued quadratic with analytic derivatives."""

    def value(pts):
        x, y = pts[..., 0], pts[..., 1]
        return np.stack([x * x + 0.5 * x * y - 0.3 * y * y + 0.2 * x,
                         0.7 * y * y - 0.4 * x * y + 0.1 * y], axis=-1)

    def grad(pts):
        x, y = pts[..., 0], pts[..., 1]
        g = np.empty(pts.shape[:-1] + (2, 2))
        g[..., 0, 0] = 2.0 * x + 0.5 * y + 0.2
        g[..., 0, 1] = 0.5 * x - 0.6 * y
        g[..., 1, 0] = -0.4 * y
        g[..., 1, 1] = 1.4 * y - 0.4 * x + 0.1
        return g

    def hessian(pts):
        H = np.zeros(pts.shape[:-1] + (2, 2, 2))
        H[..., 0, 0, 0] = 2.0
        H[..., 0, 0, 1] = 0.5
        H[..., 0, 1, 0] = 0.5
        H[..., 0, 1, 1] = -0.6
        H[..., 1, 0, 1] = -0.4
        H[..., 1, 1, 0] = -0.4
        H[..., 1, 1, 1] = 1.4
        return H

    return AnalyticField(value, grad, hessian)


def trig_field():
    """Smooth non-polynomial field for interpolation-rate studies."""

    def value(pts):
        x, y = pts[..., 0], pts[..., 1]
        return np.stack([np.sin(x) * np.sin(y), np.zeros_like(x)], axis=-1)

    def grad(pts):
        x, y = pts[..., 0], pts[..., 1]
        g = np.zeros(pts.shape[:-1] + (2, 2))
        g[..., 0, 0] = np.cos(x) * np.sin(y)
        g[..., 0, 1] = np.sin(x) * np.cos(y)
        return g

    def hessian(pts):
        x, y = pts[..., 0], pts[..., 1]
        H = np.zeros(pts.shape[:-1] + (2, 2, 2))
        H[..., 0, 0, 0] = -np.sin(x) * np.sin(y)
        H[..., 0, 0, 1] = np.cos(x) * np.cos(y)
        H[..., 0, 1, 0] = np.cos(x) * np.cos(y)
        H[..., 0, 1, 1] = -np.sin(x) * np.sin(y)
        return H

    return AnalyticField(value, grad, hessian)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def unit_square_dirichlet():
    """2x2 unit square with the whole boundary carrying displacement data."""
    return classify_edges(rect_mesh(1.0, 1.0, 2, 2), dirichlet=lambda x: True)


@pytest.fixture
def fiber_pi5():
    return FiberDirection(math.pi / 5.0)


@pytest.fixture
def anisotropic_params():
    ec = EngineeringConstants(E_t=1.0, p=3.0, q=1.5, nu_t=0.3, nu_l=0.25)
    return derive_params(ec)
