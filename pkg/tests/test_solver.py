import numpy as np
import pytest
import scipy.sparse as sp

from tidg.analysis import DiscreteField, broken_h1_error, linear_field
from tidg.assembly import (LinearSystem, LoadSpec, MethodConfig,
                           assemble_dg)
from tidg.errors import SingularSystemError, ToleranceNotReachedError
from tidg.femspace import FunctionSpace
from tidg.solver import solve

AFFINE = linear_field(np.array([[0.1, 0.2], [0.3, -0.1]]),
                      np.array([0.01, -0.02]))


def tiny_system(values, rhs, symmetric=False):
    return LinearSystem(matrix=sp.csr_matrix(np.asarray(values, dtype=float)),
                        rhs=np.asarray(rhs, dtype=float), symmetric=symmetric)


class TestDirectSolve:
    def test_one_by_one(self):
        report = solve(tiny_system([[2.0]], [4.0]))
        assert report.x[0] == pytest.approx(2.0, rel=1e-14)
        assert report.rel_residual <= 1e-14

    def test_patch_chain(self, unit_square_dirichlet, anisotropic_params,
                         fiber_pi5):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        system = assemble_dg(space, anisotropic_params, fiber_pi5,
                             MethodConfig("SIPG"),
                             LoadSpec(dirichlet=AFFINE.value))
        report = solve(system)
        assert report.rel_residual <= 1e-10
        fld = DiscreteField(space=space, coeffs=report.x)
        assert broken_h1_error(fld, AFFINE).full < 1e-10

    def test_residual_recomputed_from_matrix(self, unit_square_dirichlet,
                                             anisotropic_params, fiber_pi5):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        system = assemble_dg(space, anisotropic_params, fiber_pi5,
                             MethodConfig("SIPG"),
                             LoadSpec(dirichlet=AFFINE.value))
        report = solve(system)
        independent = np.linalg.norm(system.matrix @ report.x - system.rhs) \
            / np.linalg.norm(system.rhs)
        assert report.rel_residual == pytest.approx(independent, rel=1e-12)

    def test_singular_matrix_raises(self):
        sys_singular = tiny_system([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])
        with pytest.raises((SingularSystemError, ToleranceNotReachedError)):
            solve(sys_singular)

    def test_symmetric_and_general_orderings_agree(self, unit_square_dirichlet,
                                                   anisotropic_params,
                                                   fiber_pi5):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        system = assemble_dg(space, anisotropic_params, fiber_pi5,
                             MethodConfig("SIPG"),
                             LoadSpec(dirichlet=AFFINE.value))
        x_sym = solve(system).x
        system.symmetric = False
        x_gen = solve(system).x
        scale = max(np.abs(x_sym).max(), 1.0)
        assert np.abs(x_sym - x_gen).max() < 1e-10 * scale

    def test_deterministic(self, unit_square_dirichlet, anisotropic_params,
                           fiber_pi5):
        space = FunctionSpace(unit_square_dirichlet, "DG1")

        def once():
            system = assemble_dg(space, anisotropic_params, fiber_pi5,
                                 MethodConfig("NIPG"),
                                 LoadSpec(dirichlet=AFFINE.value))
            return solve(system).x

        assert np.array_equal(once(), once())


class TestIterativeFallback:
    def test_gmres_matches_direct(self, unit_square_dirichlet,
                                  anisotropic_params, fiber_pi5):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        system = assemble_dg(space, anisotropic_params, fiber_pi5,
                             MethodConfig("SIPG"),
                             LoadSpec(dirichlet=AFFINE.value))
        direct = solve(system).x
        iterative = solve(system, tol=1e-9, method="gmres").x
        scale = max(np.abs(direct).max(), 1.0)
        assert np.abs(direct - iterative).max() < 1e-7 * scale

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            solve(tiny_system([[1.0]], [1.0]), method="sor")
