import math

import numpy as np
import pytest

from tidg.analysis import (AnalyticField, DiscreteField, ErrorRecord,
                           ErrorReport, broken_h1_error, convergence_rates,
                           dg_error, dg_norm, edge_averages, fit_rate,
                           interpolant_properties_check,
                           interpolation_estimate_check, linear_field,
                           midpoint_interpolant, vertex_value)
from tidg.errors import InvalidSequenceError, ZeroReferenceError
from tidg.femspace import FunctionSpace
from tidg.material import FiberDirection
from tidg.mesh import Mesh, rect_mesh

from conftest import quadratic_field, trig_field


def single_triangle_mesh():
    return Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
                np.array([[0, 1, 2]]))


class TestDgNorm:
    def test_zero_field(self):
        space = FunctionSpace(rect_mesh(1.0, 1.0, 2, 2), "DG1")
        assert dg_norm(DiscreteField(space, np.zeros(space.dof_count))) == 0.0

    def test_single_triangle_uniaxial(self):
        # u = (x, 0) on the reference triangle, no boundary data edges:
        # strain has one unit entry, norm^2 = area = 1/2
        mesh = single_triangle_mesh()
        space = FunctionSpace(mesh, "DG1")
        fld = DiscreteField(space, space.interpolate(
            lambda pts: np.stack([pts[..., 0], np.zeros(pts.shape[:-1])],
                                 axis=-1)))
        assert dg_norm(fld) ** 2 == pytest.approx(0.5, rel=1e-13)

    def test_rigid_rotation_in_kernel_without_dirichlet(self):
        mesh = rect_mesh(1.0, 1.0, 2, 2)
        space = FunctionSpace(mesh, "DG1")
        fld = DiscreteField(space, space.interpolate(
            lambda pts: np.stack([-pts[..., 1], pts[..., 0]], axis=-1)))
        # cancellation noise in the quadratic form, amplified by the root
        assert dg_norm(fld) ** 2 < 1e-14

    def test_positive_on_random_fields_with_dirichlet(self, rng,
                                                      unit_square_dirichlet):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        for _ in range(100):
            fld = DiscreteField(space, rng.standard_normal(space.dof_count))
            assert dg_norm(fld) > 0.0


class TestBrokenH1Error:
    def test_interpolant_of_linear_is_exact(self, unit_square_dirichlet):
        exact = linear_field(np.array([[0.4, -0.2], [0.1, 0.3]]),
                             np.array([0.05, 0.0]))
        for kind in ("CG1", "CG2", "DG1"):
            space = FunctionSpace(unit_square_dirichlet, kind)
            fld = DiscreteField(space, space.interpolate(exact.value))
            assert broken_h1_error(fld, exact).full < 1e-12

    def test_quadratic_interpolation_rate_one(self):
        exact = AnalyticField(
            lambda pts: np.stack([pts[..., 0] ** 2,
                                  np.zeros(pts.shape[:-1])], axis=-1),
            lambda pts: np.stack(
                [np.stack([2.0 * pts[..., 0], np.zeros(pts.shape[:-1])], axis=-1),
                 np.zeros(pts.shape[:-1] + (2,))], axis=-2))
        errors = []
        for n in (4, 8):
            space = FunctionSpace(rect_mesh(1.0, 1.0, n, n), "CG1")
            fld = DiscreteField(space, space.interpolate(exact.value))
            errors.append(broken_h1_error(fld, exact).seminorm)
        assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.05)

    def test_constant_shift_leaves_seminorm(self, unit_square_dirichlet):
        exact = quadratic_field()
        space = FunctionSpace(unit_square_dirichlet, "CG1")
        fld = DiscreteField(space, space.interpolate(exact.value))
        base = broken_h1_error(fld, exact)
        shifted = DiscreteField(space, fld.coeffs + np.tile([0.5, -0.3],
                                                            space.dof_count // 2))
        after = broken_h1_error(shifted, exact)
        assert after.seminorm == pytest.approx(base.seminorm, rel=1e-12)
        assert after.l2 > base.l2

    def test_zero_reference_raises(self, unit_square_dirichlet):
        space = FunctionSpace(unit_square_dirichlet, "CG1")
        zero = linear_field(np.zeros((2, 2)), np.zeros(2))
        fld = DiscreteField(space, np.zeros(space.dof_count))
        with pytest.raises(ZeroReferenceError):
            broken_h1_error(fld, zero)

    def test_self_difference_is_zero(self, rng, unit_square_dirichlet):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        coeffs = rng.standard_normal(space.dof_count)
        diff = DiscreteField(space, coeffs - coeffs)
        exact = quadratic_field()
        res = broken_h1_error(diff, exact)
        assert res.full == pytest.approx(res.exact_full, rel=1e-12)


class TestMidpointInterpolant:
    def test_reproduces_linears(self, rng):
        mesh = rect_mesh(1.0, 1.0, 3, 3)
        exact = linear_field(rng.standard_normal((2, 2)),
                             rng.standard_normal(2))
        interp = midpoint_interpolant(exact, mesh)
        assert broken_h1_error(interp, exact).full < 1e-13

    def test_edge_average_of_x_squared(self):
        # bottom edge of the reference triangle: average of x^2 over [0,1]
        mesh = single_triangle_mesh()
        field = AnalyticField(lambda pts: np.stack(
            [pts[..., 0] ** 2, np.zeros(pts.shape[:-1])], axis=-1))
        avg = edge_averages(field, mesh)
        bottom = next(e for e in range(mesh.n_edges)
                      if abs(mesh.edge_midpoint[e, 1]) < 1e-12)
        assert avg[bottom, 0] == pytest.approx(1.0 / 3.0, rel=1e-12)
        # the interpolant takes that value at the edge midpoint
        interp = midpoint_interpolant(field, mesh)
        loc = interp.coeffs.reshape(3, 2)
        mid_value = 0.5 * (loc[0] + loc[1])  # midpoint of vertices 0-1
        assert mid_value[0] == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_interpolant_jumps_vanish_in_average(self):
        # property: the edge integral of (u - interp) is zero on both sides,
        # so the jump of the interpolant integrates to zero on interior
        # edges even though it is nonzero pointwise
        mesh = rect_mesh(1.0, 1.0, 3, 3)
        report = interpolant_properties_check(quadratic_field(), mesh,
                                              FiberDirection(math.pi / 3.0))
        assert report.edge_mean <= 1e-10


class TestInterpolantProperties:
    def test_linear_field_all_zero(self, rng):
        mesh = rect_mesh(1.0, 1.0, 2, 2)
        exact = linear_field(rng.standard_normal((2, 2)),
                             rng.standard_normal(2))
        report = interpolant_properties_check(exact, mesh,
                                              FiberDirection(0.4))
        assert report.edge_mean < 1e-13
        assert report.edge_mean_normal < 1e-13
        assert report.volume_divergence < 1e-13
        assert report.volume_fiber_strain < 1e-13

    def test_quadratic_field_all_properties(self):
        mesh = rect_mesh(1.0, 1.0, 4, 4)
        report = interpolant_properties_check(quadratic_field(), mesh,
                                              FiberDirection(math.pi / 3.0))
        assert report.ok

    def test_quadratic_field_on_distorted_domain(self):
        mesh = rect_mesh(2.0, 1.5, 5, 3)
        report = interpolant_properties_check(quadratic_field(), mesh,
                                              FiberDirection(5 * math.pi / 6))
        assert report.ok

    def test_trig_field_residuals_are_quadrature_limited(self):
        # for non-polynomial fields the identities hold for exact integrals;
        # the reported residual is quadrature truncation and shrinks fast
        # under refinement
        coarse = interpolant_properties_check(
            trig_field(), rect_mesh(2.0, 1.5, 5, 3),
            FiberDirection(5 * math.pi / 6), tol=1e-5)
        assert coarse.ok
        fine = interpolant_properties_check(
            trig_field(), rect_mesh(2.0, 1.5, 20, 12),
            FiberDirection(5 * math.pi / 6), tol=1e-5)
        assert fine.volume_divergence < 0.01 * coarse.volume_divergence

    def test_rejects_varying_fiber(self):
        with pytest.raises(TypeError):
            interpolant_properties_check(quadratic_field(),
                                         rect_mesh(1.0, 1.0, 2, 2),
                                         fiber=lambda x: x)


class TestConvergenceRates:
    def test_exact_first_order(self):
        rates = convergence_rates([0.04, 0.02, 0.01], [4e-2, 2e-2, 1e-2])
        assert rates == pytest.approx([1.0, 1.0], abs=1e-13)

    def test_second_order(self):
        rates = convergence_rates([0.1, 0.05, 0.025], [1e-2, 2.5e-3, 6.25e-4])
        assert rates == pytest.approx([2.0, 2.0], abs=1e-13)

    def test_single_level_raises(self):
        with pytest.raises(InvalidSequenceError):
            convergence_rates([0.1], [1.0])

    def test_nonmonotone_h_raises(self):
        with pytest.raises(InvalidSequenceError):
            convergence_rates([0.1, 0.2], [1.0, 0.5])

    def test_nonpositive_error_raises(self):
        with pytest.raises(InvalidSequenceError):
            convergence_rates([0.1, 0.05], [1.0, 0.0])

    def test_fit_rate_matches_uniform_rates(self):
        hs = [0.1, 0.05, 0.025]
        errors = [c * h ** 1.5 for c, h in zip([1.0, 1.0, 1.0], hs)]
        assert fit_rate(hs, errors) == pytest.approx(1.5, rel=1e-12)


class TestInterpolationEstimates:
    def test_trig_field_rates(self):
        meshes = [rect_mesh(1.0, 1.0, n, n) for n in (4, 8, 16, 32)]
        report = interpolation_estimate_check(trig_field(), meshes,
                                              FiberDirection(math.pi / 3.0))
        assert report.rates_ok(l2_threshold=1.9, first_order_threshold=0.9)
        assert report.equalities_ok(tol=1e-12)

    def test_quadratic_second_seminorm_identity(self):
        meshes = [rect_mesh(1.0, 1.0, n, n) for n in (2, 4)]
        report = interpolation_estimate_check(quadratic_field(), meshes,
                                              FiberDirection(0.9))
        assert report.second_seminorm_residual <= 1e-12

    def test_linear_field_zero_errors(self, rng):
        # every interpolation error quantity vanishes for affine fields
        exact = linear_field(rng.standard_normal((2, 2)),
                             rng.standard_normal(2))
        for n in (2, 4):
            interp = midpoint_interpolant(exact, rect_mesh(1.0, 1.0, n, n))
            err = broken_h1_error(interp, exact)
            assert err.full < 1e-13


class TestDgError:
    def test_matches_norm_for_in_space_difference(self, rng,
                                                  unit_square_dirichlet):
        # when the "exact" field is itself piecewise linear and continuous,
        # dg_error equals the dg_norm of the coefficient difference
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        exact = linear_field(np.array([[0.2, -0.1], [0.4, 0.3]]),
                             np.array([0.02, 0.01]))
        coeffs = space.interpolate(exact.value)
        noise = rng.standard_normal(space.dof_count) * 0.01
        fld = DiscreteField(space, coeffs + noise)
        direct = dg_error(fld, exact)
        via_norm = dg_norm(DiscreteField(space, noise))
        assert direct == pytest.approx(via_norm, rel=1e-10)

    def test_zero_for_exact_interpolant(self, unit_square_dirichlet):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        exact = linear_field(np.array([[0.2, -0.1], [0.4, 0.3]]),
                             np.array([0.02, 0.01]))
        fld = DiscreteField(space, space.interpolate(exact.value))
        assert dg_error(fld, exact) < 1e-13


class TestVertexValue:
    def test_cg_nodal(self, unit_square_dirichlet):
        space = FunctionSpace(unit_square_dirichlet, "CG1")
        exact = linear_field(np.array([[1.0, 2.0], [3.0, 4.0]]),
                             np.zeros(2))
        fld = DiscreteField(space, space.interpolate(exact.value))
        vid = unit_square_dirichlet.find_vertex((0.5, 0.5))
        assert np.abs(vertex_value(fld, vid) - [1.5, 3.5]).max() < 1e-14

    def test_dg_averages_coincident_dofs(self, unit_square_dirichlet):
        space = FunctionSpace(unit_square_dirichlet, "DG1")
        exact = linear_field(np.array([[1.0, 2.0], [3.0, 4.0]]),
                             np.zeros(2))
        fld = DiscreteField(space, space.interpolate(exact.value))
        vid = unit_square_dirichlet.find_vertex((0.5, 0.5))
        assert np.abs(vertex_value(fld, vid) - [1.5, 3.5]).max() < 1e-13


class TestErrorReport:
    def test_csv_schema(self, tmp_path):
        report = ErrorReport(records=[
            ErrorRecord(level=0, h=0.2, ndof=100, dg_err=0.5,
                        h1_rel_err=0.4, l2_err=0.1),
            ErrorRecord(level=1, h=0.1, ndof=400, dg_err=0.25,
                        h1_rel_err=0.2, l2_err=0.025),
        ])
        path = tmp_path / "report.csv"
        report.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "level,h,ndof,dg_err,h1_rel_err,l2_err,rate_h1"
        assert len(lines) == 3
        assert lines[2].split(",")[-1] == "1.0"
        assert report.rates_h1 == pytest.approx([1.0])
