"""Norms, error measures, convergence rates and interpolation oracles."""

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import femspace
from .assembly import dg_norm_gram
from .errors import InvalidSequenceError, ZeroReferenceError
from .femspace import FunctionSpace, edge_quadrature, element_quadrature


@dataclass(frozen=True)
class DiscreteField:
    """Coefficient vector bound to its function space."""

    space: FunctionSpace
    coeffs: np.ndarray

    def __post_init__(self):
        if len(self.coeffs) != self.space.dof_count:
            raise ValueError(
                f"coefficient length {len(self.coeffs)} != dof count "
                f"{self.space.dof_count}")


class AnalyticField:
    """Vector field given by vectorized callables.

    value : pts (..., 2) -> (..., 2)
    grad : pts -> (..., 2, 2), grad[..., c, d] = d u_c / d x_d
    hessian : pts -> (..., 2, 2, 2), optional (needed only by the
        second-derivative identities of the interpolation checks)
    """

    def __init__(self, value, grad=None, hessian=None):
        self._value = value
        self._grad = grad
        self._hessian = hessian

    def value(self, pts):
        return np.asarray(self._value(np.asarray(pts, dtype=float)), dtype=float)

    def grad(self, pts):
        if self._grad is None:
            raise ValueError("field has no gradient callable")
        return np.asarray(self._grad(np.asarray(pts, dtype=float)), dtype=float)

    def hessian(self, pts):
        if self._hessian is None:
            raise ValueError("field has no hessian callable")
        return np.asarray(self._hessian(np.asarray(pts, dtype=float)), dtype=float)


def linear_field(A, b):
    """Affine field u(x) = A x + b as an AnalyticField (zero hessian)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)

    def value(pts):
        return pts @ A.T + b

    def grad(pts):
        return np.broadcast_to(A, pts.shape[:-1] + (2, 2)).copy()

    def hessian(pts):
        return np.zeros(pts.shape[:-1] + (2, 2, 2))

    return AnalyticField(value, grad, hessian)


def eval_at_rule(field, rule):
    """Field values and gradients at element quadrature points.

    Returns (values (nt, nq, 2), grads (nt, nq, 2, 2)).
    """
    space = field.space
    k = space.scalar_nodes_per_element
    loc = field.coeffs[space.element_dofs].reshape(-1, k, 2)
    phi = space.basis_at(rule.points)
    vals = np.einsum("qi,eic->eqc", phi, loc)
    pg = space.phys_grads_at(rule.points)
    grads = np.einsum("eqid,eic->eqcd", pg, loc)
    return vals, grads


def vertex_value(field, vid):
    """Field value at a mesh vertex; elementwise average for DG fields."""
    space = field.space
    if not space.is_dg:
        return field.coeffs[2 * vid:2 * vid + 2].copy()
    mesh = space.mesh
    tris = mesh.vertex_elements(vid)
    acc = np.zeros(2)
    for t in tris:
        slot = int(np.flatnonzero(mesh.triangles[t] == vid)[0])
        acc += field.coeffs[6 * t + 2 * slot:6 * t + 2 * slot + 2]
    return acc / len(tris)


# -- norms and errors ---------------------------------------------------------

def dg_norm(field):
    """Broken strain seminorm plus scaled jump seminorm of a field."""
    G = dg_norm_gram(field.space)
    return float(np.sqrt(max(field.coeffs @ (G @ field.coeffs), 0.0)))


def _frobenius_strain_sq(grads):
    """|eps|_F^2 from displacement gradients (..., 2, 2)."""
    e11 = grads[..., 0, 0]
    e22 = grads[..., 1, 1]
    e12 = 0.5 * (grads[..., 0, 1] + grads[..., 1, 0])
    return e11 ** 2 + e22 ** 2 + 2.0 * e12 ** 2


def dg_error(field, exact):
    """Mesh-dependent norm of (field - exact) for a continuous exact field.

    The jump part uses the one-sided mismatch against the exact trace on
    Dirichlet-type edges (its normal component on normal-datum edges) and
    the plain jump of the discrete field on interior edges.
    """
    space = field.space
    mesh = space.mesh
    rule = element_quadrature(5)
    _, grads = eval_at_rule(field, rule)
    gex = exact.grad(space.map_points(rule.points))
    strain_sq = np.einsum("q,e,eq->", rule.weights, space.det_jac,
                          _frobenius_strain_sq(grads - gex))

    jump_sq = 0.0
    erule = edge_quadrature(5)
    for family in ("interior", "dirichlet", "normal"):
        if family == "interior":
            if not space.is_dg:
                continue
            edges = mesh.interior_edges
        elif family == "dirichlet":
            edges = mesh.dirichlet_edges
        else:
            edges = mesh.dirichlet_normal_edges
        if len(edges) == 0:
            continue
        diff = _trace_values(field, edges, "owner", erule.points)
        if family == "interior":
            diff = diff - _trace_values(field, edges, "neighbor", erule.points)
        else:
            x = _edge_phys_points(mesh, edges, erule.points)
            diff = diff - exact.value(x)
        if family == "normal":
            n = mesh.edge_normal[edges]
            comp = np.einsum("eqc,ec->eq", diff, n)
            sq = comp ** 2
        else:
            sq = np.einsum("eqc,eqc->eq", diff, diff)
        jump_sq += 0.5 * float(np.einsum("q,eq->", erule.weights, sq))
    return float(np.sqrt(strain_sq + jump_sq))


def _trace_values(field, edges, side, s):
    space = field.space
    mesh = space.mesh
    w = femspace.edge_trace_weights(space, edges, side, s)
    tris = (mesh.edge_owner if side == "owner" else mesh.edge_neighbor)[edges]
    k = space.scalar_nodes_per_element
    loc = field.coeffs[space.element_dofs[tris]].reshape(len(edges), k, 2)
    return np.einsum("eqi,eic->eqc", w, loc)


def _edge_phys_points(mesh, edges, s):
    xa = mesh.vertices[mesh.edge_vertices[edges, 0]]
    xb = mesh.vertices[mesh.edge_vertices[edges, 1]]
    s = np.asarray(s, dtype=float)
    return (1.0 - s)[None, :, None] * xa[:, None, :] + s[None, :, None] * xb[:, None, :]


class H1Error(NamedTuple):
    """Broken H1 error of a discrete field against an analytic one."""

    seminorm: float      # elementwise |e|_1
    l2: float            # ||e||_0
    full: float          # sqrt(seminorm^2 + l2^2)
    relative: float      # full / full norm of the exact field
    exact_full: float


def broken_h1_error(field, exact):
    """Elementwise H1 error, absolute and relative to the exact norm.

    Raises
    ------
    ZeroReferenceError
        If the exact field has (numerically) zero H1 norm.
    """
    space = field.space
    rule = element_quadrature(5)
    vals, grads = eval_at_rule(field, rule)
    x = space.map_points(rule.points)
    vex = exact.value(x)
    gex = exact.grad(x)
    wdet = rule.weights[None, :] * space.det_jac[:, None]
    semi_sq = float(np.sum(wdet * np.sum((grads - gex) ** 2, axis=(2, 3))))
    l2_sq = float(np.sum(wdet * np.sum((vals - vex) ** 2, axis=2)))
    ref_sq = float(np.sum(wdet * (np.sum(gex ** 2, axis=(2, 3))
                                  + np.sum(vex ** 2, axis=2))))
    if ref_sq <= 0.0:
        raise ZeroReferenceError("exact solution has zero H1 norm")
    full = np.sqrt(semi_sq + l2_sq)
    return H1Error(seminorm=np.sqrt(semi_sq), l2=np.sqrt(l2_sq), full=full,
                   relative=full / np.sqrt(ref_sq), exact_full=np.sqrt(ref_sq))


def l2_error(field, exact):
    space = field.space
    rule = element_quadrature(5)
    vals, _ = eval_at_rule(field, rule)
    vex = exact.value(space.map_points(rule.points))
    wdet = rule.weights[None, :] * space.det_jac[:, None]
    return float(np.sqrt(np.sum(wdet * np.sum((vals - vex) ** 2, axis=2))))


# -- edge-average interpolant ---------------------------------------------------

def edge_averages(exact, mesh):
    """Average of the field over every edge, shape (ne, 2)."""
    rule = edge_quadrature(5)
    x = _edge_phys_points(mesh, np.arange(mesh.n_edges), rule.points)
    vals = exact.value(x)
    return np.einsum("q,eqc->ec", rule.weights, vals)


def midpoint_interpolant(exact, mesh):
    """Elementwise linear field matching the edge averages of `exact`.

    On each triangle this is the unique linear vector field whose value at
    each edge midpoint equals the average of `exact` over that edge; it
    reproduces global linears exactly and its edge-average mismatch
    vanishes by construction.
    """
    space = FunctionSpace(mesh, "DG1")
    avg = edge_averages(exact, mesh)[mesh.triangle_edges]  # (nt, 3, 2)
    total = avg.sum(axis=1, keepdims=True)
    vertex_vals = total - 2.0 * avg  # value at vertex v: sum - 2 * opposite
    return DiscreteField(space=space, coeffs=vertex_vals.reshape(-1))


@dataclass(frozen=True)
class InterpolantPropertiesReport:
    """Scaled residuals of the four defining integral identities."""

    edge_mean: float        # edge integral of (u - Pi u)
    edge_mean_normal: float  # same, dotted with the element outward normal
    volume_divergence: float
    volume_fiber_strain: float
    tol: float

    @property
    def ok(self):
        return max(self.edge_mean, self.edge_mean_normal,
                   self.volume_divergence, self.volume_fiber_strain) <= self.tol


def interpolant_properties_check(exact, mesh, fiber, tol=1e-10):
    """Verify the integral identities of the edge-average interpolant.

    Residuals are normalized by the edge/element measure and the local
    field scale, so `tol` is a relative tolerance.  The fibre direction
    must be constant (a FiberDirection), which is what makes the fibre-
    strain identity integrate by parts to zero.
    """
    if not hasattr(fiber, "M"):
        raise TypeError("fiber must be a FiberDirection (constant direction)")
    interp = midpoint_interpolant(exact, mesh)
    erule = edge_quadrature(5)
    vrule = element_quadrature(5)

    all_edges = np.arange(mesh.n_edges)
    x_edge = _edge_phys_points(mesh, all_edges, erule.points)
    uvals = exact.value(x_edge)
    uscale = max(1.0, float(np.abs(uvals).max()))

    res_mean = 0.0
    res_mean_n = 0.0
    for side in ("owner", "neighbor"):
        if side == "owner":
            edges = all_edges
        else:
            edges = np.flatnonzero(mesh.edge_neighbor >= 0)
        tvals = _trace_values(interp, edges, side, erule.points)
        diff = uvals[edges] - tvals
        integral = mesh.edge_length[edges, None] * np.einsum(
            "q,eqc->ec", erule.weights, diff)
        scaled = np.abs(integral) / (mesh.edge_length[edges, None] * uscale)
        res_mean = max(res_mean, float(scaled.max()))
        sign = 1.0 if side == "owner" else -1.0
        dotn = np.einsum("ec,ec->e", integral, sign * mesh.edge_normal[edges])
        res_mean_n = max(res_mean_n, float(
            (np.abs(dotn) / (mesh.edge_length[edges] * uscale)).max()))

    x_vol = interp.space.map_points(vrule.points)
    gex = exact.grad(x_vol)
    _, gint = eval_at_rule(interp, vrule)
    gdiff = gex - gint
    gscale = max(1.0, float(np.abs(gex).max()))
    wdet = vrule.weights[None, :] * interp.space.det_jac[:, None]
    div_int = np.sum(wdet * (gdiff[..., 0, 0] + gdiff[..., 1, 1]), axis=1)
    res_div = float((np.abs(div_int) / (mesh.areas * gscale)).max())
    M = fiber.M
    eps_diff = 0.5 * (gdiff + np.swapaxes(gdiff, -1, -2))
    fib_int = np.sum(wdet * np.einsum("cd,eqcd->eq", M, eps_diff), axis=1)
    res_fib = float((np.abs(fib_int) / (mesh.areas * gscale)).max())

    return InterpolantPropertiesReport(
        edge_mean=res_mean, edge_mean_normal=res_mean_n,
        volume_divergence=res_div, volume_fiber_strain=res_fib, tol=tol)


# -- convergence rates ----------------------------------------------------------

def convergence_rates(hs, errors):
    """Observed rates log(e_i/e_{i+1}) / log(h_i/h_{i+1}).

    Raises
    ------
    InvalidSequenceError
        On fewer than two levels, non-decreasing h, or non-positive errors.
    """
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(hs) < 2 or len(hs) != len(errors):
        raise InvalidSequenceError(
            f"need >= 2 matching levels, got {len(hs)} and {len(errors)}")
    if np.any(np.diff(hs) >= 0.0):
        raise InvalidSequenceError("mesh sizes must be strictly decreasing")
    if np.any(errors <= 0.0):
        raise InvalidSequenceError("errors must be positive")
    rates = np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])
    return [float(r) for r in rates]


def fit_rate(hs, errors):
    """Least-squares slope of log(error) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(hs) < 2 or np.any(errors <= 0.0) or np.any(hs <= 0.0):
        raise InvalidSequenceError("need >= 2 levels with positive h and errors")
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


@dataclass(frozen=True)
class InterpolationEstimateReport:
    """First-order decay checks for the edge-average interpolant."""

    hs: tuple
    l2: tuple
    h1: tuple
    divergence: tuple
    fiber_strain: tuple
    l2_rates: tuple
    h1_rates: tuple
    divergence_rates: tuple
    fiber_strain_rates: tuple
    second_seminorm_residual: float   # | |u - Pi u|_2 - |u|_2 |, relative
    div_seminorm_residual: float      # | |div(u - Pi u)|_1 - |div u|_1 |
    fiber_seminorm_residual: float

    def rates_ok(self, l2_threshold=1.9, first_order_threshold=0.9):
        return (min(self.l2_rates) >= l2_threshold
                and min(self.h1_rates) >= first_order_threshold
                and min(self.divergence_rates) >= first_order_threshold
                and min(self.fiber_strain_rates) >= first_order_threshold)

    def equalities_ok(self, tol=1e-12):
        return max(self.second_seminorm_residual, self.div_seminorm_residual,
                   self.fiber_seminorm_residual) <= tol


def interpolation_estimate_check(exact, meshes, fiber):
    """Decay rates and exact identities for the edge-average interpolant.

    The interpolant is elementwise linear, so its second derivatives, the
    gradient of its divergence and the gradient of its fibre strain vanish;
    the corresponding seminorm identities are checked through the discrete
    representation, and the error quantities must decay at first order
    (second order in the mean-square norm).
    """
    M = fiber.M
    hs, l2s, h1s, divs, fibs = [], [], [], [], []
    eq2 = eqd = eqf = 0.0
    rule = element_quadrature(5)
    for mesh in meshes:
        interp = midpoint_interpolant(exact, mesh)
        space = interp.space
        x = space.map_points(rule.points)
        vals, grads = eval_at_rule(interp, rule)
        vex = exact.value(x)
        gex = exact.grad(x)
        wdet = rule.weights[None, :] * space.det_jac[:, None]
        vdiff = vex - vals
        gdiff = gex - grads
        l2s.append(np.sqrt(np.sum(wdet * np.sum(vdiff ** 2, axis=2))))
        h1s.append(np.sqrt(np.sum(wdet * np.sum(gdiff ** 2, axis=(2, 3)))))
        divs.append(np.sqrt(np.sum(
            wdet * (gdiff[..., 0, 0] + gdiff[..., 1, 1]) ** 2)))
        eps = 0.5 * (gdiff + np.swapaxes(gdiff, -1, -2))
        fibs.append(np.sqrt(np.sum(
            wdet * np.einsum("cd,eqcd->eq", M, eps) ** 2)))
        hs.append(mesh.h)

        # the interpolant is linear per element, so every second derivative
        # of its representation is identically zero
        hex_ = exact.hessian(x)  # (nt, nq, 2, 2, 2)
        hess_interp = np.zeros_like(hex_)
        lhs2 = np.sqrt(np.sum(wdet * np.sum((hex_ - hess_interp) ** 2,
                                            axis=(2, 3, 4))))
        rhs2 = np.sqrt(np.sum(wdet * np.sum(hex_ ** 2, axis=(2, 3, 4))))
        eq2 = max(eq2, abs(lhs2 - rhs2) / max(rhs2, 1e-300))
        grad_div_ex = hex_[..., 0, 0, :] + hex_[..., 1, 1, :]
        grad_div_interp = hess_interp[..., 0, 0, :] + hess_interp[..., 1, 1, :]
        lhsd = np.sqrt(np.sum(wdet * np.sum(
            (grad_div_ex - grad_div_interp) ** 2, axis=2)))
        rhsd = np.sqrt(np.sum(wdet * np.sum(grad_div_ex ** 2, axis=2)))
        eqd = max(eqd, abs(lhsd - rhsd) / max(rhsd, 1e-300))
        sym_hess = 0.5 * (hex_ + np.swapaxes(hex_, 2, 3))
        grad_fib_ex = np.einsum("cd,eqcdf->eqf", M, sym_hess)
        grad_fib_interp = np.einsum("cd,eqcdf->eqf", M, hess_interp)
        lhsf = np.sqrt(np.sum(wdet * np.sum(
            (grad_fib_ex - grad_fib_interp) ** 2, axis=2)))
        rhsf = np.sqrt(np.sum(wdet * np.sum(grad_fib_ex ** 2, axis=2)))
        eqf = max(eqf, abs(lhsf - rhsf) / max(rhsf, 1e-300))

    return InterpolationEstimateReport(
        hs=tuple(hs), l2=tuple(l2s), h1=tuple(h1s), divergence=tuple(divs),
        fiber_strain=tuple(fibs),
        l2_rates=tuple(convergence_rates(hs, l2s)),
        h1_rates=tuple(convergence_rates(hs, h1s)),
        divergence_rates=tuple(convergence_rates(hs, divs)),
        fiber_strain_rates=tuple(convergence_rates(hs, fibs)),
        second_seminorm_residual=eq2,
        div_seminorm_residual=eqd,
        fiber_seminorm_residual=eqf)


# -- per-refinement error reports -------------------------------------------------

@dataclass(frozen=True)
class ErrorRecord:
    level: int
    h: float
    ndof: int
    dg_err: float
    h1_rel_err: float
    l2_err: float


@dataclass
class ErrorReport:
    """Errors across a refinement sequence, with observed rates."""

    records: list

    @property
    def rates_h1(self):
        hs = [r.h for r in self.records]
        es = [r.h1_rel_err for r in self.records]
        return convergence_rates(hs, es)

    def fit_rate_h1(self, last=3):
        """Least-squares rate over the last `last` levels."""
        recs = self.records[-last:]
        return fit_rate([r.h for r in recs], [r.h1_rel_err for r in recs])

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "h", "ndof", "dg_err", "h1_rel_err",
                             "l2_err", "rate_h1"])
            rates = [""] + [fmt_float(r) for r in self.rates_h1]
            for rec, rate in zip(self.records, rates):
                writer.writerow([rec.level, fmt_float(rec.h), rec.ndof,
                                 fmt_float(rec.dg_err),
                                 fmt_float(rec.h1_rel_err),
                                 fmt_float(rec.l2_err), rate])


def fmt_float(x):
    """Shortest round-trip decimal form, stable across numpy versions."""
    return repr(float(x))
