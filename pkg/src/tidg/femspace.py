"""Finite element spaces, reference bases, quadrature, edge projections.

Everything lives on the unit right triangle (0,0), (1,0), (0,1) and the
reference edge [0, 1]; element maps are affine with constant Jacobians.
Vector degrees of freedom are interleaved (x-component, y-component per
scalar node).
"""

from dataclasses import dataclass

import numpy as np

from .errors import PointOutsideElementError, UnsupportedDegreeError
from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Points and weights on a reference domain.

    Triangle rules: points (nq, 2), weights summing to 1/2.
    Edge rules: points (nq,), weights summing to 1.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        self.points.flags.writeable = False
        self.weights.flags.writeable = False


def _tri_rule(points, weights, degree):
    pts = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    return QuadratureRule(points=pts, weights=0.5 * w, degree=degree)


def _make_triangle_rules():
    rules = {}
    rules[1] = _tri_rule([[1 / 3, 1 / 3]], [1.0], 1)
    rules[2] = _tri_rule([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]],
                         [1 / 3, 1 / 3, 1 / 3], 2)
    a, b = 0.445948490915965, 0.091576213509771
    wa, wb = 0.223381589678011, 0.109951743655322
    rules[4] = _tri_rule(
        [[a, a], [1 - 2 * a, a], [a, 1 - 2 * a],
         [b, b], [1 - 2 * b, b], [b, 1 - 2 * b]],
        [wa, wa, wa, wb, wb, wb], 4)
    c, d = 0.470142064105115, 0.101286507323456
    wc, wd = 0.132394152788506, 0.125939180544827
    rules[5] = _tri_rule(
        [[1 / 3, 1 / 3],
         [c, c], [1 - 2 * c, c], [c, 1 - 2 * c],
         [d, d], [1 - 2 * d, d], [d, 1 - 2 * d]],
        [0.225, wc, wc, wc, wd, wd, wd], 5)
    return rules


def _make_edge_rules():
    half = 0.5 / np.sqrt(3.0)
    g3 = 0.5 * np.sqrt(3.0 / 5.0)
    return {
        1: QuadratureRule(np.array([0.5]), np.array([1.0]), 1),
        3: QuadratureRule(np.array([0.5 - half, 0.5 + half]),
                          np.array([0.5, 0.5]), 3),
        5: QuadratureRule(np.array([0.5 - g3, 0.5, 0.5 + g3]),
                          np.array([5 / 18, 8 / 18, 5 / 18]), 5),
    }


_TRIANGLE_RULES = _make_triangle_rules()
_EDGE_RULES = _make_edge_rules()


def element_quadrature(degree):
    """Rule exact for polynomials up to `degree` on the reference triangle."""
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    for d in sorted(_TRIANGLE_RULES):
        if d >= degree:
            return _TRIANGLE_RULES[d]
    raise UnsupportedDegreeError(
        f"no triangle rule of degree {degree} (table goes up to "
        f"{max(_TRIANGLE_RULES)})")


def edge_quadrature(degree):
    """Gauss rule exact for polynomials up to `degree` on [0, 1].

    Degree 1 is the single midpoint: deliberately inexact on quadratics,
    which is what realizes the constant projection of jump integrands.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    for d in sorted(_EDGE_RULES):
        if d >= degree:
            return _EDGE_RULES[d]
    raise UnsupportedDegreeError(
        f"no edge rule of degree {degree} (table goes up to {max(_EDGE_RULES)})")


def pi0_edge(trace, rule=None):
    """L2 projection of an edge trace onto constants: the edge average.

    Parameters
    ----------
    trace : callable or ndarray
        Callable on the arclength parameter s in [0, 1] (vectorized), or an
        array of values already sampled at `rule.points`.
    rule : QuadratureRule, optional
        Edge rule used for the average; defaults to degree 5.

    For a linear trace the average equals the midpoint value, which is why
    one-point midpoint quadrature realizes the projection exactly for
    piecewise-linear jump integrands.
    """
    if rule is None:
        rule = edge_quadrature(5)
    values = trace(rule.points) if callable(trace) else np.asarray(trace)
    # reference weights sum to 1, so this is already the average
    return np.tensordot(rule.weights, values, axes=(0, 0))


# -- reference bases ---------------------------------------------------------

def p1_basis(points):
    """P1 barycentric basis values at reference points (n, 2) -> (n, 3)."""
    points = np.atleast_2d(points)
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([1.0 - x - y, x, y])


P1_GRADS = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def p2_basis(points):
    """P2 Lagrange basis values at reference points (n, 2) -> (n, 6).

    Node order: the three vertices, then the midpoint of the edge opposite
    each vertex (matching the mesh's local edge numbering).
    """
    points = np.atleast_2d(points)
    x, y = points[:, 0], points[:, 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    return np.column_stack([
        l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
        4 * l1 * l2, 4 * l2 * l0, 4 * l0 * l1,
    ])


def p2_grads(points):
    """P2 reference gradients at points (n, 2) -> (n, 6, 2)."""
    points = np.atleast_2d(points)
    x, y = points[:, 0], points[:, 1]
    l0 = 1.0 - x - y
    zeros = np.zeros_like(x)
    g = np.empty((len(points), 6, 2))
    g[:, 0, 0] = 1.0 - 4.0 * l0
    g[:, 0, 1] = 1.0 - 4.0 * l0
    g[:, 1, 0] = 4.0 * x - 1.0
    g[:, 1, 1] = zeros
    g[:, 2, 0] = zeros
    g[:, 2, 1] = 4.0 * y - 1.0
    g[:, 3, 0] = 4.0 * y
    g[:, 3, 1] = 4.0 * x
    g[:, 4, 0] = -4.0 * y
    g[:, 4, 1] = 4.0 * (l0 - y)
    g[:, 5, 0] = 4.0 * (l0 - x)
    g[:, 5, 1] = -4.0 * x
    return g


_REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


class FunctionSpace:
    """Vector-valued CG1, CG2 or DG1 space on a mesh.

    Parameters
    ----------
    mesh : Mesh
    kind : str
        One of "CG1", "CG2", "DG1".

    Attributes
    ----------
    dof_count : int
    scalar_nodes_per_element : int
        3 for P1 kinds, 6 for CG2.
    element_dofs : ndarray, shape (nt, 2 * scalar_nodes_per_element)
        Global dof ids per element; components interleaved per node.
    """

    KINDS = ("CG1", "CG2", "DG1")

    def __init__(self, mesh, kind):
        if kind not in self.KINDS:
            raise ValueError(f"unknown space kind {kind!r}; expected one of {self.KINDS}")
        if not isinstance(mesh, Mesh):
            raise TypeError("mesh must be a Mesh")
        self.mesh = mesh
        self.kind = kind
        nt = mesh.n_triangles
        nv = mesh.n_vertices

        if kind == "DG1":
            self.scalar_nodes_per_element = 3
            self.dof_count = 6 * nt
            self.element_dofs = np.arange(6 * nt, dtype=np.int64).reshape(nt, 6)
        elif kind == "CG1":
            self.scalar_nodes_per_element = 3
            self.dof_count = 2 * nv
            self.element_dofs = _interleave(mesh.triangles)
        else:  # CG2
            self.scalar_nodes_per_element = 6
            self.dof_count = 2 * (nv + mesh.n_edges)
            nodes = np.hstack([mesh.triangles, nv + mesh.triangle_edges])
            self.element_dofs = _interleave(nodes)
        self.element_dofs.flags.writeable = False

        # constant per-element geometry
        p = mesh.vertices[mesh.triangles]
        jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # (nt,2,2)
        self.jacobians = jac
        self.det_jac = 2.0 * mesh.areas
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1]
        inv[:, 0, 1] = -jac[:, 0, 1]
        inv[:, 1, 0] = -jac[:, 1, 0]
        inv[:, 1, 1] = jac[:, 0, 0]
        inv /= self.det_jac[:, None, None]
        self.inv_jacobians = inv
        # physical gradients of the barycentric basis, (nt, 3, 2)
        self.p1_phys_grads = np.einsum("id,edc->eic", P1_GRADS, inv)

    @property
    def is_dg(self):
        return self.kind == "DG1"

    def node_coords(self):
        """Coordinates of the scalar nodes, shape (dof_count / 2, 2)."""
        mesh = self.mesh
        if self.kind == "CG1":
            return mesh.vertices
        if self.kind == "CG2":
            return np.vstack([mesh.vertices, mesh.edge_midpoint])
        return mesh.vertices[mesh.triangles].reshape(-1, 2)

    def interpolate(self, func):
        """Nodal interpolation of a vector field; func: (n, 2) -> (n, 2)."""
        vals = np.asarray(func(self.node_coords()), dtype=float)
        return vals.reshape(-1)

    def map_points(self, ref_points):
        """Physical coordinates of reference points on every element.

        ref_points (nq, 2) -> (nt, nq, 2)
        """
        origin = self.mesh.vertices[self.mesh.triangles[:, 0]]
        return origin[:, None, :] + np.einsum(
            "ecd,qd->eqc", self.jacobians, np.atleast_2d(ref_points))

    def basis_at(self, ref_points):
        """Scalar basis values at reference points: (nq, nodes)."""
        if self.kind == "CG2":
            return p2_basis(ref_points)
        return p1_basis(ref_points)

    def phys_grads_at(self, ref_points):
        """Physical basis gradients at reference points: (nt, nq, nodes, 2)."""
        nq = len(np.atleast_2d(ref_points))
        if self.kind == "CG2":
            ref = p2_grads(ref_points)  # (nq, 6, 2)
            return np.einsum("qid,edc->eqic", ref, self.inv_jacobians)
        g = self.p1_phys_grads[:, None, :, :]
        return np.broadcast_to(g, (self.mesh.n_triangles, nq, 3, 2))


def _interleave(nodes):
    """Scalar node ids (nt, k) -> interleaved vector dofs (nt, 2k)."""
    nt, k = nodes.shape
    dofs = np.empty((nt, 2 * k), dtype=np.int64)
    dofs[:, 0::2] = 2 * nodes
    dofs[:, 1::2] = 2 * nodes + 1
    return dofs


def shape_eval(space, element, point):
    """Basis values and physical gradients of one element at a point.

    Parameters
    ----------
    space : FunctionSpace
    element : int
    point : array-like, shape (2,)
        Physical coordinates; must lie inside the element (barycentric
        coordinates in [0, 1] up to roundoff).

    Returns
    -------
    values : ndarray, shape (nodes,)
    grads : ndarray, shape (nodes, 2)
    """
    point = np.asarray(point, dtype=float)
    origin = space.mesh.vertices[space.mesh.triangles[element, 0]]
    ref = space.inv_jacobians[element] @ (point - origin)
    bary = np.array([1.0 - ref[0] - ref[1], ref[0], ref[1]])
    tol = 1e-12
    if np.any(bary < -tol) or np.any(bary > 1.0 + tol):
        raise PointOutsideElementError(
            f"point {point} is outside element {element} "
            f"(barycentric {bary})")
    values = space.basis_at(ref[None, :])[0]
    grads = space.phys_grads_at(ref[None, :])[element, 0]
    return values, grads


def edge_ref_points(mesh, edges, side, s):
    """Reference coordinates, within the adjacent element, of edge points.

    Parameters
    ----------
    mesh : Mesh
    edges : ndarray of edge ids
    side : str
        "owner" or "neighbor".
    s : ndarray, shape (nq,)
        Arclength parameters along the edge in `edge_vertices` order.

    Returns
    -------
    ndarray, shape (len(edges), nq, 2)
    """
    slots = (mesh.edge_owner_slots if side == "owner"
             else mesh.edge_neighbor_slots)[edges]
    ra = _REF_VERTICES[slots[:, 0]]  # (ne, 2)
    rb = _REF_VERTICES[slots[:, 1]]
    s = np.asarray(s, dtype=float)
    return (1.0 - s)[None, :, None] * ra[:, None, :] \
        + s[None, :, None] * rb[:, None, :]


def edge_trace_weights(space, edges, side, s):
    """Trace of the scalar basis along edges: (ne, nq, nodes).

    Evaluates the adjacent element's basis at the edge points, so the same
    machinery serves P1 and P2 spaces; basis functions not supported on the
    edge come out as zeros.
    """
    ref = edge_ref_points(space.mesh, edges, side, s)
    ne, nq, _ = ref.shape
    return space.basis_at(ref.reshape(-1, 2)).reshape(ne, nq, -1)
