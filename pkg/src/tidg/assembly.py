"""Sparse system assembly for the conforming and interior-penalty forms.

The discrete bilinear form is the sum of the elementwise stress-strain
term, the consistency and adjoint edge terms (the latter weighted by the
method switch theta = +1 / -1 / 0), and five jump penalties weighted by
independent non-negative parameters, one per material constant.  All jump
penalties scale with 1/h_E.  With every parameter equal to k (and the
shear one doubled) the five penalties collapse to the single elasticity-
tensor penalty (k/h_E) C(jump u):(jump v).

Under-integration replaces the extensional (beta) penalty integrand, and
its boundary-datum counterpart, by the edge-constant projection, realized
as one-point midpoint quadrature; no other term changes.  The remaining
edge terms use two-point Gauss rules, exact for the piecewise-linear
traces, so the projection is the only inexactness and it is deliberate.
The shear penalty of the modified formulation is the k_mu term already
present in the five-term split.

Edges carrying only a normal-displacement datum use the masked jump
(v . n) n (x) n in place of v (x) n throughout; the tangential component
then sees a natural traction-free condition.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import femspace
from .errors import (CoercivityNotPositiveError, InvalidStabilizationError,
                     MissingBoundaryDataError)
from .femspace import edge_quadrature, element_quadrature
from .material import voigt_matrix

_THETA = {"NIPG": 1.0, "SIPG": -1.0, "IIPG": 0.0}
_METHODS = ("CG1", "CG2", "NIPG", "SIPG", "IIPG")


@dataclass(frozen=True)
class StabilizationParams:
    """Per-term jump penalty weights; all must be non-negative.

    The defaults are the values used by every benchmark driver in this
    package: 10 for the shear, coupling and gamma terms, 100 for the
    volumetric and extensional terms.
    """

    k_mu: float = 10.0
    k_lambda: float = 100.0
    k_alpha: float = 10.0
    k_beta: float = 100.0
    k_gamma: float = 10.0

    def __post_init__(self):
        for name in ("k_mu", "k_lambda", "k_alpha", "k_beta", "k_gamma"):
            if getattr(self, name) < 0.0:
                raise InvalidStabilizationError(
                    f"{name} must be non-negative, got {getattr(self, name)}")

    @classmethod
    def uniform(cls, k):
        """All five parameters equal to k, shear doubled.

        This reproduces the single-parameter elasticity-tensor penalty
        (k/h) C(jump u):(jump v) exactly.
        """
        return cls(k_mu=2.0 * k, k_lambda=k, k_alpha=k, k_beta=k, k_gamma=k)


DEFAULT_STABILIZATION = StabilizationParams()


@dataclass(frozen=True)
class MethodConfig:
    """Discretization choice: method name, theta switch, penalties."""

    method: str
    under_integrate_beta: bool = False
    stab: StabilizationParams = field(default_factory=StabilizationParams)

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {_METHODS}")

    @property
    def theta(self):
        """+1, -1 or 0 for the DG methods; None for conforming ones."""
        return _THETA.get(self.method)

    @property
    def is_dg(self):
        return self.method in _THETA

    @property
    def label(self):
        if self.is_dg and self.under_integrate_beta:
            return f"{self.method}_UI"
        return self.method

    @classmethod
    def from_label(cls, label, stab=DEFAULT_STABILIZATION):
        """Parse labels like "SIPG_UI" or "CG1"."""
        name = label
        ui = False
        if label.endswith("_UI"):
            name, ui = label[:-3], True
        return cls(method=name, under_integrate_beta=ui, stab=stab)


@dataclass(frozen=True)
class PointConstraint:
    """Pin one displacement component at a mesh vertex."""

    point: tuple
    component: int
    value: float = 0.0


@dataclass(frozen=True)
class LoadSpec:
    """Problem data, each field a vectorized callable or None (= zero).

    body_force, neumann, dirichlet : pts (..., 2) -> (..., 2)
    dirichlet_normal : (pts (..., n, 2), normals (..., 2)) -> (..., n)
        Prescribed normal displacement u . n on normal-datum edges.
    point_constraints : tuple of PointConstraint
    """

    body_force: object = None
    neumann: object = None
    dirichlet: object = None
    dirichlet_normal: object = None
    point_constraints: tuple = ()


@dataclass
class LinearSystem:
    """Assembled sparse system A x = b."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    symmetric: bool = False

    @property
    def dof_count(self):
        return self.matrix.shape[0]

    def write_coo(self, path):
        """Dump in coordinate text format: one "row col value" per line."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w", encoding="utf-8") as fh:
            for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{r} {c} {float(v)!r}\n")


class _Builder:
    """COO accumulator with deterministic duplicate summation."""

    def __init__(self, n):
        self.n = n
        self._data = []
        self._rows = []
        self._cols = []
        self.rhs = np.zeros(n)

    def add_blocks(self, blocks, dofs):
        ne, k, _ = blocks.shape
        rows = np.broadcast_to(dofs[:, :, None], (ne, k, k))
        cols = np.broadcast_to(dofs[:, None, :], (ne, k, k))
        self._data.append(blocks.reshape(-1))
        self._rows.append(rows.reshape(-1))
        self._cols.append(cols.reshape(-1))

    def add_rhs(self, values, dofs):
        np.add.at(self.rhs, dofs.reshape(-1), values.reshape(-1))

    def matrix(self):
        if self._data:
            data = np.concatenate(self._data)
            rows = np.concatenate(self._rows)
            cols = np.concatenate(self._cols)
        else:
            data = rows = cols = np.zeros(0)
        A = sp.coo_matrix((data, (rows, cols)), shape=(self.n, self.n))
        return A.tocsr()


# -- volume terms -------------------------------------------------------------

def _strain_matrix(grads):
    """Engineering-strain displacement matrix: grads (...,k,2) -> (...,3,2k)."""
    shape = grads.shape[:-2]
    k = grads.shape[-2]
    B = np.zeros(shape + (3, 2 * k))
    B[..., 0, 0::2] = grads[..., :, 0]
    B[..., 1, 1::2] = grads[..., :, 1]
    B[..., 2, 0::2] = grads[..., :, 1]
    B[..., 2, 1::2] = grads[..., :, 0]
    return B


def _volume_stiffness(space, D):
    """Per-element stiffness blocks (nt, 2k, 2k)."""
    if space.kind == "CG2":
        rule = element_quadrature(4)
        B = _strain_matrix(space.phys_grads_at(rule.points))  # (nt,nq,3,12)
        return np.einsum("q,e,eqai,ab,eqbj->eij",
                         rule.weights, space.det_jac, B, D, B, optimize=True)
    B = _strain_matrix(space.p1_phys_grads)  # constant integrand: exact
    return space.mesh.areas[:, None, None] * np.einsum(
        "eai,ab,ebj->eij", B, D, B, optimize=True)


def _body_force_rhs(space, func):
    rule = element_quadrature(5)
    phi = space.basis_at(rule.points)          # (nq, k)
    x = space.map_points(rule.points)          # (nt, nq, 2)
    f = np.asarray(func(x), dtype=float)
    r = np.einsum("q,e,qi,eqc->eic", rule.weights, space.det_jac, phi, f)
    return r.reshape(space.mesh.n_triangles, -1)


def _p1_strain_ops(space, D):
    """B and D@B for the P1 spaces, both (nt, 3, 6)."""
    B = _strain_matrix(space.p1_phys_grads)
    return B, np.einsum("ab,ebj->eaj", D, B)


# -- edge helpers -------------------------------------------------------------

def _edge_points(mesh, edges, s):
    """Physical coordinates along edges: (ne, nq, 2)."""
    xa = mesh.vertices[mesh.edge_vertices[edges, 0]]
    xb = mesh.vertices[mesh.edge_vertices[edges, 1]]
    s = np.asarray(s, dtype=float)
    return (1.0 - s)[None, :, None] * xa[:, None, :] + s[None, :, None] * xb[:, None, :]


def _stress_normal_op(DB, tris, normals):
    """Traction operator sigma(u_loc) . n as (ne, 2, 6)."""
    ne = len(tris)
    Sn = np.zeros((ne, 2, 3))
    Sn[:, 0, 0] = normals[:, 0]
    Sn[:, 0, 2] = normals[:, 1]
    Sn[:, 1, 1] = normals[:, 1]
    Sn[:, 1, 2] = normals[:, 0]
    return np.einsum("eab,ebj->eaj", Sn, DB[tris])


def _penalty_parts(params, fiber, stab, normals):
    """Jump-penalty coefficient matrices, split off the beta part.

    Returns (P_rest, P_beta), each (ne, 2, 2), such that the full penalty
    integrand is jump_v . (P_rest + P_beta) . jump_u scaled by 1/h_E.  The
    beta part is kept separate because under-integration pairs it with
    midpoint quadrature while everything else keeps the Gauss rule.
    """
    a = fiber.a
    an = normals @ a
    eye = np.eye(2)
    nn = np.einsum("ec,ed->ecd", normals, normals)
    na = np.einsum("ec,d->ecd", normals, a)
    aa = np.outer(a, a)
    P_rest = (stab.k_lambda * params.lam * nn
              + stab.k_mu * params.mu_t * eye
              + stab.k_alpha * params.alpha
              * an[:, None, None] * (na + na.transpose(0, 2, 1))
              + stab.k_gamma * params.gamma
              * (an[:, None, None] ** 2 * eye + aa))
    P_beta = stab.k_beta * params.beta * an[:, None, None] ** 2 * aa
    return P_rest, P_beta


def _kron_blocks(W2, P):
    """Scalar-slot Gram (ne,k,k) x component matrix (ne,2,2) -> (ne,2k,2k)."""
    ne, k, _ = W2.shape
    return np.einsum("eij,ecd->eicjd", W2, P).reshape(ne, 2 * k, 2 * k)


_GAUSS2 = edge_quadrature(3)
_GAUSS3 = edge_quadrature(5)
_MID = edge_quadrature(1)


def _dg_edge_terms(builder, space, params, fiber, config, loads, DB):
    """All interior-penalty edge contributions (matrix and datum rhs)."""
    mesh = space.mesh
    theta = config.theta
    ui = config.under_integrate_beta
    stab = config.stab

    for family in ("interior", "dirichlet", "normal"):
        if family == "interior":
            edges = mesh.interior_edges
        elif family == "dirichlet":
            edges = mesh.dirichlet_edges
        else:
            edges = mesh.dirichlet_normal_edges
        if len(edges) == 0:
            continue

        n = mesh.edge_normal[edges]
        h = mesh.edge_length[edges]
        own = mesh.edge_owner[edges]
        w_own = femspace.edge_trace_weights(space, edges, "owner", _GAUSS2.points)
        wm_own = femspace.edge_trace_weights(space, edges, "owner", _MID.points)[:, 0]
        N_own = _stress_normal_op(DB, own, n)

        if family == "interior":
            nbr = mesh.edge_neighbor[edges]
            w_nbr = femspace.edge_trace_weights(space, edges, "neighbor", _GAUSS2.points)
            w = np.concatenate([w_own, -w_nbr], axis=2)           # (ne,nq,6)
            wm = np.concatenate(
                [wm_own,
                 -femspace.edge_trace_weights(space, edges, "neighbor",
                                              _MID.points)[:, 0]], axis=1)
            N = 0.5 * np.concatenate(
                [N_own, _stress_normal_op(DB, nbr, n)], axis=2)   # (ne,2,12)
            dofs = np.hstack([space.element_dofs[own], space.element_dofs[nbr]])
        else:
            w, wm, N = w_own, wm_own, N_own
            dofs = space.element_dofs[own]

        P_rest, P_beta = _penalty_parts(params, fiber, stab, n)
        if family == "normal":
            # masked jump (v.n) n(x)n: conjugate the penalties, project the
            # traction operator onto its normal-normal component
            nPn = np.einsum("ec,ecd,ed->e", n, P_rest, n)
            nPbn = np.einsum("ec,ecd,ed->e", n, P_beta, n)
            nn = np.einsum("ec,ed->ecd", n, n)
            P_rest = nPn[:, None, None] * nn
            P_beta = nPbn[:, None, None] * nn
            N_eff = np.einsum("ecd,ecj->edj", nn, N)
        else:
            N_eff = N

        W2 = np.einsum("q,eqi,eqj->eij", _GAUSS2.weights, w, w)
        blocks = _kron_blocks(W2, P_rest)
        if ui:
            W2m = np.einsum("ei,ej->eij", wm, wm)
            blocks += _kron_blocks(W2m, P_beta)
        else:
            blocks += _kron_blocks(W2, P_beta)

        wmean = np.einsum("q,eqi->ei", _GAUSS2.weights, w)
        ne, k = wmean.shape
        cons = np.einsum("ei,ecj->eicj", wmean, N_eff).reshape(ne, 2 * k, 2 * k)
        cons *= -h[:, None, None]
        blocks += cons
        if theta != 0.0:
            blocks += -theta * cons.transpose(0, 2, 1)
        builder.add_blocks(blocks, dofs)

        if loads is None or family == "interior":
            continue

        # Dirichlet-type datum enters the penalty and adjoint terms
        x3 = _edge_points(mesh, edges, _GAUSS3.points)
        if family == "dirichlet":
            if loads.dirichlet is None:
                raise MissingBoundaryDataError(
                    "mesh has full-displacement edges but loads.dirichlet is None")
            gJ = np.asarray(loads.dirichlet(x3), dtype=float)
        else:
            if loads.dirichlet_normal is None:
                raise MissingBoundaryDataError(
                    "mesh has normal-datum edges but loads.dirichlet_normal is None")
            gn = np.asarray(loads.dirichlet_normal(x3, n), dtype=float)
            gJ = gn[:, :, None] * n[:, None, :]

        w3 = femspace.edge_trace_weights(space, edges, "owner", _GAUSS3.points)
        r = np.einsum("q,eqi,ecd,eqd->eic", _GAUSS3.weights, w3, P_rest, gJ)
        if ui:
            gJ_avg = np.einsum("q,eqc->ec", _GAUSS3.weights, gJ)
            r += np.einsum("ei,ecd,ed->eic", wm_own, P_beta, gJ_avg)
        else:
            r += np.einsum("q,eqi,ecd,eqd->eic", _GAUSS3.weights, w3, P_beta, gJ)
        r = r.reshape(len(edges), -1)
        if theta != 0.0:
            r += theta * h[:, None] * np.einsum(
                "q,ecj,eqc->ej", _GAUSS3.weights, N_own, gJ)
        builder.add_rhs(r, space.element_dofs[own])


def _neumann_rhs(builder, space, loads):
    mesh = space.mesh
    edges = mesh.neumann_edges
    if len(edges) == 0 or loads is None or loads.neumann is None:
        return
    h = mesh.edge_length[edges]
    own = mesh.edge_owner[edges]
    w3 = femspace.edge_trace_weights(space, edges, "owner", _GAUSS3.points)
    x3 = _edge_points(mesh, edges, _GAUSS3.points)
    t = np.asarray(loads.neumann(x3), dtype=float)
    r = h[:, None, None] * np.einsum("q,eqi,eqc->eic", _GAUSS3.weights, w3, t)
    builder.add_rhs(r.reshape(len(edges), -1), space.element_dofs[own])


def _apply_constraints(matrix, rhs, dofs, values):
    """Symmetric row/column elimination with lifting of prescribed values."""
    if len(dofs) == 0:
        return matrix, rhs
    dofs = np.asarray(dofs, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    n = matrix.shape[0]
    lift = np.zeros(n)
    lift[dofs] = values
    rhs = rhs - matrix @ lift
    keep = np.ones(n)
    keep[dofs] = 0.0
    mark = np.zeros(n)
    mark[dofs] = 1.0
    Dk = sp.diags(keep)
    matrix = (Dk @ matrix @ Dk + sp.diags(mark)).tocsr()
    rhs[dofs] = values
    return matrix, rhs


def _resolve_point_constraints(space, constraints):
    """Point constraints -> (dof ids, values) for any space kind."""
    dofs, values = [], []
    mesh = space.mesh
    for pc in constraints:
        vid = mesh.find_vertex(pc.point)
        if space.is_dg:
            for t in mesh.vertex_elements(vid):
                slot = int(np.flatnonzero(mesh.triangles[t] == vid)[0])
                dofs.append(6 * t + 2 * slot + pc.component)
                values.append(pc.value)
        else:
            dofs.append(2 * vid + pc.component)
            values.append(pc.value)
    return np.asarray(dofs, dtype=np.int64), np.asarray(values)


# -- conforming assembly -------------------------------------------------------

def assemble_cg(space, material, fiber, loads):
    """Assemble the conforming system with strong boundary conditions.

    Dirichlet data are imposed by symmetric row/column elimination with
    lifting; normal-displacement edges must be axis-aligned so a single
    component can be eliminated.

    Raises
    ------
    MissingBoundaryDataError
        If a Dirichlet-type edge has no datum in `loads`.
    """
    if space.is_dg:
        raise ValueError("assemble_cg requires a CG1 or CG2 space")
    mesh = space.mesh
    D = voigt_matrix(material, fiber)
    builder = _Builder(space.dof_count)
    builder.add_blocks(_volume_stiffness(space, D), space.element_dofs)
    if loads is not None and loads.body_force is not None:
        builder.add_rhs(_body_force_rhs(space, loads.body_force),
                        space.element_dofs)
    _neumann_rhs(builder, space, loads)
    matrix = builder.matrix()
    rhs = builder.rhs

    cdofs, cvals = _cg_boundary_constraints(space, loads)
    pdofs, pvals = _resolve_point_constraints(
        space, () if loads is None else loads.point_constraints)
    alldofs = np.concatenate([cdofs, pdofs])
    allvals = np.concatenate([cvals, pvals])
    alldofs, unique_idx = np.unique(alldofs, return_index=True)
    allvals = allvals[unique_idx]
    matrix, rhs = _apply_constraints(matrix, rhs, alldofs, allvals)
    return LinearSystem(matrix=matrix, rhs=rhs, symmetric=True)


def _cg_boundary_constraints(space, loads):
    """Constrained dofs and values from the tagged boundary edges."""
    mesh = space.mesh
    values = {}

    def edge_nodes(e):
        nodes = [int(v) for v in mesh.edge_vertices[e]]
        if space.kind == "CG2":
            nodes.append(mesh.n_vertices + int(e))
        return nodes

    def node_coord(node):
        if node < mesh.n_vertices:
            return mesh.vertices[node]
        return mesh.edge_midpoint[node - mesh.n_vertices]

    normal_edges = mesh.dirichlet_normal_edges
    if len(normal_edges) and (loads is None or loads.dirichlet_normal is None):
        raise MissingBoundaryDataError(
            "mesh has normal-datum edges but loads.dirichlet_normal is None")
    for e in normal_edges:
        n = mesh.edge_normal[e]
        comp = int(np.argmax(np.abs(n)))
        if abs(abs(n[comp]) - 1.0) > 1e-12:
            raise ValueError(
                "strong imposition of a normal datum needs an axis-aligned "
                f"edge; edge {e} has normal {n}")
        for node in edge_nodes(e):
            x = node_coord(node)
            gn = float(np.asarray(loads.dirichlet_normal(
                x[None, None, :], n[None, :])).reshape(()))
            values[2 * node + comp] = gn / n[comp]

    dir_edges = mesh.dirichlet_edges
    if len(dir_edges) and (loads is None or loads.dirichlet is None):
        raise MissingBoundaryDataError(
            "mesh has full-displacement edges but loads.dirichlet is None")
    for e in dir_edges:
        for node in edge_nodes(e):
            g = np.asarray(loads.dirichlet(node_coord(node)[None, :]),
                           dtype=float).reshape(2)
            values[2 * node] = g[0]
            values[2 * node + 1] = g[1]

    if not values:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    dofs = np.asarray(sorted(values), dtype=np.int64)
    return dofs, np.asarray([values[d] for d in dofs])


# -- interior-penalty assembly ---------------------------------------------------

def assemble_dg(space, material, fiber, config, loads):
    """Assemble the interior-penalty system on a DG1 space.

    Pass loads=None to build the bilinear-form matrix alone (zero rhs, no
    point constraints), e.g. for spectral diagnostics.

    Raises
    ------
    MissingBoundaryDataError
        If a Dirichlet-type edge has no datum in `loads`.
    InvalidStabilizationError
        Surfaced by StabilizationParams itself on negative parameters.
    """
    if not space.is_dg:
        raise ValueError("assemble_dg requires a DG1 space")
    if not config.is_dg:
        raise ValueError(f"method {config.method} is not an interior-penalty method")
    D = voigt_matrix(material, fiber)
    builder = _Builder(space.dof_count)
    builder.add_blocks(_volume_stiffness(space, D), space.element_dofs)
    _, DB = _p1_strain_ops(space, D)
    _dg_edge_terms(builder, space, material, fiber, config, loads, DB)
    if loads is not None and loads.body_force is not None:
        builder.add_rhs(_body_force_rhs(space, loads.body_force),
                        space.element_dofs)
    _neumann_rhs(builder, space, loads)
    matrix = builder.matrix()
    rhs = builder.rhs
    if loads is not None and loads.point_constraints:
        pdofs, pvals = _resolve_point_constraints(space, loads.point_constraints)
        matrix, rhs = _apply_constraints(matrix, rhs, pdofs, pvals)
    return LinearSystem(matrix=matrix, rhs=rhs,
                        symmetric=(config.method == "SIPG"))


def assemble(space, material, fiber, config, loads):
    """Dispatch to the conforming or interior-penalty assembler."""
    if config.is_dg:
        return assemble_dg(space, material, fiber, config, loads)
    return assemble_cg(space, material, fiber, loads)


# -- DG-norm Gram matrix ---------------------------------------------------------

def dg_norm_gram(space):
    """Gram matrix of the mesh-dependent norm.

    norm(u)^2 = sum_e |eps(u)|^2_{0,e}
              + 1/2 sum_{flux edges} (1/h_E) |jump(u)|^2_{0,E}

    Boundary flux edges contribute the one-sided trace (its normal part on
    normal-datum edges).  Interior jump terms vanish identically for the
    conforming spaces and are skipped there.
    """
    builder = _Builder(space.dof_count)
    if space.kind == "CG2":
        rule = element_quadrature(4)
        B = _strain_matrix(space.phys_grads_at(rule.points))
        vol = np.einsum("q,e,eqai,ab,eqbj->eij", rule.weights, space.det_jac,
                        B, np.diag([1.0, 1.0, 0.5]), B, optimize=True)
    else:
        B = _strain_matrix(space.p1_phys_grads)
        vol = space.mesh.areas[:, None, None] * np.einsum(
            "eai,ab,ebj->eij", B, np.diag([1.0, 1.0, 0.5]), B, optimize=True)
    builder.add_blocks(vol, space.element_dofs)

    mesh = space.mesh
    eye = np.eye(2)
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
        own = mesh.edge_owner[edges]
        # degree-5 rule: exact even for the quadratic traces of CG2 fields
        w = femspace.edge_trace_weights(space, edges, "owner", _GAUSS3.points)
        if family == "interior":
            nbr = mesh.edge_neighbor[edges]
            w = np.concatenate(
                [w, -femspace.edge_trace_weights(space, edges, "neighbor",
                                                 _GAUSS3.points)], axis=2)
            dofs = np.hstack([space.element_dofs[own], space.element_dofs[nbr]])
        else:
            dofs = space.element_dofs[own]
        W2 = np.einsum("q,eqi,eqj->eij", _GAUSS3.weights, w, w)
        if family == "normal":
            n = mesh.edge_normal[edges]
            comp = np.einsum("ec,ed->ecd", n, n)
        else:
            comp = np.broadcast_to(eye, (len(edges), 2, 2))
        builder.add_blocks(0.5 * _kron_blocks(W2, comp), dofs)
    return builder.matrix()


# -- coercivity diagnostics ------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    """Sufficient-condition report; advisory, not necessary conditions."""

    method: str
    under_integrated: bool
    conditions: tuple  # of (name, satisfied, detail)

    @property
    def admissible(self):
        return all(ok for _, ok, _ in self.conditions)


def check_coercivity_params(config, material, sipg_threshold=10.0):
    """Screen stabilization parameters against the known sufficient bounds.

    For theta = +1 any positive parameters suffice.  For theta in {0, -1}
    the sufficient bound involves an uncomputed trace constant, so the
    parameters are compared against a configurable threshold instead; the
    spectral estimate `numeric_coercivity` is the authoritative check.  In
    under-integrated mode the extensional/shear balance
    2 k_beta |beta| / mu_t <= k_mu is also reported.
    """
    stab = config.stab
    ks = {"k_mu": stab.k_mu, "k_lambda": stab.k_lambda, "k_alpha": stab.k_alpha,
          "k_beta": stab.k_beta, "k_gamma": stab.k_gamma}
    kmin = min(ks.values())
    conditions = []
    if config.theta == 1.0:
        conditions.append((
            "positive penalties", kmin > 0.0,
            f"min stabilization parameter = {kmin}"))
    else:
        conditions.append((
            "penalties above threshold", kmin >= sipg_threshold,
            f"min stabilization parameter = {kmin}, threshold = {sipg_threshold}"))
    if config.under_integrate_beta:
        lhs = 2.0 * stab.k_beta * abs(material.beta)
        rhs = stab.k_mu * material.mu_t
        conditions.append((
            "extensional/shear balance", lhs <= rhs,
            f"2 k_beta |beta| = {lhs}, k_mu mu_t = {rhs}"))
    return AdmissibilityReport(method=config.method,
                               under_integrated=config.under_integrate_beta,
                               conditions=tuple(conditions))


def numeric_coercivity(space, material, fiber, config, samples=None,
                       mesh_limit=200, null_tol=1e-10):
    """Smallest Rayleigh quotient of the bilinear form against the DG norm.

    Solves the generalized symmetric eigenproblem restricted to the
    complement of the norm's null space (rigid motions when no Dirichlet
    edges are present).  With `samples` set, estimates the minimum over
    that many random fields instead of solving the eigenproblem.

    Raises
    ------
    CoercivityNotPositiveError
        If the estimate is <= 0, which signals stabilization too weak for
        this mesh and material.
    """
    if space.mesh.n_triangles > mesh_limit:
        raise ValueError(
            f"dense spectral estimate limited to {mesh_limit} triangles, "
            f"mesh has {space.mesh.n_triangles}")
    system = assemble_dg(space, material, fiber, config, loads=None)
    A = system.matrix.toarray()
    A = 0.5 * (A + A.T)
    G = dg_norm_gram(space).toarray()

    if samples:
        rng = np.random.default_rng(0)
        best = np.inf
        scale = np.trace(G) / G.shape[0]
        for _ in range(int(samples)):
            v = rng.standard_normal(G.shape[0])
            denom = v @ G @ v
            if denom <= null_tol * scale * (v @ v):
                continue
            best = min(best, (v @ A @ v) / denom)
        estimate = float(best)
    else:
        evals, evecs = np.linalg.eigh(G)
        keep = evals > null_tol * evals[-1]
        W = evecs[:, keep] / np.sqrt(evals[keep])
        estimate = float(np.linalg.eigvalsh(W.T @ A @ W)[0])

    if estimate <= 0.0:
        raise CoercivityNotPositiveError(estimate)
    return estimate
