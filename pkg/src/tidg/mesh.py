"""Structured conforming triangulations of the benchmark geometries.

Meshes are immutable after construction.  Edge connectivity is stored in
flat arrays (one entry per edge) rather than per-edge objects so that the
assembly loops can be vectorized; `Mesh.edge` gives a record view of a
single edge for inspection and JSON dumps.
"""

import json
from enum import IntEnum

import numpy as np

from .errors import InvalidDimensionsError, UncoveredBoundaryEdgeError


class EdgeTag(IntEnum):
    INTERIOR = 0
    DIRICHLET = 1          # full-vector displacement datum
    NEUMANN = 2            # traction datum
    DIRICHLET_NORMAL = 3   # normal displacement datum, tangential traction free


class Mesh:
    """Conforming triangulation with oriented edges and boundary tags.

    Attributes
    ----------
    vertices : ndarray, shape (nv, 2)
    triangles : ndarray, shape (nt, 3)
        Vertex index triples, counter-clockwise.
    areas : ndarray, shape (nt,)
        Signed areas; all positive by construction.
    element_diameters : ndarray, shape (nt,)
        Longest edge per triangle.
    edge_vertices : ndarray, shape (ne, 2)
        Endpoint vertex ids, sorted ascending per edge.
    edge_owner, edge_neighbor : ndarray, shape (ne,)
        Adjacent triangle ids; the owner is the smaller id, neighbor is -1
        on the boundary.  Edge normals point out of the owner.
    edge_owner_slots, edge_neighbor_slots : ndarray, shape (ne, 2)
        Local vertex slots (0..2) of the two endpoints within each adjacent
        triangle, in `edge_vertices` order, so traces from both sides share
        one arclength parametrization.
    edge_normal, edge_midpoint : ndarray, shape (ne, 2)
    edge_length : ndarray, shape (ne,)
    edge_tag : ndarray, shape (ne,) of EdgeTag values
    triangle_edges : ndarray, shape (nt, 3)
        Edge id opposite each local vertex.
    """

    def __init__(self, vertices, triangles, edge_tag=None):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError(f"vertices must be (nv, 2), got {vertices.shape}")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError(f"triangles must be (nt, 3), got {triangles.shape}")

        p = vertices[triangles]  # (nt, 3, 2)
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        if np.any(areas <= 0.0):
            bad = int(np.argmin(areas))
            raise ValueError(
                f"triangle {bad} has non-positive signed area {areas[bad]}")

        self.vertices = vertices
        self.triangles = triangles
        self.areas = areas
        self._build_edges()
        side = np.linalg.norm(
            p - p[:, [1, 2, 0], :], axis=2)  # lengths opposite local 2,0,1
        self.element_diameters = side.max(axis=1)
        if edge_tag is not None:
            edge_tag = np.asarray(edge_tag, dtype=np.int8)
            if edge_tag.shape != (self.n_edges,):
                raise ValueError("edge_tag has wrong length")
            self.edge_tag = edge_tag.copy()
        self._freeze()
        self._vertex_elements = None

    # -- construction ------------------------------------------------------

    def _build_edges(self):
        nt = len(self.triangles)
        # local edge k is opposite local vertex k
        local = [(1, 2), (2, 0), (0, 1)]
        edge_ids = {}
        ev, owner, nbr, own_slots, nbr_slots = [], [], [], [], []
        tri_edges = np.empty((nt, 3), dtype=np.int64)
        for t in range(nt):
            tri = self.triangles[t]
            for k, (i, j) in enumerate(local):
                a, b = int(tri[i]), int(tri[j])
                key = (a, b) if a < b else (b, a)
                slots = (i, j) if a < b else (j, i)
                if key not in edge_ids:
                    edge_ids[key] = len(ev)
                    ev.append(key)
                    owner.append(t)
                    nbr.append(-1)
                    own_slots.append(slots)
                    nbr_slots.append((-1, -1))
                else:
                    e = edge_ids[key]
                    if nbr[e] != -1:
                        raise ValueError(
                            f"edge {key} shared by more than two triangles")
                    nbr[e] = t
                    nbr_slots[e] = slots
                tri_edges[t, k] = edge_ids[key]
        self.edge_vertices = np.asarray(ev, dtype=np.int64)
        self.edge_owner = np.asarray(owner, dtype=np.int64)
        self.edge_neighbor = np.asarray(nbr, dtype=np.int64)
        self.edge_owner_slots = np.asarray(own_slots, dtype=np.int64)
        self.edge_neighbor_slots = np.asarray(nbr_slots, dtype=np.int64)
        self.triangle_edges = tri_edges

        xa = self.vertices[self.edge_vertices[:, 0]]
        xb = self.vertices[self.edge_vertices[:, 1]]
        tang = xb - xa
        self.edge_length = np.linalg.norm(tang, axis=1)
        self.edge_midpoint = 0.5 * (xa + xb)
        normal = np.column_stack([tang[:, 1], -tang[:, 0]])
        normal /= self.edge_length[:, None]
        # flip so the normal points away from the owner's opposite vertex
        opp_slot = 3 - self.edge_owner_slots.sum(axis=1)
        opp = self.triangles[self.edge_owner, opp_slot]
        inward = np.einsum("ec,ec->e",
                           self.vertices[opp] - self.edge_midpoint, normal)
        normal[inward > 0.0] *= -1.0
        self.edge_normal = normal

        tag = np.full(self.n_edges, EdgeTag.INTERIOR, dtype=np.int8)
        tag[self.edge_neighbor < 0] = EdgeTag.NEUMANN
        self.edge_tag = tag

    def _freeze(self):
        for name in ("vertices", "triangles", "areas", "element_diameters",
                     "edge_vertices", "edge_owner", "edge_neighbor",
                     "edge_owner_slots", "edge_neighbor_slots", "edge_normal",
                     "edge_length", "edge_midpoint", "edge_tag",
                     "triangle_edges"):
            getattr(self, name).flags.writeable = False

    # -- basic queries -------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edge_vertices)

    @property
    def h(self):
        """Largest element diameter."""
        return float(self.element_diameters.max())

    @property
    def boundary_edges(self):
        return np.flatnonzero(self.edge_neighbor < 0)

    @property
    def interior_edges(self):
        return np.flatnonzero(self.edge_tag == EdgeTag.INTERIOR)

    @property
    def dirichlet_edges(self):
        return np.flatnonzero(self.edge_tag == EdgeTag.DIRICHLET)

    @property
    def dirichlet_normal_edges(self):
        return np.flatnonzero(self.edge_tag == EdgeTag.DIRICHLET_NORMAL)

    @property
    def neumann_edges(self):
        return np.flatnonzero(self.edge_tag == EdgeTag.NEUMANN)

    @property
    def flux_edges(self):
        """Interior plus Dirichlet-type edges: where jumps are penalized."""
        return np.flatnonzero((self.edge_tag == EdgeTag.INTERIOR)
                              | (self.edge_tag == EdgeTag.DIRICHLET)
                              | (self.edge_tag == EdgeTag.DIRICHLET_NORMAL))

    def vertex_elements(self, vid):
        """Triangle ids containing vertex `vid`."""
        if self._vertex_elements is None:
            adj = [[] for _ in range(self.n_vertices)]
            for t, tri in enumerate(self.triangles):
                for v in tri:
                    adj[v].append(t)
            self._vertex_elements = [np.asarray(a, dtype=np.int64) for a in adj]
        return self._vertex_elements[vid]

    def find_vertex(self, point, tol=1e-9):
        """Id of the mesh vertex at `point` (within tol of the mesh scale)."""
        point = np.asarray(point, dtype=float)
        d2 = np.sum((self.vertices - point) ** 2, axis=1)
        vid = int(np.argmin(d2))
        scale = max(self.h, 1.0)
        if d2[vid] > (tol * scale) ** 2:
            raise ValueError(f"no mesh vertex at {point}")
        return vid

    def edge(self, e):
        """Record view of edge `e` for inspection."""
        return {
            "vertices": tuple(int(v) for v in self.edge_vertices[e]),
            "owner": int(self.edge_owner[e]),
            "neighbor": int(self.edge_neighbor[e]),
            "normal": self.edge_normal[e].tolist(),
            "length": float(self.edge_length[e]),
            "midpoint": self.edge_midpoint[e].tolist(),
            "tag": EdgeTag(self.edge_tag[e]).name,
        }

    # -- serialization -------------------------------------------------------

    def to_json(self):
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "edges": [self.edge(e) for e in range(self.n_edges)],
        }

    def save_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)


def rect_mesh(length, height, nx, ny, origin_y=0.0):
    """Structured rectangle mesh: nx*ny cells, two triangles per cell.

    All cells are split by the lower-left to upper-right diagonal, so the
    element count convention is 2*nx*ny.
    """
    if length <= 0.0 or height <= 0.0:
        raise InvalidDimensionsError(
            f"rectangle sides must be positive, got {length} x {height}")
    if nx < 1 or ny < 1:
        raise InvalidDimensionsError(
            f"cell counts must be >= 1, got nx={nx}, ny={ny}")
    xs = np.linspace(0.0, length, nx + 1)
    ys = np.linspace(origin_y, origin_y + height, ny + 1)
    X, Y = np.meshgrid(xs, ys)  # (ny+1, nx+1), row-major in y
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    triangles = _split_grid(nx, ny)
    return Mesh(vertices, triangles)


def _split_grid(nx, ny):
    """Triangles for an (nx+1)x(ny+1) vertex grid, diagonal v00 -> v11."""
    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    v00 = (j * (nx + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + (nx + 1)
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    tris = np.empty((2 * nx * ny, 3), dtype=np.int64)
    tris[0::2] = lower
    tris[1::2] = upper
    return tris


#: Corners of the tapered-panel (Cook membrane) geometry, counter-clockwise
#: from the clamped bottom-left corner; the load tip is COOK_CORNERS[2].
COOK_CORNERS = np.array([[0.0, 0.0], [48.0, 44.0], [48.0, 60.0], [0.0, 44.0]])


def cook_mesh(n):
    """Tapered panel meshed with an n x n grid of bilinearly mapped cells.

    The left edge is tagged for full displacement data, every other boundary
    edge for tractions.
    """
    if n < 1:
        raise InvalidDimensionsError(f"subdivision count must be >= 1, got {n}")
    s = np.linspace(0.0, 1.0, n + 1)
    xi, eta = np.meshgrid(s, s)
    p00, p10, p11, p01 = COOK_CORNERS[0], COOK_CORNERS[1], COOK_CORNERS[2], COOK_CORNERS[3]
    pts = ((1 - xi) * (1 - eta))[..., None] * p00 \
        + (xi * (1 - eta))[..., None] * p10 \
        + (xi * eta)[..., None] * p11 \
        + ((1 - xi) * eta)[..., None] * p01
    vertices = pts.reshape(-1, 2)
    mesh = Mesh(vertices, _split_grid(n, n))
    return classify_edges(mesh,
                          dirichlet=lambda x: x[0] <= 1e-12 * 48.0,
                          neumann=lambda x: True)


def classify_edges(mesh, dirichlet=None, neumann=None, dirichlet_normal=None):
    """Re-tag boundary edges by predicates on the edge midpoint.

    Predicates are tried in the order Dirichlet, normal-Dirichlet, Neumann;
    they must jointly cover the boundary.  Interior edges keep their tag.

    Returns a new Mesh sharing geometry with the input.
    """
    tags = np.array(mesh.edge_tag, dtype=np.int8)
    for e in mesh.boundary_edges:
        x = mesh.edge_midpoint[e]
        if dirichlet is not None and dirichlet(x):
            tags[e] = EdgeTag.DIRICHLET
        elif dirichlet_normal is not None and dirichlet_normal(x):
            tags[e] = EdgeTag.DIRICHLET_NORMAL
        elif neumann is not None and neumann(x):
            tags[e] = EdgeTag.NEUMANN
        else:
            raise UncoveredBoundaryEdgeError(
                f"boundary edge {e} at {x} matched no predicate")
    out = Mesh.__new__(Mesh)
    out.__dict__.update(mesh.__dict__)
    tags.flags.writeable = False
    out.edge_tag = tags
    out._vertex_elements = None
    return out
