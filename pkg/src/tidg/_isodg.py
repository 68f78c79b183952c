"""Stand-alone isotropic interior-penalty assembler, used as a test oracle.

Deliberately written from scratch against the two-term isotropic split

    lam (div u)(div v) + 2 mu eps(u):eps(v)

with explicit per-element and per-edge Python loops, so it shares no code
path with the production assembler.  Small meshes only.
"""

import numpy as np
import scipy.sparse as sp

_G2 = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


def _p1_gradients(xy):
    """Gradients of the three vertex basis functions on one triangle."""
    x0, x1, x2 = xy
    d1, d2 = x1 - x0, x2 - x0
    area2 = d1[0] * d2[1] - d1[1] * d2[0]
    g = np.empty((3, 2))
    g[0] = [x1[1] - x2[1], x2[0] - x1[0]]
    g[1] = [x2[1] - x0[1], x0[0] - x2[0]]
    g[2] = [x0[1] - x1[1], x1[0] - x0[0]]
    return g / area2, 0.5 * area2


def _strain(grads, dof_vec):
    """Symmetric gradient of a local P1 field given 6 dof values."""
    u = dof_vec.reshape(3, 2)
    G = u.T @ grads  # (2,2): G[c,d] = d u_c / d x_d
    return 0.5 * (G + G.T)


def assemble_isotropic_ipdg(space, lam, mu, theta, k_lambda, k_mu):
    """Stiffness matrix of the isotropic interior-penalty form on DG1.

    Penalties: (1/h) [ k_lambda lam (jump_n u)(jump_n v)
                       + k_mu mu (jump u).(jump v) ]
    plus the usual consistency and theta-weighted adjoint terms on interior
    and full-Dirichlet edges.
    """
    mesh = space.mesh
    n_dof = space.dof_count
    A = sp.lil_matrix((n_dof, n_dof))

    grads = []
    for t in range(mesh.n_triangles):
        g, area = _p1_gradients(mesh.vertices[mesh.triangles[t]])
        grads.append(g)
        dofs = space.element_dofs[t]
        for j in range(6):
            ej = np.zeros(6)
            ej[j] = 1.0
            eps_j = _strain(g, ej)
            div_j = np.trace(eps_j)
            for i in range(6):
                ei = np.zeros(6)
                ei[i] = 1.0
                eps_i = _strain(g, ei)
                val = lam * div_j * np.trace(eps_i) \
                    + 2.0 * mu * np.tensordot(eps_j, eps_i)
                A[dofs[i], dofs[j]] += area * val

    def sigma(g, dof_vec):
        eps = _strain(g, dof_vec)
        return lam * np.trace(eps) * np.eye(2) + 2.0 * mu * eps

    def trace_value(slots, dof_vec, s):
        u = dof_vec.reshape(3, 2)
        return (1.0 - s) * u[slots[0]] + s * u[slots[1]]

    fe = np.flatnonzero((np.asarray(mesh.edge_tag) == 0)
                        | (np.asarray(mesh.edge_tag) == 1))
    for e in fe:
        h = mesh.edge_length[e]
        n = mesh.edge_normal[e]
        own = int(mesh.edge_owner[e])
        nbr = int(mesh.edge_neighbor[e])
        interior = nbr >= 0
        sides = [(own, mesh.edge_owner_slots[e], +1.0)]
        if interior:
            sides.append((nbr, mesh.edge_neighbor_slots[e], -1.0))
        stacked = [space.element_dofs[t] for t, _, _ in sides]
        n_loc = 6 * len(sides)
        K = np.zeros((n_loc, n_loc))
        for j in range(n_loc):
            uj = np.zeros(n_loc)
            uj[j] = 1.0
            sig_avg = np.zeros((2, 2))
            for kside, (t, _, _) in enumerate(sides):
                sig_avg += sigma(grads[t], uj[6 * kside:6 * kside + 6])
            sig_avg /= len(sides)
            for i in range(n_loc):
                ui = np.zeros(n_loc)
                ui[i] = 1.0
                sig_avg_i = np.zeros((2, 2))
                for kside, (t, _, _) in enumerate(sides):
                    sig_avg_i += sigma(grads[t], ui[6 * kside:6 * kside + 6])
                sig_avg_i /= len(sides)
                pen = 0.0
                cons = 0.0
                adj = 0.0
                for s in _G2:
                    mj = np.zeros(2)
                    mi = np.zeros(2)
                    for kside, (t, slots, sign) in enumerate(sides):
                        mj += sign * trace_value(slots, uj[6 * kside:6 * kside + 6], s)
                        mi += sign * trace_value(slots, ui[6 * kside:6 * kside + 6], s)
                    pen += 0.5 * (k_lambda * lam * (mj @ n) * (mi @ n)
                                  + k_mu * mu * (mj @ mi))
                    cons += 0.5 * (sig_avg @ n) @ mi
                    adj += 0.5 * (sig_avg_i @ n) @ mj
                K[i, j] += pen - h * cons + theta * h * adj
        alldofs = np.concatenate(stacked)
        for i in range(n_loc):
            for j in range(n_loc):
                A[alldofs[i], alldofs[j]] += K[i, j]

    return A.tocsr()
