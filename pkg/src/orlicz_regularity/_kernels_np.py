"""Pure-numpy assembly kernels (fallback backend).

Same contract as the compiled extension: per-triangle energies of the
piecewise-linear interpolant and the nodal residual/preconditioner scatter.
Scatter uses bincount, which accumulates in triangle-index order, so results
are deterministic.
"""

import numpy as np

_E = np.e


def _G_g(fam, p, q, a, s, want_g=True):
    if fam <= 1:
        G = s**p
        g = np.where(s > 0, p * s ** (p - 1.0), 0.0) if want_g else None
    elif fam == 2:
        G = s**p + a * s**q
        if want_g:
            g = np.where(s > 0, p * s ** (p - 1.0) + q * a * s ** (q - 1.0), 0.0)
        else:
            g = None
    else:
        L = np.log(_E + s)
        sp = s**p
        G = sp * L
        g = (np.where(s > 0, p * s ** (p - 1.0), 0.0) * L + sp / (_E + s)) if want_g else None
    return G, g


def _gradients(u, tri, orient, h):
    u0 = u[tri[:, 0]]
    u1 = u[tri[:, 1]]
    u2 = u[tri[:, 2]]
    gx = np.where(orient == 0, u1 - u0, u1 - u2) / h
    gy = np.where(orient == 0, u2 - u1, u2 - u0) / h
    return gx, gy


def energy(u, tri_nodes, orient, fam, p1, p2, p3, h, idx):
    tri = tri_nodes[idx]
    gx, gy = _gradients(u, tri, orient[idx], h)
    s = np.hypot(gx, gy)
    G, _ = _G_g(fam, p1[idx], p2[idx], p3[idx], s, want_g=False)
    return float(np.sum(G)) * (h * h / 2.0)


def _curvature(fam, p, q, a, s):
    # g'(s) + g(s)/s, the diagonal curvature proxy of the energy Hessian
    if fam <= 1:
        gp = p * (p - 1.0) * s ** (p - 2.0)
    elif fam == 2:
        gp = p * (p - 1.0) * s ** (p - 2.0) + q * (q - 1.0) * a * s ** (q - 2.0)
    else:
        L = np.log(_E + s)
        gp = (
            p * (p - 1.0) * s ** (p - 2.0) * L
            + 2.0 * p * s ** (p - 1.0) / (_E + s)
            - s**p / (_E + s) ** 2
        )
    _, g = _G_g(fam, p, q, a, s)
    return gp + g / s


def assemble(u, tri_nodes, orient, fam, p1, p2, p3, h, eps_flux, eps_curv, n_nodes, idx):
    tri = tri_nodes[idx]
    ori = orient[idx]
    gx, gy = _gradients(u, tri, ori, h)
    s = np.hypot(gx, gy)
    area = h * h / 2.0

    G, g = _G_g(fam, p1[idx], p2[idx], p3[idx], s)
    energy_val = float(np.sum(G)) * area

    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(s > eps_flux, g / s, 0.0) * area

    # hat gradients (times h): lower (a,b,d): bx=(-1,1,0), by=(0,-1,1)
    #                          upper (a,d,c): bx=(0,1,-1), by=(-1,0,1)
    lower = ori == 0
    bx0 = np.where(lower, -1.0, 0.0)
    bx1 = np.full(len(idx), 1.0)
    bx2 = np.where(lower, 0.0, -1.0)
    by0 = np.where(lower, 0.0, -1.0)
    by1 = np.where(lower, -1.0, 0.0)
    by2 = np.full(len(idx), 1.0)

    residual = np.zeros(n_nodes)
    flux_x = w * gx / h
    flux_y = w * gy / h
    residual += np.bincount(tri[:, 0], weights=flux_x * bx0 + flux_y * by0, minlength=n_nodes)
    residual += np.bincount(tri[:, 1], weights=flux_x * bx1 + flux_y * by1, minlength=n_nodes)
    residual += np.bincount(tri[:, 2], weights=flux_x * bx2 + flux_y * by2, minlength=n_nodes)

    # curvature times |grad hat|^2 * area, i.e. (1,2,1)/2 or (1,1,2)/2 per vertex
    cw = 0.5 * _curvature(fam, p1[idx], p2[idx], p3[idx], np.maximum(s, eps_curv))
    precond = np.zeros(n_nodes)
    for m in range(3):
        vertex_w = np.where(lower, (1.0, 2.0, 1.0)[m], (1.0, 1.0, 2.0)[m])
        precond += np.bincount(tri[:, m], weights=cw * vertex_w, minlength=n_nodes)

    return energy_val, residual, precond
