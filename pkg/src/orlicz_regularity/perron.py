"""Upper and lower Perron sweeps via Poisson modifications.

The upper solution for continuous boundary data f starts from the constant
max f (a member of the upper class) and repeatedly replaces the iterate by
the local Dirichlet solution on members of a fixed cover of the domain by
ball subdomains, clamping from above so the sweep is pointwise nonincreasing.
The cover is hierarchical: ball unions at radii halving from a quarter of
the domain size down to 4h, four interleaved groups per level, swept coarse
to fine in a fixed deterministic order.  Each group is a disjoint-by-
construction union only at the coarsest packing; overlaps are harmless since
a group is relaxed as one subdomain.  The lower solution is -upper(-f).

Sweeps are sequential by design; independent boundary-data scenarios
parallelize at the scenario level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import splu

from .errors import GeometryError, NumericError, ShapeError
from .kernels import AssemblyContext
from .mesh import Mesh
from .solver import SolveOptions, SolveResult, minimize_energy, power2_stiffness, solve_dirichlet


@dataclass(frozen=True)
class PerronOptions:
    sweep_tol: float = 1e-5
    max_sweeps: int = 300
    inner_iters: int = 80
    min_ball_radius_steps: int = 4     # finest cover radius, in units of h

    def inner_solve_options(self, opts: SolveOptions):
        return SolveOptions(
            tol_energy=opts.tol_energy,
            tol_grad=opts.tol_grad if opts.tol_grad is not None else 1e-9,
            max_iters=self.inner_iters,
            eps_flux=opts.eps_flux,
            eps_curv=opts.eps_curv,
            momentum=opts.momentum,
            use_direct_init=False,
        )


@dataclass
class PerronResult:
    upper: np.ndarray
    lower: np.ndarray
    gap: float
    sweeps: int
    converged: bool
    ball_cover: list = field(default_factory=list)

    def to_json_dict(self):
        return {
            "gap": self.gap,
            "sweeps": self.sweeps,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# ball cover


@dataclass
class CoverGroup:
    level_radius: float
    free_mask: np.ndarray
    tri_idx: np.ndarray
    balls: list                      # (cx, cy, radius) descriptors
    lu: object = None                # cached factorization for quadratic growth
    f_idx: np.ndarray = None
    other_idx: np.ndarray = None
    s_f_other: object = None


def build_ball_cover(mesh: Mesh, ctx: AssemblyContext, opts: PerronOptions):
    """Hierarchical cover of the free nodes by ball-union subdomains."""
    nx, ny = mesh.shape
    h = mesh.h
    free = mesh.free_mask
    groups = []
    r_min_steps = max(2, opts.min_ball_radius_steps)
    k_max = min(nx - 1, ny - 1) // 4
    k_levels = []
    k = k_max
    while k > r_min_steps:
        k_levels.append(k)
        k = k // 2
    k_levels.append(r_min_steps)

    xs = mesh.nodes[:, 0].reshape(ny, nx)
    ys = mesh.nodes[:, 1].reshape(ny, nx)
    for k in k_levels:
        radius = k * h
        ix = sorted(set(list(range(0, nx, k)) + [nx - 1]))
        iy = sorted(set(list(range(0, ny, k)) + [ny - 1]))
        for cx_par in (0, 1):
            for cy_par in (0, 1):
                mask = np.zeros(mesh.n_nodes, dtype=bool)
                balls = []
                for j in iy:
                    if (j // k) % 2 != cy_par:
                        continue
                    for i in ix:
                        if (i // k) % 2 != cx_par:
                            continue
                        cx, cy = xs[j, i], ys[j, i]
                        ball = mesh.nodes_within((cx, cy), radius - 1e-12 * h)
                        ball &= free
                        if ball.any():
                            mask |= ball
                            balls.append((float(cx), float(cy), radius))
                if mask.any():
                    groups.append(
                        CoverGroup(
                            level_radius=radius,
                            free_mask=mask,
                            tri_idx=ctx.subset(mask),
                            balls=balls,
                        )
                    )
    covered = np.zeros(mesh.n_nodes, dtype=bool)
    for g in groups:
        covered |= g.free_mask
    if not bool(np.all(covered[free])):
        raise NumericError("ball cover failed to reach every free node")
    return groups


def _prepare_quadratic(mesh, groups):
    S = power2_stiffness(mesh)
    for g in groups:
        fidx = np.flatnonzero(g.free_mask)
        other = np.flatnonzero(~g.free_mask)
        rows = S[fidx]
        g.f_idx = fidx
        g.other_idx = other
        g.lu = splu(rows[:, fidx].tocsc())
        g.s_f_other = rows[:, other].tocsr()


def _group_solve(ctx, mesh, phi, group, u, opts, inner_opts):
    if group.lu is not None:
        rhs = -group.s_f_other @ u[group.other_idx]
        out = u.copy()
        out[group.f_idx] = group.lu.solve(rhs)
        return out
    res = minimize_energy(
        ctx,
        fixed_mask=~group.free_mask,
        fixed_values=u,
        opts=inner_opts,
        init=u.copy(),
        tri_idx=group.tri_idx,
        free_mask=group.free_mask,
    )
    return res.field


# ---------------------------------------------------------------------------
# operations


def poisson_modification(mesh: Mesh, phi, u, ball_mask, opts: SolveOptions = SolveOptions(),
                         ctx=None) -> np.ndarray:
    """Dirichlet replacement of u inside the ball node set, unchanged outside."""
    u = np.asarray(u, dtype=float)
    ball_mask = np.asarray(ball_mask)
    if ball_mask.dtype != bool:
        m = np.zeros(mesh.n_nodes, dtype=bool)
        m[ball_mask] = True
        ball_mask = m
    if (ball_mask & ~mesh.active_mask).any():
        raise GeometryError("subdomain not contained in the domain")
    ctx = ctx or AssemblyContext(mesh, phi)
    free = ball_mask & mesh.free_mask
    if not free.any():
        return u.copy()
    res = minimize_energy(
        ctx,
        fixed_mask=~free,
        fixed_values=u,
        opts=opts,
        init=u.copy(),
        tri_idx=ctx.subset(free),
        free_mask=free,
    )
    return res.field


def upper_perron(mesh: Mesh, phi, boundary_data, opts: SolveOptions = SolveOptions(),
                 perron_opts: PerronOptions = PerronOptions(), ctx=None,
                 free_mask=None, _cover=None):
    """Monotone sweep limit of Poisson modifications from the constant max f.

    Returns (field, sweeps, converged, cover).  ``free_mask`` restricts the
    sweep to a subdomain (used by the restriction audit); boundary values are
    then read from boundary_data on its complement.
    """
    boundary_data = np.asarray(boundary_data, dtype=float)
    if boundary_data.shape != (mesh.n_nodes,):
        raise ShapeError("boundary data shape does not match mesh")
    ctx = ctx or AssemblyContext(mesh, phi)
    free = mesh.free_mask if free_mask is None else (free_mask & mesh.free_mask)
    fixed = ~free
    if not np.all(np.isfinite(boundary_data[fixed & mesh.active_mask])):
        raise NumericError("boundary data must be finite")

    groups = _cover
    if groups is None:
        groups = [
            CoverGroup(
                level_radius=g.level_radius,
                free_mask=g.free_mask & free,
                tri_idx=g.tri_idx,
                balls=g.balls,
            )
            for g in build_ball_cover(mesh, ctx, perron_opts)
        ]
        groups = [g for g in groups if g.free_mask.any()]
        for g in groups:
            g.tri_idx = ctx.subset(g.free_mask)
        if phi.family == "power" and phi.p_field.value == 2.0:
            _prepare_quadratic(mesh, groups)

    fixed_active = fixed & mesh.active_mask
    top = float(np.max(boundary_data[fixed_active])) if fixed_active.any() else 0.0
    u = np.where(free, top, boundary_data)
    inner_opts = perron_opts.inner_solve_options(opts)

    sweeps = 0
    converged = False
    for sweeps in range(1, perron_opts.max_sweeps + 1):
        u_prev = u.copy()
        for g in groups:
            u_new = _group_solve(ctx, mesh, phi, g, u, opts, inner_opts)
            np.minimum(u, u_new, out=u)
        change = float(np.max(np.abs(u - u_prev))) if free.any() else 0.0
        if change < perron_opts.sweep_tol:
            converged = True
            break
    return u, sweeps, converged, groups


def lower_perron(mesh: Mesh, phi, boundary_data, opts: SolveOptions = SolveOptions(),
                 perron_opts: PerronOptions = PerronOptions(), ctx=None, free_mask=None):
    """Lower solution by symmetry: -upper(-f)."""
    u, sweeps, converged, cover = upper_perron(
        mesh, phi, -np.asarray(boundary_data, dtype=float), opts, perron_opts, ctx,
        free_mask=free_mask,
    )
    return -u, sweeps, converged, cover


def resolutivity_gap(mesh: Mesh, phi, boundary_data, opts: SolveOptions = SolveOptions(),
                     perron_opts: PerronOptions = PerronOptions(), ctx=None) -> PerronResult:
    """Upper and lower sweeps plus their sup gap over active nodes."""
    ctx = ctx or AssemblyContext(mesh, phi)
    up, s1, c1, cover = upper_perron(mesh, phi, boundary_data, opts, perron_opts, ctx)
    lo, s2, c2, _ = lower_perron(mesh, phi, boundary_data, opts, perron_opts, ctx)
    act = mesh.active_mask
    gap = float(np.max(np.abs(up[act] - lo[act])))
    balls = [b for g in cover for b in g.balls]
    return PerronResult(
        upper=up, lower=lo, gap=gap, sweeps=max(s1, s2),
        converged=bool(c1 and c2), ball_cover=balls,
    )


def sobolev_agreement(mesh: Mesh, phi, field_data, opts: SolveOptions = SolveOptions(),
                      perron_opts: PerronOptions = PerronOptions(), ctx=None) -> float:
    """Sup distance between the upper sweep and the energy solution for the
    same (everywhere-defined) data."""
    ctx = ctx or AssemblyContext(mesh, phi)
    up, _, _, _ = upper_perron(mesh, phi, field_data, opts, perron_opts, ctx)
    sob = solve_dirichlet(mesh, phi, field_data, opts, ctx=ctx)
    act = mesh.active_mask
    return float(np.max(np.abs(up[act] - sob.field[act])))


def restriction_audit(mesh: Mesh, phi, boundary_data, center, radius,
                      opts: SolveOptions = SolveOptions(),
                      perron_opts: PerronOptions = PerronOptions(), ctx=None) -> float:
    """Re-solves the sweep on the subdomain cut by a ball, with the global
    solution as data on the cut, and reports the sup restriction mismatch."""
    ctx = ctx or AssemblyContext(mesh, phi)
    full, _, _, _ = upper_perron(mesh, phi, boundary_data, opts, perron_opts, ctx)
    inside = mesh.nodes_within(center, radius)
    sub_free = inside & mesh.free_mask
    if not sub_free.any():
        raise GeometryError("restriction ball contains no free nodes")
    data = full.copy()
    data[mesh.constrained_mask] = np.asarray(boundary_data, dtype=float)[mesh.constrained_mask]
    sub, _, _, _ = upper_perron(mesh, phi, data, opts, perron_opts, ctx, free_mask=sub_free)
    return float(np.max(np.abs(sub[sub_free] - full[sub_free])))
