"""Dirichlet and obstacle problems for generalized Orlicz energies.

The energy of a nodal field u is the sum over active triangles of
G(x_c, |grad u|) * area, with the constant per-triangle gradient of the
piecewise-linear interpolant and x_c the triangle centroid.  Minimization is
first-order: diagonally preconditioned descent with Armijo backtracking
(sufficient decrease 1e-4, shrink 0.5), a Nesterov-style momentum term with
monotone restart, and clamping onto the obstacle after every trial step.
Power(2) problems admit a direct sparse solve, which is also used as the
initial iterate for every other family (harmonic-extension start).

Energy and residual evaluation reduce over triangles in index order, so
results are deterministic; solver iterations are sequential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from .errors import InfeasibleError, NumericError, ShapeError
from .kernels import AssemblyContext
from .mesh import Mesh

# local stiffness of the two triangle orientations (h-independent)
_LOCAL_STIFF = (
    0.5 * np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]),
    0.5 * np.array([[1.0, 0.0, -1.0], [0.0, 1.0, -1.0], [-1.0, -1.0, 2.0]]),
)


@dataclass(frozen=True)
class SolveOptions:
    tol_energy: float = 1e-10
    tol_grad: float | None = None      # resolved to 1e-8 * data scale when None
    max_iters: int = 20000
    eps_flux: float = 1e-12
    eps_curv: float = 0.05             # gradient floor in the curvature preconditioner
    armijo_c: float = 1e-4
    shrink: float = 0.5
    momentum: bool = True
    use_direct_init: bool = True

    def __post_init__(self):
        if self.tol_energy <= 0 or (self.tol_grad is not None and self.tol_grad <= 0):
            raise NumericError("tolerances must be positive")
        if self.eps_flux < 0:
            raise NumericError("eps_flux must be nonnegative")

    def resolve_tol_grad(self, fixed_values, fixed_mask):
        if self.tol_grad is not None:
            return self.tol_grad
        scale = 1.0
        if fixed_mask.any():
            scale = max(scale, float(np.max(np.abs(fixed_values[fixed_mask]))))
        return 1e-8 * scale


@dataclass
class SolveResult:
    field: np.ndarray
    energy: float
    iterations: int
    residual_norm: float
    converged: bool
    tol_grad: float = 0.0

    def to_json_dict(self):
        return {
            "energy": self.energy,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# plain evaluations


def energy(mesh: Mesh, phi, u, ctx: AssemblyContext | None = None):
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_nodes,):
        raise ShapeError("field shape does not match mesh")
    if not np.all(np.isfinite(u[mesh.active_mask])):
        raise NumericError("field has non-finite values on active nodes")
    ctx = ctx or AssemblyContext(mesh, phi)
    return float(ctx.energy(u))


def residual_all_nodes(mesh: Mesh, phi, u, eps_flux=1e-12, ctx=None):
    """Discrete pairing of the flux with every nodal hat function."""
    ctx = ctx or AssemblyContext(mesh, phi)
    _, res, _ = ctx.assemble(np.asarray(u, dtype=float), eps_flux)
    return res


def precond_diagonal(mesh: Mesh, phi, u, opts: "SolveOptions", ctx=None):
    ctx = ctx or AssemblyContext(mesh, phi)
    _, _, P = ctx.assemble(np.asarray(u, dtype=float), opts.eps_flux, opts.eps_curv)
    return P


def energy_gradient(mesh: Mesh, phi, u, eps_flux=1e-12, ctx=None):
    """Residual of the weak form at unconstrained nodes (zero elsewhere)."""
    res = residual_all_nodes(mesh, phi, u, eps_flux, ctx)
    res = res.copy()
    res[~mesh.free_mask] = 0.0
    return res


# ---------------------------------------------------------------------------
# direct solve for quadratic growth


def power2_stiffness(mesh: Mesh):
    """P1 stiffness matrix over active triangles (5-point stencil pattern)."""
    tri = mesh.triangles
    orient = np.zeros(len(tri), dtype=np.int8)
    orient[mesh.n_lower:] = 1
    rows, cols, data = [], [], []
    for o in (0, 1):
        sel = tri[orient == o]
        local = _LOCAL_STIFF[o]
        for i in range(3):
            for j in range(3):
                rows.append(sel[:, i])
                cols.append(sel[:, j])
                data.append(np.full(len(sel), local[i, j]))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    return coo_matrix((data, (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)).tocsr()


def harmonic_extension(mesh: Mesh, fixed_mask, fixed_values, stiffness=None):
    """Quadratic-energy minimizer with the given fixed data (direct solve)."""
    S = stiffness if stiffness is not None else power2_stiffness(mesh)
    u = np.where(fixed_mask, fixed_values, 0.0)
    free = mesh.free_mask & ~fixed_mask
    if not free.any():
        return u
    fidx = np.flatnonzero(free)
    cidx = np.flatnonzero(~free)
    S_ff = S[fidx][:, fidx].tocsc()
    rhs = -S[fidx][:, cidx] @ u[cidx]
    u[fidx] = spsolve(S_ff, rhs)
    return u


# ---------------------------------------------------------------------------
# the descent loop


def _project(u, psi_upper, psi_lower):
    if psi_upper is not None:
        np.minimum(u, psi_upper, out=u)
    if psi_lower is not None:
        np.maximum(u, psi_lower, out=u)
    return u


def minimize_energy(
    ctx: AssemblyContext,
    fixed_mask,
    fixed_values,
    opts: SolveOptions = SolveOptions(),
    psi_upper=None,
    psi_lower=None,
    init=None,
    tri_idx=None,
    free_mask=None,
) -> SolveResult:
    """Minimize the discrete energy over fields with the given fixed data.

    ``free_mask`` restricts the unknowns (defaults to the mesh interior minus
    fixed nodes); ``tri_idx`` restricts assembly to a triangle subset whose
    complement has constant energy for these unknowns.
    """
    mesh = ctx.mesh
    fixed_mask = np.asarray(fixed_mask, dtype=bool)
    free = mesh.free_mask & ~fixed_mask if free_mask is None else (free_mask & ~fixed_mask)
    tol_grad = opts.resolve_tol_grad(np.asarray(fixed_values, dtype=float), fixed_mask)

    u = np.where(fixed_mask, fixed_values, 0.0) if init is None else np.array(init, dtype=float)
    u[fixed_mask] = np.asarray(fixed_values, dtype=float)[fixed_mask]
    if psi_upper is not None and np.any(u[fixed_mask] > psi_upper[fixed_mask] + 1e-12):
        raise InfeasibleError("fixed data violates the upper obstacle")
    if psi_lower is not None and np.any(u[fixed_mask] < psi_lower[fixed_mask] - 1e-12):
        raise InfeasibleError("fixed data violates the lower obstacle")
    _project_free(u, free, psi_upper, psi_lower)

    E_u = ctx.energy(u, tri_idx)
    y = u.copy()
    t_mom = 1.0
    alpha_init = 1.0
    iterations = 0
    converged = False

    for iterations in range(1, opts.max_iters + 1):
        E_y, r, P = ctx.assemble(y, opts.eps_flux, opts.eps_curv, tri_idx)
        d = np.zeros_like(y)
        d[free] = -r[free] / np.maximum(P[free], 1e-30)

        w1 = y + d
        _project_free(w1, free, psi_upper, psi_lower)
        res_y = float(np.max(np.abs(w1 - y))) if free.any() else 0.0

        ok, u_new, E_new, alpha = _backtrack(
            ctx, y, E_y, r, d, P, free, psi_upper, psi_lower, opts, alpha_init, tri_idx
        )
        if not ok:
            if t_mom == 1.0:
                break  # plain step cannot decrease: stagnation at fp precision
            y = u.copy()
            t_mom = 1.0
            continue
        if E_new > E_u and t_mom > 1.0:
            # adaptive restart: the extrapolated point overshot
            y = u.copy()
            t_mom = 1.0
            continue
        dE_rel = abs(E_u - E_new) / max(abs(E_u), 1e-300) if E_u != 0.0 else 0.0
        if opts.momentum:
            t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom) ** 0.5)
            y = u_new + ((t_mom - 1.0) / t_next) * (u_new - u)
            y[fixed_mask] = u_new[fixed_mask]
            _project_free(y, free, psi_upper, psi_lower)
            t_mom = t_next
        else:
            y = u_new
        u, E_u = u_new, E_new
        alpha_init = min(alpha * 2.0, 1.0)
        if res_y <= tol_grad and dE_rel < opts.tol_energy:
            converged = True
            break

    _, r_final, P_final = ctx.assemble(u, opts.eps_flux, opts.eps_curv, tri_idx)
    d_final = np.zeros_like(u)
    d_final[free] = -r_final[free] / np.maximum(P_final[free], 1e-30)
    w1 = u + d_final
    _project_free(w1, free, psi_upper, psi_lower)
    res_final = float(np.max(np.abs(w1 - u))) if free.any() else 0.0
    converged = res_final <= tol_grad

    return SolveResult(
        field=u,
        energy=float(ctx.energy(u, tri_idx)),
        iterations=iterations,
        residual_norm=res_final,
        converged=bool(converged),
        tol_grad=tol_grad,
    )


def _project_free(u, free, psi_upper, psi_lower):
    if psi_upper is not None:
        u[free] = np.minimum(u[free], psi_upper[free])
    if psi_lower is not None:
        u[free] = np.maximum(u[free], psi_lower[free])
    return u


def _backtrack(ctx, v, E_v, r, d, P, free, psi_upper, psi_lower, opts, alpha_init, tri_idx):
    """Backtracking step from v along d.

    Accepts when both the sufficient-decrease test and the quadratic
    majorization bound hold; the latter keeps the momentum sequence stable.
    """
    alpha = alpha_init
    for _ in range(60):
        w = v + alpha * d
        _project_free(w, free, psi_upper, psi_lower)
        delta = w - v
        gTd = float(r @ delta)
        quad = float(P @ (delta * delta)) / (2.0 * alpha)
        E_w = ctx.energy(w, tri_idx)
        if gTd <= 0.0 and E_w <= E_v + opts.armijo_c * gTd and E_w <= E_v + gTd + quad:
            return True, w, E_w, alpha
        alpha *= opts.shrink
    return False, v, E_v, alpha


# ---------------------------------------------------------------------------
# public solves


def _is_power2(phi):
    return phi.family == "power" and phi.p_field.value == 2.0


def _initial_iterate(mesh, phi, fixed_mask, fixed_values, opts, psi_upper=None, psi_lower=None):
    if opts.use_direct_init:
        u0 = harmonic_extension(mesh, fixed_mask, fixed_values)
    else:
        base = fixed_values[fixed_mask]
        fill = float(base.mean()) if base.size else 0.0
        u0 = np.where(fixed_mask, fixed_values, fill)
    free = mesh.free_mask & ~fixed_mask
    _project_free(u0, free, psi_upper, psi_lower)
    return u0


def solve_dirichlet(mesh: Mesh, phi, boundary_data, opts: SolveOptions = SolveOptions(),
                    ctx=None, extra_fixed=None) -> SolveResult:
    """G-harmonic field agreeing with boundary_data on constrained nodes.

    The minimizer is unique by strict convexity; non-convergence within
    max_iters is reported through the converged flag, never silently.
    """
    boundary_data = np.asarray(boundary_data, dtype=float)
    if boundary_data.shape != (mesh.n_nodes,):
        raise ShapeError("boundary data shape does not match mesh")
    fixed = mesh.constrained_mask.copy()
    if extra_fixed is not None:
        fixed |= extra_fixed
    if not np.all(np.isfinite(boundary_data[fixed])):
        raise NumericError("boundary data must be finite on constrained nodes")
    ctx = ctx or AssemblyContext(mesh, phi)
    init = _initial_iterate(mesh, phi, fixed, boundary_data, opts)
    return minimize_energy(ctx, fixed, boundary_data, opts, init=init)


def solve_obstacle(mesh: Mesh, phi, psi, v0, opts: SolveOptions = SolveOptions(),
                   mode="upper", ctx=None) -> SolveResult:
    """Energy minimizer subject to u <= psi (mode="upper") or u >= psi ("lower").

    Boundary behaviour is taken from v0 on constrained nodes.  Feasibility
    (v0 against psi on constrained nodes) is required; complementarity can be
    audited post hoc with complementarity_report.
    """
    psi = np.asarray(psi, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if psi.shape != (mesh.n_nodes,) or v0.shape != (mesh.n_nodes,):
        raise ShapeError("psi / v0 shape does not match mesh")
    fixed = mesh.constrained_mask
    if mode == "upper":
        if np.any(v0[fixed] > psi[fixed] + 1e-12):
            raise InfeasibleError("boundary data exceeds the obstacle")
        psi_upper, psi_lower = psi, None
    elif mode == "lower":
        if np.any(v0[fixed] < psi[fixed] - 1e-12):
            raise InfeasibleError("boundary data below the obstacle")
        psi_upper, psi_lower = None, psi
    else:
        raise ValueError("mode must be 'upper' or 'lower'")
    ctx = ctx or AssemblyContext(mesh, phi)
    init = _initial_iterate(mesh, phi, fixed, v0, opts, psi_upper, psi_lower)
    return minimize_energy(ctx, fixed, v0, opts, psi_upper=psi_upper, psi_lower=psi_lower,
                           init=init)


def complementarity_report(mesh: Mesh, phi, result: SolveResult, psi, opts=SolveOptions(),
                           mode="upper", contact_tol=1e-8):
    """Residual audit: away from the contact set the solution must be harmonic."""
    res = residual_all_nodes(mesh, phi, result.field, opts.eps_flux)
    _, _, P = AssemblyContext(mesh, phi).assemble(result.field, opts.eps_flux)
    step = np.abs(res) / np.maximum(P, 1e-30)
    psi = np.asarray(psi, dtype=float)
    if mode == "upper":
        inactive = mesh.free_mask & (result.field < psi - contact_tol)
    else:
        inactive = mesh.free_mask & (result.field > psi + contact_tol)
    max_inactive = float(np.max(step[inactive])) if inactive.any() else 0.0
    return {
        "n_contact": int(np.count_nonzero(mesh.free_mask & ~inactive)),
        "n_inactive": int(np.count_nonzero(inactive)),
        "max_residual_inactive": max_inactive,
    }


@dataclass
class ComparisonReport:
    max_violation: float
    violating_nodes: np.ndarray

    @property
    def holds(self):
        return self.violating_nodes.size == 0


def check_comparison(mesh: Mesh, u, v, tol=0.0) -> ComparisonReport:
    """Largest violation of u <= v + tol over active nodes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.shape != (mesh.n_nodes,):
        raise ShapeError("fields must share the mesh")
    act = mesh.active_mask
    diff = u - v
    max_violation = float(np.max(diff[act])) if act.any() else 0.0
    violating = np.flatnonzero(act & (diff > tol))
    return ComparisonReport(max_violation=max_violation, violating_nodes=violating)
