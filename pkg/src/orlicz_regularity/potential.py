"""Capacitary potentials and their Riesz measures.

The potential of a compact node set K inside a ball mesh B is the field that
is 1 on K, 0 on the outer boundary and energy-minimizing (hence discrete
G-harmonic) in between.  Pairing its flux with every nodal hat function
yields the nodal Riesz measure of the supersolution: weights concentrate on
K (positive) and on the outer boundary (the outgoing flux, which is not part
of the measure proper since those hats are not admissible test functions).
NodalMeasure.total therefore sums over non-outer-boundary nodes only.

Potentials at different scales are independent solves and parallelize at the
scenario level; measure extraction is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import relative_capacity
from .errors import DomainError, GeometryError, UndefinedRatioError
from .kernels import AssemblyContext
from .mesh import BOUNDARY, Mesh
from .solver import SolveOptions, residual_all_nodes


@dataclass
class NodalMeasure:
    weights: np.ndarray            # per-node pairing values, all nodes
    total: float                   # sum over non-outer-boundary nodes
    outer_flux: float              # sum over outer-boundary nodes (diagnostic)

    def mass_within(self, mesh: Mesh, center, radius):
        inside = mesh.nodes_within(center, radius) & (mesh.node_class != BOUNDARY)
        return float(self.weights[inside].sum())


@dataclass
class PotentialResult:
    field: np.ndarray
    measure: NodalMeasure
    capacity_value: float
    ratio: float                   # measure mass near K over capacity
    K_mask: np.ndarray
    mesh_h: float
    iterations: int
    converged: bool

    def to_json_dict(self):
        return {
            "capacity": self.capacity_value,
            "measure_total": self.measure.total,
            "ratio": self.ratio,
            "h": self.mesh_h,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def riesz_measure(mesh: Mesh, phi, u, eps_flux=1e-12, ctx=None) -> NodalMeasure:
    """Nodal measure of a (discrete) supersolution from its residual pairing."""
    w = residual_all_nodes(mesh, phi, u, eps_flux, ctx)
    outer = mesh.node_class == BOUNDARY
    return NodalMeasure(
        weights=w,
        total=float(w[~outer].sum()),
        outer_flux=float(w[outer].sum()),
    )


def _adjacent_mask(mesh: Mesh, mask):
    touched = mask[mesh.triangles].any(axis=1)
    out = mask.copy()
    out[np.unique(mesh.triangles[touched])] = True
    return out


def g_potential(mesh: Mesh, phi, K, opts: SolveOptions = SolveOptions(),
                ctx=None) -> PotentialResult:
    """Capacitary potential of K in the ball mesh, with measure and ratio."""
    K = np.asarray(K)
    if K.dtype != bool:
        mask = np.zeros(mesh.n_nodes, dtype=bool)
        mask[K] = True
        K = mask
    if not K.any():
        raise GeometryError("K is empty")
    if (K & (mesh.node_class == BOUNDARY)).any():
        raise GeometryError("K touches the outer boundary")
    ctx = ctx or AssemblyContext(mesh, phi)
    cap = relative_capacity(mesh, phi, K, opts, ctx)
    measure = riesz_measure(mesh, phi, cap.minimizer, opts.eps_flux, ctx)
    near_K = _adjacent_mask(mesh, K) & (mesh.node_class != BOUNDARY)
    mass_K = float(measure.weights[near_K].sum())
    ratio = mass_K / cap.value if cap.value > 0 else math.nan
    return PotentialResult(
        field=cap.minimizer,
        measure=measure,
        capacity_value=cap.value,
        ratio=ratio,
        K_mask=K,
        mesh_h=mesh.h,
        iterations=cap.iterations,
        converged=cap.converged,
    )


def measure_capacity_ratio(result: PotentialResult) -> float:
    if not np.isfinite(result.ratio):
        raise UndefinedRatioError("capacity vanished; measure/capacity undefined")
    return result.ratio


def potential_decay_profile(result: PotentialResult, mesh: Mesh, phi, x0, radii, r,
                            integrand_samples=None, n=2):
    """Decay table of the potential near the marked point.

    Rows pair sup(1 - u) over the ball of each radius with the partial
    capacity integral over [radius, r] (left Riemann sums of the provided
    (t, W) samples, when given) and the implied exponential-decay constant.
    Each row also evaluates the measure-density bound
    rho * g^{-1}(x0, mu(B(x0, rho)) / rho^(n-1)) against essinf u + rho
    and reports its implied constant.
    """
    x0 = np.asarray(x0, dtype=float)
    radii = sorted(float(t) for t in radii)
    if any(t <= 0 or t > r + 1e-12 for t in radii):
        raise DomainError("radii must lie in (0, r]")
    act = mesh.active_mask
    rows = []
    for rho in sorted(radii, reverse=True):
        ball = mesh.nodes_within(x0, rho) & act
        if not ball.any():
            raise DomainError(f"no active nodes within {rho:g} of x0")
        sup_1mu = float(np.max(1.0 - result.field[ball]))
        essinf = float(np.min(result.field[ball]))
        partial = math.nan
        if integrand_samples is not None:
            partial = partial_capacity_integral(integrand_samples, rho, r)
        c_fit = math.nan
        if np.isfinite(partial) and partial > 0 and sup_1mu > 0:
            c_fit = -math.log(sup_1mu) / partial
        mu_rho = result.measure.mass_within(mesh, x0, rho)
        lhs_raw = rho * float(phi.g_inverse(x0, max(mu_rho, 0.0) / rho ** (n - 1)))
        rhs = essinf + rho
        implied = rhs / lhs_raw if lhs_raw > 0 else math.inf
        rows.append(
            {
                "rho": rho,
                "sup_one_minus_u": sup_1mu,
                "partial_integral": partial,
                "C_fit": c_fit,
                "measure_bound_lhs": lhs_raw,
                "measure_bound_rhs": rhs,
                "measure_bound_constant": implied,
            }
        )
    return rows


def partial_capacity_integral(samples, rho, r):
    """Left Riemann sum of W over [rho, r] on the sampled (t, W) grid."""
    pts = sorted((float(t), float(w)) for t, w in samples)
    total = 0.0
    for (t_lo, w_lo), (t_hi, _) in zip(pts[:-1], pts[1:]):
        lo = max(t_lo, rho)
        hi = min(t_hi, r)
        if hi > lo:
            total += w_lo * (hi - lo)
    return total
