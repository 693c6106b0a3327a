"""Relative variational capacity of compact node sets.

cap(K; O) is the infimum of the growth energy over Sobolev-zero fields that
are at least 1 on K.  Discretely the infimum is realised by the equality-
constrained solve (1 on K, 0 on the outer Dirichlet boundary): by the
comparison principle the minimizer already lies in [0, 1], so the inequality
class collapses to the equality one.  Independent capacity scenarios are
pure and may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Rect
from .errors import ConfigError, GeometryError
from .kernels import AssemblyContext
from .mesh import BOUNDARY, Mesh
from .solver import SolveOptions, SolveResult, minimize_energy, _initial_iterate


@dataclass
class CapacityResult:
    value: float
    minimizer: np.ndarray
    K_mask: np.ndarray
    mesh_h: float
    iterations: int
    converged: bool
    K_spec: str = ""
    omega_spec: str = ""

    def to_json_dict(self):
        return {
            "value": self.value,
            "h": self.mesh_h,
            "K_spec": self.K_spec,
            "omega_spec": self.omega_spec,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def relative_capacity(mesh: Mesh, phi, K, opts: SolveOptions = SolveOptions(),
                      ctx: AssemblyContext | None = None) -> CapacityResult:
    """Energy of the capacitary minimizer: 1 on K, 0 on the outer boundary.

    An empty K yields capacity 0 with the zero field.  K overlapping the
    outer Dirichlet boundary is a geometry error.
    """
    K = np.asarray(K)
    if K.dtype != bool:
        mask = np.zeros(mesh.n_nodes, dtype=bool)
        mask[K] = True
        K = mask
    if K.shape != (mesh.n_nodes,):
        raise GeometryError("K mask shape does not match mesh")
    omega_spec = mesh.domain.spec_string()
    if not K.any():
        return CapacityResult(
            value=0.0, minimizer=np.zeros(mesh.n_nodes), K_mask=K,
            mesh_h=mesh.h, iterations=0, converged=True, omega_spec=omega_spec,
        )
    if (K & (mesh.node_class == BOUNDARY)).any():
        raise GeometryError("K touches the outer Dirichlet boundary")

    data = np.where(K, 1.0, 0.0)
    fixed = mesh.constrained_mask | K
    ctx = ctx or AssemblyContext(mesh, phi)
    init = _initial_iterate(mesh, phi, fixed, data, opts)
    result = minimize_energy(ctx, fixed, data, opts, init=init)
    return CapacityResult(
        value=result.energy,
        minimizer=result.field,
        K_mask=K,
        mesh_h=mesh.h,
        iterations=result.iterations,
        converged=result.converged,
        omega_spec=omega_spec,
    )


def ball_capacity_bounds(phi, x0, r, sigma, n_samples=65):
    """Two-sided capacity bracket |B| G∓(1/r) for a ball inside its sigma-dilate.

    G- and G+ are the inf/sup of G(., 1/r) sampled over the dilated ball;
    the bracket is existential (true capacity lies within constant factors).
    """
    if r <= 0:
        raise GeometryError("r must be positive")
    if sigma <= 1:
        raise GeometryError("sigma must exceed 1")
    x0 = np.asarray(x0, dtype=float)
    R = sigma * r
    box = Rect(x0[0] - R, x0[1] - R, x0[0] + R, x0[1] + R)
    pts = box.sample_grid(n_samples)
    inside = np.hypot(pts[:, 0] - x0[0], pts[:, 1] - x0[1]) <= R
    vals = phi.G(pts[inside], 1.0 / r)
    area = math.pi * r * r
    return area * float(np.min(vals)), area * float(np.max(vals))


@dataclass
class CapacityScenario:
    """Nested pair for the monotonicity audit: K ⊂ K' ⊂ O' ⊂ O."""

    label: str
    cap_inner: CapacityResult     # cap(K; O)
    cap_outer: CapacityResult     # cap(K'; O')


def capacity_monotonicity_audit(scenarios, slack):
    """Checks cap(K; O) <= cap(K'; O') + slack for each nested scenario."""
    rows = []
    for sc in scenarios:
        ok = sc.cap_inner.value <= sc.cap_outer.value + slack
        rows.append(
            {
                "label": sc.label,
                "cap_nested": sc.cap_inner.value,
                "cap_wider": sc.cap_outer.value,
                "slack": slack,
                "verdict": bool(ok),
            }
        )
    return rows


def annulus_radius_audit(cap_2s: float, cap_2r: float, s: float, n=2):
    """Constant in cap(K;B_2r) <= C (cap(K;B_2s) + s^n) for r <= s <= 2r.

    The first inequality of the pair (cap(K;B_2s) <= cap(K;B_2r)) is the
    plain ambient monotonicity; this returns the implied C of the second.
    """
    denom = cap_2s + s**n
    if denom <= 0:
        raise ConfigError("degenerate audit: zero denominator")
    return cap_2r / denom
