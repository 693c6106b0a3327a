"""Uniform triangulated grids with node classification.

Meshing is deterministic: a uniform grid of step h over the bounding box,
row-major node order, two triangles per cell with the diagonal running from
the lower-left to the upper-right corner.  Node classes:

    INTERIOR   strictly inside the domain (signed distance < -h/2)
    BOUNDARY   within h/2 of the domain boundary (Dirichlet-constrained)
    EXCLUDED   outside the closed domain by more than h/2
    SLIT       within h/2 of a slit segment (Dirichlet-constrained, no area removed)
    PUNCTURE   the single node nearest a puncture point

Meshes are immutable once built and freely shareable across threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Ball, Domain, Rect, ball_domain
from .errors import GeometryError, RefinementError

INTERIOR = 0
BOUNDARY = 1
EXCLUDED = 2
SLIT = 3
PUNCTURE = 4

CLASS_NAMES = {INTERIOR: "interior", BOUNDARY: "dirichlet_boundary", EXCLUDED: "excluded",
               SLIT: "slit", PUNCTURE: "puncture"}

MAX_NODES = 10**7

# P1 hat-function gradients (times h) for the two triangle orientations.
# Lower triangle nodes (a, b, d); upper triangle nodes (a, d, c) where
# a = (0,0), b = (h,0), c = (0,h), d = (h,h) within a cell.
GRAD_X = np.array([[-1.0, 1.0, 0.0], [0.0, 1.0, -1.0]])
GRAD_Y = np.array([[0.0, -1.0, 1.0], [-1.0, 0.0, 1.0]])


@dataclass
class Mesh:
    domain: Domain
    h: float
    origin: tuple
    shape: tuple                    # (nx, ny) node counts per axis
    nodes: np.ndarray               # (N, 2) float64, row-major (iy outer, ix inner)
    node_class: np.ndarray          # (N,) int8
    triangles: np.ndarray           # (T, 3) int32, active triangles only
    n_lower: int                    # triangles[:n_lower] have lower orientation
    centroids: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.centroids is None:
            self.centroids = self.nodes[self.triangles].mean(axis=1)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @property
    def area(self):
        return self.h * self.h / 2.0

    @property
    def active_mask(self):
        return self.node_class != EXCLUDED

    @property
    def free_mask(self):
        return self.node_class == INTERIOR

    @property
    def constrained_mask(self):
        return (
            (self.node_class == BOUNDARY)
            | (self.node_class == SLIT)
            | (self.node_class == PUNCTURE)
        )

    def node_index(self, point, tol=None):
        """Index of the node nearest to point; errors if farther than tol."""
        point = np.asarray(point, dtype=float)
        d = np.hypot(self.nodes[:, 0] - point[0], self.nodes[:, 1] - point[1])
        idx = int(np.argmin(d))
        if tol is not None and d[idx] > tol:
            raise GeometryError(f"no node within {tol:g} of {tuple(point)}")
        return idx

    def interpolate(self, fn):
        """Evaluate fn(x, y) at every node (vectorized)."""
        return np.asarray(fn(self.nodes[:, 0], self.nodes[:, 1]), dtype=float)

    def nodes_within(self, center, radius, closed_slack=0.0):
        center = np.asarray(center, dtype=float)
        d = np.hypot(self.nodes[:, 0] - center[0], self.nodes[:, 1] - center[1])
        return d <= radius + closed_slack

    def dump_csv(self, nodes_path, triangles_path):
        with open(nodes_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "x", "y", "class"])
            for i, (x, y) in enumerate(self.nodes):
                w.writerow([i, repr(float(x)), repr(float(y)), CLASS_NAMES[self.node_class[i]]])
        with open(triangles_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["triangle", "n0", "n1", "n2"])
            for i, tri in enumerate(self.triangles):
                w.writerow([i, *map(int, tri)])


def classify_nodes(nodes: np.ndarray, domain: Domain, h: float) -> np.ndarray:
    """Per-node class from the signed distance and the slit/puncture lists."""
    sdf = domain.sdf(nodes)
    cls = np.full(nodes.shape[0], EXCLUDED, dtype=np.int8)
    cls[sdf < -h / 2] = INTERIOR
    cls[np.abs(sdf) <= h / 2] = BOUNDARY
    for seg in domain.slits:
        near = (seg.distance(nodes) <= h / 2) & (cls != EXCLUDED)
        cls[near] = SLIT
    for pt in domain.punctures:
        d = np.hypot(nodes[:, 0] - pt[0], nodes[:, 1] - pt[1])
        idx = int(np.argmin(d))
        if d[idx] > h:
            raise GeometryError(f"puncture {pt} has no node within h")
        cls[idx] = PUNCTURE
    return cls


def build_mesh(domain: Domain, h: float) -> Mesh:
    """Deterministic uniform mesh of the domain at grid step h."""
    if h <= 0:
        raise RefinementError("h must be positive")
    feature = domain.feature_size()
    if h > feature / 4 + 1e-12:
        raise RefinementError(
            f"h = {h:g} too coarse for feature size {feature:g} (need h <= feature/4)"
        )
    box = domain.bounding_box
    nx = int(round(box.width / h)) + 1
    ny = int(round(box.height / h)) + 1
    if nx * ny > MAX_NODES:
        raise RefinementError(f"node count {nx * ny} exceeds limit {MAX_NODES}")
    xs = box.xmin + h * np.arange(nx)
    ys = box.ymin + h * np.arange(ny)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.stack([gx.ravel(), gy.ravel()], axis=-1)  # row-major: iy outer

    cls = classify_nodes(nodes, domain, h)

    # cell corners: a = (ix, iy), b = (ix+1, iy), c = (ix, iy+1), d = (ix+1, iy+1)
    ix, iy = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="xy")
    a = (iy * nx + ix).ravel()
    b = a + 1
    c = a + nx
    d = c + 1
    lower = np.stack([a, b, d], axis=-1)
    upper = np.stack([a, d, c], axis=-1)

    # keep the interior/excluded adjacency invariant: a triangle mixing an
    # interior node with an excluded one promotes the excluded node
    for tris in (lower, upper):
        for _ in range(2):
            tcls = cls[tris]
            bad = (tcls == INTERIOR).any(axis=1) & (tcls == EXCLUDED).any(axis=1)
            if not bad.any():
                break
            bad_nodes = tris[bad][cls[tris[bad]] == EXCLUDED]
            cls[np.unique(bad_nodes)] = BOUNDARY

    active_lower = (cls[lower] != EXCLUDED).all(axis=1)
    active_upper = (cls[upper] != EXCLUDED).all(axis=1)
    triangles = np.concatenate([lower[active_lower], upper[active_upper]])
    n_lower = int(active_lower.sum())
    if n_lower + int(active_upper.sum()) == 0:
        raise RefinementError("domain has no active triangles at this h")

    mesh = Mesh(
        domain=domain,
        h=float(h),
        origin=(float(box.xmin), float(box.ymin)),
        shape=(nx, ny),
        nodes=nodes,
        node_class=cls,
        triangles=triangles.astype(np.int32),
        n_lower=n_lower,
    )
    if domain.marked_point is not None:
        _check_marked_point(mesh, domain.marked_point)
    return mesh


def _check_marked_point(mesh: Mesh, point):
    boundary_like = mesh.constrained_mask
    if not boundary_like.any():
        raise GeometryError("domain has no boundary nodes for the marked point")
    pts = mesh.nodes[boundary_like]
    d = np.hypot(pts[:, 0] - point[0], pts[:, 1] - point[1])
    if float(np.min(d)) > mesh.h / 2 + 1e-12:
        raise GeometryError(
            f"marked point {point} is farther than h/2 from the discrete boundary"
        )


def boundary_nodes(mesh: Mesh):
    return np.flatnonzero(mesh.node_class == BOUNDARY)


def complement_mask(domain: Domain, nodes: np.ndarray, h: float) -> np.ndarray:
    """Nodes not strictly inside the open set: sdf >= -h/2, slits, punctures."""
    mask = domain.sdf(nodes) >= -h / 2
    for seg in domain.slits:
        mask |= seg.distance(nodes) <= h / 2
    for pt in domain.punctures:
        d = np.hypot(nodes[:, 0] - pt[0], nodes[:, 1] - pt[1])
        idx = int(np.argmin(d))
        if d[idx] <= h:
            mask[idx] = True
    return mask


def ball_complement_intersection(domain: Domain, x0, t: float, h: float):
    """Mesh of B(x0, 2t) plus the node set approximating closure(B(x0,t)) minus the domain.

    Returns (ambient_mesh, K_mask).  K is empty when B(x0, 2t) stays inside
    the domain; K grows monotonically with t on a fixed ambient mesh.
    """
    if t <= 0:
        raise GeometryError("t must be positive")
    x0 = np.asarray(x0, dtype=float)
    box = domain.bounding_box
    if not (
        box.xmin - 1e-9 <= x0[0] - 2 * t
        and x0[0] + 2 * t <= box.xmax + 1e-9
        and box.ymin - 1e-9 <= x0[1] - 2 * t
        and x0[1] + 2 * t <= box.ymax + 1e-9
    ):
        raise GeometryError(f"B(x0, 2t) with t = {t:g} escapes the bounding box")
    ambient = ball_domain(float(x0[0]), float(x0[1]), 2 * t)
    mesh = build_mesh(ambient, h)
    K = (
        complement_mask(domain, mesh.nodes, h)
        & mesh.nodes_within(x0, t, closed_slack=h / 2)
        & mesh.active_mask
        & (mesh.node_class != BOUNDARY)
    )
    return mesh, K
