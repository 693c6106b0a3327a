"""Constructive planar domains.

A domain is an open bounded subset of the plane described by area primitives
(balls, axis-aligned rectangles, half-planes) combined with union,
intersection and complement, minus a list of slit segments and puncture
points.  Slits and punctures have zero area; they are realised on a mesh as
constrained node sets rather than by removing cells.

Every region node evaluates a signed distance (negative inside).  For CSG
combinations the usual min/max composition is used; it is exact for the
geometries this package targets (disjoint unions, annuli, clipped boxes) and
conservative otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._specparse import Call, parse_value
from .errors import ConfigError, GeometryError

AMBIENT_DIM = 2


@dataclass(frozen=True)
class Rect:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise GeometryError(f"degenerate rectangle {self}")

    @property
    def width(self):
        return self.xmax - self.xmin

    @property
    def height(self):
        return self.ymax - self.ymin

    @property
    def diagonal(self):
        return math.hypot(self.width, self.height)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        return (
            (x[..., 0] >= self.xmin - tol)
            & (x[..., 0] <= self.xmax + tol)
            & (x[..., 1] >= self.ymin - tol)
            & (x[..., 1] <= self.ymax + tol)
        )

    def sample_grid(self, n):
        xs = np.linspace(self.xmin, self.xmax, n)
        ys = np.linspace(self.ymin, self.ymax, n)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=-1)


# ---------------------------------------------------------------------------
# region primitives (signed distance, negative inside)


class Region:
    def sdf(self, x):
        raise NotImplementedError

    def bounds(self):
        """Tight bounding Rect, or None when unbounded."""
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(Region):
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise GeometryError("ball radius must be positive")

    def sdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.hypot(x[..., 0] - self.cx, x[..., 1] - self.cy) - self.r

    def bounds(self):
        return Rect(self.cx - self.r, self.cy - self.r, self.cx + self.r, self.cy + self.r)


@dataclass(frozen=True)
class Box(Region):
    rect: Rect

    def sdf(self, x):
        x = np.asarray(x, dtype=float)
        r = self.rect
        cx, cy = (r.xmin + r.xmax) / 2, (r.ymin + r.ymax) / 2
        dx = np.abs(x[..., 0] - cx) - r.width / 2
        dy = np.abs(x[..., 1] - cy) - r.height / 2
        outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
        inside = np.minimum(np.maximum(dx, dy), 0.0)
        return outside + inside

    def bounds(self):
        return self.rect


@dataclass(frozen=True)
class HalfPlane(Region):
    """Open half-plane nx*x + ny*y < c, with (nx, ny) normalized."""

    nx: float
    ny: float
    c: float

    def __post_init__(self):
        norm = math.hypot(self.nx, self.ny)
        if norm == 0:
            raise GeometryError("half-plane normal must be nonzero")
        object.__setattr__(self, "nx", self.nx / norm)
        object.__setattr__(self, "ny", self.ny / norm)
        object.__setattr__(self, "c", self.c / norm)

    def sdf(self, x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] * self.nx + x[..., 1] * self.ny - self.c

    def bounds(self):
        return None


@dataclass(frozen=True)
class Union(Region):
    parts: tuple

    def sdf(self, x):
        vals = [p.sdf(x) for p in self.parts]
        return np.minimum.reduce(vals)

    def bounds(self):
        boxes = [p.bounds() for p in self.parts]
        if any(b is None for b in boxes):
            return None
        return Rect(
            min(b.xmin for b in boxes),
            min(b.ymin for b in boxes),
            max(b.xmax for b in boxes),
            max(b.ymax for b in boxes),
        )


@dataclass(frozen=True)
class Intersection(Region):
    parts: tuple

    def sdf(self, x):
        vals = [p.sdf(x) for p in self.parts]
        return np.maximum.reduce(vals)

    def bounds(self):
        boxes = [b for b in (p.bounds() for p in self.parts) if b is not None]
        if not boxes:
            return None
        xmin = max(b.xmin for b in boxes)
        ymin = max(b.ymin for b in boxes)
        xmax = min(b.xmax for b in boxes)
        ymax = min(b.ymax for b in boxes)
        if xmax <= xmin or ymax <= ymin:
            raise GeometryError("empty intersection of region bounds")
        return Rect(xmin, ymin, xmax, ymax)


@dataclass(frozen=True)
class Complement(Region):
    part: Region

    def sdf(self, x):
        return -self.part.sdf(x)

    def bounds(self):
        return None


@dataclass(frozen=True)
class Segment:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def length(self):
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        dx, dy = self.x1 - self.x0, self.y1 - self.y0
        ll = dx * dx + dy * dy
        if ll == 0:
            return np.hypot(x[..., 0] - self.x0, x[..., 1] - self.y0)
        t = ((x[..., 0] - self.x0) * dx + (x[..., 1] - self.y0) * dy) / ll
        t = np.clip(t, 0.0, 1.0)
        px = self.x0 + t * dx
        py = self.y0 + t * dy
        return np.hypot(x[..., 0] - px, x[..., 1] - py)


# ---------------------------------------------------------------------------
# the Domain proper


@dataclass(frozen=True)
class Domain:
    """Open bounded planar set: area region minus slits and punctures."""

    region: Region
    slits: tuple = ()
    punctures: tuple = ()          # tuple of (x, y)
    bounding_box: Rect | None = None
    marked_point: tuple | None = None

    def __post_init__(self):
        if self.bounding_box is None:
            bounds = self.region.bounds()
            if bounds is None:
                raise GeometryError("unbounded region requires an explicit bounding_box")
            object.__setattr__(self, "bounding_box", bounds)

    @property
    def diam(self):
        """Diameter proxy: diagonal of the region bounding box."""
        bounds = self.region.bounds() or self.bounding_box
        return bounds.diagonal

    def sdf(self, x):
        return self.region.sdf(x)

    def feature_size(self):
        """Smallest geometric length scale among primitives (for mesh preconditions)."""
        sizes = []

        def walk(node):
            if isinstance(node, Ball):
                sizes.append(2 * node.r)
            elif isinstance(node, Box):
                sizes.append(min(node.rect.width, node.rect.height))
            elif isinstance(node, (Union, Intersection)):
                for p in node.parts:
                    walk(p)
            elif isinstance(node, Complement):
                walk(node.part)

        walk(self.region)
        for s in self.slits:
            sizes.append(s.length)
        return min(sizes) if sizes else self.bounding_box.diagonal

    def spec_string(self):
        return _region_spec(self.region, self.slits, self.punctures)


def ball_domain(cx, cy, r, marked_point=None):
    return Domain(region=Ball(cx, cy, r), marked_point=marked_point)


def rect_domain(xmin, ymin, xmax, ymax, marked_point=None):
    return Domain(region=Box(Rect(xmin, ymin, xmax, ymax)), marked_point=marked_point)


def annulus_domain(cx, cy, r_inner, r_outer, marked_point=None):
    region = Intersection((Ball(cx, cy, r_outer), Complement(Ball(cx, cy, r_inner))))
    bounds = Rect(cx - r_outer, cy - r_outer, cx + r_outer, cy + r_outer)
    return Domain(region=region, bounding_box=bounds, marked_point=marked_point)


def punctured_ball_domain(cx, cy, r, px=None, py=None):
    px = cx if px is None else px
    py = cy if py is None else py
    return Domain(region=Ball(cx, cy, r), punctures=((px, py),), marked_point=(px, py))


def slit_rect_domain(xmin, ymin, xmax, ymax, segment: Segment, marked_point=None):
    return Domain(
        region=Box(Rect(xmin, ymin, xmax, ymax)),
        slits=(segment,),
        marked_point=marked_point,
    )


# ---------------------------------------------------------------------------
# structured-text spec


def _build_region(node):
    if not isinstance(node, Call):
        raise ConfigError(f"expected a region expression, got {node!r}")
    name = node.name.lower()
    if name == "ball":
        return Ball(float(node.arg(0, "cx")), float(node.arg(1, "cy")), float(node.arg(2, "r")))
    if name == "rect":
        return Box(Rect(*(float(node.arg(i)) for i in range(4))))
    if name == "halfplane":
        return HalfPlane(float(node.arg(0, "nx")), float(node.arg(1, "ny")), float(node.arg(2, "c")))
    if name == "union":
        return Union(tuple(_build_region(a) for a in node.args))
    if name == "inter":
        return Intersection(tuple(_build_region(a) for a in node.args))
    if name == "compl":
        return Complement(_build_region(node.args[0]))
    raise ConfigError(f"unknown region primitive {node.name!r}")


def _split_removals(node, regions, slits, punctures):
    if isinstance(node, Call) and node.name.lower() == "union":
        for a in node.args:
            _split_removals(a, regions, slits, punctures)
        return
    if isinstance(node, Call) and node.name.lower() in ("segment", "slit"):
        slits.append(Segment(*(float(node.arg(i)) for i in range(4))))
        return
    if isinstance(node, Call) and node.name.lower() in ("point", "puncture"):
        punctures.append((float(node.arg(0)), float(node.arg(1))))
        return
    regions.append(_build_region(node))


def parse_domain(text) -> Domain:
    """Build a Domain from its structured-text spec.

    Examples::

        ball(0, 0, 2)
        diff(ball(0, 0, 2), ball(0, 0, 1))         annulus
        diff(ball(0, 0, 1), point(0, 0))           punctured disk
        diff(rect(0, 0, 1, 1), segment(0.5, 0.5, 1, 0.5))   slit square
    """
    node = parse_value(text) if isinstance(text, str) else text
    if not isinstance(node, Call):
        raise ConfigError(f"domain spec must be an expression, got {text!r}")
    if node.name.lower() == "diff":
        if len(node.args) != 2:
            raise ConfigError("diff(...) takes exactly two arguments")
        base = _build_region(node.args[0])
        regions, slits, punctures = [], [], []
        _split_removals(node.args[1], regions, slits, punctures)
        region = base
        if regions:
            removed = regions[0] if len(regions) == 1 else Union(tuple(regions))
            region = Intersection((base, Complement(removed)))
        bounds = base.bounds()
        return Domain(
            region=region,
            slits=tuple(slits),
            punctures=tuple(punctures),
            bounding_box=bounds,
        )
    return Domain(region=_build_region(node))


def _region_spec(node, slits=(), punctures=()):
    core = _region_to_text(node)
    removals = [f"segment({s.x0:g}, {s.y0:g}, {s.x1:g}, {s.y1:g})" for s in slits]
    removals += [f"point({p[0]:g}, {p[1]:g})" for p in punctures]
    if removals:
        inner = removals[0] if len(removals) == 1 else "union(" + ", ".join(removals) + ")"
        return f"diff({core}, {inner})"
    return core


def _region_to_text(node):
    if isinstance(node, Ball):
        return f"ball({node.cx:g}, {node.cy:g}, {node.r:g})"
    if isinstance(node, Box):
        r = node.rect
        return f"rect({r.xmin:g}, {r.ymin:g}, {r.xmax:g}, {r.ymax:g})"
    if isinstance(node, HalfPlane):
        return f"halfplane({node.nx:g}, {node.ny:g}, {node.c:g})"
    if isinstance(node, Union):
        return "union(" + ", ".join(_region_to_text(p) for p in node.parts) + ")"
    if isinstance(node, Intersection):
        inner = node.parts
        if len(inner) == 2 and isinstance(inner[1], Complement):
            return f"diff({_region_to_text(inner[0])}, {_region_to_text(inner[1].part)})"
        return "inter(" + ", ".join(_region_to_text(p) for p in inner) + ")"
    if isinstance(node, Complement):
        return f"compl({_region_to_text(node.part)})"
    raise TypeError(f"unknown region node {node!r}")
