"""Generalized Orlicz growth functions.

A growth function G(x, t) is convex and increasing in t with G(x, 0) = 0, and
measurable in the spatial variable x.  Its density g(x, t) is the right
derivative of G in t, so G(x, t) = integral of g(x, s) ds over [0, t].

Built-in parametric families (the only ones supported; no formula parser):

    power(p)                    G = t^p
    varexp(p(x))                G = t^p(x)
    doublephase(p, q, a(x))     G = t^p + a(x) t^q,  a >= 0
    orliczlog(p)                G = t^p log(e + t)
    powerlog(p(x))              G = t^p(x) log(e + t)

Spatial coefficients are restricted to closed forms: constants, a half-plane
step in the first coordinate with a linear transition, and max(0, x1)^alpha.

Each family carries certified structural constants (g0, g_sup) with
1 < g0 <= t g/G <= g_sup, and supports the conjugate function
G*(x, s) = sup_t (s t - G(x, t)) evaluated through the generalized inverse
g^{-1}(x, s) = sup { t >= 0 : g(x, t) <= s }.

All operations are pure functions of their arguments and are safe to call
concurrently; instances are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._specparse import Call, parse_value
from .domain import Rect
from .errors import ConfigError, DomainError, GeometryError, NumericError

_E = math.e

_FAMILIES = ("power", "varexp", "doublephase", "orliczlog", "powerlog")
_FAMILY_CODE = {name: i for i, name in enumerate(_FAMILIES)}


# ---------------------------------------------------------------------------
# coefficient fields


@dataclass(frozen=True)
class CoefField:
    """Closed-form scalar coefficient over the plane.

    kind = "const":  value
    kind = "step":   lo for x1 < edge - width/2, hi for x1 > edge + width/2,
                     linear ramp in between (hard jump when width == 0)
    kind = "powmax": max(0, x1)^alpha
    """

    kind: str
    value: float = 0.0
    lo: float = 0.0
    hi: float = 0.0
    edge: float = 0.0
    width: float = 0.0
    alpha: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        x1 = x[..., 0]
        if self.kind == "const":
            return np.full_like(x1, self.value)
        if self.kind == "step":
            if self.width == 0.0:
                return np.where(x1 >= self.edge, self.hi, self.lo)
            s = np.clip((x1 - (self.edge - self.width / 2)) / self.width, 0.0, 1.0)
            return self.lo + (self.hi - self.lo) * s
        if self.kind == "powmax":
            return np.maximum(x1, 0.0) ** self.alpha
        raise ConfigError(f"unknown coefficient field kind {self.kind!r}")

    def range_over(self, box: Rect):
        """Exact (min, max) over a box; all kinds are monotone in x1."""
        ends = self(np.array([[box.xmin, 0.0], [box.xmax, 0.0]]))
        if self.kind == "powmax" and box.xmin < 0 < box.xmax:
            ends = np.append(ends, 0.0)
        return float(np.min(ends)), float(np.max(ends))

    def is_const(self):
        return self.kind == "const"

    def spec_string(self):
        if self.kind == "const":
            return f"const({self.value:g})"
        if self.kind == "step":
            return f"step(lo={self.lo:g}, hi={self.hi:g}, edge={self.edge:g}, width={self.width:g})"
        return f"powmax(alpha={self.alpha:g})"


def const_field(value):
    return CoefField("const", value=float(value))


def step_field(lo, hi, edge=0.0, width=0.0):
    return CoefField("step", lo=float(lo), hi=float(hi), edge=float(edge), width=float(width))


def powmax_field(alpha):
    return CoefField("powmax", alpha=float(alpha))


# ---------------------------------------------------------------------------
# the log-perturbation contribution to t g / G

def _log_ratio_term(t):
    # t / ((e + t) log(e + t)), the amount orliczlog/powerlog add to the ratio
    return t / ((_E + t) * np.log(_E + t))


def _log_ratio_sup():
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda u: -_log_ratio_term(math.exp(u)), bounds=(-20, 20), method="bounded")
    return float(-res.fun)


_LOG_SC_BUMP = _log_ratio_sup()


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiFunction:
    """One member of the built-in growth-function families.

    ``p_field`` is the (possibly spatial) main exponent; ``q``/``a_field``
    are used by the double-phase family only.  ``bbox``, when set, restricts
    the spatial arguments of every evaluation.
    """

    family: str
    p_field: CoefField
    q: float | None = None
    a_field: CoefField | None = None
    bbox: Rect | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.family in ("power", "orliczlog", "doublephase") and not self.p_field.is_const():
            raise ConfigError(f"{self.family} requires a constant exponent")
        if self.family == "doublephase":
            if self.q is None or self.a_field is None:
                raise ConfigError("doublephase requires q and a(x)")
            if self.q < self.p_field.value:
                raise ConfigError("doublephase requires q >= p")

    # -- validation ---------------------------------------------------------

    def _check_point(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape[-1] != 2:
            raise DomainError("spatial points must be 2D")
        if self.bbox is not None and not bool(np.all(self.bbox.contains(x, tol=1e-12))):
            raise GeometryError("point outside the bounding box")
        return x

    def _check_t(self, t, name="t"):
        t = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t)):
            raise DomainError(f"{name} must be finite")
        if np.any(t < 0):
            raise DomainError(f"{name} must be nonnegative")
        return t

    # -- family parameters at spatial points --------------------------------

    def _params(self, x):
        """Returns (p, q, a) arrays broadcastable against t."""
        p = self.p_field(x)
        if self.family == "doublephase":
            return p, np.full_like(p, self.q), self.a_field(x)
        return p, None, None

    # -- core evaluations ----------------------------------------------------

    def G(self, x, t):
        x = self._check_point(x)
        t = self._check_t(t)
        p, q, a = self._params(x)
        return _G_eval(self.family, p, q, a, t)

    def g(self, x, t):
        x = self._check_point(x)
        t = self._check_t(t)
        p, q, a = self._params(x)
        return _g_eval(self.family, p, q, a, t)

    def g_inverse(self, x, s):
        """Generalized inverse sup{t : g(x,t) <= s}; closed form for pure powers."""
        x = self._check_point(x)
        s = self._check_t(s, name="s")
        p, q, a = self._params(x)
        if self.family in ("power", "varexp"):
            return np.where(s > 0, (s / p) ** (1.0 / (p - 1.0)), 0.0)
        return _bisect_g_inverse(self.family, p, q, a, s)

    def conjugate(self, x, s):
        """Legendre transform G*(x, s) via the Young equality at t = g^{-1}(x, s)."""
        x = self._check_point(x)
        s = self._check_t(s, name="s")
        t = self.g_inverse(x, s)
        p, q, a = self._params(x)
        return s * t - _G_eval(self.family, p, q, a, t)

    # -- certified structural constants --------------------------------------

    def sc_constants(self, box: Rect | None = None):
        """Certified (g0, g_sup) bounds of t g(x,t)/G(x,t) over the given box."""
        box = box or self.bbox or Rect(-1, -1, 1, 1)
        if self.family == "power":
            p = self.p_field.value
            return p, p
        if self.family == "varexp":
            return self.p_field.range_over(box)
        if self.family == "doublephase":
            a_lo, a_hi = self.a_field.range_over(box)
            if a_lo < 0:
                raise NumericError("doublephase coefficient must be nonnegative")
            p = self.p_field.value
            return (p, p) if a_hi == 0 else (p, float(self.q))
        if self.family == "orliczlog":
            p = self.p_field.value
            return p, p + _LOG_SC_BUMP
        p_lo, p_hi = self.p_field.range_over(box)
        return p_lo, p_hi + _LOG_SC_BUMP

    def a0_constant(self, box: Rect | None = None, n_samples=65):
        """Smallest c0 >= 1 with 1/c0 <= G(x, 1) <= c0 on a sample of the box."""
        box = box or self.bbox or Rect(-1, -1, 1, 1)
        pts = box.sample_grid(n_samples)
        vals = self.G(pts, 1.0)
        lo, hi = float(np.min(vals)), float(np.max(vals))
        if lo <= 0:
            raise NumericError("G(x, 1) vanished; (A0) fails")
        return max(hi, 1.0 / lo, 1.0)

    def is_spatial(self):
        if not self.p_field.is_const():
            return True
        return self.family == "doublephase" and not self.a_field.is_const()

    # -- plumbing -------------------------------------------------------------

    def with_bbox(self, box: Rect):
        return replace(self, bbox=box)

    def kernel_tables(self, points):
        """Per-point parameter arrays consumed by the assembly kernels."""
        points = np.asarray(points, dtype=float)
        p, q, a = self._params(points)
        zeros = np.zeros_like(p)
        code = _FAMILY_CODE[self.family]
        if self.family == "doublephase":
            return code, np.ascontiguousarray(p), np.ascontiguousarray(q), np.ascontiguousarray(a)
        return code, np.ascontiguousarray(p), zeros, zeros

    def spec_string(self):
        if self.family == "power":
            return f"power(p={self.p_field.value:g})"
        if self.family == "varexp":
            return f"varexp(p={self.p_field.spec_string()})"
        if self.family == "doublephase":
            return (
                f"doublephase(p={self.p_field.value:g}, q={self.q:g}, "
                f"a={self.a_field.spec_string()})"
            )
        if self.family == "orliczlog":
            return f"orliczlog(p={self.p_field.value:g})"
        return f"powerlog(p={self.p_field.spec_string()})"


# ---------------------------------------------------------------------------
# family math on raw parameter arrays


def _G_eval(family, p, q, a, t):
    if family in ("power", "varexp"):
        return t**p
    if family == "doublephase":
        return t**p + a * t**q
    return t**p * np.log(_E + t)


def _g_eval(family, p, q, a, t):
    with np.errstate(divide="ignore", invalid="ignore"):
        tp1 = np.where(t > 0, t ** (p - 1.0), 0.0)
    if family in ("power", "varexp"):
        return p * tp1
    if family == "doublephase":
        tq1 = np.where(t > 0, t ** (q - 1.0), 0.0)
        return p * tp1 + q * a * tq1
    return p * tp1 * np.log(_E + t) + t**p / (_E + t)


def _bisect_g_inverse(family, p, q, a, s, rel_tol=1e-12):
    """Vectorized bisection for t with g(t) = s; g increasing, g(0) = 0."""
    s = np.asarray(s, dtype=float)
    shape = np.broadcast_shapes(s.shape, np.shape(p))
    s = np.broadcast_to(s, shape).copy()
    p = np.broadcast_to(p, shape)
    q = np.broadcast_to(q, shape) if q is not None else None
    a = np.broadcast_to(a, shape) if a is not None else None

    hi = np.ones(shape)
    for _ in range(200):
        need = _g_eval(family, p, q, a, hi) < s
        if not np.any(need):
            break
        hi[need] *= 2.0
    lo = np.zeros(shape)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = _g_eval(family, p, q, a, mid) <= s
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= rel_tol * np.maximum(hi, 1e-300)):
            break
    out = 0.5 * (lo + hi)
    return np.where(s > 0, out, 0.0)


# ---------------------------------------------------------------------------
# sampled certification of (SC) and the almost-continuity conditions


def estimate_sc_constants(phi: PhiFunction, box: Rect, t_lo=1e-8, t_hi=1e4, nt=241, nx=33):
    """Sampled (min, max) of t g(x,t)/G(x,t); t on a log grid spanning >= 8 decades."""
    if t_hi / t_lo < 1e8:
        raise ConfigError("t sampling must span at least 8 decades")
    pts = box.sample_grid(nx)
    t = np.logspace(math.log10(t_lo), math.log10(t_hi), nt)
    p, q, a = phi._params(pts)
    pp = p[:, None]
    qq = q[:, None] if q is not None else None
    aa = a[:, None] if a is not None else None
    tt = t[None, :]
    ratio = tt * _g_eval(phi.family, pp, qq, aa, tt) / _G_eval(phi.family, pp, qq, aa, tt)
    g0, gsup = float(np.min(ratio)), float(np.max(ratio))
    if g0 <= 1.0:
        raise NumericError(f"(SC) violation: sampled ratio {g0:.6g} <= 1")
    return g0, gsup


@dataclass
class ConditionRow:
    condition: str
    radius: float
    window: tuple
    sup_ratio: float
    threshold: float
    verdict: bool

    def to_json_dict(self):
        return {
            "condition": self.condition,
            "radius": self.radius,
            "window": [self.window[0], self.window[1]],
            "sup_ratio": self.sup_ratio,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }


@dataclass
class ConditionReport:
    """Sampled certification of (A0), (A1) and (A1,n) over balls in a box.

    A condition "holds numerically" relative to the recorded sample density
    and ratio threshold; this is certification by sampling, not proof.
    """

    phi_spec: str
    box: Rect
    threshold: float
    a0_constant: float
    a0_threshold: float
    rows: list
    sample_density: dict

    def verdict(self, condition):
        if condition == "A0":
            return self.a0_constant <= self.a0_threshold
        rows = [r for r in self.rows if r.condition == condition]
        return bool(rows) and all(r.verdict for r in rows)

    def to_json_dict(self):
        return {
            "phi": self.phi_spec,
            "box": [self.box.xmin, self.box.ymin, self.box.xmax, self.box.ymax],
            "threshold": self.threshold,
            "A0": {
                "constant": self.a0_constant,
                "threshold": self.a0_threshold,
                "verdict": self.verdict("A0"),
            },
            "rows": [r.to_json_dict() for r in self.rows],
            "verdicts": {c: self.verdict(c) for c in ("A0", "A1", "A1n", "A1n_window")},
            "sample_density": self.sample_density,
        }


def _ball_sample_points(center, radius, n_dirs=16, n_rad=5):
    cx, cy = center
    fractions = np.linspace(0.0, 1.0, n_rad)
    angles = np.linspace(0.0, 2 * math.pi, n_dirs, endpoint=False)
    rr, aa = np.meshgrid(fractions, angles)
    xs = cx + (rr * radius * np.cos(aa)).ravel()
    ys = cy + (rr * radius * np.sin(aa)).ravel()
    return np.stack([xs, ys], axis=-1)


def _ball_centers(box: Rect, radius, n_centers=5):
    xs = np.linspace(box.xmin + radius, box.xmax - radius, n_centers)
    ys = np.linspace(box.ymin + radius, box.ymax - radius, n_centers)
    centers = [(x, y) for x in xs for y in ys if x - radius >= box.xmin - 1e-12]
    # balls straddling the x1 = 0 line probe discontinuous coefficients
    if box.xmin + radius <= 0 <= box.xmax - radius:
        ymid = 0.5 * (box.ymin + box.ymax)
        centers += [(0.0, ymid), (radius / 2, ymid), (-radius / 2, ymid)]
    return centers


def _sup_ratio_on_window(phi, pts, t_window, nt=65):
    t_lo, t_hi = t_window
    if not (t_hi > t_lo > 0):
        return 1.0
    t = np.logspace(math.log10(t_lo), math.log10(t_hi), nt)
    p, q, a = phi._params(pts)
    vals = _G_eval(phi.family, p[:, None], q[:, None] if q is not None else None,
                   a[:, None] if a is not None else None, t[None, :])
    ratio = np.max(vals, axis=0) / np.min(vals, axis=0)
    return float(np.max(ratio))


def _g_minus_window(phi, pts, targets):
    """Per-ball t with inf_x G(x, t) = target, by bisection."""
    p, q, a = phi._params(pts)

    def gmin(t):
        return float(np.min(_G_eval(phi.family, p, q, a, t)))

    out = []
    for target in targets:
        lo, hi = 1e-12, 1.0
        for _ in range(300):
            if gmin(hi) >= target:
                break
            hi *= 2.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if gmin(mid) < target:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out


def check_conditions(
    phi: PhiFunction,
    box: Rect,
    radii,
    threshold=8.0,
    a0_threshold=100.0,
    window_r=0.5,
    window_s=2.0,
    n=2,
):
    """Sampled sup of G(x,t)/G(y,t) over balls B_R in the box, per condition window.

    (A1) uses the window where inf_B G(., t) runs through [1, R^-n]; (A1,n)
    uses t in [1, 1/R]; the flexible variant uses t in [window_r, window_s/R].
    """
    radii = list(radii)
    if not radii:
        raise ConfigError("no radii given")
    if any(not (0 < r <= 1) for r in radii):
        raise DomainError("radii must lie in (0, 1]")
    rows = []
    for R in radii:
        if 2 * R >= min(box.width, box.height):
            raise ConfigError(f"radius {R} too large for box")
        sup_a1 = 1.0
        sup_a1n = 1.0
        sup_lem = 1.0
        a1_windows = []
        for center in _ball_centers(box, R):
            pts = _ball_sample_points(center, R)
            t_lo, t_hi = _g_minus_window(phi, pts, (1.0, R ** (-n)))
            a1_windows.append((t_lo, t_hi))
            sup_a1 = max(sup_a1, _sup_ratio_on_window(phi, pts, (t_lo, t_hi)))
            sup_a1n = max(sup_a1n, _sup_ratio_on_window(phi, pts, (1.0, 1.0 / R)))
            sup_lem = max(sup_lem, _sup_ratio_on_window(phi, pts, (window_r, window_s / R)))
        w_lo = min(w[0] for w in a1_windows)
        w_hi = max(w[1] for w in a1_windows)
        rows.append(ConditionRow("A1", R, (w_lo, w_hi), sup_a1, threshold, sup_a1 <= threshold))
        rows.append(ConditionRow("A1n", R, (1.0, 1.0 / R), sup_a1n, threshold, sup_a1n <= threshold))
        rows.append(
            ConditionRow(
                "A1n_window", R, (window_r, window_s / R), sup_lem, threshold, sup_lem <= threshold
            )
        )
    return ConditionReport(
        phi_spec=phi.spec_string(),
        box=box,
        threshold=threshold,
        a0_constant=phi.a0_constant(box),
        a0_threshold=a0_threshold,
        rows=rows,
        sample_density={"n_dirs": 16, "n_rad": 5, "nt": 65},
    )


# ---------------------------------------------------------------------------
# constructors and spec parsing


def power(p):
    if p <= 1:
        raise DomainError("power exponent must exceed 1")
    return PhiFunction("power", const_field(p))


def variable_exponent(p_field: CoefField):
    return PhiFunction("varexp", p_field)


def double_phase(p, q, a_field: CoefField):
    if p <= 1:
        raise DomainError("doublephase base exponent must exceed 1")
    return PhiFunction("doublephase", const_field(p), q=float(q), a_field=a_field)


def orlicz_log(p):
    if p <= 1:
        raise DomainError("orliczlog exponent must exceed 1")
    return PhiFunction("orliczlog", const_field(p))


def power_log(p_field: CoefField):
    return PhiFunction("powerlog", p_field)


def _build_coef(node):
    if isinstance(node, (int, float)):
        return const_field(node)
    if not isinstance(node, Call):
        raise ConfigError(f"bad coefficient spec {node!r}")
    name = node.name.lower()
    if name == "const":
        return const_field(float(node.arg(0, "value")))
    if name == "step":
        return step_field(
            float(node.arg(0, "lo")),
            float(node.arg(1, "hi")),
            float(node.arg(2, "edge", 0.0)),
            float(node.arg(3, "width", 0.0)),
        )
    if name == "powmax":
        return powmax_field(float(node.arg(0, "alpha")))
    raise ConfigError(f"unknown coefficient field {node.name!r}")


def parse_phi(text) -> PhiFunction:
    """Build a PhiFunction from its structured-text spec, e.g. ``power(p=2)``."""
    node = parse_value(text) if isinstance(text, str) else text
    if not isinstance(node, Call):
        raise ConfigError(f"phi spec must be an expression, got {text!r}")
    name = node.name.lower()
    if name == "power":
        return power(float(node.arg(0, "p")))
    if name == "varexp":
        return variable_exponent(_build_coef(node.arg(0, "p")))
    if name == "doublephase":
        return double_phase(
            float(node.arg(0, "p")), float(node.arg(1, "q")), _build_coef(node.arg(2, "a"))
        )
    if name == "orliczlog":
        return orlicz_log(float(node.arg(0, "p")))
    if name == "powerlog":
        return power_log(_build_coef(node.arg(0, "p")))
    raise ConfigError(f"unknown phi family {node.name!r}")
