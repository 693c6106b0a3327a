"""Scenario configuration: flat key-value files with expression values.

Format: one ``key = value`` per line, ``#`` comments, blank lines ignored.
Values are numbers (fractions like 1/64 allowed), tuples, or structured
expressions (phi families, domains, boundary data).  Unknown keys are
rejected.  Every report embeds the resolved configuration, including which
keys were defaulted, so runs are reproducible from their artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from ._specparse import Call, parse_value
from .domain import Domain, Rect, parse_domain, _build_region
from .errors import ConfigError
from .phi import PhiFunction, parse_phi

TASKS = ("check-phi", "solve", "capacity", "potential", "wiener", "perron")

_KEYS = {
    "task", "phi", "domain", "K", "x0", "h", "rho", "scales", "nodes_per_radius",
    "seed", "out", "boundary", "tol_energy", "tol_grad", "max_iters", "bbox",
    "radii", "threshold", "slope_threshold",
}

_REQUIRED = {
    "check-phi": ("phi",),
    "solve": ("phi", "domain", "boundary"),
    "capacity": ("phi", "domain", "K"),
    "potential": ("phi", "domain", "K"),
    "wiener": ("phi", "domain", "rho"),
    "perron": ("phi", "domain", "boundary"),
}


@dataclass
class BoundaryData:
    """Closed-form boundary data: name plus parameters, evaluable at nodes."""

    kind: str
    params: tuple = ()

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        p = self.params
        if self.kind == "const":
            return np.full_like(x, p[0])
        if self.kind == "linear":
            return p[0] * x + p[1] * y + p[2]
        if self.kind == "sintheta":
            return np.sin(p[0] * np.arctan2(y, x))
        if self.kind == "ringstep":
            return np.where(np.hypot(x, y) <= p[0], p[1], p[2])
        if self.kind == "absline":
            return np.abs(p[0] * x + p[1] * y + p[2])
        raise ConfigError(f"unknown boundary data kind {self.kind!r}")

    def spec_string(self):
        args = ", ".join(f"{v:g}" for v in self.params)
        return f"{self.kind}({args})"


def parse_boundary(text) -> BoundaryData:
    node = parse_value(text) if isinstance(text, str) else text
    if not isinstance(node, Call):
        raise ConfigError(f"boundary spec must be an expression, got {text!r}")
    name = node.name.lower()
    arity = {"const": 1, "linear": 3, "sintheta": 1, "ringstep": 3, "absline": 3}
    if name not in arity:
        raise ConfigError(f"unknown boundary data {node.name!r}")
    args = [float(node.arg(i)) for i in range(arity[name])]
    return BoundaryData(name, tuple(args))


@dataclass
class Scenario:
    task: str
    phi: PhiFunction = None
    domain: Domain = None
    K_region: object = None
    K_spec: str = ""
    x0: tuple = None
    h: float = 1.0 / 64.0
    rho: float = None
    scales: int = 6
    nodes_per_radius: int = 32
    seed: int = 0
    out: str = "out"
    boundary: BoundaryData = None
    tol_energy: float = None
    tol_grad: float = None
    max_iters: int = None
    radii: tuple = (0.5, 0.25, 0.125)
    threshold: float = 8.0
    slope_threshold: float = None
    defaulted: list = dc_field(default_factory=list)
    domain_spec: str = ""
    phi_spec: str = ""

    def solve_options(self):
        from .solver import SolveOptions

        kwargs = {}
        if self.tol_energy is not None:
            kwargs["tol_energy"] = self.tol_energy
        if self.tol_grad is not None:
            kwargs["tol_grad"] = self.tol_grad
        if self.max_iters is not None:
            kwargs["max_iters"] = self.max_iters
        return SolveOptions(**kwargs)

    def resolved_config(self):
        cfg = {"task": self.task, "h": self.h, "seed": self.seed,
               "scales": self.scales, "nodes_per_radius": self.nodes_per_radius,
               "out": self.out, "defaulted": sorted(self.defaulted)}
        if self.phi is not None:
            cfg["phi"] = self.phi.spec_string()
        if self.domain is not None:
            cfg["domain"] = self.domain_spec or self.domain.spec_string()
        if self.K_spec:
            cfg["K"] = self.K_spec
        if self.x0 is not None:
            cfg["x0"] = list(self.x0)
        if self.rho is not None:
            cfg["rho"] = self.rho
        if self.boundary is not None:
            cfg["boundary"] = self.boundary.spec_string()
        if self.radii:
            cfg["radii"] = list(self.radii)
        cfg["threshold"] = self.threshold
        if self.slope_threshold is not None:
            cfg["slope_threshold"] = self.slope_threshold
        return cfg


def _parse_lines(text):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        entries[key] = (value, lineno)
    return entries


def _number(entries, key, default=None, cast=float):
    if key not in entries:
        return default, True
    text, lineno = entries[key]
    try:
        value = parse_value(text)
        return cast(value), False
    except (ConfigError, TypeError, ValueError):
        raise ConfigError(f"line {lineno}: {key} must be a number") from None


def parse_config(text) -> Scenario:
    entries = _parse_lines(text)
    if "task" not in entries:
        raise ConfigError("missing required key 'task'")
    task = entries["task"][0]
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r} (one of {', '.join(TASKS)})")

    sc = Scenario(task=task)
    for key in _REQUIRED[task]:
        if key not in entries:
            raise ConfigError(f"task {task}: missing required key {key!r}")

    if "phi" in entries:
        sc.phi = parse_phi(entries["phi"][0])
        sc.phi_spec = entries["phi"][0]
    if "domain" in entries:
        sc.domain = parse_domain(entries["domain"][0])
        sc.domain_spec = entries["domain"][0]
    if "bbox" in entries:
        node = parse_value(entries["bbox"][0])
        if not (isinstance(node, Call) and node.name == "rect"):
            raise ConfigError("bbox must be rect(xmin, ymin, xmax, ymax)")
        box = Rect(*(float(node.arg(i)) for i in range(4)))
        if sc.domain is None:
            raise ConfigError("bbox given without a domain")
        import dataclasses

        sc.domain = dataclasses.replace(sc.domain, bounding_box=box)
    if "K" in entries:
        sc.K_region = _build_region(parse_value(entries["K"][0]))
        sc.K_spec = entries["K"][0]
    if "x0" in entries:
        node = parse_value(entries["x0"][0])
        if isinstance(node, Call) and node.name == "point":
            node = tuple(float(node.arg(i)) for i in range(2))
        if not (isinstance(node, tuple) and len(node) == 2):
            raise ConfigError("x0 must be a pair (x, y)")
        sc.x0 = (float(node[0]), float(node[1]))
    if "boundary" in entries:
        sc.boundary = parse_boundary(entries["boundary"][0])
    if "radii" in entries:
        node = parse_value(entries["radii"][0])
        if isinstance(node, (int, float)):
            node = (node,)
        sc.radii = tuple(float(v) for v in node)

    sc.h, h_defaulted = _number(entries, "h", sc.h)
    if h_defaulted:
        sc.defaulted.append("h")
    if sc.h <= 0:
        raise ConfigError("h must be positive")
    for key, cast in (("rho", float), ("tol_energy", float), ("tol_grad", float),
                      ("threshold", float), ("slope_threshold", float)):
        val, was_default = _number(entries, key, getattr(sc, key), cast)
        setattr(sc, key, val)
    for key in ("scales", "nodes_per_radius", "seed", "max_iters"):
        val, was_default = _number(entries, key, getattr(sc, key), int)
        setattr(sc, key, val)
        if was_default and key in ("scales", "nodes_per_radius"):
            sc.defaulted.append(key)
    if "out" in entries:
        sc.out = entries["out"][0]
    else:
        sc.defaulted.append("out")

    _validate(sc)
    return sc


def _validate(sc: Scenario):
    if sc.task == "wiener":
        if sc.x0 is None and (sc.domain is None or sc.domain.marked_point is None):
            raise ConfigError("wiener: x0 required (or a domain marked point)")
        if sc.rho is None or sc.rho <= 0:
            raise ConfigError("wiener: rho must be positive")
        if sc.scales < 0 or sc.scales > 12:
            raise ConfigError("wiener: scales must lie in [0, 12]")
    if sc.task in ("solve", "perron") and sc.boundary is None:
        raise ConfigError(f"{sc.task}: boundary data required")
    if sc.task in ("capacity", "potential") and sc.K_region is None:
        raise ConfigError(f"{sc.task}: K required")


def load_config(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
