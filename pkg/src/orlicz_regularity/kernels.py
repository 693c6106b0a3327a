"""Backend selection for the assembly kernels.

The compiled extension is used when importable; otherwise the numpy fallback.
Set ORLICZ_REGULARITY_BACKEND to "native" or "numpy" to force a choice
("native" raises if the extension is missing).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np

try:
    from . import _kernels as _native
except ImportError:  # pragma: no cover - depends on build environment
    _native = None

_choice = os.environ.get("ORLICZ_REGULARITY_BACKEND", "auto").lower()
if _choice == "numpy":
    _impl = _kernels_np
elif _choice == "native":
    if _native is None:
        raise ImportError("native kernel backend requested but not built")
    _impl = _native
else:
    _impl = _native if _native is not None else _kernels_np

BACKEND = "native" if _impl is not None and _impl is _native else "numpy"


def get_backend(name=None):
    if name in (None, "auto"):
        return _impl
    if name == "numpy":
        return _kernels_np
    if name == "native":
        if _native is None:
            raise ImportError("native kernel backend is not built")
        return _native
    raise ValueError(f"unknown backend {name!r}")


class AssemblyContext:
    """Precomputed per-(mesh, phi) arrays feeding the kernels.

    Holds triangle connectivity, orientations and the growth-function
    parameter tables evaluated at triangle centroids.  Instances are
    immutable and shareable; evaluation is pure.
    """

    def __init__(self, mesh, phi, backend=None):
        self._impl = get_backend(backend)
        self.mesh = mesh
        self.tri_nodes = np.ascontiguousarray(mesh.triangles, dtype=np.int32)
        n_tri = self.tri_nodes.shape[0]
        self.orient = np.zeros(n_tri, dtype=np.uint8)
        self.orient[mesh.n_lower:] = 1
        code, p1, p2, p3 = phi.kernel_tables(mesh.centroids)
        self.family_code = int(code)
        self.p1 = np.array(np.broadcast_to(p1, (n_tri,)), dtype=np.float64)
        self.p2 = np.array(np.broadcast_to(p2, (n_tri,)), dtype=np.float64)
        self.p3 = np.array(np.broadcast_to(p3, (n_tri,)), dtype=np.float64)
        self.h = float(mesh.h)
        self.n_nodes = mesh.n_nodes
        self.all_idx = np.arange(n_tri, dtype=np.int64)

    def subset(self, node_mask):
        """Indices of triangles touching any node in node_mask."""
        touched = node_mask[self.tri_nodes].any(axis=1)
        return np.flatnonzero(touched).astype(np.int64)

    def energy(self, u, idx=None):
        idx = self.all_idx if idx is None else idx
        return self._impl.energy(
            np.ascontiguousarray(u), self.tri_nodes, self.orient,
            self.family_code, self.p1, self.p2, self.p3, self.h, idx,
        )

    def assemble(self, u, eps_flux, eps_curv=0.05, idx=None):
        """Returns (energy, residual, preconditioner) over the triangle subset."""
        idx = self.all_idx if idx is None else idx
        return self._impl.assemble(
            np.ascontiguousarray(u), self.tri_nodes, self.orient,
            self.family_code, self.p1, self.p2, self.p3, self.h,
            eps_flux, eps_curv, self.n_nodes, idx,
        )
