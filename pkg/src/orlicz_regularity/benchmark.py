"""Benchmark of the compiled assembly kernels against the numpy fallback.

    python3 -m orlicz_regularity.benchmark [--h 1/128] [--reps 20]

Times the energy and the fused energy/residual/preconditioner assembly on
an annulus mesh for a quadratic and a double-phase family, checks that both
backends agree, and reports the speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ._specparse import parse_value
from .domain import annulus_domain
from .kernels import AssemblyContext, get_backend
from .mesh import build_mesh
from .phi import const_field, double_phase, power


def _time(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(h=1 / 128, reps=20):
    domain = annulus_domain(0, 0, 1, 2)
    mesh = build_mesh(domain, h)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(mesh.n_nodes)
    u[~mesh.active_mask] = 0.0

    backends = ["numpy"]
    try:
        get_backend("native")
        backends.insert(0, "native")
    except ImportError:
        print("native backend not built; benchmarking numpy only")

    families = {
        "power(2)": power(2),
        "doublephase(2,3)": double_phase(2, 3, const_field(1.0)),
    }
    print(f"mesh: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles (h = {h:g})")
    print(f"{'family':<18} {'kernel':<10} {'backend':<8} {'best (ms)':>10} {'speedup':>8}")
    for fam_name, phi in families.items():
        results = {}
        for backend in backends:
            ctx = AssemblyContext(mesh, phi, backend=backend)
            t_energy = _time(lambda: ctx.energy(u), reps)
            t_asm = _time(lambda: ctx.assemble(u, 1e-12), reps)
            results[backend] = (t_energy, t_asm, ctx.energy(u), ctx.assemble(u, 1e-12))
        base = results["numpy"]
        for backend in backends:
            t_energy, t_asm, _, _ = results[backend]
            for label, t, t_ref in (("energy", t_energy, base[0]), ("assemble", t_asm, base[1])):
                print(f"{fam_name:<18} {label:<10} {backend:<8} {t * 1e3:>10.3f} {t_ref / t:>8.2f}x")
        if len(backends) == 2:
            e_nat, e_np = results["native"][2], results["numpy"][2]
            r_nat, r_np = results["native"][3][1], results["numpy"][3][1]
            print(f"{fam_name:<18} agreement: |dE| = {abs(e_nat - e_np):.3e}, "
                  f"max|dres| = {np.max(np.abs(r_nat - r_np)):.3e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--h", default="1/128")
    parser.add_argument("--reps", type=int, default=20)
    args = parser.parse_args()
    run(h=float(parse_value(args.h)), reps=args.reps)


if __name__ == "__main__":
    main()
