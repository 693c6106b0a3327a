import numpy as np
import pytest

import orlicz_regularity as orz


@pytest.fixture(scope="session")
def unit_square_mesh():
    return orz.build_mesh(orz.rect_domain(0, 0, 1, 1), 1 / 16)


@pytest.fixture(scope="session")
def coarse_square_mesh():
    return orz.build_mesh(orz.rect_domain(0, 0, 1, 1), 1 / 8)


@pytest.fixture(scope="session")
def annulus_mesh_16():
    return orz.build_mesh(orz.annulus_domain(0, 0, 1, 2), 1 / 16)


@pytest.fixture(scope="session")
def disk_mesh_16():
    return orz.build_mesh(orz.ball_domain(0, 0, 1), 1 / 16)


@pytest.fixture(scope="session")
def family_zoo():
    return {
        "power2": orz.power(2),
        "power3": orz.power(3),
        "power4": orz.power(4),
        "varexp": orz.variable_exponent(orz.step_field(2.0, 3.0, edge=0.0, width=0.5)),
        "doublephase": orz.double_phase(2, 3, orz.powmax_field(1.5)),
        "orliczlog": orz.orlicz_log(2),
        "powerlog": orz.power_log(orz.step_field(2.0, 2.5, edge=0.0, width=0.5)),
    }


def annulus_boundary_data(mesh):
    r = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
    return np.where(r <= 1.5, 1.0, 0.0)


def radial_profile_power(r, p, r_in=1.0, r_out=2.0):
    """Radial Dirichlet solution for pure power growth on an annulus."""
    r = np.maximum(np.asarray(r, dtype=float), 1e-12)
    if p == 2:
        vals = np.log(r_out / r) / np.log(r_out / r_in)
    else:
        beta = (p - 2.0) / (p - 1.0)
        vals = (r_out**beta - r**beta) / (r_out**beta - r_in**beta)
    return np.clip(vals, 0.0, 1.0)
