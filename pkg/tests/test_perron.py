import dataclasses

import numpy as np
import pytest

import orlicz_regularity as orz
from orlicz_regularity.errors import GeometryError
from orlicz_regularity.perron import (
    PerronOptions,
    lower_perron,
    poisson_modification,
    resolutivity_gap,
    restriction_audit,
    sobolev_agreement,
    upper_perron,
)
from orlicz_regularity.potential import g_potential
from orlicz_regularity.solver import SolveOptions


def sin4(mesh):
    return mesh.interpolate(lambda x, y: np.sin(4 * np.arctan2(y, x)))


class TestPoissonModification:
    def test_constant_unchanged(self, disk_mesh_16):
        m = disk_mesh_16
        u = np.full(m.n_nodes, 1.5)
        ball = m.nodes_within((0, 0), 0.3)
        out = poisson_modification(m, orz.power(2), u, ball)
        assert np.max(np.abs(out - u)) <= 1e-12

    def test_harmonic_fixed_point(self, disk_mesh_16):
        m = disk_mesh_16
        f = m.interpolate(lambda x, y: x - 0.5 * y)
        res = orz.solve_dirichlet(m, orz.power(2), f)
        ball = m.nodes_within((0.1, 0.0), 0.3)
        out = poisson_modification(m, orz.power(2), res.field, ball)
        assert np.max(np.abs(out - res.field)) <= 1e-7

    def test_cone_lowered_at_apex(self, disk_mesh_16):
        m = disk_mesh_16
        cone = m.interpolate(lambda x, y: np.maximum(0.0, 1 - 4 * np.hypot(x, y)))
        ball = m.nodes_within((0, 0), 0.2)
        out = poisson_modification(m, orz.power(2), cone, ball)
        apex = m.node_index((0, 0))
        assert out[apex] < cone[apex] - 0.5
        assert np.max(np.abs((out - cone)[~ball])) == 0.0

    def test_supersolution_lowering(self):
        mesh = orz.build_mesh(orz.ball_domain(0, 0, 2), 1 / 8)
        K = mesh.nodes_within((0, 0), 1.0, closed_slack=1 / 16) & mesh.active_mask
        pot = g_potential(mesh, orz.power(2), K, SolveOptions(tol_grad=1e-10))
        ball = mesh.nodes_within((1.2, 0.0), 0.4)
        out = poisson_modification(mesh, orz.power(2), pot.field, ball)
        assert np.max(out - pot.field) <= 1e-8

    def test_subdomain_must_be_inside(self, disk_mesh_16):
        m = disk_mesh_16
        u = np.zeros(m.n_nodes)
        outside = m.nodes_within((0.8, 0.8), 0.3)
        assert (outside & ~m.active_mask).any()
        with pytest.raises(GeometryError):
            poisson_modification(m, orz.power(2), u, outside)


class TestPerronSweeps:
    def test_constant_data(self, disk_mesh_16):
        m = disk_mesh_16
        f = np.full(m.n_nodes, 2.5)
        up, sweeps, conv, _ = upper_perron(m, orz.power(2), f)
        assert conv
        assert np.max(np.abs(up - 2.5)[m.active_mask]) <= 1e-12

    def test_linear_data(self, disk_mesh_16):
        m = disk_mesh_16
        f = m.interpolate(lambda x, y: x)
        up, _, conv, _ = upper_perron(m, orz.power(2), f)
        assert conv
        assert np.max(np.abs(up - f)[m.active_mask]) <= 1e-4

    def test_monotone_sweep_iterates(self, disk_mesh_16):
        # iterates from the constant max f never increase
        m = disk_mesh_16
        f = sin4(m)
        opts = PerronOptions(max_sweeps=1)
        u1, _, _, _ = upper_perron(m, orz.power(2), f, perron_opts=opts)
        u2, _, _, _ = upper_perron(m, orz.power(2), f,
                                   perron_opts=PerronOptions(max_sweeps=2))
        assert np.all(u2 <= u1 + 1e-12)

    def test_order_property(self, disk_mesh_16):
        m = disk_mesh_16
        f = sin4(m)
        g = f + 0.3
        uf, _, _, _ = upper_perron(m, orz.power(2), f)
        ug, _, _, _ = upper_perron(m, orz.power(2), g)
        assert np.max((uf - ug)[m.active_mask]) <= 1e-9

    def test_affine_shift_exact(self, disk_mesh_16):
        m = disk_mesh_16
        f = sin4(m)
        lam = 0.37
        u0, _, _, _ = upper_perron(m, orz.power(2), f)
        u1, _, _, _ = upper_perron(m, orz.power(2), f + lam)
        assert np.max(np.abs(u1 - u0 - lam)[m.active_mask]) <= 1e-10

    def test_positive_scaling_power_family(self, disk_mesh_16):
        m = disk_mesh_16
        f = sin4(m)
        lam = 2.0
        u0, _, _, _ = upper_perron(m, orz.power(2), f)
        u1, _, _, _ = upper_perron(m, orz.power(2), lam * f)
        assert np.max(np.abs(u1 - lam * u0)[m.active_mask]) <= 1e-4

    def test_lower_is_negated_upper(self, disk_mesh_16):
        m = disk_mesh_16
        f = sin4(m)
        lo, _, _, _ = lower_perron(m, orz.power(2), f)
        up_neg, _, _, _ = upper_perron(m, orz.power(2), -f)
        assert np.array_equal(lo, -up_neg)

    def test_resolutivity_gap_small(self, disk_mesh_16):
        m = disk_mesh_16
        pr = resolutivity_gap(m, orz.power(2), sin4(m))
        assert pr.converged
        assert np.max((pr.lower - pr.upper)[m.active_mask]) <= 1e-9
        assert pr.gap <= 0.01
        assert pr.ball_cover

    def test_sobolev_agreement(self, annulus_mesh_16):
        m = annulus_mesh_16
        r = np.hypot(m.nodes[:, 0], m.nodes[:, 1])
        f = np.where(r <= 1.5, 1.0, 0.0)
        agreement = sobolev_agreement(m, orz.power(2), f)
        assert agreement <= 0.01

    def test_restriction_audit(self, disk_mesh_16):
        m = disk_mesh_16
        err = restriction_audit(m, orz.power(2), sin4(m), (0.3, 0.0), 0.5)
        assert err <= 0.01

    def test_nonlinear_family_gap(self, disk_mesh_16):
        m = disk_mesh_16
        phi = orz.double_phase(2, 3, orz.const_field(0.5))
        pr = resolutivity_gap(m, phi, sin4(m))
        assert pr.gap <= 0.02

    def test_regular_vs_puncture_boundary_behavior(self):
        # at a regular boundary point the sweep limit attains the data;
        # at a puncture it stays near the outer data instead
        disk = orz.ball_domain(0, 0, 1)
        m = orz.build_mesh(disk, 1 / 32)
        f = m.interpolate(lambda x, y: 1 - np.hypot(x - 1, y))  # f(x0)=1 at (1,0)
        up, _, _, _ = upper_perron(m, orz.power(2), f)
        near = m.nodes_within((1.0, 0.0), 0.1) & m.free_mask
        assert np.min(up[near]) >= 1 - 0.25

        # at the puncture the data value 1 is not attained nearby, and the
        # neighborhood value sinks toward the outer data under refinement
        shell_values = {}
        for h in (1 / 16, 1 / 32):
            pd = orz.punctured_ball_domain(0, 0, 1)
            mp = orz.build_mesh(pd, h)
            fp = np.zeros(mp.n_nodes)
            fp[mp.node_class == 4] = 1.0   # 1 at the puncture, 0 on the circle
            upp, _, _, _ = upper_perron(mp, orz.power(2), fp)
            r = np.hypot(mp.nodes[:, 0], mp.nodes[:, 1])
            shell = (r >= 0.15) & (r <= 0.25) & mp.free_mask
            shell_values[h] = float(np.max(upp[shell]))
        assert shell_values[1 / 32] <= 0.6
        assert shell_values[1 / 32] < shell_values[1 / 16]
        assert 1.0 - shell_values[1 / 32] >= 0.4   # data value never approached
