import dataclasses

import numpy as np
import pytest

import orlicz_regularity as orz
from orlicz_regularity.errors import GeometryError, RefinementError
from orlicz_regularity.mesh import (
    BOUNDARY,
    EXCLUDED,
    INTERIOR,
    PUNCTURE,
    SLIT,
    ball_complement_intersection,
    build_mesh,
    complement_mask,
)


class TestBuildAndClassify:
    def test_unit_disk_coarse(self):
        mesh = build_mesh(orz.ball_domain(0, 0, 1), 0.5)
        counts = np.bincount(mesh.node_class, minlength=5)
        assert counts[INTERIOR] >= 9
        # enumeration oracle: nodes with |x| < 1 - h/2 on the 5x5 grid
        inner = 0
        for i in range(5):
            for j in range(5):
                x, y = -1 + 0.5 * i, -1 + 0.5 * j
                if np.hypot(x, y) < 1 - 0.25:
                    inner += 1
        assert counts[INTERIOR] == inner == 9

    def test_unit_square_quarter(self):
        mesh = build_mesh(orz.rect_domain(0, 0, 1, 1), 0.25)
        counts = np.bincount(mesh.node_class, minlength=5)
        assert counts[BOUNDARY] == 16
        assert counts[INTERIOR] == 9
        assert mesh.n_triangles == 32

    def test_annulus_excluded_core(self):
        h = 0.25
        mesh = build_mesh(orz.annulus_domain(0, 0, 1, 2), h)
        r = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
        # enumeration oracle per node
        expect_excluded = (r < 1 - h / 2) | (r > 2 + h / 2)
        expect_boundary = (np.abs(r - 1) <= h / 2) | (np.abs(r - 2) <= h / 2)
        agree = (mesh.node_class == EXCLUDED) == expect_excluded
        # promotion may flip a few excluded corners to boundary; only that way
        flipped = np.flatnonzero(~agree)
        assert all(mesh.node_class[i] == BOUNDARY and expect_excluded[i] for i in flipped)
        assert np.all(mesh.node_class[expect_boundary] == BOUNDARY)

    def test_empty_domain_errors(self):
        sliver = orz.Domain(
            region=orz.domain.Intersection(
                (orz.Ball(0, 0, 1), orz.Ball(1.995, 0, 1))
            )
        )
        with pytest.raises(RefinementError):
            build_mesh(sliver, 0.25)

    def test_too_coarse_for_feature(self):
        with pytest.raises(RefinementError):
            build_mesh(orz.ball_domain(0, 0, 0.4), 0.25)

    def test_puncture_single_node(self):
        mesh = build_mesh(orz.punctured_ball_domain(0, 0, 1), 0.125)
        assert np.count_nonzero(mesh.node_class == PUNCTURE) == 1
        idx = int(np.flatnonzero(mesh.node_class == PUNCTURE)[0])
        assert np.allclose(mesh.nodes[idx], [0, 0])

    def test_slit_nodes_collinear(self):
        h = 1 / 16
        domain = orz.slit_rect_domain(0, 0, 1, 1, orz.Segment(0.5, 0.5, 1.0, 0.5))
        mesh = build_mesh(domain, h)
        slit_nodes = mesh.nodes[mesh.node_class == SLIT]
        assert len(slit_nodes) > 0
        assert np.all(np.abs(slit_nodes[:, 1] - 0.5) <= h / 2)
        inside = (slit_nodes[:, 0] >= 0.5 - h / 2) & (slit_nodes[:, 0] <= 1.0)
        assert np.all(inside)

    def test_interior_never_touches_excluded(self):
        for domain in (
            orz.ball_domain(0, 0, 1),
            orz.annulus_domain(0, 0, 1, 2),
        ):
            mesh = build_mesh(domain, 1 / 8)
            tri_classes = mesh.node_class[mesh.triangles]
            assert not (
                (tri_classes == INTERIOR).any(axis=1)
                & (tri_classes == EXCLUDED).any(axis=1)
            ).any()

    def test_marked_point_alignment(self):
        aligned = dataclasses.replace(orz.ball_domain(0, 0, 1), marked_point=(1.0, 0.0))
        build_mesh(aligned, 1 / 8)
        off = dataclasses.replace(orz.ball_domain(0, 0, 1), marked_point=(0.5, 0.5))
        with pytest.raises(GeometryError):
            build_mesh(off, 1 / 8)


class TestDeterminismAndRefinement:
    def test_bit_identical_rebuild(self):
        a = build_mesh(orz.annulus_domain(0, 0, 1, 2), 1 / 8)
        b = build_mesh(orz.annulus_domain(0, 0, 1, 2), 1 / 8)
        assert np.array_equal(a.nodes, b.nodes)
        assert np.array_equal(a.node_class, b.node_class)
        assert np.array_equal(a.triangles, b.triangles)

    def test_boundary_hausdorff_under_refinement(self):
        h = 1 / 8
        coarse = build_mesh(orz.ball_domain(0, 0, 1), h)
        fine = build_mesh(orz.ball_domain(0, 0, 1), h / 2)
        bc = coarse.nodes[coarse.node_class == BOUNDARY]
        bf = fine.nodes[fine.node_class == BOUNDARY]
        d1 = max(np.min(np.hypot(*(bc[:, None, :] - bf[None, :, :]).transpose(2, 0, 1)), axis=1).max(), 0)
        d2 = max(np.min(np.hypot(*(bf[:, None, :] - bc[None, :, :]).transpose(2, 0, 1)), axis=1).max(), 0)
        assert max(d1, d2) <= h + 1e-12

    def test_node_count_guard(self):
        with pytest.raises(RefinementError):
            build_mesh(orz.ball_domain(0, 0, 1), 1e-4)


class TestComplementSets:
    def setup_method(self):
        self.domain = dataclasses.replace(
            orz.ball_domain(0, 0, 1),
            bounding_box=orz.Rect(-3, -3, 3, 3),
            marked_point=(1.0, 0.0),
        )

    def test_lens_outside_disk(self):
        mesh, K = ball_complement_intersection(self.domain, (1.0, 0.0), 0.1, 0.1 / 16)
        assert K.any()
        r = np.hypot(mesh.nodes[K][:, 0], mesh.nodes[K][:, 1])
        assert np.all(r >= 1 - 0.1 / 16)

    def test_empty_when_ball_inside(self):
        inner = dataclasses.replace(orz.ball_domain(0, 0, 1), bounding_box=orz.Rect(-2, -2, 2, 2))
        mesh, K = ball_complement_intersection(inner, (0.0, 0.0), 0.1, 0.1 / 8)
        assert not K.any()

    def test_puncture_complement_single_node(self):
        domain = dataclasses.replace(
            orz.punctured_ball_domain(0, 0, 1), bounding_box=orz.Rect(-2, -2, 2, 2)
        )
        mesh, K = ball_complement_intersection(domain, (0.0, 0.0), 0.2, 0.2 / 8)
        assert np.count_nonzero(K) == 1

    def test_monotone_in_t_on_fixed_mesh(self):
        mesh, _ = ball_complement_intersection(self.domain, (1.0, 0.0), 0.2, 0.2 / 16)
        h = 0.2 / 16
        base = complement_mask(self.domain, mesh.nodes, h) & mesh.active_mask
        K1 = base & mesh.nodes_within((1.0, 0.0), 0.1, closed_slack=h / 2)
        K2 = base & mesh.nodes_within((1.0, 0.0), 0.2, closed_slack=h / 2)
        assert np.all(K2[K1])

    def test_escaping_bounding_box(self):
        with pytest.raises(GeometryError):
            ball_complement_intersection(self.domain, (1.0, 0.0), 2.0, 0.05)


class TestDomainSpec:
    def test_round_trip(self):
        for text in (
            "ball(0, 0, 2)",
            "diff(ball(0, 0, 2), ball(0, 0, 1))",
            "diff(ball(0, 0, 1), point(0, 0))",
            "diff(rect(0, 0, 1, 1), segment(0.5, 0.5, 1, 0.5))",
            "inter(ball(0, 0, 2), halfplane(1, 0, 0))",
        ):
            dom = orz.parse_domain(text)
            again = orz.parse_domain(dom.spec_string())
            assert again.spec_string() == dom.spec_string()

    def test_mesh_csv_dump(self, tmp_path):
        mesh = build_mesh(orz.rect_domain(0, 0, 1, 1), 0.25)
        nodes = tmp_path / "nodes.csv"
        tris = tmp_path / "tris.csv"
        mesh.dump_csv(nodes, tris)
        assert nodes.read_text().startswith("node,x,y,class")
        assert len(tris.read_text().splitlines()) == mesh.n_triangles + 1
