import numpy as np
import pytest
from scipy.optimize import brentq, minimize_scalar

import orlicz_regularity as orz
from orlicz_regularity.errors import DomainError, GeometryError

X = np.array([0.3, -0.4])
BOX = orz.Rect(-1, -1, 1, 1)


def sample_points(rng, n):
    return rng.uniform(-1, 1, size=(n, 2))


class TestEvaluations:
    def test_power_values(self):
        p2 = orz.power(2)
        assert p2.G(X, 3.0) == 9.0
        assert p2.G(X, 0.0) == 0.0
        assert p2.g(X, 3.0) == 6.0
        assert orz.power(4).g(X, 1.0) == 4.0
        assert p2.g_inverse(X, 6.0) == pytest.approx(3.0, rel=1e-14)
        assert p2.g_inverse(X, 0.0) == 0.0
        assert p2.conjugate(X, 2.0) == pytest.approx(1.0, rel=1e-12)
        assert p2.conjugate(X, 0.0) == 0.0

    def test_double_phase_values(self):
        dp = orz.double_phase(2, 3, orz.const_field(1.0))
        assert dp.G(X, 2.0) == 12.0
        assert dp.g(X, 2.0) == 16.0
        # oracle: invert t -> 2t + 3t^2 at s = 16 by root finding
        root = brentq(lambda t: 2 * t + 3 * t * t - 16.0, 0.0, 10.0)
        assert root == pytest.approx(2.0, rel=1e-12)
        assert dp.g_inverse(X, 16.0) == pytest.approx(root, rel=1e-9)

    def test_power3_conjugate_grid_oracle(self):
        p3 = orz.power(3)
        s = 3.0
        t_grid = np.linspace(0.0, 5.0, 2_000_001)
        oracle = float(np.max(s * t_grid - t_grid**3))
        assert oracle == pytest.approx(2.0, abs=1e-8)
        assert p3.conjugate(X, s) == pytest.approx(oracle, rel=1e-7)

    def test_domain_errors(self):
        p2 = orz.power(2)
        with pytest.raises(DomainError):
            p2.G(X, -1.0)
        with pytest.raises(DomainError):
            p2.g_inverse(X, np.nan)
        with pytest.raises(DomainError):
            p2.g(X, np.inf)
        boxed = p2.with_bbox(BOX)
        with pytest.raises(GeometryError):
            boxed.G(np.array([5.0, 0.0]), 1.0)

    def test_invalid_families(self):
        with pytest.raises(DomainError):
            orz.power(1.0)
        with pytest.raises(Exception):
            orz.double_phase(3, 2, orz.const_field(1.0))


class TestStructuralConstants:
    def test_power_exact(self):
        g0, gs = orz.estimate_sc_constants(orz.power(3), BOX)
        assert g0 == pytest.approx(3.0, abs=1e-12)
        assert gs == pytest.approx(3.0, abs=1e-12)

    def test_double_phase_limits(self):
        dp = orz.double_phase(2, 3, orz.const_field(1.0))
        g0, gs = orz.estimate_sc_constants(dp, BOX)
        assert g0 == pytest.approx(2.0, abs=1e-3)
        assert gs == pytest.approx(3.0, abs=1e-3)
        assert dp.sc_constants(BOX) == (2.0, 3.0)

    def test_orlicz_log_vs_1d_maximization_oracle(self):
        ol = orz.orlicz_log(2)
        # oracle: maximize t*g/G - p = t / ((e+t) log(e+t)) over t
        res = minimize_scalar(
            lambda u: -np.exp(u) / ((np.e + np.exp(u)) * np.log(np.e + np.exp(u))),
            bounds=(-18, 18), method="bounded",
        )
        bump = -res.fun
        g0, gs = orz.estimate_sc_constants(ol, BOX)
        assert g0 == pytest.approx(2.0, abs=1e-6)
        assert gs == pytest.approx(2.0 + bump, abs=1e-3)
        assert 2.0 < gs < 3.0
        cert = ol.sc_constants()
        assert cert[0] == 2.0 and cert[1] == pytest.approx(2.0 + bump, abs=1e-9)

    def test_a0_constants(self):
        assert orz.power(2).a0_constant(BOX) == 1.0
        dp = orz.double_phase(2, 3, orz.const_field(1.0))
        assert dp.a0_constant(BOX) == pytest.approx(2.0, rel=1e-12)

    def test_sampling_span_guard(self):
        with pytest.raises(Exception):
            orz.estimate_sc_constants(orz.power(2), BOX, t_lo=1e-3, t_hi=1e3)


class TestInequalities:
    N = 10_000

    @pytest.fixture(autouse=True)
    def _rng(self):
        self.rng = np.random.default_rng(20240817)

    def _samples(self, phi):
        x = sample_points(self.rng, self.N)
        t = 10.0 ** self.rng.uniform(-4, 3, self.N)
        s = 10.0 ** self.rng.uniform(-4, 3, self.N)
        return x, t, s

    def test_young_inequality(self, family_zoo):
        for name, phi in family_zoo.items():
            x, t, s = self._samples(phi)
            lhs = s * t
            rhs = phi.G(x, t) + phi.conjugate(x, s) + 1e-10 * (1 + s * t)
            assert np.all(lhs <= rhs), name

    def test_young_equality_at_density(self, family_zoo):
        for name, phi in family_zoo.items():
            x, t, _ = self._samples(phi)
            gv = phi.g(x, t)
            lhs = np.abs(t * gv - phi.G(x, t) - phi.conjugate(x, gv))
            assert np.all(lhs <= 1e-8 * (1 + t * gv)), name

    def test_density_cross_inequality(self, family_zoo):
        # g(x,a) b <= g(x,a) a + g(x,b) b
        for name, phi in family_zoo.items():
            x, a, b = self._samples(phi)
            ga, gb = phi.g(x, a), phi.g(x, b)
            assert np.all(ga * b <= ga * a + gb * b + 1e-12 * (1 + ga * b)), name

    def test_scaling_up(self, family_zoo):
        for name, phi in family_zoo.items():
            x, t, _ = self._samples(phi)
            sigma = 10.0 ** self.rng.uniform(0, 2, self.N)
            g0, gs = phi.sc_constants(BOX)
            G = phi.G(x, t)
            Gs = phi.G(x, sigma * t)
            slack = 1e-10 * (1 + Gs)
            assert np.all(sigma**g0 * G <= Gs + slack), name
            assert np.all(Gs <= sigma**gs * G + 1e-10 * (1 + sigma**gs * G)), name

    def test_scaling_down(self, family_zoo):
        for name, phi in family_zoo.items():
            x, t, _ = self._samples(phi)
            sigma = 10.0 ** self.rng.uniform(-2, 0, self.N)
            g0, gs = phi.sc_constants(BOX)
            G = phi.G(x, t)
            Gs = phi.G(x, sigma * t)
            assert np.all(sigma**gs * G <= Gs + 1e-10 * (1 + Gs)), name
            assert np.all(Gs <= sigma**g0 * G + 1e-10 * (1 + sigma**g0 * G)), name

    def test_conjugate_structural_bounds(self, family_zoo):
        # g_sup/(g_sup-1) <= t g^{-1}(x,t) / G*(x,t) <= g0/(g0-1)
        for name, phi in family_zoo.items():
            x, t, _ = self._samples(phi)
            g0, gs = phi.sc_constants(BOX)
            ratio = t * phi.g_inverse(x, t) / np.maximum(phi.conjugate(x, t), 1e-300)
            assert np.all(ratio >= gs / (gs - 1) - 1e-6), name
            assert np.all(ratio <= g0 / (g0 - 1) + 1e-6), name

    def test_conjugate_of_density_bound(self, family_zoo):
        # G*(x, g(x,t)) <= (g_sup - 1) G(x,t)
        for name, phi in family_zoo.items():
            x, t, _ = self._samples(phi)
            _, gs = phi.sc_constants(BOX)
            lhs = phi.conjugate(x, phi.g(x, t))
            rhs = (gs - 1) * phi.G(x, t)
            assert np.all(lhs <= rhs * (1 + 1e-9) + 1e-12), name

    def test_generalized_inverse_sandwich(self, family_zoo):
        for name, phi in family_zoo.items():
            x, t, s = self._samples(phi)
            gi = phi.g_inverse(x, s)
            assert np.all(phi.g(x, gi) <= s * (1 + 1e-9) + 1e-12), name
            assert np.all(phi.g_inverse(x, phi.g(x, t)) >= t * (1 - 1e-9)), name

    def test_midpoint_convexity_and_monotonicity(self, family_zoo):
        for name, phi in family_zoo.items():
            x, t, s = self._samples(phi)
            mid = phi.G(x, (s + t) / 2)
            avg = (phi.G(x, s) + phi.G(x, t)) / 2
            assert np.all(mid <= avg * (1 + 1e-12) + 1e-300), name
            lo, hi = np.minimum(s, t), np.maximum(s, t)
            assert np.all(phi.G(x, lo) <= phi.G(x, hi) + 1e-300), name


class TestConditionChecker:
    def test_power_ratio_one(self):
        report = orz.check_conditions(orz.power(3), BOX, [0.5, 0.25])
        for row in report.rows:
            assert row.sup_ratio == pytest.approx(1.0, abs=1e-12)
        assert report.verdict("A1") and report.verdict("A1n") and report.verdict("A0")

    def test_double_phase_alpha_threshold(self):
        radii = [0.5, 0.25, 0.125, 0.0625]
        sups = {}
        for alpha in (0.25, 2.0):
            phi = orz.double_phase(2, 3, orz.powmax_field(alpha))
            report = orz.check_conditions(phi, BOX, radii, threshold=8.0)
            sups[alpha] = max(r.sup_ratio for r in report.rows if r.condition == "A1n")
            if alpha == 0.25:
                assert not report.verdict("A1n")
            else:
                assert report.verdict("A1n")
        assert sups[2.0] < sups[0.25]

    def test_varexp_transition_finite(self):
        phi = orz.variable_exponent(orz.step_field(2, 3, edge=0.0, width=0.5))
        report = orz.check_conditions(phi, BOX, [0.5])
        sup = max(r.sup_ratio for r in report.rows)
        assert np.isfinite(sup)

    def test_report_serializes(self):
        report = orz.check_conditions(orz.power(2), BOX, [0.5])
        doc = report.to_json_dict()
        assert doc["verdicts"]["A1"] is True
        assert {"condition", "radius", "window", "sup_ratio", "threshold", "verdict"} \
            <= set(doc["rows"][0].keys())


class TestSpecParsing:
    def test_round_trip(self):
        for text in (
            "power(p=2)",
            "varexp(p=step(lo=2, hi=3, edge=0, width=0.5))",
            "doublephase(p=2, q=3, a=powmax(alpha=1.5))",
            "orliczlog(p=2)",
            "powerlog(p=const(2.5))",
        ):
            phi = orz.parse_phi(text)
            again = orz.parse_phi(phi.spec_string())
            assert again.spec_string() == phi.spec_string()

    def test_bad_specs(self):
        for text in ("power()", "nosuch(p=2)", "power(p=2) extra"):
            with pytest.raises(Exception):
                orz.parse_phi(text)
