"""Orbit balls, density ratios, and the equicontinuity report."""

import itertools
from fractions import Fraction

import pytest

from equidyn import (
    Alphabet,
    BernoulliMeasure,
    CirclePoint,
    Configuration,
    EnumerationTooLarge,
    LebesgueMeasure,
    NullBall,
    Odometer,
    ProductMeasure,
    Rotation,
    Shift,
    ball_cylinder,
    density_ratio_estimate,
    density_ratio_exact,
    eca_rule,
    equicontinuity_point_test,
    identity_rule,
    mu_equicontinuity_report,
    orbit_ball_event,
    orbit_ball_member,
)

A2 = Alphabet(2)
HALF = BernoulliMeasure([0.5, 0.5])


def ones_sided(word):
    return Configuration(A2, "one", word)


class TestOrbitBallEvent:
    def test_identity_event_is_the_ball(self):
        ident = identity_rule(A2)
        x = ones_sided((0, 1, 1))
        ev = orbit_ball_event(ident, x, 1, 5)
        assert ev.rho == 1
        assert ev.words == {(0, 1)}

    def test_shift_event_is_a_single_long_word(self):
        sh = Shift(A2)
        x = ones_sided((0, 1, 1, 0))
        ev = orbit_ball_event(sh, x, 1, 2)
        assert ev.rho == 3
        assert ev.words == {(0, 1, 1, 0)}

    def test_odometer_event_is_the_counter_window(self):
        od = Odometer((2, 3))
        x = Configuration(od.alphabet, "one", (1, 2))
        ev = orbit_ball_event(od, x, 1, 7)
        assert ev.rho == 1 and ev.words == {(1, 2)}

    def test_eca_event_contains_base(self):
        rule = eca_rule(90)
        x = Configuration(A2, "two", (0, 1, 1, 0, 1, 0, 0))
        ev = orbit_ball_event(rule, x, 1, 2)
        assert ev.contains_word(x.window(ev.rho))
        for w in ev.words:
            y = Configuration(A2, "two", w)
            assert orbit_ball_member(rule, x, y, 1, 2)

    def test_horizon_zero_is_the_plain_ball(self):
        rule = eca_rule(110)
        x = Configuration(A2, "two", (0, 1, 1))
        ev = orbit_ball_event(rule, x, 1, 0)
        ball = ball_cylinder(x, 1)
        assert ev.words == {ball.word}

    def test_nesting_in_horizon(self):
        rule = eca_rule(184)
        rho = 1 + 3
        word = tuple(int(b) for b in "011010001")
        x = Configuration(A2, "two", word)
        assert x.radius == rho
        prev = None
        for horizon in range(4):
            ev = orbit_ball_event(rule, x, 1, horizon)
            padded = set()
            for w in ev.words:
                pad = rho - ev.rho
                for left in itertools.product(range(2), repeat=pad):
                    for right in itertools.product(range(2), repeat=pad):
                        padded.add(left + w + right)
            if prev is not None:
                assert padded <= prev
            prev = padded

    def test_nesting_in_resolution(self):
        rule = eca_rule(90)
        x = Configuration(A2, "two", tuple(int(b) for b in "01101"))
        coarse = orbit_ball_event(rule, x, 0, 2)
        fine = orbit_ball_event(rule, x, 1, 1)
        # compare at the common radius 2 via membership
        for w in itertools.product(range(2), repeat=5):
            y = Configuration(A2, "two", w)
            if orbit_ball_member(rule, x, y, 1, 1) and coarse.rho <= 2:
                assert orbit_ball_member(rule, x, y, 0, 1)

    def test_cap_respected(self):
        sh = Shift(A2)
        x = ones_sided((0,) * 40)
        with pytest.raises(EnumerationTooLarge):
            orbit_ball_event(sh, x, 1, 38, cap=1000)


class TestExactRatio:
    def test_shift_pinned_value(self):
        x = ones_sided((0, 1, 0, 0, 1, 1, 0, 1))
        assert density_ratio_exact(Shift(A2), HALF, x, 1, 1, 2) == pytest.approx(
            0.25, abs=1e-15
        )

    @pytest.mark.parametrize("m,horizon", [(0, 1), (1, 2), (2, 3)])
    def test_shift_closed_form(self, m, horizon):
        """ratio = product of per-cell masses over W_{m+T} minus W_n."""
        mu = BernoulliMeasure([0.25, 0.75])
        word = (0, 1, 1, 0, 1, 0, 1, 1, 0, 1)
        x = ones_sided(word)
        for n in range(1, m + horizon + 1):
            got = density_ratio_exact(Shift(A2), mu, x, m, n, horizon)
            want = 1.0
            for i in range(n + 1, m + horizon + 1):
                want *= (0.25, 0.75)[word[i]]
            assert got == pytest.approx(want, rel=1e-12)

    def test_deep_ball_gives_one(self):
        x = ones_sided((0, 1, 0, 0, 1, 1))
        assert density_ratio_exact(Shift(A2), HALF, x, 1, 4, 2) == 1.0

    def test_identity_ratio_one_for_coarser_balls(self):
        ident = identity_rule(A2)
        x = ones_sided((0, 1, 1, 0))
        for n in (1, 2, 3):
            assert density_ratio_exact(ident, HALF, x, 1, n, 6) == (
                1.0 if n >= 1 else None
            )

    def test_odometer_ratio_one(self):
        od = Odometer((2, 3))
        mu = ProductMeasure((2, 3))
        x = Configuration(od.alphabet, "one", (1, 2, 0, 1))
        for n in (1, 2, 3):
            assert density_ratio_exact(od, mu, x, 1, n, 9) == 1.0

    def test_null_ball_rejected(self):
        mu = ProductMeasure((2, 3))
        od = Odometer((2, 3))
        x = Configuration(od.alphabet, "one", (0, 0, 2, 0))
        # digit 2 invalid at cell 0 when the window is W_2... build a real null ball
        bad = Configuration(od.alphabet, "one", (2, 0, 0, 0))
        with pytest.raises((NullBall, ValueError)):
            density_ratio_exact(od, mu, bad, 1, 2, 1)

    def test_rotation_analytic(self):
        rot = Rotation(Fraction(1, 3))
        leb = LebesgueMeasure()
        x = CirclePoint(Fraction(1, 7))
        assert density_ratio_exact(rot, leb, x, 4, 2, 5) == pytest.approx(0.5)
        assert density_ratio_exact(rot, leb, x, 2, 4, 5) == 1.0


class TestEstimate:
    def test_tracks_exact(self):
        rule = eca_rule(90)
        mu = HALF
        x = Configuration(A2, "two", (0, 1, 1, 0, 1, 0, 0))
        exact = density_ratio_exact(rule, mu, x, 1, 1, 2)
        est = density_ratio_estimate(rule, mu, x, 1, 1, 2, n_samples=8000, seed=13)
        assert est.n_samples == 8000
        assert abs(est.p_hat - exact) <= 4 * max(est.stderr, 1e-3)

    def test_seed_determinism(self):
        x = ones_sided((0, 1, 0, 0, 1, 1, 0, 1))
        a = density_ratio_estimate(Shift(A2), HALF, x, 1, 1, 3, n_samples=500, seed=4)
        b = density_ratio_estimate(Shift(A2), HALF, x, 1, 1, 3, n_samples=500, seed=4)
        c = density_ratio_estimate(Shift(A2), HALF, x, 1, 1, 3, n_samples=500, seed=5)
        assert a.p_hat == b.p_hat
        assert a.to_dict() == b.to_dict()
        assert a.p_hat != c.p_hat or a.seed != c.seed

    def test_certain_agreement_gives_zero_stderr(self):
        x = ones_sided((0, 1, 0, 0))
        est = density_ratio_estimate(Shift(A2), HALF, x, 1, 3, 2, n_samples=200, seed=1)
        assert est.p_hat == 1.0 and est.stderr == 0.0

    def test_rotation_arc_sampling(self):
        rot = Rotation(Fraction(1, 3))
        est = density_ratio_estimate(
            rot, LebesgueMeasure(), CirclePoint(Fraction(0)), 4, 2, 3,
            n_samples=20_000, seed=2,
        )
        assert abs(est.p_hat - 0.5) <= 4 * est.stderr


class TestPointTest:
    def test_identity_point_is_equicontinuous(self):
        ident = identity_rule(A2)
        x = ones_sided((0, 1, 1, 0))
        assert equicontinuity_point_test(ident, x, 1, 1, 8)
        assert equicontinuity_point_test(ident, x, 1, 2, 8)

    def test_shift_needs_depth(self):
        sh = Shift(A2)
        x = ones_sided((0, 1, 1, 0, 1, 0))
        assert not equicontinuity_point_test(sh, x, 1, 2, 2)
        assert equicontinuity_point_test(sh, x, 1, 3, 2)

    def test_rotation_rule(self):
        rot = Rotation(Fraction(1, 5))
        assert equicontinuity_point_test(rot, CirclePoint(Fraction(0)), 2, 3, 9)
        assert not equicontinuity_point_test(rot, CirclePoint(Fraction(0)), 3, 2, 9)


class TestReport:
    def test_shift_curve_closed_form(self):
        rep = mu_equicontinuity_report(
            Shift(A2), HALF, m=1, n_list=[1, 2, 3, 4], horizon=2,
            points=6, n_samples=300, seed=11,
        )
        assert all(c.exact for c in rep.curves)
        for curve in rep.curves:
            assert curve.ratios == (0.25, 0.5, 1.0, 1.0)
        assert rep.fraction == 1.0  # terminal ratio hits 1 at n = 3

    def test_odometer_fraction_one(self):
        od = Odometer((3, 3))
        rep = mu_equicontinuity_report(
            od, ProductMeasure((3, 3)), m=2, n_list=[2, 3], horizon=10,
            points=5, n_samples=100, seed=3,
        )
        assert rep.fraction == 1.0
        for curve in rep.curves:
            assert curve.ratios == (1.0, 1.0)

    def test_rotation_fraction_one(self):
        rot = Rotation(Fraction(1, 6))
        rep = mu_equicontinuity_report(
            rot, LebesgueMeasure(), m=3, n_list=[3, 5], horizon=4,
            points=8, n_samples=100, seed=5,
        )
        assert rep.fraction == 1.0

    def test_report_determinism_across_threads(self):
        kwargs = dict(m=1, n_list=[1, 2], horizon=3, points=8, n_samples=400, seed=9)
        a = mu_equicontinuity_report(Shift(A2), HALF, threads=1, **kwargs)
        b = mu_equicontinuity_report(Shift(A2), HALF, threads=8, **kwargs)
        assert a.to_dict() == b.to_dict()

    def test_n_list_sorted_and_deduped(self):
        rep = mu_equicontinuity_report(
            Shift(A2), HALF, m=0, n_list=[3, 1, 1, 2], horizon=1,
            points=2, n_samples=50, seed=0,
        )
        assert rep.n_list == (1, 2, 3)

    def test_monte_carlo_route_when_enumeration_too_big(self):
        """A large dependence window forces the sampled path; stderr shows it."""
        rep = mu_equicontinuity_report(
            Shift(A2), HALF, m=1, n_list=[1], horizon=30,
            points=2, n_samples=200, seed=1,
        )
        assert not rep.curves[0].exact
        assert rep.curves[0].stderrs is not None
