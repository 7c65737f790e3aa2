"""Koopman eigenfunctions built from certified periodic base points."""

import cmath
import itertools
import math

import pytest

from equidyn import (
    Alphabet,
    BernoulliMeasure,
    Configuration,
    InsufficientRadius,
    Odometer,
    OverlappingBalls,
    ProductMeasure,
    Shift,
    build_eigenfunction,
    eigenfunction_eval,
    identity_rule,
    inner_product,
    koopman_residual,
    root_of_unity,
)
from equidyn.spectral import event_table

A2 = Alphabet(2)


@pytest.mark.parametrize("p", list(range(1, 65)))
def test_root_of_unity_sum_identity(p):
    """sum_j lambda^{jk} is p for k = 0 mod p and 0 otherwise."""
    for k in (0, 1, p - 1, p):
        total = sum(root_of_unity(p, j * k) for j in range(p))
        want = p if k % p == 0 else 0
        assert abs(total - want) <= 1e-12


def test_root_of_unity_basics():
    assert root_of_unity(1, 0) == 1
    assert abs(root_of_unity(4, 1) - 1j) <= 1e-15
    assert abs(root_of_unity(2, 1) + 1) <= 1e-15


def dyadic_point(word):
    return Configuration(Alphabet(2), "one", word)


class TestBuild:
    def test_requires_certificate(self):
        sh = Shift(A2)
        y = dyadic_point((0, 1, 1, 0, 1, 0, 0, 1, 1))
        with pytest.raises(ValueError, match="certificate"):
            build_eigenfunction(sh, y, 0, 0, 8)

    def test_rejects_eventually_periodic_base(self):
        sh = Shift(A2)
        y = dyadic_point((1, 1, 0, 1, 0, 1, 0, 1, 0))
        with pytest.raises(ValueError, match="preperiod"):
            build_eigenfunction(sh, y, 0, 0, 8)

    def test_rejects_index_out_of_range(self):
        od = Odometer((2,))
        y = Configuration(od.alphabet, "one", (0, 0, 0))
        with pytest.raises(ValueError):
            build_eigenfunction(od, y, 0, 2, 4)

    def test_eigenvalue_exponent(self):
        od = Odometer((2, 2))
        y = Configuration(od.alphabet, "one", (0, 0, 0))
        spec = build_eigenfunction(od, y, 1, 3, 8)
        assert spec.period == 4
        assert spec.eigenvalue_exponent() == (3, 4)
        assert abs(spec.eigenvalue() - cmath.exp(2j * cmath.pi * 3 / 4)) <= 1e-15


def test_dyadic_odometer_sign_function():
    """m = 0, k = 1 on the 2-adic odometer is the sign of the first digit."""
    od = Odometer((2,))
    y = Configuration(od.alphabet, "one", (0, 0, 0))
    spec = build_eigenfunction(od, y, 0, 1, 4)
    assert spec.period == 2
    assert eigenfunction_eval(spec, dyadic_point((0, 1, 1)), 3) == 1
    val = eigenfunction_eval(spec, dyadic_point((1, 1, 0)), 3)
    assert abs(val + 1) <= 1e-15


def test_eval_outside_support_is_zero():
    sh = Shift(A2)
    y = dyadic_point(tuple([0, 1] * 6))
    spec = build_eigenfunction(sh, y, 1, 1, 4)
    stray = dyadic_point((1, 1, 1, 1, 1, 1, 1, 1))
    assert eigenfunction_eval(spec, stray, 3) == 0j


def test_eval_requires_radius():
    od = Odometer((2,))
    y = Configuration(od.alphabet, "one", (0, 0, 0))
    spec = build_eigenfunction(od, y, 2, 1, 16)
    with pytest.raises(InsufficientRadius):
        eigenfunction_eval(spec, dyadic_point((0,)), 2)


@pytest.mark.parametrize("sizes,m", [
    ((2,), 0), ((2,), 1), ((2,), 2), ((2,), 3),
    ((2, 3), 0), ((2, 3), 1), ((2, 3), 2),
    ((3, 3), 0), ((3, 3), 1),
])
def test_odometer_residual_and_norm(sizes, m):
    """Residual vanishes and <f_k, f_k> = 1 for odometer eigenfunctions."""
    od = Odometer(sizes)
    mu = ProductMeasure(sizes)
    p = od.window_period(m)
    y = Configuration(od.alphabet, "one", (0,) * (m + 1))
    spec = build_eigenfunction(od, y, m, 1 % p, 2 * p)
    horizon = 3
    assert koopman_residual(spec, mu, horizon, mode="exact") <= 1e-12
    norm_sq = inner_product(spec, spec, mu, horizon, mode="exact")
    assert abs(norm_sq - 1) <= 1e-12


def test_distinct_indices_are_orthogonal():
    od = Odometer((2, 3))
    mu = ProductMeasure((2, 3))
    y = Configuration(od.alphabet, "one", (0, 0))
    specs = [build_eigenfunction(od, y, 1, k, 12) for k in range(6)]
    for a, b in itertools.combinations(specs, 2):
        assert abs(inner_product(a, b, mu, 2, mode="exact")) <= 1e-12


def test_partition_of_unity():
    """k = 0 gives the constant 1: the orbit balls tile the window exactly."""
    od = Odometer((2, 2))
    y = Configuration(od.alphabet, "one", (0, 0, 0, 0))
    spec = build_eigenfunction(od, y, 1, 0, 8)
    tab = event_table(spec, 4)
    for word in itertools.product(range(2), repeat=tab.rho + 1):
        assert tab.lookup_word(word) is not None
        x = Configuration(od.alphabet, "one", word)
        assert eigenfunction_eval(spec, x, 4, table=tab) == 1


def test_shift_residual_matches_independent_enumeration():
    """Nonzero residual for the shift, checked against a from-scratch sum."""
    sh = Shift(A2)
    y = dyadic_point(tuple([0, 1] * 8))
    m, horizon, k = 1, 4, 1
    spec = build_eigenfunction(sh, y, m, k, 4)
    got = koopman_residual(spec, BernoulliMeasure([0.5, 0.5]), horizon, mode="exact")

    # oracle: for the shift, membership in the j-th orbit ball is prefix
    # agreement with y shifted by j, through index m + horizon
    lam = cmath.exp(2j * cmath.pi * k / spec.period)
    prefix = {0: (0, 1, 0, 1, 0, 1), 1: (1, 0, 1, 0, 1, 0)}

    def f(bits):
        for j, pre in prefix.items():
            if bits[: len(pre)] == pre:
                return lam ** (j * k)
        return 0j

    total = 0.0
    width = m + horizon + 2  # evaluation needs one step of slack
    for bits in itertools.product(range(2), repeat=width):
        defect = f(bits[1:]) - lam * f(bits)
        total += abs(defect) ** 2 * 2.0 ** -width
    want = math.sqrt(total)
    assert want == pytest.approx(math.sqrt(1 / 32), abs=1e-15)
    assert got == pytest.approx(want, abs=1e-12)


def test_overlapping_balls_detected():
    """A horizon too short to separate the orbit raises instead of lying."""
    sh = Shift(A2)
    y = dyadic_point(tuple(int(b) for b in "001000100010"))
    spec = build_eigenfunction(sh, y, 0, 1, 8)
    assert spec.period == 4
    with pytest.raises(OverlappingBalls):
        event_table(spec, 0)
    # one more step of trace is still not enough: (0,0) occurs twice
    with pytest.raises(OverlappingBalls):
        event_table(spec, 1)
    tab = event_table(spec, 3)
    # at horizon 3 each orbit ball pins the full prefix: one word per phase
    assert tab.index == {
        (0, 0, 1, 0): 0,
        (0, 1, 0, 0): 1,
        (1, 0, 0, 0): 2,
        (0, 0, 0, 1): 3,
    }


def test_inner_product_rejects_mixed_systems():
    od = Odometer((2,))
    y = Configuration(od.alphabet, "one", (0, 0, 0))
    a = build_eigenfunction(od, y, 0, 1, 4)
    b = build_eigenfunction(identity_rule(A2), dyadic_point((0, 0, 0)), 0, 0, 4)
    with pytest.raises(ValueError):
        inner_product(a, b, ProductMeasure((2,)), 2)


def test_sampled_mode_tracks_exact():
    od = Odometer((2, 3))
    mu = ProductMeasure((2, 3))
    y = Configuration(od.alphabet, "one", (0, 0))
    spec = build_eigenfunction(od, y, 1, 2, 12)
    exact = inner_product(spec, spec, mu, 2, mode="exact")
    sampled = inner_product(spec, spec, mu, 2, mode="sampled", n_samples=4000, seed=3)
    assert abs(sampled - exact) <= 0.05
    assert koopman_residual(spec, mu, 2, mode="sampled", n_samples=2000, seed=3) <= 1e-12
