import numpy as np
import pytest

from ergotor import (
    FinitePermutation,
    InvalidInputError,
    TorusPoint,
    apply_permutation,
    flow,
    flow_many,
    generate,
    tychonoff_distance,
    wrap_fractional,
)


def circular_gap(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b))
    return np.minimum(d, 1.0 - d)


class TestWrapFractional:
    def test_basic(self):
        assert np.allclose(wrap_fractional([1.25, -0.25]).coords, [0.25, 0.75])

    def test_identity(self):
        assert np.allclose(wrap_fractional([0.0, 0.0, 0.0]).coords, [0.0, 0.0, 0.0])

    def test_integers_wrap_to_zero(self):
        assert np.allclose(wrap_fractional([2.0, 3.0]).coords, [0.0, 0.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            wrap_fractional([0.5, np.inf])
        with pytest.raises(InvalidInputError):
            wrap_fractional([np.nan])

    def test_range_property(self):
        rng = np.random.default_rng(101)
        xs = rng.normal(scale=1e3, size=(200, 3))
        # adversarial: values a hair below an integer can round {x} up to 1.0
        xs[0] = [-1e-20, 2 - 1e-16, np.nextafter(5.0, 0.0)]
        for row in xs:
            coords = wrap_fractional(row).coords
            assert np.all(coords >= 0.0) and np.all(coords < 1.0)


class TestTorusPoint:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            TorusPoint([1.0])
        with pytest.raises(InvalidInputError):
            TorusPoint([-0.1])
        with pytest.raises(InvalidInputError):
            TorusPoint([])

    def test_immutability(self):
        p = TorusPoint([0.5, 0.25])
        with pytest.raises(ValueError):
            p.coords[0] = 0.9

    def test_equality(self):
        assert TorusPoint([0.5]) == TorusPoint([0.5])
        assert TorusPoint([0.5]) != TorusPoint([0.5, 0.0])


class TestFlow:
    def test_sqrt2_step(self):
        lam = generate("explicit", 2, [1.0, 2**0.5])
        out = flow(TorusPoint.zero(2), 1.0, lam)
        assert np.allclose(out.coords, [0.0, 2**0.5 - 1.0])

    def test_zero_time_is_identity(self):
        lam = generate("explicit", 1, [1.0])
        u = TorusPoint([0.3])
        assert flow(u, 0.0, lam) == u

    def test_wraparound(self):
        lam = generate("explicit", 1, [1.0])
        assert np.allclose(flow(TorusPoint([0.9]), 0.2, lam).coords, [0.1])

    def test_dimension_mismatch(self):
        lam = generate("explicit", 1, [1.0])
        with pytest.raises(InvalidInputError):
            flow(TorusPoint([0.1, 0.2]), 1.0, lam)

    def test_semigroup_property(self):
        lam = generate("sqrt_squarefree", 3)
        rng = np.random.default_rng(7)
        for _ in range(100):
            u = TorusPoint(rng.random(3))
            s, t = 100.0 * rng.random(2)
            left = flow(flow(u, s, lam), t, lam)
            right = flow(u, s + t, lam)
            # wraparound can land the two sides on opposite ends of [0,1)
            assert np.all(circular_gap(left.coords, right.coords) < 1e-12)

    def test_flow_many_matches_flow(self):
        lam = generate("log_primes", 2)
        u = TorusPoint([0.2, 0.8])
        times = np.linspace(0.0, 9.0, 13)
        batch = flow_many(u, times, lam)
        for k, t in enumerate(times):
            assert np.allclose(batch[k], flow(u, t, lam).coords)


class TestTychonoffDistance:
    def test_identity(self):
        p = TorusPoint([0.3, 0.4])
        assert tychonoff_distance(p, p) == 0.0

    def test_first_coordinate_weight(self):
        assert tychonoff_distance(TorusPoint([0.5, 0.0]), TorusPoint.zero(2)) == pytest.approx(0.5)

    def test_second_coordinate_weight(self):
        d = tychonoff_distance(TorusPoint([0.0, 0.5]), TorusPoint.zero(2))
        assert d == pytest.approx(0.5 * np.exp(-1.0))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            tychonoff_distance(TorusPoint([0.1]), TorusPoint([0.1, 0.2]))

    def test_metric_axioms(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            a, b, c = (TorusPoint(rng.random(4)) for _ in range(3))
            dab = tychonoff_distance(a, b)
            assert dab == pytest.approx(tychonoff_distance(b, a))
            assert dab >= 0.0
            assert tychonoff_distance(a, c) <= dab + tychonoff_distance(b, c) + 1e-15
        p = TorusPoint([0.1, 0.2])
        q = TorusPoint([0.1, 0.2000001])
        assert tychonoff_distance(p, q) > 0.0


class TestFinitePermutation:
    def test_swap(self):
        sigma = FinitePermutation.transposition(1, 2, 3)
        out = apply_permutation(sigma, TorusPoint([0.1, 0.2, 0.3]))
        assert np.allclose(out.coords, [0.2, 0.1, 0.3])

    def test_identity(self):
        sigma = FinitePermutation.identity(2)
        p = TorusPoint([0.4, 0.6])
        assert apply_permutation(sigma, p) == p

    def test_three_cycle_order(self):
        # sigma: 1 -> 2 -> 3 -> 1, i.e. sigma(1)=2, sigma(2)=3, sigma(3)=1
        sigma = FinitePermutation((2, 3, 1))
        p = TorusPoint([0.1, 0.2, 0.3])
        once = apply_permutation(sigma, p)
        assert np.allclose(once.coords, [0.2, 0.3, 0.1])
        thrice = apply_permutation(sigma, apply_permutation(sigma, once))
        assert thrice == p

    def test_not_a_bijection(self):
        with pytest.raises(InvalidInputError):
            FinitePermutation((1, 1, 3))

    def test_support_exceeds_dimension(self):
        sigma = FinitePermutation.identity(3)
        with pytest.raises(InvalidInputError):
            apply_permutation(sigma, TorusPoint([0.1, 0.2]))

    def test_inverse_restores(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            images = rng.permutation(5) + 1
            sigma = FinitePermutation(tuple(int(v) for v in images))
            p = TorusPoint(rng.random(7))
            assert apply_permutation(sigma.inverse(), apply_permutation(sigma, p)) == p

    def test_preserves_multiset(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            images = rng.permutation(6) + 1
            sigma = FinitePermutation(tuple(int(v) for v in images))
            p = TorusPoint(rng.random(6))
            out = apply_permutation(sigma, p)
            assert sorted(out.coords) == sorted(p.coords)
