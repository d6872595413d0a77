import math

import numpy as np
import pytest

from ergotor import (
    BudgetError,
    FourierSeries,
    InvalidInputError,
    JordanRegion,
    MultiIndex,
    ResonanceError,
    TorusPoint,
    anchored_discrepancy,
    discrepancy_estimate,
    generate,
    occupation_measure,
    region_integral,
    restricted_time_average,
    time_average_analytic,
    weyl_sum,
)

E1 = MultiIndex.basis(1)
E2 = MultiIndex.basis(2)
LAM1 = generate("explicit", 1, [1.0])
LAM2 = generate("explicit", 2, [1.0, 2**0.5])
HALF_SQUARE = JordanRegion.box([[0.0, 0.5], [0.0, 0.5]])


def occupied_time_1d(u0, rate, a, b, T):
    """Independent closed form: clipped periodic interval lengths.

    Rescale to s = rate * t; per unit period the occupied s-set is the
    wrapped interval [a - u0, b - u0] (mod 1).
    """
    y = rate * T
    alpha = (a - u0) % 1.0
    beta = (b - u0) % 1.0
    full = math.floor(y) * (b - a)
    fy = y - math.floor(y)

    def overlap(lo, hi):
        return max(0.0, min(hi, fy) - lo) if lo < fy else 0.0

    if alpha <= beta:
        part = overlap(alpha, beta)
    else:
        part = overlap(0.0, beta) + overlap(alpha, 1.0)
    return (full + part) / rate


class TestJordanRegion:
    def test_interval_validation(self):
        with pytest.raises(InvalidInputError):
            JordanRegion.box([[0.7, 0.5]])
        with pytest.raises(InvalidInputError):
            JordanRegion.box([[-0.1, 0.5]])
        with pytest.raises(InvalidInputError):
            JordanRegion.box([])

    def test_box_volume(self):
        assert HALF_SQUARE.volume() == pytest.approx(0.25)

    def test_ball_cylinder_clipping(self):
        region = JordanRegion.ball_cylinder([0.05, 0.5], 0.1)
        assert region.intervals == ((0.0, 0.15000000000000002), (0.4, 0.6))
        assert region.volume() == pytest.approx(0.15000000000000002 * 0.2)

    def test_ball_validation(self):
        with pytest.raises(InvalidInputError):
            JordanRegion.ball_cylinder([0.5], 0.0)
        with pytest.raises(InvalidInputError):
            JordanRegion.ball_cylinder([1.5], 0.1)


class TestOccupationMeasure:
    def test_integer_periods(self):
        occ = occupation_measure(TorusPoint.zero(1), LAM1, JordanRegion.box([[0.0, 0.5]]), 10.0)
        assert occ.measure == pytest.approx(5.0, abs=1e-12)
        assert occ.ratio == pytest.approx(0.5, abs=1e-13)

    def test_kronecker_square(self):
        occ = occupation_measure(TorusPoint.zero(2), LAM2, HALF_SQUARE, 1e4)
        assert abs(occ.ratio - 0.25) < 0.02

    def test_full_cube_exact(self):
        region = JordanRegion.box([[0.0, 1.0], [0.0, 1.0]])
        occ = occupation_measure(TorusPoint.zero(2), LAM2, region, 7.3)
        assert occ.measure == 7.3
        assert occ.event_count == 0

    def test_against_1d_closed_form(self):
        rng = np.random.default_rng(79)
        for _ in range(100):
            u0 = float(rng.random())
            rate = float(0.3 + 3.0 * rng.random())
            a, b = sorted(rng.random(2))
            T = float(1.0 + 99.0 * rng.random())
            lam = generate("explicit", 1, [rate])
            got = occupation_measure(TorusPoint([u0]), lam, JordanRegion.box([[a, b]]), T)
            want = occupied_time_1d(u0, rate, float(a), float(b), T)
            assert abs(got.measure - want) < 1e-9 * T

    def test_invariants(self):
        occ = occupation_measure(TorusPoint([0.3, 0.6]), LAM2, HALF_SQUARE, 123.4)
        assert 0.0 <= occ.measure <= occ.T
        assert 0.0 <= occ.ratio <= 1.0

    def test_budget(self):
        with pytest.raises(BudgetError):
            occupation_measure(
                TorusPoint.zero(1), LAM1, JordanRegion.box([[0.0, 0.5]]), 1e4, event_budget=100
            )

    def test_dimension_checks(self):
        with pytest.raises(InvalidInputError):
            occupation_measure(TorusPoint.zero(1), LAM1, HALF_SQUARE, 1.0)


class TestRestrictedTimeAverage:
    def test_constant_equals_occupation_ratio(self):
        rng = np.random.default_rng(83)
        ones = FourierSeries({MultiIndex.zero(): 1.0})
        for _ in range(10):
            u = TorusPoint(rng.random(2))
            a, b = sorted(rng.random(2))
            region = JordanRegion.box([[float(a), float(b)]])
            T = float(5.0 + 50.0 * rng.random())
            avg = restricted_time_average(ones, u, LAM2, region, T)
            occ = occupation_measure(u, LAM2, region, T)
            assert avg.real == pytest.approx(occ.ratio, abs=1e-12)
            assert avg.imag == 0.0

    def test_full_cube_matches_unrestricted(self):
        region = JordanRegion.box([[0.0, 1.0], [0.0, 1.0]])
        f = FourierSeries({E1: 1.0, E2: 0.5j, MultiIndex.zero(): 0.3})
        u = TorusPoint([0.2, 0.7])
        left = restricted_time_average(f, u, LAM2, region, 37.7)
        right = time_average_analytic(f, u, LAM2, 37.7)
        assert left == pytest.approx(right, abs=1e-11)

    def test_converges_to_region_integral(self):
        f = FourierSeries({E1: 1.0})
        region = JordanRegion.box([[0.0, 0.5]])
        value = restricted_time_average(f, TorusPoint.zero(2), LAM2, region, 500.0)
        assert abs(value - region_integral(f, region)) < 0.02

    def test_callable_fallback_matches_series_path(self):
        f = FourierSeries({E1: 1.0, E2: -0.5j})
        region = JordanRegion.box([[0.1, 0.6]])
        u = TorusPoint([0.25, 0.5])
        exact = restricted_time_average(f, u, LAM2, region, 20.0)
        fallback = restricted_time_average(f.evaluate_many, u, LAM2, region, 20.0, tol=1e-11)
        assert fallback == pytest.approx(exact, abs=1e-9)

    def test_support_check(self):
        f = FourierSeries({MultiIndex({3: 1}): 1.0})
        with pytest.raises(InvalidInputError):
            restricted_time_average(f, TorusPoint.zero(2), LAM2, JordanRegion.box([[0.0, 0.5]]), 1.0)


class TestRegionIntegral:
    def test_volume(self):
        ones = FourierSeries({MultiIndex.zero(): 1.0})
        assert region_integral(ones, HALF_SQUARE) == pytest.approx(0.25)

    def test_half_interval_harmonic(self):
        f = FourierSeries({E1: 1.0})
        value = region_integral(f, JordanRegion.box([[0.0, 0.5]]))
        assert value == pytest.approx(1j / math.pi)

    def test_orthogonality_beyond_region(self):
        f = FourierSeries({E2: 1.0})
        assert region_integral(f, JordanRegion.box([[0.0, 0.5]])) == 0j

    def test_full_cube_is_space_average(self):
        rng = np.random.default_rng(89)
        f = FourierSeries(
            {
                MultiIndex.zero(): complex(rng.normal(), rng.normal()),
                E1: complex(rng.normal(), rng.normal()),
                MultiIndex({1: 2, 2: -1}): complex(rng.normal(), rng.normal()),
            }
        )
        region = JordanRegion.box([[0.0, 1.0], [0.0, 1.0]])
        assert region_integral(f, region) == pytest.approx(f.space_average(), abs=1e-15)


class TestWeylSum:
    def test_zero_index(self):
        assert weyl_sum(MultiIndex.zero(), TorusPoint.zero(1), LAM1, 12.0) == 1.0

    def test_full_period(self):
        assert abs(weyl_sum(E1, TorusPoint.zero(1), LAM1, 1.0)) < 1e-15

    def test_half_period(self):
        assert weyl_sum(E1, TorusPoint.zero(1), LAM1, 0.5) == pytest.approx(2j / math.pi)

    def test_modulus_bound(self):
        rng = np.random.default_rng(97)
        lam = generate("sqrt_squarefree", 2)
        for _ in range(50):
            m = MultiIndex({1: int(rng.integers(-3, 4)) or 1, 2: int(rng.integers(-3, 4))})
            u = TorusPoint(rng.random(2))
            T = float(0.5 + 50.0 * rng.random())
            value = weyl_sum(m, u, lam, T)
            assert abs(value) <= min(1.0, 1.0 / (math.pi * T * abs(m.dot(lam)))) + 1e-12

    def test_resonance(self):
        lam = generate("explicit", 2, [1.0, 2.0])
        with pytest.raises(ResonanceError):
            weyl_sum(MultiIndex({1: 2, 2: -1}), TorusPoint.zero(2), lam, 1.0)


class TestWeylOccupationConsistency:
    def test_box_indicator_expansion(self):
        # occupation ratio vs the truncated Fourier expansion of the box
        # indicator; the tail is controlled by |c_m| <= 1/(pi m) and
        # |W_m| <= 1/(pi T m lam_1)
        lam = generate("explicit", 2, [2**0.5, 3**0.5])
        u = TorusPoint([0.3, 0.1])
        a, b, T, M = 0.2, 0.7, 37.7, 40
        region = JordanRegion.box([[a, b]])
        ratio = occupation_measure(u, lam, region, T).ratio
        total = complex(b - a)
        for m in range(1, M + 1):
            for sign in (m, -m):
                c = (np.exp(-2j * np.pi * sign * a) - np.exp(-2j * np.pi * sign * b)) / (
                    2j * np.pi * sign
                )
                total += c * weyl_sum(MultiIndex.basis(1, sign), u, lam, T)
        tail_bound = 2.0 / (math.pi**2 * T * lam.values[0] * M)
        assert abs(total.imag) < 1e-12
        assert abs(ratio - total.real) <= tail_bound + 1e-12


class TestKroneckerConvergence:
    def test_error_ladder(self):
        errors = []
        for T in (10.0, 100.0, 1000.0, 10000.0):
            occ = occupation_measure(TorusPoint.zero(2), LAM2, HALF_SQUARE, T)
            errors.append(abs(occ.ratio - 0.25))
        assert errors[-1] < 0.02
        assert errors[-1] < errors[0]


class TestDiscrepancy:
    def test_integer_periods_single_coordinate(self):
        value = discrepancy_estimate(TorusPoint.zero(1), LAM1, 1, 1000.0, 10)
        assert value < 1e-12

    def test_two_dimensional_regression(self):
        result = anchored_discrepancy(TorusPoint.zero(2), LAM2, 2, 1e4, 10)
        assert result.value < 0.02
        # pinned after the first exact sweep; the sweep is deterministic
        assert result.value < 1e-5
        assert result.worst_volume == pytest.approx(
            math.prod(i / 10 for i in result.worst_box)
        )
        assert abs(result.worst_ratio - result.worst_volume) == pytest.approx(result.value)

    def test_doubling_trend(self):
        values = {
            T: discrepancy_estimate(TorusPoint.zero(2), LAM2, 2, T, 10)
            for T in (500.0, 1000.0, 2000.0, 4000.0, 8000.0)
        }
        for T in (500.0, 1000.0, 2000.0, 4000.0):
            assert values[2 * T] <= 2.0 * values[T] + 1e-12

    def test_budget(self):
        with pytest.raises(BudgetError):
            anchored_discrepancy(TorusPoint.zero(2), LAM2, 2, 1e4, 10, event_budget=1000)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            anchored_discrepancy(TorusPoint.zero(2), LAM2, 3, 10.0, 10)
        with pytest.raises(InvalidInputError):
            anchored_discrepancy(TorusPoint.zero(2), LAM2, 2, 10.0, 0)
