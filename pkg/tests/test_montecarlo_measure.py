import json

import numpy as np
import pytest

from ergotor import (
    FourierSeries,
    InvalidInputError,
    MultiIndex,
    RankSchedule,
    TorusPoint,
    chebyshev_bound,
    flow_many,
    generate,
    mc_measure_superlevel,
    mc_space_integral,
    select_rank_schedule,
    telescoping_majorant_many,
)
from ergotor.montecarlo_measure import CHUNK_SIZE, RNG_ID

E1 = MultiIndex.basis(1)


def ladder_series(n):
    return FourierSeries({MultiIndex.basis(k): 2.0**-k for k in range(1, n + 1)})


class TestSpaceIntegral:
    def test_constant(self):
        est = mc_space_integral(lambda p: np.ones(p.shape[0]), 2, 1000, 0)
        assert est.mean == pytest.approx(1.0)
        assert est.std_error == 0.0

    def test_character_orthogonality(self):
        f = FourierSeries({E1: 1.0})
        est = mc_space_integral(f.evaluate_many, 2, 100_000, 7)
        assert abs(est.mean) < 4.0 * est.std_error

    def test_first_coordinate_mean(self):
        est = mc_space_integral(lambda p: p[:, 0], 2, 100_000, 7)
        assert abs(est.mean.real - 0.5) < 4.0 * est.std_error

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            mc_space_integral(lambda p: p[:, 0], 0, 10, 0)
        with pytest.raises(InvalidInputError):
            mc_space_integral(lambda p: p[:, 0], 1, 1, 0)

    def test_deterministic_per_seed(self):
        h = lambda p: np.cos(2 * np.pi * p[:, 0]) + p[:, 1]
        a = mc_space_integral(h, 2, 50_000, 12345)
        b = mc_space_integral(h, 2, 50_000, 12345)
        assert a == b
        c = mc_space_integral(h, 2, 50_000, 54321)
        assert c.mean != a.mean

    def test_spans_chunk_boundary(self):
        n = CHUNK_SIZE + 17
        est = mc_space_integral(lambda p: p[:, 0], 1, n, 3)
        assert est.n == n
        assert abs(est.mean.real - 0.5) < 5.0 * est.std_error

    def test_parseval_consistency(self):
        rng = np.random.default_rng(107)
        for _ in range(5):
            terms = {MultiIndex.zero(): complex(rng.normal(), rng.normal())}
            for _ in range(5):
                coord = int(rng.integers(1, 5))
                entry = int(rng.integers(-2, 3)) or 1
                terms[MultiIndex({coord: entry})] = complex(rng.normal(), rng.normal()) / 2
            f = FourierSeries(terms)
            r = int(rng.integers(0, 5))
            diff = FourierSeries({i: c for i, c in f.terms.items() if i.support() > r})
            h = lambda p, d=diff: np.abs(d.evaluate_many(p)) ** 2
            est = mc_space_integral(h, 4, 50_000, int(rng.integers(0, 2**31)))
            assert abs(est.mean.real - f.l2_tail(r)) <= 4.0 * est.std_error + 1e-12


class TestSuperlevel:
    def test_empty_superlevel_set(self):
        # majorant is bounded by the total coefficient mass 0.9375 < 2
        f = ladder_series(4)
        schedule = select_rank_schedule(f, 3)
        est = mc_measure_superlevel(f, schedule, 2.0, 4, 5000, 11)
        assert est.mean == 0.0
        assert est.std_error == 0.0

    def test_zero_threshold_full_space(self):
        f = ladder_series(3)
        schedule = select_rank_schedule(f, 2)
        est = mc_measure_superlevel(f, schedule, 0.0, 3, 5000, 11)
        assert est.mean == pytest.approx(1.0)

    def test_unit_modulus_character(self):
        f = FourierSeries({E1: 1.0})
        schedule = RankSchedule((1,), ())
        est = mc_measure_superlevel(f, schedule, 1.0, 1, 5000, 11)
        assert est.mean == pytest.approx(1.0)

    def test_dimension_check(self):
        f = ladder_series(4)
        schedule = select_rank_schedule(f, 3)
        with pytest.raises(InvalidInputError):
            mc_measure_superlevel(f, schedule, 1.0, 2, 100, 0)


class TestChebyshevBound:
    def test_constant_series(self):
        f = FourierSeries({MultiIndex.zero(): 2.0})
        schedule = RankSchedule((1, 2), (0.0,))
        assert chebyshev_bound(f, schedule, 3.0) == pytest.approx(4.0 / 9.0)

    def test_single_character(self):
        f = FourierSeries({E1: 1.0})
        schedule = RankSchedule((1,), ())
        assert chebyshev_bound(f, schedule, 2.0) == pytest.approx(0.25)
        est = mc_measure_superlevel(f, schedule, 2.0, 1, 2000, 5)
        assert est.mean == 0.0  # the true measure is 0; the bound is just not tight

    def test_ladder_arithmetic(self):
        # bound derived from the verified tail sums: B = (||f_r1|| + sum sqrt(D_k))^2
        f = ladder_series(12)
        schedule = select_rank_schedule(f, 4)
        norm_sum = (
            np.sqrt(sum(abs(c) ** 2 for i, c in f.terms.items() if i.support() <= schedule.ranks[0]))
            + sum(np.sqrt(b) for b in schedule.tail_bounds)
        )
        for k in (1, 2, 3):
            c = 2.0**k
            assert chebyshev_bound(f, schedule, c) == pytest.approx(norm_sum**2 / c**2)

    def test_superlevel_consistency(self):
        f = ladder_series(12)
        schedule = select_rank_schedule(f, 4)
        for c in (2.0, 4.0, 8.0):
            est = mc_measure_superlevel(f, schedule, c, 4, 20_000, 20260809)
            assert est.mean.real - 4.0 * est.std_error <= chebyshev_bound(f, schedule, c)

    def test_superlevel_consistency_nonempty_set(self):
        # cos-type head so the superlevel set has genuinely positive measure
        f = FourierSeries({E1: 1.5, -E1: 1.5, MultiIndex.basis(2): 0.1, MultiIndex.basis(3): 0.02})
        schedule = select_rank_schedule(f, 3)
        est = mc_measure_superlevel(f, schedule, 3.0, 3, 50_000, 99)
        bound = chebyshev_bound(f, schedule, 3.0)
        assert est.mean.real > 0.05
        assert est.mean.real - 4.0 * est.std_error <= bound

    def test_time_side_superlevel_fraction(self):
        # the fraction of t in [0, 1e4] with majorant >= c along the flow,
        # read off a midpoint grid, stays under the measure bound + 0.01
        f = FourierSeries({E1: 1.5, -E1: 1.5, MultiIndex.basis(2): 0.1, MultiIndex.basis(3): 0.02})
        schedule = select_rank_schedule(f, 3)
        lam = generate("sqrt_squarefree", 3)
        u = TorusPoint.zero(3)
        T, n = 1e4, 200_000
        times = (np.arange(n) + 0.5) * (T / n)
        g = telescoping_majorant_many(f, schedule, flow_many(u, times, lam))
        for c in (3.0, 4.0):
            fraction = float(np.mean(g >= c))
            assert fraction <= chebyshev_bound(f, schedule, c) + 0.01

    def test_threshold_validation(self):
        f = ladder_series(2)
        with pytest.raises(InvalidInputError):
            chebyshev_bound(f, RankSchedule((1,), ()), 0.0)


class TestEstimateRecord:
    def test_json_fields(self):
        est = mc_space_integral(lambda p: p[:, 0] + 1j * p[:, 0], 1, 100, 9)
        doc = est.to_json_dict()
        assert set(doc) == {"mean_re", "mean_im", "std_error", "n", "seed", "d", "rng"}
        assert doc["rng"] == RNG_ID
        assert doc["n"] == 100 and doc["seed"] == 9 and doc["d"] == 1
        json.dumps(doc)  # serializable as-is
