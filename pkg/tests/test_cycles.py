import math

import numpy as np
import pytest

from oracles import cycle_sum_loops, stirling_ratio
from varprof.cycles import count_Ik, cycle_sum, cycle_sum_brute, cycle_sum_dfs, walk_trace
from varprof.errors import SizeError
from varprof.profiles import all_ones, from_array, make_band, make_remark42


def random_profile(rng, n, density=0.4):
    mask = rng.random((n, n)) < density
    return np.where(mask, rng.uniform(0.1, 1.0, (n, n)), 0.0)


class TestCountIk:
    def test_small(self):
        assert count_Ik(4, 2) == 12
        assert count_Ik(10, 10) == 3628800

    def test_k_exceeds_n(self):
        assert count_Ik(3, 5) == 0

    def test_exact_big(self):
        assert count_Ik(60, 30) == math.factorial(60) // math.factorial(30)

    def test_stirling(self):
        ratio = count_Ik(100, 3) / 100 ** 3
        assert ratio == pytest.approx(0.9702, abs=1e-4)
        # full Stirling, including the sqrt(n / (n - k)) prefactor
        assert ratio == pytest.approx(stirling_ratio(100, 3) * (1 - 3 / 100) ** -0.5, rel=1e-4)


class TestBrute:
    def test_all_ones(self):
        assert cycle_sum_brute(all_ones(3), 2).value == 6

    def test_band_triangle_free(self):
        assert cycle_sum_brute(make_band(6, 1), 3).value == 0

    def test_band_pairs(self):
        assert cycle_sum_brute(make_band(6, 1), 2).value == 12

    def test_guard(self):
        with pytest.raises(SizeError):
            cycle_sum_brute(all_ones(200), 4)

    def test_matches_loops(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            a = random_profile(rng, 6, 0.6)
            for k in (1, 2, 3, 4):
                assert cycle_sum_brute(a, k).value == pytest.approx(cycle_sum_loops(a, k), rel=1e-13)


class TestDfs:
    def test_random_sparse_oracle(self):
        rng = np.random.default_rng(123)
        for case in range(50):
            a = random_profile(rng, 8)
            k = (2, 3, 4)[case % 3]
            fast = cycle_sum_dfs(a, k)
            slow = cycle_sum_loops(a, k)
            assert fast.method == "dfs"
            assert fast.value == pytest.approx(slow, rel=1e-12, abs=1e-300)

    def test_block_cyclic_zero(self):
        A = make_remark42("ii", 20)
        for k in (1, 2, 3, 4, 6):
            assert cycle_sum_dfs(A, k).value == 0
        assert cycle_sum_dfs(A, 5).value > 0

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
    def test_scaled_all_ones(self, k):
        c, n = 0.7, 7
        A = all_ones(n).scaled(c)
        expected = c ** (2 * k) * (n if k == 1 else count_Ik(n, k))
        assert cycle_sum_dfs(A, k).value == pytest.approx(expected, rel=1e-12)

    def test_k_one_is_diagonal(self):
        a = np.diag([1.0, 2.0, 3.0])
        assert cycle_sum_dfs(a, 1).value == 14.0

    def test_k_above_n(self):
        assert cycle_sum_dfs(all_ones(3), 4).value == 0

    def test_guard(self):
        with pytest.raises(SizeError):
            cycle_sum_dfs(all_ones(12), 11)

    def test_integer_for_binary(self):
        v = cycle_sum_dfs(make_band(40, 5), 4).value
        assert abs(v - round(v)) < 1e-6

    def test_band_count(self):
        # each vertex of the periodic 1-band has exactly two ordered 2-cycles
        assert cycle_sum_dfs(make_band(50, 1), 2).value == 100

    def test_nonsymmetric_direction_matters(self):
        a = np.zeros((3, 3))
        a[0, 1], a[1, 2], a[2, 0] = 1.0, 2.0, 3.0
        assert cycle_sum_dfs(a, 3).value == pytest.approx(3 * 1 * 4 * 9)
        assert cycle_sum_dfs(a.T, 3).value == pytest.approx(3 * 1 * 4 * 9)

    def test_default_engine(self):
        a = make_band(9, 2).entries
        assert cycle_sum(a, 3).value == cycle_sum_dfs(a, 3).value


def test_walk_trace_dominates():
    rng = np.random.default_rng(5)
    a = random_profile(rng, 9, 0.7)
    for k in (2, 3, 4):
        assert cycle_sum_dfs(a, k).value <= walk_trace(a, k) * (1 + 1e-12)
    assert walk_trace(from_array(np.eye(3)), 3) == 3.0
