import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from varprof.bounds import compute_bn, spectral_norm
from varprof.cycles import cycle_sum_brute, cycle_sum_dfs
from varprof.gof import ks_to_normal, tv_binned_to_normal, w1_to_normal
from varprof.profiles import from_array, load_profile, save_profile
from varprof.simulate import power_traces

finite = st.floats(-1e3, 1e3, allow_nan=False)
# squares of these stay normal floats, so numpy's Frobenius norm is exact enough
moderate = st.one_of(st.just(0.0), st.floats(1e-100, 1e3), st.floats(-1e3, -1e-100))
nonneg = st.one_of(st.just(0.0), st.floats(1e-3, 10.0))


def square(elements, lo=1, hi=6):
    return st.integers(lo, hi).flatmap(lambda n: arrays(np.float64, (n, n), elements=elements))


@settings(max_examples=60, deadline=None)
@given(square(nonneg, 2, 6), st.integers(1, 5))
def test_dfs_equals_brute(a, k):
    fast, slow = cycle_sum_dfs(a, k).value, cycle_sum_brute(a, k).value
    assert math.isclose(fast, slow, rel_tol=1e-10, abs_tol=1e-300)
    assert fast >= 0


@settings(max_examples=60, deadline=None)
@given(square(nonneg), st.booleans())
def test_profile_round_trip(tmp_path_factory, a, sparse):
    path = tmp_path_factory.mktemp("io") / "p.txt"
    save_profile(from_array(a, symmetric=False), path, sparse=sparse)
    assert np.array_equal(load_profile(path, sparse=sparse).entries, a)


@settings(max_examples=60, deadline=None)
@given(square(finite, 1, 7), st.randoms(use_true_random=False))
def test_power_traces_similarity(m, rnd):
    perm = list(range(m.shape[0]))
    rnd.shuffle(perm)
    p = m[np.ix_(perm, perm)]
    scale = max(1.0, float(np.abs(m).max())) ** 4 * m.shape[0] ** 4
    np.testing.assert_allclose(power_traces(p, 4), power_traces(m, 4), rtol=1e-9, atol=1e-9 * scale)


@settings(max_examples=60, deadline=None)
@given(square(nonneg, 1, 7), st.randoms(use_true_random=False))
def test_bn_permutation(a, rnd):
    perm = list(range(a.shape[0]))
    rnd.shuffle(perm)
    b = a[np.ix_(perm, perm)]
    assert math.isclose(compute_bn(b), compute_bn(a), rel_tol=1e-12)
    assert compute_bn(a) >= math.log(a.shape[0])


@settings(max_examples=80, deadline=None)
@given(arrays(np.float64, st.integers(2, 200), elements=st.floats(-20, 20)))
def test_gof_ranges(x):
    ks = ks_to_normal(x)
    assert 0 <= ks <= 1
    assert ks == ks_to_normal(np.sort(x)[::-1].copy())
    assert 0 <= tv_binned_to_normal(x) <= 1
    assert w1_to_normal(x) >= 0


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=moderate))
def test_spectral_norm_below_frobenius(y):
    sigma, ok, _ = spectral_norm(y)
    assert sigma <= np.linalg.norm(y) * (1 + 1e-12) + 1e-300
    if ok:
        assert math.isclose(sigma, np.linalg.norm(y, 2), rel_tol=1e-5, abs_tol=1e-9)


def test_spectral_norm_extreme_scales():
    assert spectral_norm(np.array([[7e-161]]))[0] == 7e-161
    assert math.isclose(spectral_norm(np.array([[3e200, 0.0], [0.0, 1e200]]))[0], 3e200, rel_tol=1e-8)
