import numpy as np
import pytest

from varprof.bounds import compute_bn
from varprof.cycles import cycle_sum_brute, cycle_sum_dfs
from varprof.embeddings import (
    embed,
    embedded_statistic,
    plan_covariance,
    plan_product,
    verify_trace_identity,
    zk_via_embedding,
)
from varprof.entrylaws import MatrixEnsemble, law_gaussian, law_uniform01
from varprof.errors import DomainError
from varprof.gof import ks_to_normal
from varprof.simulate import PolynomialSpec, power_traces, trace_poly

X_ONLY = PolynomialSpec((0.0, 1.0))


def gaussian_blocks(plan, seed):
    rng = np.random.default_rng(seed)
    return [rng.standard_normal(s) for s in plan.block_shapes()]


class TestPlans:
    def test_covariance_layout(self):
        plan = plan_covariance(2, 3, X_ONLY)
        a = plan.host_profile.entries
        assert a.shape == (5, 5)
        assert not a[:2, :2].any() and not a[2:, 2:].any()
        assert a[:2, 2:].all() and a[2:, :2].all()
        assert plan.ensemble_kind == "symmetric"

    def test_covariance_poly(self):
        assert plan_covariance(2, 3, X_ONLY).composed_poly.coeffs == (0.0, 0, 1.0)

    def test_covariance_bn(self):
        assert compute_bn(plan_covariance(10, 30, X_ONLY).host_profile) == 30

    def test_product_square(self):
        plan = plan_product((4, 4, 4), X_ONLY)
        assert plan.host_profile.dims == (12, 12) and plan.power == 3

    def test_product_two_factors(self):
        plan = plan_product((5, 5), PolynomialSpec((1.0, 2.0, 3.0)))
        assert plan.composed_poly.coeffs == (1.0, 0, 2.0, 0, 3.0)

    def test_product_rectangular_layout(self):
        plan = plan_product((2, 3, 4), X_ONLY)
        s = plan.host_profile.entries > 0
        assert s.shape == (9, 9)
        assert s[0:2, 2:5].all() and s[2:5, 5:9].all() and s[5:9, 0:2].all()
        assert s.sum() == 2 * 3 + 3 * 4 + 4 * 2
        assert plan.block_shapes() == [(2, 3), (3, 4), (4, 2)]

    def test_rotation_puts_smallest_first(self):
        assert plan_product((5, 3, 4), X_ONLY).block_dims == (3, 4, 5)

    @pytest.mark.parametrize("bad", [(0, 3), (3,), (1, 50)])
    def test_product_domain(self, bad):
        with pytest.raises(DomainError):
            plan_product(bad, X_ONLY)

    def test_degenerate_covariance(self):
        with pytest.raises(DomainError):
            plan_covariance(0, 4, X_ONLY)


class TestIdentities:
    def test_covariance(self):
        plan = plan_covariance(3, 5, PolynomialSpec((0.0, 1.0, 1.0)))
        assert verify_trace_identity(plan, gaussian_blocks(plan, 0), k=2) <= 1e-10

    def test_product_three(self):
        plan = plan_product((4, 4, 4), X_ONLY)
        blocks = gaussian_blocks(plan, 1)
        assert verify_trace_identity(plan, blocks) <= 1e-10
        x1, x2, x3 = blocks
        host = embed(plan, blocks)
        assert trace_poly(host, plan.composed_poly) == pytest.approx(3 * np.trace(x1 @ x2 @ x3), rel=1e-10)

    def test_offset_negative_control(self):
        plan = plan_covariance(2, 6, PolynomialSpec((7.0, 1.0)))
        blocks = gaussian_blocks(plan, 2)
        main, offset = embedded_statistic(plan, blocks)
        assert offset == 28
        assert verify_trace_identity(plan, blocks) <= 1e-10
        r = verify_trace_identity(plan, blocks, include_offset=False)
        assert r == pytest.approx(28 / (1 + abs(main)), rel=1e-9)

    def test_hundred_random_instances(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for case in range(100):
            coeffs = list(rng.normal(size=int(rng.integers(2, 4))))
            coeffs[-1] = coeffs[-1] or 1.0
            P = PolynomialSpec(tuple(coeffs))
            if case % 2:
                plan = plan_covariance(int(rng.integers(1, 6)), int(rng.integers(1, 6)), P)
            else:
                dims = rng.integers(2, 5, size=int(rng.integers(2, 4)))
                plan = plan_product(tuple(int(d) for d in dims), P)
            worst = max(worst, verify_trace_identity(plan, gaussian_blocks(plan, case)))
        assert worst <= 1e-10

    def test_degree_mismatch(self):
        plan = plan_covariance(2, 2, X_ONLY)
        with pytest.raises(DomainError):
            verify_trace_identity(plan, gaussian_blocks(plan, 0), k=3)

    def test_block_shape_mismatch(self):
        plan = plan_covariance(2, 3, X_ONLY)
        with pytest.raises(DomainError):
            embed(plan, [np.zeros((3, 2))])


class TestHostStructure:
    def test_covariance_cycle_sum_brute(self):
        host = plan_covariance(4, 4, X_ONLY).host_profile
        s4 = cycle_sum_brute(host, 4).value
        # distinct alternating 4-tuples, starting on either side
        n = m = 4
        direct = 2 * n * (n - 1) * m * (m - 1)
        assert s4 == direct == cycle_sum_dfs(host, 4).value
        assert s4 == pytest.approx((n * m) ** 2, rel=0.5)

    def test_product_host_power_traces(self):
        plan = plan_product((3, 4, 5), X_ONLY)
        y = embed(plan, gaussian_blocks(plan, 3))
        tr = power_traces(y, 9)
        for j in range(1, 10):
            if j % 3:
                assert tr[j - 1] == 0


class TestZk:
    def test_covariance_small(self):
        plan = plan_covariance(20, 30, PolynomialSpec.monomial(2))
        batch = zk_via_embedding(plan, MatrixEnsemble("iid", law_gaussian(), 5), 300)
        assert batch.fingerprint["ensemble"] == "symmetric"
        assert ks_to_normal(batch.z_samples) < 0.1

    def test_requires_compliant_law(self):
        with pytest.raises(DomainError):
            zk_via_embedding(plan_covariance(3, 3, X_ONLY), MatrixEnsemble("iid", law_uniform01()), 10)
