import json
import math

import numpy as np
import pytest

from oracles import trace_cube_loops
from varprof.cycles import cycle_sum_dfs
from varprof.entrylaws import MatrixEnsemble, NonCompliantLawWarning, assemble, law_gaussian, law_uniform01, sample_matrix
from varprof.errors import DomainError, StructuralZeroVariance
from varprof.profiles import all_ones, from_array, make_band, make_remark42
from varprof.simulate import (
    PolynomialSpec,
    default_workers,
    export_batch,
    moment_summary,
    power_traces,
    run_batch,
    sample_traces,
    standardize,
    structural_zero_check,
    support_has_closed_walk,
    trace_poly,
)

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
GAUSS_SYM = MatrixEnsemble("symmetric", law_gaussian(), 0)


class TestPowerTraces:
    def test_involution(self):
        np.testing.assert_array_equal(power_traces(SWAP, 4), [0, 2, 0, 2])

    def test_identity(self):
        np.testing.assert_array_equal(power_traces(np.eye(5), 3), [5, 5, 5])

    def test_triple_loop(self):
        m = np.random.default_rng(0).standard_normal((5, 5))
        assert power_traces(m, 3)[2] == pytest.approx(trace_cube_loops(m), rel=1e-12)

    def test_against_matrix_power(self):
        m = np.random.default_rng(1).standard_normal((6, 6)) / 3
        for j, t in enumerate(power_traces(m, 6), start=1):
            assert t == pytest.approx(np.trace(np.linalg.matrix_power(m, j)), rel=1e-10, abs=1e-12)

    def test_permutation_similarity(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((7, 7))
        p = np.eye(7)[rng.permutation(7)]
        np.testing.assert_allclose(power_traces(p @ m @ p.T, 5), power_traces(m, 5), rtol=1e-10)

    def test_non_square(self):
        with pytest.raises(DomainError):
            power_traces(np.zeros((2, 3)), 2)


class TestPolynomial:
    def test_square_of_swap(self):
        assert trace_poly(SWAP, PolynomialSpec((0, 0, 1))) == 2

    def test_constant_rejected(self):
        with pytest.raises(DomainError):
            PolynomialSpec((1.0,))

    def test_zero_leading_rejected(self):
        with pytest.raises(DomainError):
            PolynomialSpec((1.0, 2.0, 0.0))

    def test_x2_minus_1_identity(self):
        assert trace_poly(np.eye(3), PolynomialSpec((-1, 0, 1))) == 0

    def test_tau(self):
        with pytest.raises(DomainError):
            PolynomialSpec((3.0, 1.0), tau=2.0)
        assert PolynomialSpec((0.5, -1.0)).tau == 1.0

    def test_compose_power(self):
        q = PolynomialSpec((7.0, 1.0, 2.0)).compose_power(3)
        assert q.coeffs == (7.0, 0, 0, 1.0, 0, 0, 2.0)
        assert q(2.0) == pytest.approx(7 + 8 + 2 * 64)

    def test_monomial(self):
        assert PolynomialSpec.monomial(3).coeffs == (0.0, 0.0, 0.0, 1.0)


class TestBatch:
    def test_zero_profile(self):
        with pytest.raises(StructuralZeroVariance) as err:
            run_batch(from_array(np.zeros((5, 5))), GAUSS_SYM, PolynomialSpec((1.0, 0.0, 1.0)), 10)
        assert np.all(err.value.raw_traces == 5.0)

    def test_block_cyclic_k3(self):
        A = make_remark42("ii", 10)
        with pytest.raises(StructuralZeroVariance) as err:
            run_batch(A, MatrixEnsemble("iid", law_gaussian(), 1), PolynomialSpec.monomial(3), 30)
        raw = err.value.raw_traces
        assert np.all(raw == raw[0])

    def test_all_ones_standardised(self):
        batch = run_batch(all_ones(200), GAUSS_SYM, PolynomialSpec.monomial(2), 1000, seed=2024)
        z = batch.z_samples
        assert abs(z.mean()) <= 0.1 and abs(z.var() - 1) <= 0.15
        assert abs(z.mean()) < 1e-12 and z.var(ddof=1) == pytest.approx(1.0, rel=1e-12)
        assert batch.replicas == 1000 and batch.mean_se == pytest.approx(math.sqrt(batch.var_hat / 1000))

    def test_deterministic_and_worker_independent(self):
        P = PolynomialSpec((0.5, 1.0, 1.0))
        a = run_batch(make_band(30, 4), GAUSS_SYM, P, 40, seed=9, workers=1)
        b = run_batch(make_band(30, 4), GAUSS_SYM, P, 40, seed=9, workers=3)
        assert np.array_equal(a.raw_traces, b.raw_traces)

    def test_matches_manual_replicas(self):
        A = make_band(12, 2)
        ens = MatrixEnsemble("iid", law_gaussian(), 4)
        raw = sample_traces(A, ens, PolynomialSpec.monomial(3), 5)
        for r in range(5):
            y = assemble(A, sample_matrix(ens, 12, r))
            assert raw[r] == pytest.approx(np.trace(y @ y @ y), rel=1e-12)

    def test_relabelling_invariance(self):
        A = make_band(15, 3, periodic=False)
        perm = np.random.default_rng(0).permutation(15)
        x = sample_matrix(GAUSS_SYM, 15, 0)
        y = assemble(A, x)
        B = A.permuted(perm)
        inv = np.argsort(perm)
        assert np.array_equal(B.entries, A.entries[np.ix_(inv, inv)])
        y_perm = assemble(B, x[np.ix_(inv, inv)])
        np.testing.assert_allclose(power_traces(y_perm, 4), power_traces(y, 4), rtol=1e-12)

    def test_noncompliant_law_warns(self):
        with pytest.warns(NonCompliantLawWarning):
            batch = run_batch(all_ones(5), MatrixEnsemble("iid", law_uniform01(), 0),
                              PolynomialSpec.monomial(2), 20)
        assert batch.warnings

    def test_moment_summary(self):
        raw = np.random.default_rng(0).standard_normal(20000)
        mean, var, mean_se, var_se = moment_summary(raw)
        assert var == pytest.approx(raw.var(ddof=1))
        assert var_se == pytest.approx(math.sqrt(2 / 20000), rel=0.1)

    def test_standardize_constant(self):
        with pytest.raises(StructuralZeroVariance):
            standardize(np.full(10, 3.0))

    @pytest.mark.parametrize("kind", ["iid", "symmetric"])
    def test_variance_lower_bound_mc(self, kind):
        A = make_band(16, 2)
        ens = MatrixEnsemble(kind, law_gaussian(), 3)
        for k in (2, 3):
            batch = run_batch(A, ens, PolynomialSpec.monomial(k), 3000)
            s_k = cycle_sum_dfs(A, k).value
            assert batch.var_hat >= s_k * (1 - 4 * batch.var_se / s_k)

    def test_export(self, tmp_path):
        batch = run_batch(all_ones(6), GAUSS_SYM, PolynomialSpec.monomial(2), 8, seed=1)
        csv_path, json_path = export_batch(batch, tmp_path / "b", header="# test\n")
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "# test" and lines[1] == "replica,raw_trace,z" and len(lines) == 10
        meta = json.loads(json_path.read_text())
        assert meta["fingerprint"]["k"] == 2 and meta["var_hat"] == batch.var_hat


class TestStructuralZero:
    @pytest.mark.parametrize("k", [1, 2, 3, 4, 6])
    def test_constant(self, k):
        rep = structural_zero_check(make_remark42("ii", 10), k)
        assert rep.constant and rep.support_constant

    def test_multiple_of_five(self):
        rep = structural_zero_check(make_remark42("ii", 10), 5)
        assert not rep.constant and not rep.support_constant

    def test_all_ones(self):
        assert not structural_zero_check(all_ones(6), 2)

    def test_support_walks(self):
        assert support_has_closed_walk(make_band(6, 1), 2)
        assert not support_has_closed_walk(make_remark42("ii", 10), 4)


def test_default_workers(monkeypatch):
    monkeypatch.setenv("VARPROF_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("VARPROF_WORKERS")
    assert default_workers() >= 1
