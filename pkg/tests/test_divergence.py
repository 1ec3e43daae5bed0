import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import block_diag

from coherence_lab.channels import random_channel, random_density, random_unitary
from coherence_lab.coherence import closest_incoherent
from coherence_lab.divergence import (
    AlphaParam,
    DivergenceValue,
    alpha_log,
    quantum_divergence_unnormalized,
    quantum_tsallis,
    tsallis_classical,
)
from coherence_lab.errors import DimensionMismatch, LengthMismatch, NonPositiveArgument, SupportViolation
from coherence_lab.linalg import DensityMatrix

ALPHAS = (0.3, 0.5, 1.0, 1.5, 2.0)


class TestAlphaParam:
    def test_limit_one_threshold(self):
        assert AlphaParam(1.0).is_limit_one
        assert AlphaParam(1.0 + 5e-10).is_limit_one
        assert not AlphaParam(1.0 + 2e-9).is_limit_one

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            AlphaParam(bad)


class TestAlphaLog:
    def test_at_one(self):
        for a in (0.3, 1.0, 2.0, 5.0):
            assert alpha_log(1.0, a) == 0.0

    def test_limit_is_natural_log(self):
        assert alpha_log(3.0, 1.0) == pytest.approx(math.log(3.0), abs=1e-15)
        assert alpha_log(3.0, 1.0 + 1e-7) == pytest.approx(math.log(3.0), abs=1e-6)

    def test_value(self):
        # (2^-1 - 1) / (-1)
        assert alpha_log(2.0, 2.0) == pytest.approx(0.5, abs=1e-15)

    def test_rejects_non_positive(self):
        with pytest.raises(NonPositiveArgument):
            alpha_log(0.0, 2.0)


class TestClassical:
    def test_identical(self):
        p = [0.2, 0.3, 0.5]
        for a in ALPHAS:
            assert float(tsallis_classical(p, p, a)) == pytest.approx(0.0, abs=1e-15)

    def test_value(self):
        assert float(tsallis_classical([1, 0], [0.5, 0.5], 2.0)) == pytest.approx(1.0, abs=1e-14)

    def test_support_violation(self):
        v = tsallis_classical([1, 0], [0, 1], 2.0)
        assert not v.finite and v.reason == "SupportViolation"
        assert not tsallis_classical([1, 0], [0, 1], 1.0).finite

    def test_below_one_is_finite(self):
        # disjoint supports: the trace term vanishes, leaving 1 / (1 - alpha)
        v = tsallis_classical([1, 0], [0, 1], 0.5)
        assert v.finite and v.value == pytest.approx(2.0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            tsallis_classical([1.0], [0.5, 0.5], 2.0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(0, 1), min_size=2, max_size=6),
        st.lists(st.floats(1e-3, 1), min_size=6, max_size=6),
        st.sampled_from(ALPHAS + (3.0,)),
    )
    def test_non_negative(self, praw, qraw, a):
        if sum(praw) == 0:
            return
        p = np.array(praw) / sum(praw)
        q = np.array(qraw[: len(p)]) / sum(qraw[: len(p)])
        assert float(tsallis_classical(p, q, a)) >= 0.0


class TestDivergenceValue:
    def test_sum_propagates_infinity(self):
        total = DivergenceValue(1.0) + DivergenceValue.infinite() + 2.0
        assert not total.finite and total.reason == "SupportViolation"
        assert (DivergenceValue(1.0) + 2.0).value == 3.0

    def test_json(self):
        assert DivergenceValue(0.25).to_json() == {"finite": True, "value": 0.25}
        assert json.dumps(DivergenceValue.infinite().to_json()) == '{"finite": false, "value": null}'


class TestQuantum:
    def test_identical(self, rng):
        rho = random_density(4, 3, rng)
        for a in ALPHAS:
            assert float(quantum_tsallis(rho, rho, a)) == pytest.approx(0.0, abs=1e-12)

    def test_commuting_matches_classical(self):
        # oracle values from scipy fractional powers and the classical sum
        u = np.linalg.qr(np.random.default_rng(5).standard_normal((3, 3)))[0]
        p, q = np.array([0.2, 0.3, 0.5]), np.array([0.4, 0.4, 0.2])
        rho = DensityMatrix(u @ np.diag(p) @ u.T)
        sigma = DensityMatrix(u @ np.diag(q) @ u.T)
        assert float(quantum_tsallis(rho, sigma, 1.5)) == pytest.approx(0.38359678482947, abs=1e-10)
        for a in ALPHAS + (3.0,):
            assert float(quantum_tsallis(rho, sigma, a)) == pytest.approx(
                float(tsallis_classical(p, q, a)), abs=1e-10
            )

    def test_qutrit_example_to_closest_incoherent(self, qutrit_state):
        delta = closest_incoherent(qutrit_state, 2.0).density()
        assert float(quantum_tsallis(qutrit_state, delta, 2.0)) == pytest.approx(
            (2 * math.sqrt(2) - 1) / 4, abs=1e-12
        )

    def test_support_violation(self):
        rho = DensityMatrix(np.full((2, 2), 0.5))
        sigma = DensityMatrix(np.diag([1.0, 0.0]))
        for a in (1.0, 1.5, 2.0):
            assert not quantum_tsallis(rho, sigma, a).finite
        # below one the trace lives on supp(sigma): Tr(rho^a P sigma^(1-a)) = 1/2
        v = quantum_tsallis(rho, sigma, 0.5)
        assert v.finite and v.value == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            quantum_tsallis(np.eye(2) / 2, np.eye(3) / 3, 2.0)

    def test_alpha_continuity(self, rng):
        rho, sigma = random_density(3, 3, rng), random_density(3, 3, rng)
        at_one = float(quantum_tsallis(rho, sigma, 1.0))
        for a in (1 - 1e-6, 1 + 1e-6):
            assert float(quantum_tsallis(rho, sigma, a)) == pytest.approx(at_one, abs=1e-4)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_non_negative_and_tpcp_monotone(self, alpha):
        rng = np.random.default_rng(int(alpha * 100))
        for _ in range(100):
            d = int(rng.integers(2, 5))
            rho = random_density(d, int(rng.integers(1, d + 1)), rng)
            sigma = random_density(d, d, rng)
            chan = random_channel(d, int(rng.integers(2, 4)), 3, rng)
            before = float(quantum_tsallis(rho, sigma, alpha))
            assert before >= 0.0
            out = [DensityMatrix(sum(k @ s.matrix @ k.conj().T for k in chan)) for s in (rho, sigma)]
            assert float(quantum_tsallis(out[0], out[1], alpha)) <= before + 1e-9

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_joint_convexity(self, alpha):
        rng = np.random.default_rng(7 + int(alpha * 10))
        for _ in range(50):
            d = int(rng.integers(2, 5))
            w = rng.dirichlet(np.ones(3))
            rhos = [random_density(d, int(rng.integers(1, d + 1)), rng) for _ in w]
            sigmas = [random_density(d, d, rng) for _ in w]
            mix_r = DensityMatrix(sum(x * r.matrix for x, r in zip(w, rhos)))
            mix_s = DensityMatrix(sum(x * s.matrix for x, s in zip(w, sigmas)))
            rhs = sum(x * float(quantum_tsallis(r, s, alpha)) for x, r, s in zip(w, rhos, sigmas))
            assert float(quantum_tsallis(mix_r, mix_s, alpha)) <= rhs + 1e-9


class TestUnnormalized:
    def test_identical(self, rng):
        a = random_density(3, 2, rng).matrix * 0.7
        for alpha in ALPHAS:
            assert float(quantum_divergence_unnormalized(a, a, alpha)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", ALPHAS + (3.0,))
    def test_scaling(self, rng, alpha):
        for _ in range(10):
            a = random_density(3, 3, rng).matrix * rng.uniform(0.1, 2)
            b = random_density(3, 3, rng).matrix * rng.uniform(0.1, 2)
            base = float(quantum_divergence_unnormalized(a, b, alpha))
            scaled = float(quantum_divergence_unnormalized(2.5 * a, 2.5 * b, alpha))
            assert scaled == pytest.approx(2.5 * base, rel=1e-12, abs=1e-10)

    @pytest.mark.parametrize("alpha", ALPHAS + (3.0,))
    def test_direct_sum_additivity(self, rng, alpha):
        a1, b1 = random_density(2, 2, rng).matrix * 0.3, random_density(2, 2, rng).matrix * 0.6
        a2, b2 = random_density(3, 3, rng).matrix * 0.7, random_density(3, 3, rng).matrix * 0.4
        whole = float(quantum_divergence_unnormalized(block_diag(a1, a2), block_diag(b1, b2), alpha))
        parts = float(quantum_divergence_unnormalized(a1, b1, alpha)) + float(
            quantum_divergence_unnormalized(a2, b2, alpha)
        )
        assert whole == pytest.approx(parts, abs=1e-10)

    def test_may_be_negative(self):
        # traces differ, so the value is not bounded below by zero
        v = quantum_divergence_unnormalized(np.eye(2) * 0.1, np.eye(2), 2.0)
        assert v.finite and v.value < 0

    def test_support_violation(self):
        a, b = np.diag([1.0, 0.5]), np.diag([1.0, 0.0])
        assert not quantum_divergence_unnormalized(a, b, 2.0).finite
        with pytest.raises(SupportViolation):
            quantum_divergence_unnormalized(a, b, 2.0, strict=True)

    def test_basis_independence(self, rng):
        u = random_unitary(3, rng)
        a, b = random_density(3, 3, rng).matrix, random_density(3, 3, rng).matrix * 2
        for alpha in ALPHAS:
            plain = float(quantum_divergence_unnormalized(a, b, alpha))
            rotated = float(quantum_divergence_unnormalized(u @ a @ u.conj().T, u @ b @ u.conj().T, alpha))
            assert rotated == pytest.approx(plain, abs=1e-10)
