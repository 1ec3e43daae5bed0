import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherence_lab.channels import random_density, random_unitary
from coherence_lab.coherence import (
    IncoherentState,
    OracleBudget,
    ReferenceBasis,
    brute_force_coherence,
    closest_incoherent,
    coherence_2_quadratic,
    coherence_alpha,
    coherence_l1,
    coherence_l2,
    mixedness,
    purity_upper_bound,
    purity_upper_bound_lambda_max,
    simplex_grid,
    tradeoff_report,
)
from coherence_lab.divergence import quantum_tsallis
from coherence_lab.errors import AlphaOutOfRange, DimensionMismatch, DimensionTooLarge, InvalidState
from coherence_lab.linalg import DensityMatrix

SQRT2 = math.sqrt(2)
C2_QUTRIT = (2 * SQRT2 - 1) / 4
ALPHAS = (0.3, 0.5, 1.0, 1.5, 2.0, 3.0)

# fixed 3x3 state; reference values from scipy.linalg.fractional_matrix_power / logm
_FIXED = np.array([[1, 0.3 + 0.2j, 0.1], [0.3 - 0.2j, 0.8, -0.25j], [0.1, 0.25j, 0.6]])
FIXED_STATE = _FIXED / np.trace(_FIXED).real
FIXED_VALUES = {0.5: 0.05413830524584817, 1.0: 0.10527218473129207, 3.0: 0.3264824076767201}


def plus_state(d):
    return np.full((d, d), 1.0 / d)


def random_incoherent(rng, d):
    return np.diag(rng.dirichlet(np.ones(d))).astype(complex)


class TestReferenceBasis:
    def test_identity(self):
        b = ReferenceBasis.identity(3)
        assert b.is_identity and b.dim == 3

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            ReferenceBasis(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_direct_sum(self, rng):
        u, v = random_unitary(2, rng), random_unitary(3, rng)
        s = ReferenceBasis.direct_sum([ReferenceBasis(u), ReferenceBasis(v)])
        assert s.dim == 5
        np.testing.assert_allclose(s.unitary[:2, :2], u)
        np.testing.assert_allclose(s.unitary[2:, 2:], v)


class TestNormMeasures:
    def test_incoherent_is_zero(self, rng):
        rho = random_incoherent(rng, 4)
        assert coherence_l1(rho) == 0.0 and coherence_l2(rho) == 0.0

    def test_qubit(self):
        u, w = 0.3, 0.2 * np.exp(0.7j)
        rho = np.array([[u, np.conj(w)], [w, 1 - u]])
        assert coherence_l1(rho) == pytest.approx(2 * abs(w), abs=1e-15)
        assert coherence_l2(rho) == pytest.approx(2 * abs(w) ** 2, abs=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_uniform_superposition(self, d):
        assert coherence_l1(plus_state(d)) == pytest.approx(d - 1, abs=1e-13)

    def test_qutrit_example(self, qutrit_state):
        assert coherence_l2(qutrit_state) == pytest.approx(0.125, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            coherence_l1(np.eye(2) / 2, ReferenceBasis.identity(3))


class TestCoherenceAlpha:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_incoherent_is_zero(self, rng, alpha):
        res = coherence_alpha(random_incoherent(rng, 3), alpha)
        assert res.value == pytest.approx(0.0, abs=1e-14)

    def test_qutrit_example(self, qutrit_state):
        res = coherence_alpha(qutrit_state, 2.0)
        assert res.value == pytest.approx(C2_QUTRIT, abs=1e-12)
        assert res.normalization == pytest.approx(1 / SQRT2 + 0.5, abs=1e-14)

    def test_plus_qubit(self):
        assert coherence_alpha(plus_state(2), 2.0).value == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize("alpha", sorted(FIXED_VALUES))
    def test_fixed_state_reference_values(self, alpha):
        assert coherence_alpha(FIXED_STATE, alpha).value == pytest.approx(FIXED_VALUES[alpha], abs=1e-12)

    def test_alpha_one_is_entropy_difference(self, qutrit_state):
        # dephased entropy (1/4, 1/2, 1/4) minus S = ln 2
        h = -(2 * 0.25 * math.log(0.25) + 0.5 * math.log(0.5))
        assert coherence_alpha(qutrit_state, 1.0).value == pytest.approx(h - math.log(2), abs=1e-13)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5), alpha=st.sampled_from(ALPHAS))
    def test_value_equals_divergence_to_minimizer(self, seed, d, alpha):
        rng = np.random.default_rng(seed)
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        res = coherence_alpha(rho, alpha)
        assert res.value >= 0.0
        assert float(quantum_tsallis(rho, res.minimizer.density(), alpha)) == pytest.approx(res.value, abs=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5))
    def test_quadratic_identity(self, seed, d):
        rng = np.random.default_rng(seed)
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        assert coherence_2_quadratic(rho) == pytest.approx(coherence_alpha(rho, 2.0).value, abs=1e-10)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_basis_covariance(self, rng, alpha):
        for _ in range(10):
            d = int(rng.integers(2, 5))
            rho = random_density(d, int(rng.integers(1, d + 1)), rng)
            u = random_unitary(d, rng)
            rotated = u @ rho.matrix @ u.conj().T
            a = coherence_alpha(rho, alpha).value
            b = coherence_alpha(rotated, alpha, ReferenceBasis(u)).value
            assert b == pytest.approx(a, abs=1e-10)

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_faithfulness(self, rng, alpha):
        for _ in range(20):
            d = int(rng.integers(2, 5))
            assert coherence_alpha(random_incoherent(rng, d), alpha).value <= 1e-10
            rho = random_density(d, int(rng.integers(1, d + 1)), rng).matrix
            off = rho - np.diag(np.diag(rho))
            if np.max(np.abs(off)) >= 1e-3:
                assert coherence_alpha(rho, alpha).value > 1e-10

    def test_faithfulness_in_rotated_basis(self, rng):
        u = random_unitary(3, rng)
        rho = u @ np.diag([0.5, 0.3, 0.2]) @ u.conj().T
        for alpha in ALPHAS:
            assert coherence_alpha(rho, alpha, ReferenceBasis(u)).value <= 1e-10
            assert coherence_alpha(rho, alpha).value > 1e-10


class TestClosestIncoherent:
    def test_qutrit_example(self, qutrit_state):
        state = closest_incoherent(qutrit_state, 2.0)
        np.testing.assert_allclose(state.weights, np.array([1, SQRT2, 1]) / (2 + SQRT2), atol=1e-12)

    def test_basis_state_is_fixed(self):
        e1 = np.diag([1.0, 0.0, 0.0])
        for alpha in ALPHAS:
            np.testing.assert_allclose(closest_incoherent(e1, alpha).weights, [1, 0, 0], atol=1e-14)

    def test_alpha_one_is_dephasing(self, qutrit_state):
        np.testing.assert_allclose(closest_incoherent(qutrit_state, 1.0).weights, [0.25, 0.5, 0.25], atol=1e-14)

    def test_matrix_in_basis(self, rng):
        u = random_unitary(3, rng)
        state = IncoherentState(ReferenceBasis(u), np.array([0.2, 0.3, 0.5]))
        np.testing.assert_allclose(state.matrix, u @ np.diag([0.2, 0.3, 0.5]) @ u.conj().T, atol=1e-14)
        assert isinstance(state.density(), DensityMatrix)

    def test_rejects_bad_weights(self):
        with pytest.raises(InvalidState):
            IncoherentState(ReferenceBasis.identity(2), np.array([0.7, 0.7]))


class TestBounds:
    def test_maximally_mixed_is_tight(self):
        for alpha in (0.5, 1.0, 2.0):
            assert purity_upper_bound(np.eye(3) / 3, alpha) == pytest.approx(0.0, abs=1e-14)

    def test_pure_qubit_at_two(self):
        # y - 1 with y = d Tr rho^2 = 2, attained by |+>
        assert purity_upper_bound(plus_state(2), 2.0) == pytest.approx(1.0, abs=1e-14)
        assert coherence_alpha(plus_state(2), 2.0).value == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0])
    def test_dominance(self, rng, alpha):
        for _ in range(200):
            d = int(rng.integers(2, 6))
            rho = random_density(d, int(rng.integers(1, d + 1)), rng)
            c = coherence_alpha(rho, alpha).value
            assert c <= purity_upper_bound(rho, alpha) + 1e-10
            if alpha > 2:
                assert c <= purity_upper_bound_lambda_max(rho, alpha) + 1e-10

    def test_lambda_max_variant_needs_alpha_above_two(self):
        with pytest.raises(AlphaOutOfRange):
            purity_upper_bound_lambda_max(np.eye(2) / 2, 2.0)


class TestMixedness:
    def test_examples(self, qutrit_state):
        assert mixedness(plus_state(3)) == pytest.approx(0.0, abs=1e-14)
        assert mixedness(np.eye(4) / 4) == pytest.approx(1.0, abs=1e-14)
        assert mixedness(qutrit_state) == pytest.approx(0.75, abs=1e-14)

    def test_rejects_dimension_one(self):
        with pytest.raises(DimensionMismatch):
            mixedness(np.eye(1))


class TestTradeoff:
    def test_maximally_mixed(self):
        rep = tradeoff_report(np.eye(3) / 3, 2.0)
        assert rep.normalized_sum == pytest.approx(1.0, abs=1e-14)

    def test_plus_is_tight(self):
        rep = tradeoff_report(plus_state(2), 2.0)
        assert rep.normalized_sum == pytest.approx(1.0, abs=1e-13)
        assert rep.holds_sum and rep.holds_purity_bound

    def test_rejects_large_alpha(self):
        with pytest.raises(AlphaOutOfRange):
            tradeoff_report(np.eye(2) / 2, 2.5)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 2.0])
    def test_holds_on_random_states(self, rng, alpha):
        for _ in range(200):
            d = int(rng.integers(2, 6))
            rep = tradeoff_report(random_density(d, int(rng.integers(1, d + 1)), rng), alpha)
            assert rep.holds_sum and rep.holds_purity_bound


class TestOracle:
    def test_grid_is_lexicographic_simplex(self):
        g = simplex_grid(3, 4)
        assert len(g) == math.comb(6, 2)
        np.testing.assert_allclose(g.sum(axis=1), 1.0)
        rows = [tuple(r) for r in g]
        assert rows == sorted(rows)

    def test_incoherent_is_zero(self, rng):
        assert brute_force_coherence(random_incoherent(rng, 3), 2.0) == pytest.approx(0.0, abs=1e-8)

    def test_qutrit_example(self, qutrit_state):
        assert brute_force_coherence(qutrit_state, 2.0) == pytest.approx(C2_QUTRIT, abs=1e-6)

    @pytest.mark.parametrize("alpha", [0.5, 1.5, 2.0])
    def test_random_qubits(self, alpha):
        rng = np.random.default_rng(11)
        for _ in range(100):
            rho = random_density(2, int(rng.integers(1, 3)), rng)
            assert brute_force_coherence(rho, alpha) == pytest.approx(coherence_alpha(rho, alpha).value, abs=1e-6)

    def test_rotated_basis(self, rng):
        rho = random_density(3, 3, rng)
        b = ReferenceBasis(random_unitary(3, rng))
        assert brute_force_coherence(rho, 1.5, b) == pytest.approx(coherence_alpha(rho, 1.5, b).value, abs=1e-6)

    def test_dimension_cap(self):
        with pytest.raises(DimensionTooLarge):
            brute_force_coherence(np.eye(7) / 7, 2.0)

    def test_budget(self):
        assert OracleBudget().grid_steps(3) == 200
        assert OracleBudget().grid_steps(4) == 50
        assert OracleBudget(resolution=10).grid_steps(3) == 10
