import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brstlab import (
    KreinSpace,
    OperatorSubspace,
    Tolerance,
    brst_physical_algebra,
    build_hamiltonian_Q,
    dsp_decompose,
    ker_delta,
    phi_s,
    physicality_check,
    ran_delta,
    state_condition_check,
    structure_theorem_check,
    superderivation_matrix,
)
from brstlab.cohomology import DspData
from brstlab.errors import GradingError, NilpotencyError, RankAmbiguityError, SizeError, StructureTheoremViolation
from brstlab.linalg import dagger, projector
from brstlab.operators import commutant

from ._oracles import (
    KER_DELTA_SINGLE_PROJECTION_BEREZIN,
    KER_DELTA_SINGLE_PROJECTION_FULL,
    RAN_DELTA_SINGLE_PROJECTION_BEREZIN,
    RAN_DELTA_SINGLE_PROJECTION_FULL,
    nullity,
    row_reduce_rank,
    superderivation_by_units,
)
from .conftest import ZOO, random_complex

TOL = Tolerance()
SWAP = np.array([[0, 1], [1, 0]], dtype=complex)
FLIP = np.diag([1.0, -1.0]).astype(complex)
RAISE = np.array([[0, 1], [0, 0]], dtype=complex)


def norm(A):
    return np.linalg.norm(A, 2)


@pytest.fixture
def projection_complex(single_projection, berezin1):
    return build_hamiltonian_Q(single_projection, berezin1)


@pytest.fixture
def projection_full(single_projection, ghosts1):
    return build_hamiltonian_Q(single_projection, ghosts1)


class TestDsp:
    def test_zero_charge(self):
        dsp = dsp_decompose(np.zeros((3, 3)))
        assert dsp.dims == (0, 3, 0)
        assert np.allclose(dsp.P_s, np.eye(3))

    def test_raising(self):
        dsp = dsp_decompose(RAISE, KreinSpace(SWAP))
        assert dsp.dims == (1, 0, 1)
        assert np.allclose(dsp.P_d, np.diag([1, 0]))
        assert np.allclose(dsp.P_p, np.diag([0, 1]))
        assert dsp.checks["krein_exchange"] <= 1e-12

    def test_single_projection(self, projection_complex, projection):
        dsp = dsp_decompose(projection_complex.Q, projection_complex.krein)
        assert dsp.dims == (1, 2, 1)
        expected = np.kron(np.eye(2) - projection, np.eye(2))
        assert norm(dsp.P_s - expected) <= 1e-12

    @pytest.mark.parametrize("charge", ZOO, ids=repr)
    def test_identities(self, charge):
        dsp = dsp_decompose(charge.Q, KreinSpace(charge.J))
        for key in ("completeness", "orthogonality", "kernel_split", "krein_stationary", "krein_exchange"):
            assert dsp.checks.get(key, 0.0) <= 1e-9, key
        for P in (dsp.P_d, dsp.P_s, dsp.P_p):
            assert norm(P @ P - P) <= 1e-9
            assert norm(P - dagger(P)) <= 1e-9

    def test_not_nilpotent(self):
        with pytest.raises(NilpotencyError):
            dsp_decompose(np.eye(2))

    def test_rank_ambiguity(self):
        Q = np.zeros((4, 4), dtype=complex)
        Q[0, 2] = 1.0
        Q[1, 3] = 3e-10
        with pytest.raises(RankAmbiguityError):
            dsp_decompose(Q)

    def test_neutral_stationary_space(self):
        Z = np.zeros((2, 2))
        Q = np.block([[Z, np.diag([1.0, 2.0])], [Z, Z]]).astype(complex)
        J = np.block([[Z, np.eye(2)], [np.eye(2), Z]]).astype(complex)
        K = KreinSpace(J)
        dsp = dsp_decompose(Q, K)
        report = physicality_check(dsp, K)
        assert report.signature == (0, 0, 0)
        assert report.physical
        assert dsp.checks["krein_exchange"] <= 1e-12


class TestPhysicality:
    def test_berezin_copies_are_neutral(self, projection_complex):
        # the Berezin vacuum is a null vector, so the two copies pair up
        K = projection_complex.krein
        report = physicality_check(dsp_decompose(projection_complex.Q, K), K)
        assert not report.physical
        assert report.signature == (1, 1, 0)

    def test_positive_case(self):
        J = np.diag([1.0, 1.0, -1.0]).astype(complex)
        K = KreinSpace(J)
        # Q v = n ⟪n, v⟫ for the null vector n = (e₁ + e₃)/√2
        n = np.array([1, 0, 1]) / np.sqrt(2)
        Q = np.outer(n, J @ n).astype(complex)
        report = physicality_check(dsp_decompose(Q, K), K)
        assert report.physical
        assert report.signature == (1, 0, 0)

    def test_full_ghosts_not_positive(self, projection_full):
        K = projection_full.krein
        report = physicality_check(dsp_decompose(projection_full.Q, K), K)
        assert not report.physical
        assert report.signature[1] > 0

    def test_empty_stationary_space(self):
        K = KreinSpace(SWAP)
        assert physicality_check(dsp_decompose(RAISE, K), K).physical


class TestSuperderivation:
    def test_zero_charge(self):
        delta = superderivation_matrix(np.zeros((2, 2)), FLIP)
        assert not np.any(delta.matrix)

    @pytest.mark.parametrize("charge", ZOO, ids=repr)
    def test_squares_to_zero(self, charge):
        delta = superderivation_matrix(charge.Q, charge.grading)
        S = delta.matrix
        assert norm(S @ S) <= 1e-9 * max(1, norm(S) ** 2)
        assert norm(delta(charge.Q)) <= 1e-9

    def test_matches_unit_oracle(self, projection_complex):
        c = projection_complex
        S = superderivation_matrix(c.Q, c.grading).matrix
        assert np.allclose(S, superderivation_by_units(c.Q, c.grading))

    def test_projection_ghost_pair_is_closed(self, projection_complex, berezin1):
        P2 = np.diag([1.0, 0.0])
        A = np.kron(P2, berezin1.eta(1) @ berezin1.rho(1))
        delta = superderivation_matrix(projection_complex.Q, projection_complex.grading)
        assert norm(delta(A)) <= 1e-12

    def test_grading_errors(self):
        with pytest.raises(GradingError):
            superderivation_matrix(RAISE, np.eye(3))
        with pytest.raises(GradingError):
            superderivation_matrix(RAISE, 2 * np.eye(2))
        with pytest.raises(GradingError):
            superderivation_matrix(RAISE, np.eye(2))

    def test_size_cap(self):
        with pytest.raises(SizeError):
            superderivation_matrix(np.zeros((65, 65)), np.eye(65))


class TestKernelAndRange:
    def test_oracle_dims_berezin(self, projection_complex):
        c = projection_complex
        delta = superderivation_matrix(c.Q, c.grading)
        assert ker_delta(delta).dim == KER_DELTA_SINGLE_PROJECTION_BEREZIN
        assert ran_delta(delta).dim == RAN_DELTA_SINGLE_PROJECTION_BEREZIN
        S = superderivation_by_units(c.Q, c.grading)
        assert nullity(S) == KER_DELTA_SINGLE_PROJECTION_BEREZIN
        assert row_reduce_rank(S) == RAN_DELTA_SINGLE_PROJECTION_BEREZIN

    def test_oracle_dims_full(self, projection_full):
        c = projection_full
        delta = superderivation_matrix(c.Q, c.grading)
        assert ker_delta(delta).dim == KER_DELTA_SINGLE_PROJECTION_FULL
        assert ran_delta(delta).dim == RAN_DELTA_SINGLE_PROJECTION_FULL

    def test_zero_charge(self):
        delta = superderivation_matrix(np.zeros((2, 2)), FLIP)
        assert ker_delta(delta).dim == 4
        assert ran_delta(delta).dim == 0

    def test_restricted_to_matter(self, projection_complex, projection):
        c = projection_complex
        delta = superderivation_matrix(c.Q, c.grading)
        matter = OperatorSubspace.full(2).map(lambda A: np.kron(A, np.eye(2)))
        k = ker_delta(delta, matter)
        expected = commutant([projection]).map(lambda A: np.kron(A, np.eye(2)))
        assert k.dim == expected.dim == 2
        assert k.distance(expected) <= 1e-9

    def test_range_inside_kernel(self, projection_full):
        c = projection_full
        delta = superderivation_matrix(c.Q, c.grading)
        assert ker_delta(delta).containment_residual(ran_delta(delta)) <= 1e-9

    @pytest.mark.parametrize("charge", ZOO, ids=repr)
    def test_unit_in_range_iff_no_stationary_space(self, charge):
        delta = superderivation_matrix(charge.Q, charge.grading)
        unit_in = ran_delta(delta).contains(np.eye(charge.Q.shape[0]), Tolerance(abs=1e-8))
        d_s = dsp_decompose(charge.Q).dims[1]
        assert unit_in == (d_s == 0)

    def test_blockwise_agrees_with_dense(self):
        charge = next(c for c in ZOO if c.labels is not None)
        dense = superderivation_matrix(charge.Q, charge.grading)
        blocked = superderivation_matrix(charge.Q, charge.grading, labels=charge.labels)
        assert blocked.blocks is not None
        k1, k2 = ker_delta(dense), ker_delta(blocked)
        r1, r2 = ran_delta(dense), ran_delta(blocked)
        assert (k1.dim, r1.dim) == (k2.dim, r2.dim)
        assert k1.distance(k2) <= 1e-8
        assert r1.distance(r2) <= 1e-8


class TestCompression:
    def test_unit_maps_to_projection(self, projection_complex):
        dsp = dsp_decompose(projection_complex.Q)
        assert np.allclose(phi_s(np.eye(4), dsp), dsp.P_s)

    def test_exact_operators_vanish(self, projection_full, rng):
        c = projection_full
        delta = superderivation_matrix(c.Q, c.grading)
        dsp = dsp_decompose(c.Q)
        for _ in range(10):
            A = delta(random_complex(rng, c.total_dim, c.total_dim))
            assert norm(phi_s(A, dsp)) <= 1e-9 * max(1, norm(A))

    def test_matter_image(self, projection_complex, projection):
        c = projection_complex
        delta = superderivation_matrix(c.Q, c.grading)
        dsp = dsp_decompose(c.Q)
        matter = OperatorSubspace.full(2).map(lambda A: np.kron(A, np.eye(2)))
        image = phi_s(ker_delta(delta, matter), dsp)
        P = np.eye(2) - projection
        expected = OperatorSubspace.span([np.kron(P, np.eye(2))])
        assert image.dim == 1
        assert image.distance(expected) <= 1e-9


class TestStructureTheorem:
    @pytest.mark.parametrize("charge", ZOO, ids=repr)
    def test_holds(self, charge):
        delta = superderivation_matrix(charge.Q, charge.grading, labels=charge.labels)
        dsp = dsp_decompose(charge.Q)
        r = structure_theorem_check(delta, dsp)
        d_s = dsp.dims[1]
        assert r.image_dim == d_s**2
        assert r.ker_dim - r.ran_dim == d_s**2
        for value in (r.residual, r.homomorphism_residual, r.block_form_residual, r.ideal_residual):
            assert value <= 1e-8
        assert r.unit_in_range == (d_s == 0)

    def test_single_projection_counts(self, projection_complex):
        c = projection_complex
        r = structure_theorem_check(superderivation_matrix(c.Q, c.grading), dsp_decompose(c.Q))
        assert (r.ker_dim, r.ran_dim, r.image_dim) == (10, 6, 4)

    def test_wrong_stationary_projection_is_reported(self, projection_complex):
        c = projection_complex
        good = dsp_decompose(c.Q)
        # shrink the stationary space by one vector
        V = good.stationary_basis[:, :1]
        bad = DspData(good.P_d, projector(V), good.P_p, V)
        with pytest.raises(StructureTheoremViolation) as info:
            structure_theorem_check(superderivation_matrix(c.Q, c.grading), bad)
        assert info.value.witness is not None
        assert info.value.residual > 1e-8


class TestPhysicalAlgebra:
    def test_unrestricted(self, projection_full):
        c = projection_full
        dsp = dsp_decompose(c.Q)
        r = brst_physical_algebra(superderivation_matrix(c.Q, c.grading), dsp, K=c.krein)
        assert r.dim == dsp.dims[1] ** 2
        assert r.restriction_consistent
        assert r.involution_residual <= 1e-9
        shortcut = brst_physical_algebra(None, dsp)
        assert shortcut.method == "compression"
        assert shortcut.algebra.distance(r.algebra) <= 1e-9

    def test_ghost_number_zero(self, projection_complex):
        c = projection_complex
        dsp = dsp_decompose(c.Q)
        zero = commutant([c.G_total])
        r = brst_physical_algebra(superderivation_matrix(c.Q, c.grading), dsp, zero, K=c.krein)
        assert r.restrict_closed
        assert r.restriction_consistent
        assert 1 <= r.dim <= dsp.dims[1] ** 2
        assert r.star_residual <= 1e-9

    def test_scalars(self, projection_complex):
        c = projection_complex
        dsp = dsp_decompose(c.Q)
        r = brst_physical_algebra(superderivation_matrix(c.Q, c.grading), dsp, OperatorSubspace.scalars(4))
        assert r.dim == 1
        assert r.algebra.contains(dsp.P_s)

    def test_non_algebra_is_closed_first(self, projection_complex):
        c = projection_complex
        dsp = dsp_decompose(c.Q)
        A = np.zeros((4, 4), dtype=complex)
        A[0, 1] = 1.0
        r = brst_physical_algebra(superderivation_matrix(c.Q, c.grading), dsp, OperatorSubspace.span([A, A.T]))
        assert not r.restrict_closed


def _invariant_vectors(J):
    w, V = np.linalg.eigh(J)
    return V[:, w > 0], V[:, w < 0]


class TestStateCondition:
    def test_stationary_vector(self, projection_complex):
        c = projection_complex
        dsp = dsp_decompose(c.Q)
        plus, _ = _invariant_vectors(c.J_T)
        # a J-invariant stationary vector
        omega = dsp.P_s @ plus[:, 0] if norm(dsp.P_s @ plus[:, 0]) > 1e-6 else dsp.P_s @ plus[:, 1]
        r = state_condition_check(omega, c)
        assert r.krein_invariant
        assert r.values == (True, True, True)

    def test_non_stationary_vector(self, projection_complex):
        c = projection_complex
        dsp = dsp_decompose(c.Q)
        plus, minus = _invariant_vectors(c.J_T)
        for V in (plus, minus):
            for k in range(V.shape[1]):
                v = V[:, k]
                if norm(dsp.P_s @ v - v) > 1e-6:
                    r = state_condition_check(v, c)
                    assert r.krein_invariant
                    assert r.values == (False, False, False)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-1, 1), min_size=8, max_size=8), st.booleans())
    def test_conditions_agree_on_invariant_vectors(self, su2_charge, coeffs, positive):
        plus, minus = _invariant_vectors(su2_charge.J_T)
        V = plus if positive else minus
        c = np.array(coeffs[: V.shape[1]]) + 0j
        if np.linalg.norm(c) < 1e-3:
            return
        r = state_condition_check(V @ c, su2_charge)
        assert r.krein_invariant
        assert len(set(r.values)) == 1

    @pytest.fixture(scope="class")
    @staticmethod
    def su2_charge():
        from brstlab import ConstraintSystem, build_berezin
        from .conftest import PAULI, levi_civita

        return build_hamiltonian_Q(ConstraintSystem([p / 2 for p in PAULI], levi_civita()), build_berezin(3))
