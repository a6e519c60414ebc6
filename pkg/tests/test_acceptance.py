"""End-to-end acceptance checks at their stated tolerances.

Each test carries a ``criterion`` number; the terminal summary prints one
pass/fail line per criterion.
"""

import time

import numpy as np
import pytest

from brstlab import (
    ConstraintSystem,
    KreinSpace,
    OperatorSubspace,
    brst_physical_algebra,
    build_berezin,
    build_bosonic_sector,
    build_combined_Q,
    build_ghost_rep,
    build_hamiltonian_Q,
    build_ko_abelian_Q,
    compare_dirac_brst,
    commutant,
    delta_operator,
    dirac_constrain,
    dsp_decompose,
    gupta_bleuler_compare,
    ker_delta,
    phi_s,
    ran_delta,
    structure_theorem_check,
    superderivation_matrix,
)
from brstlab.bosons import combined_vacuum_target, guarded_kernel
from brstlab.dirac import isometry_rule, tensor_identity_rule
from brstlab.hamiltonian import abelian_laplacian_form, nonabelian_laplacian_form
from brstlab.linalg import dagger, opnorm, projector

from ._oracles import nullity, superderivation_by_units
from .conftest import PAULI, ZOO, levi_civita


TITLES = {
    1: "nilpotency of every charge family, under 5 s",
    2: "Laplacian closed forms",
    3: "exact/stationary/coexact split is complete and orthogonal on the example zoo",
    4: "structure theorem on the full matrix algebra, unit test in both directions",
    5: "single projection: Dirac dim 1 against BRST dim 2, ghost-number-zero witness",
    6: "bosonic charge removes ghosts and unphysical modes",
    7: "coupled charge has a single stationary copy and an equivalent algebra",
    8: "Berezin representation suite for m = 1..4",
    9: "Gupta–Bleuler quotient dimension equals the stationary dimension",
    10: "Ker δ dimensions agree with a row-reduction oracle",
}


def criterion(number):
    def mark(fn):
        fn.criterion = (number, TITLES[number])
        return fn

    return mark


norm = opnorm


P = np.diag([0.0, 1.0]).astype(complex)


def hamiltonian_examples():
    """Hamiltonian charges with total dimension at most 16."""
    su2 = ConstraintSystem([p / 2 for p in PAULI], levi_civita())
    return {
        "projection_berezin": build_hamiltonian_Q(ConstraintSystem([P]), build_berezin(1)),
        "projection_full": build_hamiltonian_Q(ConstraintSystem([P]), build_ghost_rep(1)),
        "unit_constraint": build_hamiltonian_Q(ConstraintSystem([np.eye(2)]), build_berezin(1)),
        "zero_constraint": build_hamiltonian_Q(ConstraintSystem([np.zeros((2, 2))]), build_berezin(1)),
        "spectrum_berezin": build_hamiltonian_Q(ConstraintSystem([np.diag([0.0, 1.0, 2.0, 1.0])]), build_berezin(1)),
        "su2_berezin": build_hamiltonian_Q(su2, build_berezin(3)),
    }


@pytest.fixture(scope="module")
def ko_photon():
    sector = build_bosonic_sector(1, 1, 3)
    cplx = build_ko_abelian_Q(sector, build_ghost_rep(1))
    sc = cplx.sector_complex()
    delta = superderivation_matrix(sc.Q, sc.grading, labels=cplx.sector_labels)
    dsp = dsp_decompose(sc.Q, sc.krein)
    return sector, cplx, sc, delta, dsp


@criterion(1)
def test_nilpotency():
    """Nilpotency of every charge family (guard-restricted for truncated ones), under 5 s"""
    start = time.perf_counter()
    su2 = ConstraintSystem([p / 2 for p in PAULI], levi_civita())
    for cplx in (
        build_hamiltonian_Q(ConstraintSystem([P]), build_berezin(1)),
        build_hamiltonian_Q(su2, build_berezin(3)),
        build_hamiltonian_Q(su2, build_ghost_rep(3)),
    ):
        assert norm(cplx.Q @ cplx.Q) <= 1e-10 * norm(cplx.Q) ** 2
    for dt in (0, 1):
        for m in (1, 2):
            c = build_ko_abelian_Q(build_bosonic_sector(dt, m, 3), build_ghost_rep(m))
            assert norm(c.Q @ c.Q @ c.guard) <= 1e-10 * norm(c.Q) ** 2
    c = build_combined_Q(ConstraintSystem([P]), build_bosonic_sector(0, 1, 3), build_ghost_rep(1))
    assert norm(c.Q @ c.Q @ c.guard) <= 1e-10 * norm(c.Q) ** 2
    assert time.perf_counter() - start < 5.0


@criterion(2)
def test_laplacian_closed_forms():
    """Laplacian matches the closed forms to 1e-10 relative"""
    sys = ConstraintSystem([P])
    for ghosts in (build_berezin(1), build_ghost_rep(1)):
        D = delta_operator(build_hamiltonian_Q(sys, ghosts))
        assert norm(D - np.kron(P @ P, np.eye(ghosts.dim))) <= 1e-10 * norm(D)
        assert norm(D - abelian_laplacian_form(sys, ghosts)) <= 1e-10 * norm(D)
    su2 = ConstraintSystem([p / 2 for p in PAULI], levi_civita())
    for ghosts in (build_berezin(3), build_ghost_rep(3)):
        D = delta_operator(build_hamiltonian_Q(su2, ghosts))
        assert norm(D - nonabelian_laplacian_form(su2, ghosts)) <= 1e-10 * norm(D)


@criterion(3)
@pytest.mark.parametrize("charge", ZOO, ids=repr)
def test_dsp_completeness(charge):
    """Exact, stationary and coexact projections are complete and orthogonal; Krein relations hold"""
    K = KreinSpace(charge.J)
    dsp = dsp_decompose(charge.Q, K)
    one = np.eye(charge.Q.shape[0])
    assert norm(dsp.P_d + dsp.P_s + dsp.P_p - one) <= 1e-9
    for A, B in ((dsp.P_d, dsp.P_s), (dsp.P_d, dsp.P_p), (dsp.P_s, dsp.P_p)):
        assert norm(A @ B) <= 1e-9
    J = charge.J
    assert norm(charge.Q - J @ dagger(charge.Q) @ J) <= 1e-10
    assert norm(J @ dsp.P_s @ J - dsp.P_s) <= 1e-9
    assert norm(J @ dsp.P_d @ J - dsp.P_p) <= 1e-9


@criterion(4)
@pytest.mark.parametrize("name", sorted(hamiltonian_examples()))
def test_structure_theorem(name):
    """Ran δ = Ker δ ∩ Ker Φ_s on the full matrix algebra; 1 ∈ Ran δ exactly when there is no stationary space"""
    cplx = hamiltonian_examples()[name]
    assert cplx.total_dim <= 16
    delta = superderivation_matrix(cplx.Q, cplx.grading)
    dsp = dsp_decompose(cplx.Q)
    report = structure_theorem_check(delta, dsp)
    assert report.residual <= 1e-8
    assert report.unit_in_range == (dsp.dims[1] == 0)


@criterion(4)
def test_unit_in_range_both_ways():
    """Both outcomes of the unit test occur among the examples"""
    outcomes = set()
    for cplx in hamiltonian_examples().values():
        image = ran_delta(superderivation_matrix(cplx.Q, cplx.grading))
        d = cplx.total_dim
        outcomes.add(image.residual(np.eye(d)) / np.sqrt(d) <= 1e-8)
    assert outcomes == {True, False}


@criterion(5)
def test_multiple_copies():
    """Single projection with one Berezin pair: Dirac dim 1 against BRST dim 2, with a ghost-number-zero witness"""
    sys = ConstraintSystem([P])
    ghosts = build_berezin(1)
    cplx = build_hamiltonian_Q(sys, ghosts)
    dsp = dsp_decompose(cplx.Q)
    dirac = dirac_constrain(sys)
    assert dirac.physical_dim == 1
    assert dsp.dims[1] == 2

    delta = superderivation_matrix(cplx.Q, cplx.grading)
    witness = np.kron(np.diag([1.0, 0.0]), ghosts.eta(1) @ ghosts.rho(1))
    assert norm(cplx.G_total @ witness - witness @ cplx.G_total) <= 1e-12
    assert ker_delta(delta).contains(witness)
    image = OperatorSubspace.span([np.kron(A, np.eye(2)) for A in dirac.physical_algebra.basis])
    reference = image.plus(ran_delta(delta))
    assert reference.residual(witness) / np.linalg.norm(witness) > 1e-6


@criterion(6)
def test_ghost_removal_vacuum_only():
    """No physical modes: the stationary space is the vacuum and the physical algebra is the scalars"""
    sector = build_bosonic_sector(0, 1, 3)
    cplx = build_ko_abelian_Q(sector, build_ghost_rep(1))
    sc = cplx.sector_complex()
    dsp = dsp_decompose(sc.Q, sc.krein)
    assert dsp.dims[1] == 1
    delta = superderivation_matrix(sc.Q, sc.grading, labels=cplx.sector_labels)
    image = phi_s(ker_delta(delta), dsp)
    assert image.dim == 1
    assert image.contains(dsp.P_s)


@criterion(6)
def test_ghost_removal_one_mode(ko_photon):
    """One physical mode: the physical algebra is the full algebra of the physical Fock space"""
    sector, cplx, sc, delta, dsp = ko_photon
    phys = brst_physical_algebra(delta, dsp, K=sc.krein)
    only_dt = np.all(sector.occupations[:, 1:] == 0, axis=1)
    flat = np.kron(only_dt.astype(complex), build_ghost_rep(1).vacuum)
    U = dagger(cplx.invariant_sector) @ np.eye(cplx.total_dim)[:, np.flatnonzero(flat)]
    n = U.shape[1]
    assert dsp.dims[1] == n == 4
    assert phys.dim == n * n
    matter = dirac_constrain(ConstraintSystem([np.zeros((n, n))]))
    cmp = compare_dirac_brst(matter, phys.algebra, isometry_rule(U), dsp.P_s, "A ↦ U A U*")
    assert cmp.verdict == "equal"


@criterion(7)
def test_combined_charge():
    """Coupled charge: one stationary vector, the constrained vacuum, and an equivalent physical algebra"""
    sys = ConstraintSystem([P])
    sector, ghosts = build_bosonic_sector(0, 1, 3), build_ghost_rep(1)
    cplx = build_combined_Q(sys, sector, ghosts)
    D = cplx.Q @ dagger(cplx.Q) + dagger(cplx.Q) @ cplx.Q
    kernel = guarded_kernel(D, cplx.guard)
    target = combined_vacuum_target(sys, sector, ghosts)
    assert kernel.shape[1] == 1
    assert norm(projector(kernel) - projector(target)) <= 1e-9

    P_s = projector(kernel)
    brst = OperatorSubspace.on_subspace(kernel)
    cmp = compare_dirac_brst(dirac_constrain(sys), brst, tensor_identity_rule(sector.dim * ghosts.dim), P_s,
                             "A ↦ A ⊗ 1 ⊗ 1")
    assert cmp.verdict == "equal"


@criterion(8)
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_berezin_suite(m):
    """Berezin representation: dimension, vacuum, ghost-number spectrum, neutral vacuum, irreducibility"""
    rep = build_berezin(m)
    assert rep.dim == 2**m
    omega = rep.omega_sf
    for j in range(1, m + 1):
        assert np.linalg.norm(rep.rho(j) @ omega) <= 1e-10
    spectrum = np.sort(np.linalg.eigvalsh(rep.G_sf))
    expected = np.sort([bin(k).count("1") - m / 2 for k in range(2**m)])
    assert np.max(np.abs(spectrum - expected)) <= 1e-10
    assert abs(np.vdot(omega, rep.J_bz @ omega)) <= 1e-10
    gens = [rep.eta(j) for j in range(1, m + 1)] + [rep.rho(j) for j in range(1, m + 1)]
    assert commutant(gens).dim == 1


@criterion(9)
@pytest.mark.parametrize("dt", [1, 2])
@pytest.mark.parametrize("cutoff", [2, 3])
def test_gupta_bleuler(dt, cutoff):
    """Gupta–Bleuler quotient dimension equals the stationary dimension"""
    sector = build_bosonic_sector(dt, 1, cutoff)
    gb = gupta_bleuler_compare(sector)
    sc = build_ko_abelian_Q(sector, build_ghost_rep(1)).sector_complex()
    assert gb.quotient_dim == dsp_decompose(sc.Q).dims[1]


@criterion(10)
@pytest.mark.parametrize("charge", [c for c in ZOO if c.Q.shape[0] <= 8]
                         + [build_hamiltonian_Q(ConstraintSystem([np.eye(2)]), build_berezin(1))], ids=repr)
def test_oracle(charge):
    """Ker δ dimension agrees with an independent row-reduction oracle"""
    Q, grading = (charge.Q, charge.grading)
    delta = superderivation_matrix(Q, grading)
    assert ker_delta(delta).dim == nullity(superderivation_by_units(Q, grading))
