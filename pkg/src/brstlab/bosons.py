"""Truncated bosonic Fock–Krein sector, the finite abelian bosonic BRST charge,
the Gupta–Bleuler comparison, and the charge that couples Hamiltonian
constraints to a bosonic sector.

One-particle basis order is ``[D_t, D_1, D_2]``. The one-particle fundamental
symmetry is the identity on ``D_t`` and swaps the j-th vector of ``D_1`` with
the j-th vector of ``D_2``. Annihilators are taken with respect to the
indefinite form, ``a(f) = b(Jf)``, where ``b`` is the usual Hilbert
annihilator. Then ``a(f)`` for ``f`` in ``D_1`` removes a ``D_2`` quantum.

The Fock space keeps occupation states of total number at most ``cutoff``.
Creators send the top sector to zero, so canonical relations hold exactly on
the guard subspace of total number at most ``cutoff - guard``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import comb

import numpy as np

from .errors import ShapeError, SizeError, UnsupportedError
from .hamiltonian import BrstComplex, ConstraintSystem, complex_residuals
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    commutator,
    dagger,
    kernel_basis,
    opnorm,
    orthonormalize,
    subspace_distance,
)

MAX_ONE_PARTICLE = 6
MAX_FOCK_DIM = 4096


def _occupation_states(n_modes: int, cutoff: int) -> list[tuple[int, ...]]:
    states = [s for s in product(range(cutoff + 1), repeat=n_modes) if sum(s) <= cutoff]
    return sorted(states, key=lambda s: (sum(s), tuple(-x for x in s)))


@dataclass(frozen=True, eq=False)
class BosonicSector:
    dt_dim: int
    m: int
    cutoff: int
    states: tuple
    guard: int = 1

    @property
    def one_particle_dim(self) -> int:
        return self.dt_dim + 2 * self.m

    @property
    def fock_dim(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.fock_dim

    @cached_property
    def occupations(self) -> np.ndarray:
        return np.array(self.states, dtype=int).reshape(self.fock_dim, self.one_particle_dim)

    @cached_property
    def _index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def J_1p(self) -> np.ndarray:
        M, t, m = self.one_particle_dim, self.dt_dim, self.m
        J = np.zeros((M, M))
        J[:t, :t] = np.eye(t)
        J[t:t + m, t + m:] = np.eye(m)
        J[t + m:, t:t + m] = np.eye(m)
        return J

    @cached_property
    def mode_annihilators(self) -> tuple:
        """Hilbert annihilators of the one-particle basis vectors."""
        ops = []
        for i in range(self.one_particle_dim):
            b = np.zeros((self.fock_dim, self.fock_dim))
            for col, s in enumerate(self.states):
                if s[i]:
                    lowered = s[:i] + (s[i] - 1,) + s[i + 1:]
                    b[self._index[lowered], col] = np.sqrt(s[i])
            ops.append(b.astype(complex))
        return tuple(ops)

    @cached_property
    def J_b(self) -> np.ndarray:
        perm = np.argmax(self.J_1p, axis=0)
        J = np.zeros((self.fock_dim, self.fock_dim), dtype=complex)
        for col, s in enumerate(self.states):
            image = [0] * self.one_particle_dim
            for i, n in enumerate(s):
                image[perm[i]] = n
            J[self._index[tuple(image)], col] = 1.0
        return J

    @cached_property
    def number(self) -> np.ndarray:
        return np.diag(self.occupations.sum(axis=1).astype(complex))

    @property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.fock_dim, dtype=complex)
        v[0] = 1.0
        return v

    @cached_property
    def guard_basis(self) -> np.ndarray:
        keep = np.flatnonzero(self.occupations.sum(axis=1) <= self.cutoff - self.guard)
        return np.eye(self.fock_dim, dtype=complex)[:, keep]

    # one-particle vectors ---------------------------------------------

    def unit(self, i: int) -> np.ndarray:
        e = np.zeros(self.one_particle_dim, dtype=complex)
        e[i] = 1.0
        return e

    def constraint_vector(self, j: int) -> np.ndarray:
        """j-th basis vector of D_1 (1-based)."""
        return self.unit(self.dt_dim + j - 1)

    def partner_vector(self, j: int) -> np.ndarray:
        """j-th basis vector of D_2 (1-based)."""
        return self.unit(self.dt_dim + self.m + j - 1)

    def physical_vector(self, k: int) -> np.ndarray:
        """k-th basis vector of D_t (1-based)."""
        return self.unit(k - 1)

    # ladder operators and fields --------------------------------------

    def hilbert_annihilator(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=complex)
        out = np.zeros((self.fock_dim, self.fock_dim), dtype=complex)
        for gi, b in zip(g, self.mode_annihilators):
            if gi != 0:
                out += np.conj(gi) * b
        return out

    def annihilator(self, f) -> np.ndarray:
        """a(f) = b(J f): annihilator with respect to the indefinite form."""
        return self.hilbert_annihilator(self.J_1p @ np.asarray(f, dtype=complex))

    def creator(self, f) -> np.ndarray:
        """a*(f), the Hilbert adjoint of a(f)."""
        return dagger(self.annihilator(f))

    def krein_creator(self, f) -> np.ndarray:
        """Krein adjoint of a(f), equal to a(Jf)*."""
        return self.creator(self.J_1p @ np.asarray(f, dtype=complex))

    def field(self, f) -> np.ndarray:
        """A(f) = (a(f) + a(Jf)*) / √2."""
        return (self.annihilator(f) + self.krein_creator(f)) / np.sqrt(2)

    def symplectic_form(self, f, g) -> float:
        """σ(f, g) = Im⟪f, g⟫, so that [A(f), A(g)] = i σ(f, g) on the guard subspace."""
        return float(np.imag(np.vdot(f, self.J_1p @ np.asarray(g, dtype=complex))))

    def gamma_projection(self, keep) -> np.ndarray:
        """Second quantization of the coordinate projection onto the modes in ``keep``."""
        mask = np.zeros(self.one_particle_dim, dtype=bool)
        mask[list(keep)] = True
        diag = np.all(self.occupations[:, ~mask] == 0, axis=1)
        return np.diag(diag.astype(complex))

    def ccr_residuals(self) -> dict:
        """Canonical relations of the Krein annihilators, restricted to the guard subspace."""
        W = self.guard_basis
        M = self.one_particle_dim
        a = [self.annihilator(self.unit(i)) for i in range(M)]
        mixed = plain = 0.0
        for i in range(M):
            for j in range(M):
                target = np.eye(self.fock_dim) if i == j else 0.0
                mixed = max(mixed, opnorm((commutator(a[i], dagger(a[j])) - target) @ W))
                plain = max(plain, opnorm(commutator(a[i], a[j]) @ W))
        return {"canonical": mixed, "annihilators_commute": plain,
                "vacuum_fixed": float(np.linalg.norm(self.J_b @ self.vacuum - self.vacuum)),
                "involution": opnorm(self.J_b @ self.J_b - np.eye(self.fock_dim)),
                "guard_dim": W.shape[1]}


def build_bosonic_sector(dt_dim: int, m: int, cutoff: int, guard: int = 1) -> BosonicSector:
    """Truncated Fock space over D_t ⊕ D_1 ⊕ D_2."""
    if dt_dim < 0 or m < 0 or cutoff < 2:
        raise SizeError("need dt_dim ≥ 0, m ≥ 0 and cutoff ≥ 2")
    M = dt_dim + 2 * m
    if M == 0 or M > MAX_ONE_PARTICLE:
        raise SizeError(f"one-particle dimension must be in 1..{MAX_ONE_PARTICLE}, got {M}")
    if comb(M + cutoff, cutoff) > MAX_FOCK_DIM:
        raise SizeError(f"truncated Fock dimension {comb(M + cutoff, cutoff)} exceeds {MAX_FOCK_DIM}")
    return BosonicSector(dt_dim, m, cutoff, tuple(_occupation_states(M, cutoff)), guard)


def ghost_vector(sector: BosonicSector, v) -> np.ndarray:
    """Ghost one-particle vector matching a vector in D_1 ⊕ D_2.

    Ghost modes 1..m carry the D_2 components and modes m+1..2m the D_1
    components, so the two one-particle fundamental symmetries agree.
    """
    v = np.asarray(v, dtype=complex)
    t, m = sector.dt_dim, sector.m
    if np.any(v[:t]):
        raise ShapeError("ghost test functions must lie in D_1 ⊕ D_2")
    return np.concatenate([v[t + m:], v[t:t + m]])


@dataclass(frozen=True, eq=False)
class TruncatedComplex(BrstComplex):
    """BRST data on a truncated space, with the guard subspace where identities are exact."""

    guard: np.ndarray | None = None
    invariant_sector: np.ndarray | None = None
    sector_labels: np.ndarray | None = None

    def guard_residuals(self) -> dict:
        W, Q, J = self.guard, self.Q, self.J_T
        return {
            "guard_nilpotency": opnorm(Q @ Q @ W),
            "guard_krein_symmetry": opnorm((Q - J @ dagger(Q) @ J) @ W),
            "guard_dim": W.shape[1],
        }

    def sector_complex(self) -> BrstComplex:
        """Exact restriction to a subspace that Q, Q*, J and the gradings preserve.

        ``sector_labels`` then lists ghost number and conserved excitation
        number for each retained basis vector.
        """
        if self.invariant_sector is None:
            raise UnsupportedError("this charge has no finite invariant sector")
        return self.compress(self.invariant_sector, "conserved excitation number")


@dataclass(frozen=True, eq=False)
class CombinedComplex(TruncatedComplex):
    """Matter ⊗ boson ⊗ ghost complex of the coupled charge."""


def _default_rotation(m: int, rotation) -> np.ndarray:
    U = np.eye(m, dtype=complex) if rotation is None else np.asarray(rotation, dtype=complex)
    if U.shape != (m, m) or opnorm(dagger(U) @ U - np.eye(m)) > 1e-10:
        raise ShapeError("D_1 basis change must be an m×m unitary")
    return U


def _d1_basis(sector: BosonicSector, U: np.ndarray) -> list[np.ndarray]:
    return [sum(U[k, j] * sector.constraint_vector(k + 1) for k in range(sector.m)) for j in range(sector.m)]


def build_ko_abelian_Q(sector: BosonicSector, ghosts, rotation=None) -> TruncatedComplex:
    """Q = Σ_j a*(J f_j) ⊗ c(J f_j) + a(f_j) ⊗ c*(f_j) for an orthonormal basis f_j of D_1."""
    if ghosts.kind != "full" or ghosts.m != sector.m:
        raise ShapeError("the bosonic charge needs a full ghost representation with one pair per D_1 vector")
    U = _default_rotation(sector.m, rotation)
    J1 = sector.J_1p
    Q = np.zeros((sector.dim * ghosts.dim,) * 2, dtype=complex)
    for f in _d1_basis(sector, U):
        Jf = J1 @ f
        Q += np.kron(sector.creator(Jf), ghosts.annihilate(ghost_vector(sector, Jf)))
        Q += np.kron(sector.annihilator(f), ghosts.create(ghost_vector(sector, f)))

    one_b = np.eye(sector.dim)
    totals = sector.occupations.sum(axis=1)[:, None] + ghosts.occupations.sum(axis=1)[None, :]
    keep = np.flatnonzero(totals.reshape(-1) <= sector.cutoff)
    ghost_numbers = np.broadcast_to(np.rint(np.diag(ghosts.G).real).astype(int)[None, :], totals.shape)
    cplx = TruncatedComplex(
        Q=Q,
        J_T=np.kron(sector.J_b, ghosts.J_g),
        grading=np.kron(one_b, ghosts.parity),
        G_total=np.kron(one_b, ghosts.G),
        factors={"kind": "ko_abelian", "dt_dim": sector.dt_dim, "m": sector.m, "cutoff": sector.cutoff,
                 "boson_dim": sector.dim, "ghost_dim": ghosts.dim, "ghost_rep": "full"},
        guard=np.kron(sector.guard_basis, np.eye(ghosts.dim)),
        invariant_sector=np.eye(Q.shape[0], dtype=complex)[:, keep],
        sector_labels=np.stack([ghost_numbers.reshape(-1)[keep], totals.reshape(-1)[keep]], axis=1),
    )
    cplx.checks.update(complex_residuals(cplx))
    cplx.checks.update(cplx.guard_residuals())
    return cplx


def ko_laplacian_form(sector: BosonicSector, ghosts) -> np.ndarray:
    """Σ_j [a*(Jf_j) a(Jf_j) + a*(f_j) a(f_j)] + [c*(Jf_j) c(Jf_j) + c*(f_j) c(f_j)]."""
    out = 0
    for j in range(1, sector.m + 1):
        f = sector.constraint_vector(j)
        Jf = sector.J_1p @ f
        bos = sector.creator(Jf) @ sector.annihilator(Jf) + sector.creator(f) @ sector.annihilator(f)
        gf, gJf = ghost_vector(sector, f), ghost_vector(sector, Jf)
        gh = ghosts.create(gJf) @ ghosts.annihilate(gJf) + ghosts.create(gf) @ ghosts.annihilate(gf)
        out = out + np.kron(bos, np.eye(ghosts.dim)) + np.kron(np.eye(sector.dim), gh)
    return out


def guarded_kernel(operator: np.ndarray, guard: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of {ψ in the guard subspace : operator ψ = 0}."""
    coeffs = kernel_basis(operator @ guard, tol)
    return guard @ coeffs


@dataclass
class GuptaBleulerReport:
    constraint_kernel_dim: int
    neutral_dim: int
    quotient_dim: int
    physical_fock_dim: int
    isometry_residual: float
    kernel_residual: float
    surjective: bool
    constraint_kernel: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "constraint_kernel_dim": self.constraint_kernel_dim,
            "neutral_dim": self.neutral_dim,
            "quotient_dim": self.quotient_dim,
            "physical_fock_dim": self.physical_fock_dim,
            "isometry_residual": self.isometry_residual,
            "kernel_residual": self.kernel_residual,
            "surjective": self.surjective,
        }


def gupta_bleuler_compare(sector: BosonicSector, tol: Tolerance = DEFAULT_TOL) -> GuptaBleulerReport:
    """Constraint kernel ∩ ker a(f), f in D_1, its neutral part, and the quotient map Γ(P_t)."""
    if sector.dt_dim < 1:
        raise SizeError("the comparison needs a nonzero physical one-particle space")
    if sector.m:
        stacked = np.concatenate([sector.annihilator(sector.constraint_vector(j)) for j in range(1, sector.m + 1)])
        Hp = kernel_basis(stacked, tol)
    else:
        Hp = np.eye(sector.dim, dtype=complex)
    gram = dagger(Hp) @ sector.J_b @ Hp
    gram = (gram + dagger(gram)) / 2
    neutral = Hp @ kernel_basis(gram, tol)

    gamma = sector.gamma_projection(range(sector.dt_dim))
    image = gamma @ Hp
    isometry = opnorm(gram - dagger(image) @ image)
    gamma_kernel = Hp @ kernel_basis(image, tol)
    kernel_residual = (subspace_distance(gamma_kernel, neutral)
                       if gamma_kernel.shape[1] == neutral.shape[1] else float("inf"))
    physical_dim = comb(sector.dt_dim + sector.cutoff, sector.cutoff)
    rank = orthonormalize(image, tol).shape[1]
    return GuptaBleulerReport(Hp.shape[1], neutral.shape[1], Hp.shape[1] - neutral.shape[1], physical_dim,
                              isometry, kernel_residual, rank == physical_dim, Hp)


def build_combined_Q(sys: ConstraintSystem, sector: BosonicSector, ghosts) -> CombinedComplex:
    """Σ_j [(G_j + √2 A(f_j)) ⊗ C(J f_j) + (G_j + √2 A(i f_j)) ⊗ C(i J f_j)]."""
    if not sys.is_abelian:
        raise UnsupportedError("the coupled charge is defined for commuting constraints only")
    if not (sys.n == sector.m == ghosts.m) or ghosts.kind != "full":
        raise ShapeError("need one D_1 vector and one full ghost pair per constraint")
    if sector.dt_dim != 0:
        raise ShapeError("the coupled construction uses a bosonic sector without physical modes")
    one_h, one_b = np.eye(sys.h0_dim), np.eye(sector.dim)
    Q = 0
    for j in range(sys.n):
        f = sector.constraint_vector(j + 1)
        Jf = sector.J_1p @ f
        for phase in (1.0, 1j):
            coeff = np.kron(sys.G[j], one_b) + np.sqrt(2) * np.kron(one_h, sector.field(phase * f))
            Q = Q + np.kron(coeff, ghosts.field(ghost_vector(sector, phase * Jf)))

    cplx = CombinedComplex(
        Q=Q,
        J_T=np.kron(np.kron(one_h, sector.J_b), ghosts.J_g),
        grading=np.kron(np.kron(one_h, one_b), ghosts.parity),
        G_total=np.kron(np.kron(one_h, one_b), ghosts.G),
        factors={"kind": "combined", "matter_dim": sys.h0_dim, "m": sector.m, "cutoff": sector.cutoff,
                 "boson_dim": sector.dim, "ghost_dim": ghosts.dim, "ghost_rep": "full"},
        guard=np.kron(np.kron(one_h, sector.guard_basis), np.eye(ghosts.dim)),
    )
    cplx.checks.update(complex_residuals(cplx))
    cplx.checks.update(cplx.guard_residuals())
    return cplx


def combined_vacuum_target(sys: ConstraintSystem, sector: BosonicSector, ghosts,
                           tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of (∩ ker G_j) ⊗ Ω_b ⊗ Ω_g."""
    phys = kernel_basis(np.concatenate(sys.G, axis=0), tol)
    return np.kron(np.kron(phys, sector.vacuum[:, None]), ghosts.vacuum[:, None])


@dataclass
class LadderKernelReport:
    holds: bool
    residual: float
    joint_dim: int
    split_dim: int


def ladder_kernel_check(G, sector: BosonicSector, g, tol: Tolerance = DEFAULT_TOL) -> LadderKernelReport:
    """Compare ker(G ⊗ 1 + 1 ⊗ a(g)) with ker(G ⊗ 1) ∩ ker(1 ⊗ a(g)) on the guard subspace."""
    G = np.asarray(G, dtype=complex)
    one_h, one_b = np.eye(G.shape[0]), np.eye(sector.dim)
    low = np.kron(one_h, sector.annihilator(g))
    lift = np.kron(G, one_b)
    W = np.kron(one_h, sector.guard_basis)
    joint = guarded_kernel(lift + low, W, tol)
    split = guarded_kernel(np.concatenate([lift, low]), W, tol)
    if joint.shape[1] != split.shape[1]:
        return LadderKernelReport(False, float("inf"), joint.shape[1], split.shape[1])
    residual = subspace_distance(joint, split)
    return LadderKernelReport(bool(residual <= 100 * tol.abs), residual, joint.shape[1], split.shape[1])
