"""Fermionic ghost sector: CAR Fock representation and the Berezin representation.

The full representation lives on the Fermi–Fock space over 2m modes. Modes
``1..m`` carry the ghost half of the one-particle space and modes ``m+1..2m``
their partners under the one-particle fundamental symmetry, which swaps mode
``j`` with mode ``m+j``. Creation operators follow the Jordan–Wigner ordering
with mode 1 outermost, so occupation bit 1 is the most significant bit of a
basis index and the Fock vacuum has index 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import SizeError
from .linalg import DEFAULT_TOL, KreinSpace, Tolerance, dagger, hermitian_eig
from .operators import OperatorSubspace, check_superoperator_size, commutant, vec

FULL_MAX_PAIRS = 5
BEREZIN_MAX_PAIRS = 6

_LOWER = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
_SIGN = sp.csr_matrix(np.diag([1.0, -1.0]))
_ID2 = sp.identity(2, format="csr")


def _jordan_wigner(n_modes: int) -> tuple:
    ops = []
    for i in range(n_modes):
        factors = [_SIGN] * i + [_LOWER] + [_ID2] * (n_modes - i - 1)
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op.astype(complex).tocsr())
    return tuple(ops)


def _occupations(n_modes: int) -> np.ndarray:
    idx = np.arange(2**n_modes)
    shifts = np.arange(n_modes - 1, -1, -1)
    return (idx[:, None] >> shifts) & 1


def _mode_swap(m: int) -> np.ndarray:
    """Image of each 0-based mode under j ↔ m+j."""
    return np.concatenate([np.arange(m, 2 * m), np.arange(0, m)])


def _permutation_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def second_quantized_permutation(perm: np.ndarray) -> sp.csr_matrix:
    """Fock-space unitary sending c*(i) to c*(perm[i]) and fixing the vacuum."""
    n_modes = len(perm)
    occ = _occupations(n_modes)
    weights = 2 ** np.arange(n_modes - 1, -1, -1)
    rows, cols, vals = [], [], []
    for index, bits in enumerate(occ):
        occupied = np.flatnonzero(bits)
        images = perm[occupied]
        target = np.zeros(n_modes, dtype=int)
        target[images] = 1
        rows.append(int(target @ weights))
        cols.append(index)
        vals.append(_permutation_sign(images))
    dim = 2**n_modes
    return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(dim, dim))


@dataclass(frozen=True, eq=False)
class GhostRep:
    """Full CAR ghost representation for ``m`` ghost pairs.

    Operators are stored sparse; the dense accessors build the matrix on
    demand.
    """

    m: int
    annihilators: tuple
    swap: sp.csr_matrix

    kind = "full"

    @property
    def fock_dim(self) -> int:
        return 2 ** (2 * self.m)

    @property
    def dim(self) -> int:
        return self.fock_dim

    @property
    def vacuum_index(self) -> int:
        return 0

    @property
    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.fock_dim, dtype=complex)
        v[0] = 1.0
        return v

    def _check_mode(self, i: int) -> int:
        if not 1 <= i <= 2 * self.m:
            raise IndexError(f"mode {i} outside 1..{2 * self.m}")
        return i - 1

    def c_sparse(self, i: int) -> sp.csr_matrix:
        return self.annihilators[self._check_mode(i)]

    def c(self, i: int) -> np.ndarray:
        """Annihilator of mode ``i`` (1-based)."""
        return self.c_sparse(i).toarray()

    def cdag(self, i: int) -> np.ndarray:
        return dagger(self.c(i))

    @cached_property
    def occupations(self) -> np.ndarray:
        return _occupations(2 * self.m)

    @cached_property
    def one_particle_J(self) -> np.ndarray:
        n = 2 * self.m
        J = np.zeros((n, n))
        J[_mode_swap(self.m), np.arange(n)] = 1.0
        return J

    @cached_property
    def J_g(self) -> np.ndarray:
        return self.swap.toarray()

    @cached_property
    def number(self) -> np.ndarray:
        return np.diag(self.occupations.sum(axis=1).astype(complex))

    @cached_property
    def G(self) -> np.ndarray:
        """Ghost number: partner-mode count minus ghost-mode count."""
        occ = self.occupations
        partners = occ[:, self.m:].sum(axis=1)
        ghosts = occ[:, : self.m].sum(axis=1)
        return np.diag((partners - ghosts).astype(complex))

    @cached_property
    def parity(self) -> np.ndarray:
        return np.diag((-1.0) ** self.occupations.sum(axis=1)).astype(complex)

    # uniform interface shared with BerezinRep
    @property
    def ghost_number(self) -> np.ndarray:
        return self.G

    @property
    def fundamental_symmetry(self) -> np.ndarray:
        return self.J_g

    @property
    def grading(self) -> np.ndarray:
        return self.parity

    @property
    def krein(self) -> KreinSpace:
        return KreinSpace(self.J_g)

    def eta_sparse(self, j: int) -> sp.csr_matrix:
        self._check_pair(j)
        return (self.annihilators[j - 1] + self.annihilators[self.m + j - 1].getH()) / np.sqrt(2)

    def rho_sparse(self, j: int) -> sp.csr_matrix:
        self._check_pair(j)
        return (self.annihilators[self.m + j - 1] + self.annihilators[j - 1].getH()) / np.sqrt(2)

    def eta(self, j: int) -> np.ndarray:
        return self.eta_sparse(j).toarray()

    def rho(self, j: int) -> np.ndarray:
        return self.rho_sparse(j).toarray()

    def _check_pair(self, j: int) -> None:
        if not 1 <= j <= self.m:
            raise IndexError(f"ghost index {j} outside 1..{self.m}")

    def annihilate(self, g) -> np.ndarray:
        """c(g) = Σ conj(g_i) c(i); antilinear in the one-particle vector."""
        g = np.asarray(g, dtype=complex)
        out = sp.csr_matrix((self.fock_dim, self.fock_dim), dtype=complex)
        for gi, op in zip(g, self.annihilators):
            if gi != 0:
                out = out + np.conj(gi) * op
        return out.toarray()

    def create(self, g) -> np.ndarray:
        return dagger(self.annihilate(g))

    def field(self, g) -> np.ndarray:
        """Clifford field C(g) = (c(g) + c*(Jg)) / √2."""
        g = np.asarray(g, dtype=complex)
        return (self.annihilate(g) + self.create(self.one_particle_J @ g)) / np.sqrt(2)


def build_ghost_rep(m: int) -> GhostRep:
    """Full CAR ghost representation on 2m Jordan–Wigner modes."""
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= FULL_MAX_PAIRS:
        raise SizeError(f"number of ghost pairs must be in 1..{FULL_MAX_PAIRS}, got {m}")
    m = int(m)
    return GhostRep(m, _jordan_wigner(2 * m), second_quantized_permutation(_mode_swap(m)))


def eta(rep, j: int) -> np.ndarray:
    """Ghost field for pair ``j`` in either representation."""
    return rep.eta(j)


def rho(rep, j: int) -> np.ndarray:
    """Conjugate ghost field for pair ``j`` in either representation."""
    return rep.rho(j)


def ghost_grading(rep, n: int) -> OperatorSubspace:
    """Matrices A with [G, A] = n A, from the spectral decomposition of G."""
    G = rep.ghost_number
    d = G.shape[0]
    check_superoperator_size(d)
    w, V = hermitian_eig(G)
    levels = np.rint(w)
    cols = [
        vec(np.outer(V[:, i], V[:, k].conj()))
        for i in range(d)
        for k in range(d)
        if levels[i] - levels[k] == n
    ]
    if not cols:
        return OperatorSubspace.empty(d)
    return OperatorSubspace(d, np.stack(cols, axis=1))


def berezin_seed_vector(rep: GhostRep, sign: int = 1) -> np.ndarray:
    """ρ₁…ρ_m (η₁…η_m + sign · i^{m(m−1)/2}) Ω, unnormalized."""
    m = rep.m
    vac = rep.vacuum
    top = vac.copy()
    for j in range(m, 0, -1):
        top = rep.eta_sparse(j) @ top
    v = top + sign * (1j ** (m * (m - 1) // 2)) * vac
    for j in range(m, 0, -1):
        v = rep.rho_sparse(j) @ v
    return v


def _subset_order(m: int) -> list[tuple[int, ...]]:
    """Subsets of 1..m in binary-counter order; bit j−1 marks element j."""
    return [tuple(j + 1 for j in range(m) if (s >> j) & 1) for s in range(2**m)]


@dataclass(frozen=True, eq=False)
class BerezinRep:
    """Berezin representation of the restricted ghost algebra on 2^m dimensions."""

    m: int
    embed: np.ndarray
    eta_ops: tuple
    rho_ops: tuple
    G_sf: np.ndarray
    J_bz: np.ndarray
    invariance_residual: float

    kind = "berezin"
    omega_sf_index = 0

    @property
    def dim(self) -> int:
        return 2**self.m

    def eta(self, j: int) -> np.ndarray:
        self._check_pair(j)
        return self.eta_ops[j - 1]

    def rho(self, j: int) -> np.ndarray:
        self._check_pair(j)
        return self.rho_ops[j - 1]

    def _check_pair(self, j: int) -> None:
        if not 1 <= j <= self.m:
            raise IndexError(f"ghost index {j} outside 1..{self.m}")

    @property
    def omega_sf(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    @property
    def ghost_number(self) -> np.ndarray:
        return self.G_sf

    @property
    def fundamental_symmetry(self) -> np.ndarray:
        return self.J_bz

    @cached_property
    def grading(self) -> np.ndarray:
        """(−1) to the power of the number of ghost factors, i.e. of G_sf + m/2."""
        w, V = hermitian_eig(self.G_sf)
        signs = (-1.0) ** np.rint(w + self.m / 2)
        return (V * signs) @ dagger(V)

    @property
    def krein(self) -> KreinSpace:
        return KreinSpace(self.J_bz)

    def commutant(self, tol: Tolerance = DEFAULT_TOL) -> OperatorSubspace:
        gens = list(self.eta_ops) + list(self.rho_ops)
        return commutant(gens, tol)


def build_berezin(m: int) -> BerezinRep:
    """Berezin representation built inside the full ghost Fock space."""
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= BEREZIN_MAX_PAIRS:
        raise SizeError(f"number of ghost pairs must be in 1..{BEREZIN_MAX_PAIRS}, got {m}")
    m = int(m)
    rep = GhostRep(m, _jordan_wigner(2 * m), second_quantized_permutation(_mode_swap(m)))
    seed = berezin_seed_vector(rep)
    omega = seed / np.linalg.norm(seed)

    etas = [rep.eta_sparse(j) for j in range(1, m + 1)]
    rhos = [rep.rho_sparse(j) for j in range(1, m + 1)]
    vectors = []
    for subset in _subset_order(m):
        v = omega
        for j in reversed(subset):
            v = etas[j - 1] @ v
        vectors.append(v)
    S = np.stack(vectors, axis=1)
    E, R = np.linalg.qr(S)
    phases = np.diag(R) / np.abs(np.diag(R))
    E = E * phases

    def compress(op):
        return dagger(E) @ (op @ E)

    eta_ops = tuple(compress(op) for op in etas)
    rho_ops = tuple(compress(op) for op in rhos)
    G_sf = sum(e @ r for e, r in zip(eta_ops, rho_ops)) - (m / 2) * np.eye(2**m)
    JE = rep.swap @ E
    J_bz = dagger(E) @ JE
    leak = JE - E @ J_bz
    for op in etas + rhos:
        OE = op @ E
        leak = np.concatenate([leak, OE - E @ (dagger(E) @ OE)], axis=1)
    return BerezinRep(m, E, eta_ops, rho_ops, G_sf, J_bz, float(np.max(np.abs(leak))))


def default_ghost_rep(n_constraints: int):
    """Berezin for an odd number of constraints, full CAR for an even number."""
    return build_berezin(n_constraints) if n_constraints % 2 else build_ghost_rep(n_constraints)
