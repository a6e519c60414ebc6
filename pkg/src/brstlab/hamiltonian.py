"""Hamiltonian BRST complex for finitely many Hermitian constraints."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClosureError, NotHermitianError, ShapeError, UnsupportedError
from .ghosts import default_ghost_rep
from .linalg import (
    DEFAULT_TOL,
    KreinSpace,
    Tolerance,
    as_matrix,
    commutator,
    dagger,
    kernel_basis,
    krein_signature,
    opnorm,
    subspace_distance,
)


@dataclass(frozen=True, eq=False, init=False)
class ConstraintSystem:
    """Hermitian constraints closing under ``[G_a, G_b] = i Σ_c C[c][a][b] G_c``."""

    G: tuple
    C: np.ndarray
    tol: Tolerance = DEFAULT_TOL
    checks: dict = field(default_factory=dict)

    def __init__(self, G, C=None, tol: Tolerance = DEFAULT_TOL):
        mats = tuple(as_matrix(g, square=True) for g in G)
        if not mats:
            raise ShapeError("a constraint system needs at least one constraint")
        d = mats[0].shape[0]
        if any(g.shape != (d, d) for g in mats):
            raise ShapeError("all constraints must act on the same space")
        n = len(mats)
        C = np.zeros((n, n, n)) if C is None else np.asarray(C, dtype=float)
        if C.shape != (n, n, n):
            raise ShapeError(f"structure constants must have shape {(n, n, n)}, got {C.shape}")
        object.__setattr__(self, "G", mats)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "tol", tol)
        object.__setattr__(self, "checks", {})
        self._validate()

    @property
    def h0_dim(self) -> int:
        return self.G[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.G)

    @property
    def is_abelian(self) -> bool:
        return not np.any(self.C)

    def _validate(self) -> None:
        tol = self.tol
        scale = max([1.0] + [opnorm(g) for g in self.G])
        herm = max(opnorm(g - dagger(g)) for g in self.G)
        self.checks["hermitian"] = herm
        if herm > tol.abs * scale:
            raise NotHermitianError(f"constraints are not Hermitian (residual {herm:.3e})")

        flat = np.stack([g.reshape(-1) for g in self.G], axis=1)
        s = np.linalg.svd(flat, compute_uv=False)
        independent = bool(s[-1] > tol.rank_rel * max(s[0], tol.abs) and s[0] > tol.abs)
        self.checks["linearly_independent"] = independent

        C = self.C
        closure = 0.0
        for a in range(self.n):
            for b in range(self.n):
                rhs = 1j * sum(C[c, a, b] * self.G[c] for c in range(self.n))
                closure = max(closure, opnorm(commutator(self.G[a], self.G[b]) - rhs))
        self.checks["closure"] = closure
        if closure > tol.abs * scale**2 * 10:
            raise ClosureError(f"constraints do not close under the given structure constants ({closure:.3e})")

        antisym = max(
            np.max(np.abs(C + C.transpose(0, 2, 1))),
            np.max(np.abs(C + C.transpose(1, 0, 2))),
            np.max(np.abs(C + C.transpose(2, 1, 0))),
        )
        self.checks["antisymmetry"] = float(antisym)
        if antisym > tol.abs:
            raise ClosureError("structure constants must be antisymmetric in all indices")

        # f_{ab}^d f_{dc}^e + cyclic(a, b, c) = 0 with f_{ab}^c = C[c][a][b]
        jac = (
            np.einsum("dab,edc->abce", C, C)
            + np.einsum("dbc,eda->abce", C, C)
            + np.einsum("dca,edb->abce", C, C)
        )
        self.checks["jacobi"] = float(np.max(np.abs(jac))) if jac.size else 0.0
        if self.checks["jacobi"] > tol.abs:
            raise ClosureError("structure constants violate the Jacobi identity")


@dataclass(frozen=True, eq=False)
class BrstComplex:
    """Total space data for a BRST charge."""

    Q: np.ndarray
    J_T: np.ndarray
    grading: np.ndarray
    G_total: np.ndarray
    factors: dict
    checks: dict = field(default_factory=dict)

    @property
    def total_dim(self) -> int:
        return self.Q.shape[0]

    @property
    def krein(self) -> KreinSpace:
        return KreinSpace(self.J_T)

    def compress(self, embed: np.ndarray, label: str) -> "BrstComplex":
        """Restriction to an invariant subspace given by orthonormal columns."""
        def r(X):
            return dagger(embed) @ X @ embed

        factors = dict(self.factors, restricted_to=label)
        out = BrstComplex(r(self.Q), r(self.J_T), r(self.grading), r(self.G_total), factors)
        leak = max(
            opnorm(X @ embed - embed @ r(X)) for X in (self.Q, dagger(self.Q), self.J_T, self.grading, self.G_total)
        )
        out.checks["invariance"] = leak
        out.checks.update(complex_residuals(out))
        return out


def complex_residuals(cplx: BrstComplex) -> dict:
    """Residuals of nilpotency, Krein symmetry, ghost number one and oddness."""
    Q, J, Gam, G = cplx.Q, cplx.J_T, cplx.grading, cplx.G_total
    return {
        "nilpotency": opnorm(Q @ Q),
        "krein_symmetry": opnorm(Q - J @ dagger(Q) @ J),
        "ghost_number": opnorm(commutator(G, Q) - Q),
        "odd": opnorm(Gam @ Q @ Gam + Q),
    }


def _check_ghosts(sys: ConstraintSystem, ghosts):
    if ghosts is None:
        ghosts = default_ghost_rep(sys.n)
    if ghosts.m != sys.n:
        raise ShapeError(f"{ghosts.m} ghost pairs for {sys.n} constraints")
    return ghosts


def build_hamiltonian_Q(sys: ConstraintSystem, ghosts=None, tol: Tolerance = DEFAULT_TOL) -> BrstComplex:
    """Charge Σ G_a⊗η_a − (i/2) Σ C[c][a][b] 1⊗η_a η_b ρ_c."""
    ghosts = _check_ghosts(sys, ghosts)
    one = np.eye(sys.h0_dim)
    etas = [ghosts.eta(a) for a in range(1, sys.n + 1)]
    rhos = [ghosts.rho(a) for a in range(1, sys.n + 1)]
    Q = sum(np.kron(sys.G[a], etas[a]) for a in range(sys.n))
    cubic = np.zeros((ghosts.dim, ghosts.dim), dtype=complex)
    for a in range(sys.n):
        for b in range(sys.n):
            for c in range(sys.n):
                if sys.C[c, a, b]:
                    cubic += sys.C[c, a, b] * etas[a] @ etas[b] @ rhos[c]
    Q = Q - 0.5j * np.kron(one, cubic)
    cplx = BrstComplex(
        Q=Q,
        J_T=np.kron(one, ghosts.fundamental_symmetry),
        grading=np.kron(one, ghosts.grading),
        G_total=np.kron(one, ghosts.ghost_number),
        factors={"kind": "hamiltonian", "matter_dim": sys.h0_dim, "ghost_rep": ghosts.kind,
                 "ghost_dim": ghosts.dim, "ghost_pairs": ghosts.m},
    )
    cplx.checks.update(complex_residuals(cplx))
    scale = max(1.0, opnorm(Q) ** 2)
    if cplx.checks["nilpotency"] > tol.abs * scale:
        raise ClosureError(f"charge does not square to zero (residual {cplx.checks['nilpotency']:.3e})")
    return cplx


def delta_operator(cplx: BrstComplex) -> np.ndarray:
    """Laplacian Q Q* + Q* Q."""
    Q = cplx.Q
    D = Q @ dagger(Q) + dagger(Q) @ Q
    return (D + dagger(D)) / 2


def sigma_operators(sys: ConstraintSystem, ghosts=None) -> list[np.ndarray]:
    """Σ_a = −1 ⊗ i Σ_{b,c} C[c][a][b] η_b ρ_c."""
    ghosts = _check_ghosts(sys, ghosts)
    one = np.eye(sys.h0_dim)
    etas = [ghosts.eta(a) for a in range(1, sys.n + 1)]
    rhos = [ghosts.rho(a) for a in range(1, sys.n + 1)]
    out = []
    for a in range(sys.n):
        acc = np.zeros((ghosts.dim, ghosts.dim), dtype=complex)
        for b in range(sys.n):
            for c in range(sys.n):
                if sys.C[c, a, b]:
                    acc += sys.C[c, a, b] * etas[b] @ rhos[c]
        out.append(-1j * np.kron(one, acc))
    return out


def abelian_laplacian_form(sys: ConstraintSystem, ghosts=None) -> np.ndarray:
    """Σ_a G_a² ⊗ 1."""
    ghosts = _check_ghosts(sys, ghosts)
    return np.kron(sum(g @ g for g in sys.G), np.eye(ghosts.dim))


def nonabelian_laplacian_form(sys: ConstraintSystem, ghosts=None) -> np.ndarray:
    """½ Σ G_a G_a ⊗ 1 + ½ Σ (G_a ⊗ 1 + Σ_a)(G_a ⊗ 1 + Σ_a)."""
    ghosts = _check_ghosts(sys, ghosts)
    one_g = np.eye(ghosts.dim)
    sigmas = sigma_operators(sys, ghosts)
    out = 0.5 * np.kron(sum(g @ g for g in sys.G), one_g)
    for g, s in zip(sys.G, sigmas):
        shifted = np.kron(g, one_g) + s
        out = out + 0.5 * shifted @ shifted
    return out


def constraint_kernel(sys: ConstraintSystem, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the common kernel of all constraints."""
    return kernel_basis(np.concatenate(sys.G, axis=0), tol)


@dataclass
class MCPSReport:
    dirac_dim: int
    brst_dim: int
    ghost_dim: int
    ratio: float | None
    product_residual: float
    signature: tuple
    positive_part_dim: int

    def to_dict(self) -> dict:
        return {
            "dirac_dim": self.dirac_dim,
            "brst_dim": self.brst_dim,
            "ghost_dim": self.ghost_dim,
            "ratio": self.ratio,
            "product_residual": self.product_residual,
            "signature": list(self.signature),
            "positive_part_dim": self.positive_part_dim,
        }


def mcps_report(cplx: BrstComplex, sys: ConstraintSystem, tol: Tolerance = DEFAULT_TOL) -> MCPSReport:
    """Compare the Dirac kernel with ker Δ for an abelian system.

    ``positive_part_dim`` is the size of a maximal positive subspace of ker Δ.
    It is reported for inspection only and is not treated as a physical space.
    """
    if not sys.is_abelian:
        raise UnsupportedError("the multiple-copies report covers abelian constraints only")
    ghost_dim = cplx.factors["ghost_dim"]
    dirac = constraint_kernel(sys, tol)
    brst = kernel_basis(delta_operator(cplx), tol)
    expected = np.kron(dirac, np.eye(ghost_dim))
    residual = subspace_distance(brst, expected) if brst.shape[1] == expected.shape[1] else float("inf")
    counts, positive = krein_signature(brst, cplx.krein, tol)
    ratio = brst.shape[1] / dirac.shape[1] if dirac.shape[1] else None
    return MCPSReport(dirac.shape[1], brst.shape[1], ghost_dim, ratio, residual, counts, positive.shape[1])
