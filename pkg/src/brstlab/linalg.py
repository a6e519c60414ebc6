"""Dense complex linear algebra over Krein spaces.

Every rank decision in the package goes through :func:`numerical_rank`, so the
whole library shares one cutoff policy: a singular value counts as zero when it
is at most ``rank_rel * sigma_max``, or when ``sigma_max`` itself is at most
``abs``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionError, NotHermitianError, RankAmbiguityError


@dataclass(frozen=True)
class Tolerance:
    """Absolute residual tolerance plus relative singular-value cutoff."""

    abs: float = 1e-10
    rank_rel: float = 1e-9

    def __post_init__(self):
        for name in ("abs", "rank_rel"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"tolerance {name} must be finite and nonnegative, got {value}")


DEFAULT_TOL = Tolerance()


def as_matrix(A, *, square: bool = False) -> np.ndarray:
    """Validate and convert input to a finite complex 2-d array."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got an array of shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains NaN or Inf entries")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def dagger(A: np.ndarray) -> np.ndarray:
    """Hilbert adjoint (conjugate transpose)."""
    return A.conj().T


def opnorm(A: np.ndarray) -> float:
    """Spectral norm; zero for empty arrays."""
    A = np.asarray(A)
    if A.size == 0 or not np.any(A):
        return 0.0
    if min(A.shape) <= 128 or A.ndim != 2:
        return float(np.linalg.norm(A, 2))
    # the largest Gram eigenvalue is much cheaper than a full SVD
    gram = dagger(A) @ A if A.shape[0] >= A.shape[1] else A @ dagger(A)
    return float(np.sqrt(max(np.linalg.eigvalsh(gram)[-1], 0.0)))


def kron_all(*factors) -> np.ndarray:
    """Kronecker product of several matrices, leftmost factor outermost."""
    return reduce(np.kron, factors)


def commutator(A, B):
    return A @ B - B @ A


def anticommutator(A, B):
    return A @ B + B @ A


@dataclass(frozen=True, eq=False)
class KreinSpace:
    """Finite-dimensional Krein space given by its fundamental symmetry."""

    J: np.ndarray
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        J = as_matrix(self.J, square=True)
        n = J.shape[0]
        if opnorm(J @ J - np.eye(n)) > self.tol.abs * 10 * max(1, n):
            raise ValueError("fundamental symmetry must square to the identity")
        if opnorm(J - dagger(J)) > self.tol.abs * 10 * max(1, n):
            raise NotHermitianError("fundamental symmetry must be Hermitian")
        object.__setattr__(self, "J", J)

    @property
    def dim(self) -> int:
        return self.J.shape[0]

    def inner(self, x, y) -> complex:
        """Indefinite form, antilinear in the first slot."""
        return complex(np.vdot(x, self.J @ y))

    @classmethod
    def hilbert(cls, n: int) -> "KreinSpace":
        return cls(np.eye(n, dtype=complex))


def krein_adjoint(A, K: KreinSpace) -> np.ndarray:
    """Adjoint with respect to the indefinite form: ``J A* J``."""
    A = as_matrix(A, square=True)
    if A.shape[0] != K.dim:
        raise DimensionError(f"operator of size {A.shape[0]} on a Krein space of dim {K.dim}")
    return K.J @ dagger(A) @ K.J


def _rank_cutoff(s: np.ndarray, tol: Tolerance) -> float:
    smax = float(s[0]) if s.size else 0.0
    if smax <= tol.abs:
        return np.inf
    return tol.rank_rel * smax


def numerical_rank(s: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above the shared cutoff (``s`` sorted descending)."""
    cutoff = _rank_cutoff(s, tol)
    if not np.isfinite(cutoff):
        return 0
    return int(np.count_nonzero(s > cutoff))


def check_rank_gap(s: np.ndarray, tol: Tolerance = DEFAULT_TOL, band: float = 1e3) -> None:
    """Raise when a singular value sits within ``band`` of the cutoff on either side."""
    cutoff = _rank_cutoff(s, tol)
    if not np.isfinite(cutoff):
        return
    close = s[(s > cutoff / band) & (s < cutoff * band)]
    if close.size:
        raise RankAmbiguityError(
            f"singular values {close.tolist()} straddle the rank cutoff {cutoff:.3e}",
            singular_values=close,
        )


def _svd(A: np.ndarray, full: bool):
    try:
        return np.linalg.svd(A, full_matrices=full)
    except np.linalg.LinAlgError:
        import scipy.linalg

        return scipy.linalg.svd(A, full_matrices=full, lapack_driver="gesvd")


def kernel_basis(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical nullspace of ``A``."""
    A = as_matrix(A)
    n = A.shape[1]
    if A.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    # the thin factorization already holds all n right singular vectors when A is tall
    _, s, Vh = _svd(A, full=A.shape[0] < n)
    r = numerical_rank(s, tol)
    return dagger(Vh[r:])


def range_basis(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical column space of ``A``."""
    A = as_matrix(A)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, s, _ = _svd(A, full=False)
    return U[:, : numerical_rank(s, tol)]


def projector(columns: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the span of orthonormal ``columns``."""
    P = columns @ dagger(columns)
    return (P + dagger(P)) / 2


def range_projection(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Hermitian idempotent onto the numerical column space of ``A``."""
    return projector(range_basis(A, tol))


def orthonormalize(columns, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis for the span of the given columns."""
    return range_basis(np.asarray(columns, dtype=complex), tol)


def hermitian_eig(A, tol: Tolerance = DEFAULT_TOL):
    """Eigenvalues (ascending, real) and orthonormal eigenvectors of a Hermitian matrix."""
    A = as_matrix(A, square=True)
    scale = max(1.0, opnorm(A))
    if opnorm(A - dagger(A)) > tol.abs * scale:
        raise NotHermitianError("hermitian_eig requires a Hermitian matrix")
    w, V = np.linalg.eigh((A + dagger(A)) / 2)
    return w, V


def span_residual(vectors: np.ndarray, basis: np.ndarray) -> float:
    """Largest distance of a column of ``vectors`` from the span of orthonormal ``basis``."""
    if vectors.shape[1] == 0:
        return 0.0
    if basis.shape[1] == 0:
        return float(np.max(np.linalg.norm(vectors, axis=0)))
    rest = vectors - basis @ (dagger(basis) @ vectors)
    return float(np.max(np.linalg.norm(rest, axis=0)))


def subspace_distance(V: np.ndarray, W: np.ndarray) -> float:
    """Mutual projection residual between two orthonormal column bases."""
    return max(span_residual(V, W), span_residual(W, V))


def intersect_columns(V: np.ndarray, W: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of span(V) ∩ span(W) for orthonormal bases V and W."""
    if V.shape[1] == 0 or W.shape[1] == 0:
        return np.zeros((V.shape[0], 0), dtype=complex)
    coeffs = kernel_basis(V - W @ (dagger(W) @ V), tol)
    return orthonormalize(V @ coeffs, tol)


def krein_signature(columns: np.ndarray, K: KreinSpace, tol: Tolerance = DEFAULT_TOL):
    """Counts (positive, negative, null) of the indefinite form restricted to a subspace.

    Returns the counts together with the orthonormal columns spanning the
    maximal positive part found by diagonalizing the restricted Gram matrix.
    """
    if columns.shape[1] == 0:
        return (0, 0, 0), columns
    gram = dagger(columns) @ K.J @ columns
    w, V = np.linalg.eigh((gram + dagger(gram)) / 2)
    cut = tol.abs * 100 * max(1.0, float(np.max(np.abs(w))))
    pos = w > cut
    neg = w < -cut
    counts = (int(pos.sum()), int(neg.sum()), int(w.size - pos.sum() - neg.sum()))
    return counts, columns @ V[:, pos]
