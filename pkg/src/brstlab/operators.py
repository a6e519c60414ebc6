"""Linear subspaces of the matrix algebra and superoperators acting on it.

Matrices are vectorized row-major, so ``vec(X A Y) = kron(X, Y.T) @ vec(A)``.
In that convention the matrix units form the Hilbert–Schmidt orthonormal basis
in which every superoperator here is written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, SizeError
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    dagger,
    intersect_columns,
    kernel_basis,
    orthonormalize,
    range_basis,
    span_residual,
)

SUPEROPERATOR_MAX_DIM = 64


def vec(A: np.ndarray) -> np.ndarray:
    return np.asarray(A, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d)


def left_multiplication(X: np.ndarray) -> np.ndarray:
    """Superoperator A ↦ X A."""
    return np.kron(X, np.eye(X.shape[0]))


def right_multiplication(Y: np.ndarray) -> np.ndarray:
    """Superoperator A ↦ A Y."""
    return np.kron(np.eye(Y.shape[0]), Y.T)


def sandwich(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Superoperator A ↦ X A Y."""
    return np.kron(X, Y.T)


def adjoint_action(G: np.ndarray) -> np.ndarray:
    """Superoperator A ↦ [G, A]."""
    return left_multiplication(G) - right_multiplication(G)


def check_superoperator_size(d: int) -> None:
    if d > SUPEROPERATOR_MAX_DIM:
        raise SizeError(
            f"superoperator work is capped at ambient dimension {SUPEROPERATOR_MAX_DIM}, got {d}"
        )


@dataclass(frozen=True, eq=False)
class OperatorSubspace:
    """Hilbert–Schmidt orthonormal basis of a subspace of d×d matrices.

    ``columns`` holds the vectorized basis as a (d², k) array.
    """

    ambient_dim: int
    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=complex)
        if cols.ndim != 2 or cols.shape[0] != self.ambient_dim**2:
            raise DimensionError(
                f"basis array of shape {cols.shape} does not fit ambient dimension {self.ambient_dim}"
            )
        object.__setattr__(self, "columns", cols)

    # constructors -----------------------------------------------------

    @classmethod
    def span(cls, matrices, d: int | None = None, tol: Tolerance = DEFAULT_TOL) -> "OperatorSubspace":
        mats = [np.asarray(M, dtype=complex) for M in matrices]
        if d is None:
            if not mats:
                raise DimensionError("cannot infer the ambient dimension of an empty span")
            d = mats[0].shape[0]
        for M in mats:
            if M.shape != (d, d):
                raise DimensionError(f"matrix of shape {M.shape} in a span of {d}×{d} matrices")
        if not mats:
            return cls.empty(d)
        return cls(d, orthonormalize(np.stack([vec(M) for M in mats], axis=1), tol))

    @classmethod
    def from_vectors(cls, d: int, vectors: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> "OperatorSubspace":
        return cls(d, orthonormalize(vectors, tol))

    @classmethod
    def empty(cls, d: int) -> "OperatorSubspace":
        return cls(d, np.zeros((d * d, 0), dtype=complex))

    @classmethod
    def full(cls, d: int) -> "OperatorSubspace":
        return cls(d, np.eye(d * d, dtype=complex))

    @classmethod
    def scalars(cls, d: int) -> "OperatorSubspace":
        return cls(d, vec(np.eye(d))[:, None] / np.sqrt(d))

    @classmethod
    def on_subspace(cls, basis: np.ndarray) -> "OperatorSubspace":
        """All operators u_i u_j* built from an orthonormal column basis."""
        d, k = basis.shape
        cols = [vec(np.outer(basis[:, i], basis[:, j].conj())) for i in range(k) for j in range(k)]
        if not cols:
            return cls.empty(d)
        return cls(d, np.stack(cols, axis=1))

    # views ------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    @property
    def basis(self) -> list[np.ndarray]:
        d = self.ambient_dim
        return [unvec(self.columns[:, k], d) for k in range(self.dim)]

    def __len__(self) -> int:
        return self.dim

    # geometry ---------------------------------------------------------

    def residual(self, A: np.ndarray) -> float:
        """Hilbert–Schmidt distance of ``A`` from the subspace."""
        return span_residual(vec(A)[:, None], self.columns)

    def contains(self, A: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
        scale = max(1.0, float(np.linalg.norm(A)))
        return self.residual(A) <= 100 * tol.abs * scale

    def containment_residual(self, other: "OperatorSubspace") -> float:
        """Largest distance of a basis element of ``other`` from this subspace."""
        return span_residual(other.columns, self.columns)

    def distance(self, other: "OperatorSubspace") -> float:
        """Mutual projection residual; zero exactly when the spans agree."""
        return max(self.containment_residual(other), other.containment_residual(self))

    def intersect(self, other: "OperatorSubspace", tol: Tolerance = DEFAULT_TOL) -> "OperatorSubspace":
        return OperatorSubspace(self.ambient_dim, intersect_columns(self.columns, other.columns, tol))

    def plus(self, other: "OperatorSubspace", tol: Tolerance = DEFAULT_TOL) -> "OperatorSubspace":
        stacked = np.concatenate([self.columns, other.columns], axis=1)
        return OperatorSubspace.from_vectors(self.ambient_dim, stacked, tol)

    def map(self, fn, tol: Tolerance = DEFAULT_TOL) -> "OperatorSubspace":
        """Span of the images of the basis under a linear map on matrices."""
        images = [np.asarray(fn(B)) for B in self.basis]
        return OperatorSubspace.span(images, images[0].shape[0] if images else self.ambient_dim, tol)

    # algebraic closure checks -----------------------------------------

    def product_closure_residual(self, samples: int | None = None, seed: int = 0) -> float:
        """Largest distance of a product of basis elements from the span.

        With ``samples`` set, checks that many random pairs; otherwise all pairs.
        """
        B = self.basis
        if not B:
            return 0.0
        if samples is None:
            pairs = [(i, j) for i in range(len(B)) for j in range(len(B))]
        else:
            rng = np.random.default_rng(seed)
            pairs = rng.integers(0, len(B), size=(samples, 2)).tolist()
        return max(self.residual(B[i] @ B[j]) for i, j in pairs)

    def star_closure_residual(self) -> float:
        return max((self.residual(dagger(B)) for B in self.basis), default=0.0)

    def generated_algebra(self, tol: Tolerance = DEFAULT_TOL, unital: bool = True) -> "OperatorSubspace":
        """Smallest multiplicatively closed subspace containing this one."""
        current = self.plus(OperatorSubspace.scalars(self.ambient_dim), tol) if unital else self
        while True:
            B = current.basis
            products = [vec(X @ Y) for X in B for Y in B]
            if not products:
                return current
            grown = OperatorSubspace.from_vectors(
                self.ambient_dim, np.concatenate([current.columns, np.stack(products, axis=1)], axis=1), tol
            )
            if grown.dim == current.dim:
                return current
            current = grown


def label_blocks(labels) -> list[np.ndarray]:
    """Partition of vectorized matrix-unit indices by the label difference L_i − L_j.

    ``labels`` holds one row of integer labels per basis vector, for instance
    the diagonals of operators X with [X, Q] = c Q. A superoperator built from
    Q and diagonal gradings then maps each block into a single block.
    """
    L = np.asarray(labels)
    if L.ndim == 1:
        L = L[:, None]
    d = L.shape[0]
    diff = (L[:, None, :] - L[None, :, :]).reshape(d * d, -1)
    _, inverse = np.unique(diff, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    order = np.argsort(inverse, kind="stable")
    cuts = np.flatnonzero(np.diff(inverse[order])) + 1
    return np.split(order, cuts)


def _row_support(block: np.ndarray, floor: float) -> np.ndarray:
    return np.flatnonzero(np.any(np.abs(block) > floor, axis=1))


def _disjoint_images(S: np.ndarray, blocks, tol: Tolerance):
    """Row supports of S restricted to each column block, or None if two overlap."""
    floor = tol.abs * max(1.0, float(np.max(np.abs(S), initial=0.0)))
    seen = np.zeros(S.shape[0], dtype=bool)
    supports = []
    for cols in blocks:
        rows = _row_support(S[:, cols], floor)
        if seen[rows].any():
            return None
        seen[rows] = True
        supports.append(rows)
    return supports


def blockwise_kernel(S: np.ndarray, blocks, tol: Tolerance = DEFAULT_TOL) -> np.ndarray | None:
    """Nullspace of S assembled block by block, or None when the blocks interact."""
    supports = _disjoint_images(S, blocks, tol)
    if supports is None:
        return None
    n = S.shape[1]
    pieces = []
    for idx, rows in zip(blocks, supports):
        K = kernel_basis(S[np.ix_(rows, idx)], tol)
        if K.shape[1]:
            full = np.zeros((n, K.shape[1]), dtype=complex)
            full[idx] = K
            pieces.append(full)
    return np.concatenate(pieces, axis=1) if pieces else np.zeros((n, 0), dtype=complex)


def blockwise_range(S: np.ndarray, blocks, tol: Tolerance = DEFAULT_TOL) -> np.ndarray | None:
    """Orthonormal basis of ran S assembled block by block, or None when the blocks interact."""
    supports = _disjoint_images(S, blocks, tol)
    if supports is None:
        return None
    pieces = []
    for idx, rows in zip(blocks, supports):
        if rows.size == 0:
            continue
        R = range_basis(S[np.ix_(rows, idx)], tol)
        if R.shape[1]:
            full = np.zeros((S.shape[0], R.shape[1]), dtype=complex)
            full[rows] = R
            pieces.append(full)
    return np.concatenate(pieces, axis=1) if pieces else np.zeros((S.shape[0], 0), dtype=complex)


def _group_by_block(columns: np.ndarray, blocks, floor: float):
    owner = np.empty(columns.shape[0], dtype=int)
    for b, idx in enumerate(blocks):
        owner[idx] = b
    mask = np.abs(columns) > floor
    hi = np.where(mask, owner[:, None], -1).max(axis=0)
    lo = np.where(mask, owner[:, None], len(blocks)).min(axis=0)
    nonzero = hi >= 0
    if np.any(lo[nonzero] != hi[nonzero]):
        return None
    return [np.flatnonzero(hi == b) for b in np.unique(hi)]


def superoperator_kernel(S: np.ndarray, d: int, tol: Tolerance = DEFAULT_TOL,
                         restrict_to: OperatorSubspace | None = None,
                         blocks=None) -> OperatorSubspace:
    """Nullspace of a superoperator, optionally inside a given subspace.

    ``blocks`` from :func:`label_blocks` lets the nullspace be found one block
    at a time. The full computation is used whenever the blocks turn out to
    interact.
    """
    check_superoperator_size(d)
    if restrict_to is None:
        if blocks is not None:
            K = blockwise_kernel(S, blocks, tol)
            if K is not None:
                return OperatorSubspace(d, K)
        return OperatorSubspace(d, kernel_basis(S, tol))
    if restrict_to.dim == 0:
        return OperatorSubspace.empty(d)
    cols = restrict_to.columns
    if blocks is not None:
        groups = _group_by_block(cols, blocks, tol.abs * 1e-3)
        if groups is not None:
            images = [S @ cols[:, g] for g in groups]
            floor = tol.abs * max(1.0, float(np.max(np.abs(S), initial=0.0)))
            seen = np.zeros(S.shape[0], dtype=bool)
            disjoint = True
            for im in images:
                rows = _row_support(im, floor)
                if seen[rows].any():
                    disjoint = False
                    break
                seen[rows] = True
            if disjoint:
                pieces = [cols[:, g] @ kernel_basis(im, tol) for g, im in zip(groups, images)]
                return OperatorSubspace(d, np.concatenate(pieces, axis=1))
    coeffs = kernel_basis(S @ cols, tol)
    return OperatorSubspace.from_vectors(d, cols @ coeffs, tol)


def commutant(generators, tol: Tolerance = DEFAULT_TOL) -> OperatorSubspace:
    """All matrices commuting with every generator."""
    gens = [np.asarray(G, dtype=complex) for G in generators]
    if not gens:
        raise DimensionError("commutant of an empty generator list needs an explicit dimension")
    d = gens[0].shape[0]
    for G in gens:
        if G.shape != (d, d):
            raise DimensionError("generators must be square matrices of equal size")
    check_superoperator_size(d)
    stacked = np.concatenate([adjoint_action(G) for G in gens], axis=0)
    return OperatorSubspace(d, kernel_basis(stacked, tol))
