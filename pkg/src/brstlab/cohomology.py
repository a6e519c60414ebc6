"""dsp-decomposition, the BRST superderivation and its operator cohomology.

For a nilpotent charge Q the state space splits Hilbert-orthogonally into
``ran Q`` (exact), ``ker Q ∩ ker Q*`` (stationary) and ``ran Q*`` (coexact).
On matrices the superderivation ``δ(A) = Q A − Γ A Γ Q`` squares to zero, and
the compression ``Φ_s(A) = P_s A P_s`` onto the stationary part identifies
``Ker δ / Ran δ`` with ``Φ_s(Ker δ)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GradingError, NilpotencyError, StructureTheoremViolation
from .linalg import (
    DEFAULT_TOL,
    KreinSpace,
    Tolerance,
    as_matrix,
    check_rank_gap,
    dagger,
    kernel_basis,
    krein_signature,
    opnorm,
    projector,
    range_basis,
    span_residual,
    subspace_distance,
)
from .operators import (
    OperatorSubspace,
    blockwise_range,
    label_blocks,
    check_superoperator_size,
    left_multiplication,
    sandwich,
    superoperator_kernel,
)


@dataclass(frozen=True, eq=False)
class DspData:
    """Projections onto the exact, stationary and coexact subspaces."""

    P_d: np.ndarray
    P_s: np.ndarray
    P_p: np.ndarray
    stationary_basis: np.ndarray
    checks: dict = field(default_factory=dict)

    @property
    def dims(self) -> tuple[int, int, int]:
        r = lambda P: int(round(float(np.trace(P).real)))
        return r(self.P_d), r(self.P_s), r(self.P_p)


def dsp_decompose(Q, K: KreinSpace | None = None, tol: Tolerance = DEFAULT_TOL) -> DspData:
    """Split the space into ran Q ⊕ (ker Q ∩ ker Q*) ⊕ ran Q*."""
    Q = as_matrix(Q, square=True)
    n = Q.shape[0]
    scale = max(1.0, opnorm(Q) ** 2)
    nil = opnorm(Q @ Q)
    if nil > tol.abs * scale:
        raise NilpotencyError(f"charge does not square to zero (residual {nil:.3e})")

    check_rank_gap(np.linalg.svd(Q, compute_uv=False), tol)
    stacked = np.concatenate([Q, dagger(Q)], axis=0)
    check_rank_gap(np.linalg.svd(stacked, compute_uv=False), tol)

    d_basis = range_basis(Q, tol)
    p_basis = range_basis(dagger(Q), tol)
    s_basis = kernel_basis(stacked, tol)
    P_d, P_p, P_s = projector(d_basis), projector(p_basis), projector(s_basis)

    one = np.eye(n)
    checks = {
        "nilpotency": nil,
        "completeness": opnorm(P_d + P_s + P_p - one),
        "orthogonality": max(opnorm(P_d @ P_s), opnorm(P_d @ P_p), opnorm(P_s @ P_p)),
        "kernel_split": subspace_distance(kernel_basis(Q, tol), np.concatenate([s_basis, d_basis], axis=1))
        if d_basis.shape[1] + s_basis.shape[1] == kernel_basis(Q, tol).shape[1]
        else float("inf"),
    }
    if K is not None:
        J = K.J
        sym = opnorm(Q - J @ dagger(Q) @ J)
        checks["krein_symmetry"] = sym
        if sym <= tol.abs * max(1.0, opnorm(Q)):
            checks["krein_stationary"] = opnorm(J @ P_s @ J - P_s)
            checks["krein_exchange"] = opnorm(J @ P_d @ J - P_p)
    return DspData(P_d, P_s, P_p, s_basis, checks)


@dataclass
class PhysicalityReport:
    physical: bool
    residual: float
    signature: tuple

    def to_dict(self) -> dict:
        return {"physical": self.physical, "residual": self.residual, "signature": list(self.signature)}


def physicality_check(dsp: DspData, K: KreinSpace, tol: Tolerance = DEFAULT_TOL) -> PhysicalityReport:
    """Whether J P_s = P_s, with the signature of the form on ran P_s."""
    residual = opnorm(K.J @ dsp.P_s - dsp.P_s)
    counts, _ = krein_signature(dsp.stationary_basis, K, tol)
    return PhysicalityReport(residual <= 10 * tol.abs, residual, counts)


@dataclass(frozen=True, eq=False)
class Superderivation:
    """δ(A) = Q A − Γ A Γ Q, with its d²×d² matrix in the matrix-unit basis."""

    Q: np.ndarray
    grading: np.ndarray
    matrix: np.ndarray
    blocks: list | None = None

    @property
    def d(self) -> int:
        return self.Q.shape[0]

    def __call__(self, A: np.ndarray) -> np.ndarray:
        G = self.grading
        return self.Q @ A - G @ A @ G @ self.Q


def superderivation_matrix(Q, grading, tol: Tolerance = DEFAULT_TOL, labels=None) -> Superderivation:
    """Matrix of δ. Optional ``labels`` (one integer row per basis vector) name
    diagonal gradings that Q shifts; kernels and ranges are then found blockwise.
    """
    Q = as_matrix(Q, square=True)
    G = as_matrix(grading, square=True)
    if G.shape != Q.shape:
        raise GradingError("grading and charge act on different spaces")
    d = Q.shape[0]
    check_superoperator_size(d)
    if opnorm(G @ G - np.eye(d)) > tol.abs * 10:
        raise GradingError("grading operator must square to the identity")
    if opnorm(G @ Q @ G + Q) > tol.abs * max(1.0, opnorm(Q)):
        raise GradingError("charge must be odd under the grading")
    S = left_multiplication(Q) - sandwich(G, G @ Q)
    return Superderivation(Q, G, S, None if labels is None else label_blocks(labels))


def ker_delta(delta: Superderivation, restrict_to: OperatorSubspace | None = None,
              tol: Tolerance = DEFAULT_TOL) -> OperatorSubspace:
    """Ker δ, intersected with ``restrict_to`` when given."""
    return superoperator_kernel(delta.matrix, delta.d, tol, restrict_to, delta.blocks)


def ran_delta(delta: Superderivation, tol: Tolerance = DEFAULT_TOL) -> OperatorSubspace:
    check_superoperator_size(delta.d)
    if delta.blocks is not None:
        R = blockwise_range(delta.matrix, delta.blocks, tol)
        if R is not None:
            return OperatorSubspace(delta.d, R)
    return OperatorSubspace(delta.d, range_basis(delta.matrix, tol))


def ideal_residual(kernel: OperatorSubspace, image: OperatorSubspace, samples: int = 50, seed: int = 0) -> float:
    """Largest distance from Ran δ of products K·R and R·K over sampled basis pairs."""
    if kernel.dim == 0 or image.dim == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    Kb, Rb = kernel.basis, image.basis
    worst = 0.0
    for _ in range(samples):
        A = Kb[rng.integers(kernel.dim)]
        B = Rb[rng.integers(image.dim)]
        worst = max(worst, image.residual(A @ B), image.residual(B @ A))
    return worst


def phi_s(A, dsp: DspData, tol: Tolerance = DEFAULT_TOL):
    """Compression onto the stationary subspace, for a matrix or a subspace."""
    P = dsp.P_s
    if isinstance(A, OperatorSubspace):
        # work in coordinates V* B V on the stationary block, then lift back
        V = dsp.stationary_basis
        if V.shape[1] == 0 or A.dim == 0:
            return OperatorSubspace.empty(A.ambient_dim)
        coords = np.kron(dagger(V), V.T) @ A.columns
        return OperatorSubspace(A.ambient_dim, np.kron(V, V.conj()) @ range_basis(coords, tol))
    return P @ as_matrix(A, square=True) @ P


def phi_s_superoperator(dsp: DspData) -> np.ndarray:
    return sandwich(dsp.P_s, dsp.P_s)


def homomorphism_residual(kernel: OperatorSubspace, dsp: DspData, samples: int = 100, seed: int = 0) -> float:
    """max ‖Φ(AB) − Φ(A)Φ(B)‖ over sampled pairs from the basis of ``kernel``."""
    if kernel.dim == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    P = dsp.P_s
    B = kernel.basis
    worst = 0.0
    for _ in range(samples):
        X = B[rng.integers(kernel.dim)]
        Y = B[rng.integers(kernel.dim)]
        worst = max(worst, opnorm(P @ X @ Y @ P - (P @ X @ P) @ (P @ Y @ P)))
    return worst


def block_form_residual(kernel: OperatorSubspace, dsp: DspData) -> float:
    """max of ‖P_s B P_d‖, ‖P_p B P_d‖, ‖P_p B P_s‖ over the basis of Ker δ."""
    worst = 0.0
    for B in kernel.basis:
        worst = max(worst, opnorm(dsp.P_s @ B @ dsp.P_d), opnorm(dsp.P_p @ B @ dsp.P_d),
                    opnorm(dsp.P_p @ B @ dsp.P_s))
    return worst


@dataclass
class StructureReport:
    ker_dim: int
    ran_dim: int
    image_dim: int
    stationary_dim: int
    residual: float
    homomorphism_residual: float
    block_form_residual: float
    ideal_residual: float
    unit_distance: float
    unit_in_range: bool
    kernel: OperatorSubspace = field(repr=False)
    image: OperatorSubspace = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "ker_delta_dim": self.ker_dim,
            "ran_delta_dim": self.ran_dim,
            "phi_image_dim": self.image_dim,
            "stationary_dim": self.stationary_dim,
            "residual": self.residual,
            "homomorphism_residual": self.homomorphism_residual,
            "block_form_residual": self.block_form_residual,
            "ideal_residual": self.ideal_residual,
            "unit_distance": self.unit_distance,
            "unit_in_range": self.unit_in_range,
        }


def structure_theorem_check(delta: Superderivation, dsp: DspData, tol: Tolerance = DEFAULT_TOL) -> StructureReport:
    """Verify Ran δ = Ker δ ∩ Ker Φ_s on the full matrix algebra."""
    d = delta.d
    kernel = ker_delta(delta, tol=tol)
    image = ran_delta(delta, tol)
    phi_kernel = superoperator_kernel(phi_s_superoperator(dsp), d, tol, restrict_to=kernel, blocks=delta.blocks)
    threshold = 100 * tol.abs
    residual = image.distance(phi_kernel) if image.dim == phi_kernel.dim else float("inf")
    if residual > threshold:
        witness = _worst_element(image, phi_kernel)
        raise StructureTheoremViolation(
            f"Ran δ (dim {image.dim}) and Ker δ ∩ Ker Φ_s (dim {phi_kernel.dim}) differ, residual {residual:.3e}",
            witness=witness,
            residual=residual,
        )
    compressed = phi_s(kernel, dsp, tol)
    unit_distance = float(image.residual(np.eye(d)) / np.sqrt(d))
    return StructureReport(
        ker_dim=kernel.dim,
        ran_dim=image.dim,
        image_dim=compressed.dim,
        stationary_dim=dsp.dims[1],
        residual=residual,
        homomorphism_residual=homomorphism_residual(kernel, dsp),
        block_form_residual=block_form_residual(kernel, dsp),
        ideal_residual=ideal_residual(kernel, image),
        unit_distance=unit_distance,
        unit_in_range=bool(unit_distance <= threshold),
        kernel=kernel,
        image=compressed,
    )


def _worst_element(V: OperatorSubspace, W: OperatorSubspace) -> np.ndarray:
    best, worst = None, -1.0
    for A in V.basis:
        r = W.residual(A)
        if r > worst:
            best, worst = A, r
    for B in W.basis:
        r = V.residual(B)
        if r > worst:
            best, worst = B, r
    return best


@dataclass
class PhysicalAlgebraReport:
    algebra: OperatorSubspace = field(repr=False)
    dim: int = 0
    restrict_closed: bool = True
    star_residual: float = 0.0
    involution_residual: float = 0.0
    restriction_residual: float = 0.0
    restriction_consistent: bool = True
    method: str = "superoperator"

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "restrict_closed": self.restrict_closed,
            "star_residual": self.star_residual,
            "involution_residual": self.involution_residual,
            "restriction_residual": self.restriction_residual,
            "restriction_consistent": self.restriction_consistent,
            "method": self.method,
        }


def brst_physical_algebra(delta: Superderivation | None, dsp: DspData,
                          restrict_to: OperatorSubspace | None = None,
                          K: KreinSpace | None = None,
                          tol: Tolerance = DEFAULT_TOL) -> PhysicalAlgebraReport:
    """Φ_s(Ker δ ∩ restrict_to) together with closure and involution diagnostics.

    Without a restriction the answer is every operator on ran P_s, because
    P_s A P_s always lies in Ker δ. When ``delta`` is None this shortcut is
    used directly, which keeps large complexes out of superoperator work.
    """
    threshold = 100 * tol.abs
    if restrict_to is None and delta is None:
        algebra = OperatorSubspace.on_subspace(dsp.stationary_basis)
        return PhysicalAlgebraReport(algebra, algebra.dim, method="compression")

    d = delta.d
    closed = True
    everything = restrict_to is None
    if everything:
        restrict_to = OperatorSubspace.full(d)
    elif restrict_to.product_closure_residual(samples=200) > threshold:
        closed = False
        restrict_to = restrict_to.generated_algebra(tol)

    kernel = ker_delta(delta, None if everything else restrict_to, tol)
    algebra = phi_s(kernel, dsp, tol)
    full_image = ran_delta(delta, tol)

    involution = 0.0
    if K is not None:
        full_kernel = kernel if everything else ker_delta(delta, tol=tol)
        involution = max(span_residual(_krein_star(kernel, K.J), full_kernel.columns),
                         span_residual(_krein_star(full_image, K.J), full_image.columns))

    # Ran δ ∩ 𝒜 against Ker δ ∩ Ker Φ_s ∩ 𝒜
    image = full_image if everything else full_image.intersect(restrict_to, tol)
    phi_kernel = superoperator_kernel(phi_s_superoperator(dsp), d, tol, restrict_to=kernel, blocks=delta.blocks)
    restriction = image.distance(phi_kernel) if image.dim == phi_kernel.dim else float("inf")

    return PhysicalAlgebraReport(
        algebra=algebra,
        dim=algebra.dim,
        restrict_closed=closed,
        star_residual=algebra.star_closure_residual(),
        involution_residual=involution,
        restriction_residual=restriction,
        restriction_consistent=bool(restriction <= threshold),
    )


def _krein_star(space: OperatorSubspace, J: np.ndarray) -> np.ndarray:
    """Vectorized J B* J for every basis element B, as columns."""
    d, k = space.ambient_dim, space.dim
    B = space.columns.T.reshape(k, d, d)
    return (J @ np.conj(B).transpose(0, 2, 1) @ J).reshape(k, d * d).T


@dataclass
class StateConditionReport:
    annihilates_after_charge: bool
    superderivation_vanishes: bool
    laplacian_vanishes: bool
    residuals: tuple
    krein_invariant: bool

    @property
    def values(self) -> tuple[bool, bool, bool]:
        return self.annihilates_after_charge, self.superderivation_vanishes, self.laplacian_vanishes


def state_condition_check(omega, cplx, tol: Tolerance = DEFAULT_TOL) -> StateConditionReport:
    """Evaluate the three vanishing conditions for the vector state of ``omega``.

    The conditions are tested on the full matrix-unit basis, so each reduces
    to a closed-form residual. They are equivalent when ``omega`` is an
    eigenvector of the total fundamental symmetry (``krein_invariant``).
    """
    w = np.asarray(omega, dtype=complex)
    w = w / np.linalg.norm(w)
    Q, G, J = cplx.Q, cplx.grading, cplx.J_T
    Qw = Q @ w
    first = float(np.max(np.abs(np.outer(w.conj(), Qw))))
    M = np.outer((dagger(Q) @ w).conj(), w) - np.outer((G @ w).conj(), G @ Qw)
    second = float(np.max(np.abs(M)))
    third = float(np.vdot(w, (Q @ dagger(Q) + dagger(Q) @ Q) @ w).real)
    scale = max(1.0, opnorm(Q))
    cut = 100 * tol.abs * scale
    Jw = J @ w
    invariant = bool(min(np.linalg.norm(Jw - w), np.linalg.norm(Jw + w)) <= 100 * tol.abs)
    return StateConditionReport(first <= cut, second <= cut, third <= cut**2,
                                (first, second, third), invariant)
