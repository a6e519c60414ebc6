"""Dirac constraint method at matrix scale, and its comparison with BRST output.

With the full matrix algebra as observables, the physical space is the common
kernel of the constraints. The open projection is its orthogonal complement.
The observables are the block-diagonal matrices for that split, and the
physical algebra is every operator on the physical block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ShapeError
from .linalg import DEFAULT_TOL, Tolerance, dagger, kernel_basis, projector
from .operators import OperatorSubspace
from .operators import commutant as _commutant


@dataclass(frozen=True, eq=False)
class DiracResult:
    P_phys_space: np.ndarray
    P_open: np.ndarray
    physical_basis: np.ndarray
    observables: OperatorSubspace
    physical_algebra: OperatorSubspace
    commutant: OperatorSubspace | None

    @property
    def physical_dim(self) -> int:
        return self.physical_basis.shape[1]

    @property
    def empty(self) -> bool:
        """True when no nonzero vector satisfies every constraint."""
        return self.physical_dim == 0


def commutant(generators, tol: Tolerance = DEFAULT_TOL) -> OperatorSubspace:
    """All matrices commuting with each generator."""
    return _commutant(generators, tol)


def dirac_constrain(sys, tol: Tolerance = DEFAULT_TOL, with_commutant: bool = True) -> DiracResult:
    """Physical space, open projection, observables and physical algebra."""
    d = sys.h0_dim
    phys = kernel_basis(np.concatenate(sys.G, axis=0), tol)
    P = projector(phys)
    complement = kernel_basis(dagger(phys), tol) if phys.shape[1] else np.eye(d, dtype=complex)
    observables = OperatorSubspace.on_subspace(phys).plus(OperatorSubspace.on_subspace(complement), tol)
    comm = commutant(sys.G, tol) if with_commutant and d <= 64 else None
    return DiracResult(P, np.eye(d) - P, phys, observables, OperatorSubspace.on_subspace(phys), comm)


def tensor_identity_rule(rest_dim: int) -> Callable[[np.ndarray], np.ndarray]:
    """A ↦ A ⊗ 1 on the remaining tensor factors."""
    one = np.eye(rest_dim)
    return lambda A: np.kron(A, one)


def isometry_rule(U: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """A ↦ U A U* for an isometric embedding of the Dirac space."""
    return lambda A: U @ A @ dagger(U)


@dataclass
class ComparisonReport:
    dirac_dim: int
    brst_dim: int
    verdict: str
    dirac_in_brst: float
    brst_in_dirac: float
    embedding_rule: str
    witness: np.ndarray | None = field(default=None, repr=False)
    witness_distance: float | None = None

    def to_dict(self) -> dict:
        return {
            "dirac_dim": self.dirac_dim,
            "brst_dim": self.brst_dim,
            "verdict": self.verdict,
            "dirac_in_brst": self.dirac_in_brst,
            "brst_in_dirac": self.brst_in_dirac,
            "embedding_rule": self.embedding_rule,
            "witness_distance": self.witness_distance,
        }


def embedded_dirac_algebra(dirac: DiracResult, rule, P_s: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> OperatorSubspace:
    """The Dirac physical algebra carried into the BRST frame and compressed by P_s."""
    d = P_s.shape[0]
    images = []
    for A in dirac.physical_algebra.basis:
        X = np.asarray(rule(A))
        if X.shape != (d, d):
            raise ShapeError(f"embedding produced shape {X.shape}, expected {(d, d)}")
        images.append(P_s @ X @ P_s)
    return OperatorSubspace.span(images, d, tol)


def compare_dirac_brst(dirac: DiracResult, brst: OperatorSubspace, rule, P_s: np.ndarray,
                       rule_label: str, ran_delta: OperatorSubspace | None = None,
                       witness: np.ndarray | None = None,
                       tol: Tolerance = DEFAULT_TOL) -> ComparisonReport:
    """Containment verdict between the embedded Dirac algebra and a BRST algebra.

    When the BRST side is strictly larger, the witness is the BRST element
    farthest from the embedded Dirac algebra unless one is supplied. If
    ``ran_delta`` is given, the reported distance is measured from the span
    of the Dirac image together with Ran δ.
    """
    if brst.ambient_dim != P_s.shape[0]:
        raise ShapeError("BRST algebra and stationary projection live on different spaces")
    image = embedded_dirac_algebra(dirac, rule, P_s, tol)
    threshold = 100 * tol.abs
    dirac_in_brst = brst.containment_residual(image)
    brst_in_dirac = image.containment_residual(brst)
    if dirac_in_brst <= threshold and brst_in_dirac <= threshold:
        verdict = "equal"
    elif dirac_in_brst <= threshold:
        verdict = "proper_containment"
    else:
        verdict = "incomparable"

    distance = None
    if verdict == "proper_containment":
        if witness is None:
            witness = max(brst.basis, key=image.residual)
        reference = image if ran_delta is None else image.plus(ran_delta, tol)
        distance = reference.residual(witness) / float(np.linalg.norm(witness))
    return ComparisonReport(image.dim, brst.dim, verdict, dirac_in_brst, brst_in_dirac, rule_label,
                            witness if verdict == "proper_containment" else None, distance)
