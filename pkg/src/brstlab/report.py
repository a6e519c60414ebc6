"""Pipeline orchestration and report serialization.

A pipeline runs in stages: ``check`` builds the charge and tests its
algebraic identities, ``dsp`` adds the exact/stationary/coexact split,
``physical`` adds the physical algebras and ``compare`` adds the comparison
with the Dirac or Gupta–Bleuler side and a verdict.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .bosons import (
    build_bosonic_sector,
    build_combined_Q,
    build_ko_abelian_Q,
    combined_vacuum_target,
    gupta_bleuler_compare,
    guarded_kernel,
)
from .cohomology import (
    brst_physical_algebra,
    dsp_decompose,
    physicality_check,
    ran_delta,
    structure_theorem_check,
    superderivation_matrix,
)
from .dirac import DiracResult, compare_dirac_brst, dirac_constrain, isometry_rule, tensor_identity_rule
from .errors import BrstLabError, DimensionError, ShapeError, SizeError, StructureTheoremViolation
from .ghosts import build_berezin, build_ghost_rep, default_ghost_rep
from .hamiltonian import ConstraintSystem, build_hamiltonian_Q, delta_operator
from .linalg import DEFAULT_TOL, Tolerance, dagger, hermitian_eig, opnorm, projector, subspace_distance
from .operators import SUPEROPERATOR_MAX_DIM, OperatorSubspace, commutant

STAGES = ("check", "dsp", "physical", "compare")
VERDICTS = ("equivalent", "brst_strictly_larger", "trivial")


class SpecError(BrstLabError, ValueError):
    """Input that fails schema validation or is inconsistent with itself."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


def load_schema() -> dict:
    return json.loads(resources.files("brstlab").joinpath("schema.json").read_text(encoding="utf-8"))


def decode_matrix(rows) -> np.ndarray:
    """Nested ``[re, im]`` pairs, row-major, to a complex array."""
    arr = np.asarray(rows, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def encode_matrix(A) -> list:
    A = np.asarray(A, dtype=complex)
    return np.stack([A.real, A.imag], axis=-1).tolist()


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    h0_dim: int | None = None
    constraints: tuple = ()
    structure_constants: np.ndarray | None = None
    ghost_rep: str | None = None
    bosonic: dict = field(default_factory=dict)
    tol: Tolerance = DEFAULT_TOL

    @classmethod
    def from_dict(cls, data: dict, tol_fallback: float | None = None) -> "SystemSpec":
        validator = jsonschema.Draft202012Validator(load_schema())
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            err = errors[0]
            location = "/" + "/".join(str(p) for p in err.absolute_path)
            raise SpecError(err.message, location)

        tol_data = data.get("tol", {})
        abs_tol = tol_data.get("abs", tol_fallback if tol_fallback is not None else DEFAULT_TOL.abs)
        tol = Tolerance(abs_tol, tol_data.get("rank_rel", DEFAULT_TOL.rank_rel))

        constraints = []
        for i, rows in enumerate(data.get("constraints", [])):
            if len({len(r) for r in rows}) != 1:
                raise SpecError("ragged matrix", f"/constraints/{i}")
            G = decode_matrix(rows)
            if G.shape != (data["h0_dim"],) * 2:
                raise SpecError(f"shape {G.shape} does not match h0_dim {data['h0_dim']}", f"/constraints/{i}")
            constraints.append(G)

        C = data.get("structure_constants")
        if C is not None:
            try:
                C = np.asarray(C, dtype=float)
            except ValueError as exc:
                raise SpecError("ragged tensor", "/structure_constants") from exc
            n = len(constraints)
            if C.shape != (n, n, n):
                raise SpecError(f"expected shape {(n, n, n)}, got {C.shape}", "/structure_constants")
        return cls(data["kind"], data.get("h0_dim"), tuple(constraints), C, data.get("ghost_rep"),
                   dict(data.get("bosonic", {})), tol)


@dataclass
class Check:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "residual": float(self.residual),
                "threshold": float(self.threshold)}


@dataclass
class Report:
    kind: str
    stage: str
    checks: list = field(default_factory=list)
    dims: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)
    verdict: str | None = None
    witnesses: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def add(self, name: str, residual: float, threshold: float) -> None:
        self.checks.append(Check(name, float(residual), float(threshold)))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "stage": self.stage,
            "checks": [c.to_dict() for c in self.checks],
            "dims": dict(self.dims),
            "spectra": {k: [float(x) for x in v] for k, v in self.spectra.items()},
            "verdict": self.verdict,
            "witnesses": {k: encode_matrix(v) for k, v in self.witnesses.items()},
            "notes": list(self.notes),
        }


def _charge_checks(report: Report, checks: dict, Q: np.ndarray, tol: Tolerance, prefix: str = "") -> None:
    scale = max(1.0, opnorm(Q) ** 2)
    report.add(prefix + "nilpotency", checks["nilpotency"], tol.abs * scale)
    for name in ("krein_symmetry", "ghost_number", "odd"):
        report.add(prefix + name, checks[name], tol.abs * max(1.0, opnorm(Q)))


def _dsp_checks(report: Report, dsp, tol: Tolerance) -> None:
    for name in ("completeness", "orthogonality", "kernel_split", "krein_stationary", "krein_exchange"):
        if name in dsp.checks:
            report.add("dsp_" + name, dsp.checks[name], 10 * tol.abs)
    d, s, p = dsp.dims
    report.dims.update(d_d=d, d_s=s, d_p=p)


def _structure(report: Report, delta, dsp, tol: Tolerance):
    try:
        st = structure_theorem_check(delta, dsp, tol)
    except StructureTheoremViolation as exc:
        report.add("structure_theorem", exc.residual, 100 * tol.abs)
        if exc.witness is not None:
            report.witnesses["structure_theorem"] = exc.witness
        return None
    report.add("structure_theorem", st.residual, 100 * tol.abs)
    report.add("phi_s_homomorphism", st.homomorphism_residual, 100 * tol.abs)
    report.dims.update(ker_delta=st.ker_dim, ran_delta=st.ran_dim)
    return st


def _verdict(report: Report, cmp, trivial: bool, tol: Tolerance) -> None:
    report.dims.update(dirac_image=cmp.dirac_dim)
    if trivial:
        report.verdict = "trivial"
    elif cmp.verdict == "equal":
        report.verdict = "equivalent"
    elif cmp.verdict == "proper_containment":
        report.verdict = "brst_strictly_larger"
        if cmp.witness is not None:
            report.witnesses["brst_only"] = cmp.witness
    else:
        report.verdict = "incomparable"
    report.add("dirac_embeds_in_brst", cmp.dirac_in_brst, 100 * tol.abs)


def _laplacian_spectrum(D: np.ndarray, tol: Tolerance) -> list[float]:
    w, _ = hermitian_eig(D, tol)
    return [float(x) for x in np.sort(w)]


def _run_hamiltonian(spec: SystemSpec, stage: str, report: Report) -> None:
    tol = spec.tol
    sys = ConstraintSystem(spec.constraints, spec.structure_constants, tol)
    report.add("constraints_hermitian", sys.checks["hermitian"], tol.abs * 10)
    report.add("constraints_closure", sys.checks["closure"], tol.abs * 10)
    if not sys.checks["linearly_independent"]:
        report.notes.append("constraints are linearly dependent")
    if spec.ghost_rep == "berezin":
        ghosts = build_berezin(sys.n)
    elif spec.ghost_rep == "full":
        ghosts = build_ghost_rep(sys.n)
    else:
        ghosts = default_ghost_rep(sys.n)
    cplx = build_hamiltonian_Q(sys, ghosts, tol)
    report.dims.update(ghost_dim=ghosts.dim, total_dim=cplx.total_dim)
    _charge_checks(report, cplx.checks, cplx.Q, tol)
    report.spectra["laplacian"] = _laplacian_spectrum(delta_operator(cplx), tol)
    if stage == "check":
        return

    dsp = dsp_decompose(cplx.Q, cplx.krein, tol)
    _dsp_checks(report, dsp, tol)
    report.dims["physical_signature"] = list(physicality_check(dsp, cplx.krein, tol).signature)
    if stage == "dsp":
        return

    small = cplx.total_dim <= SUPEROPERATOR_MAX_DIM
    delta = superderivation_matrix(cplx.Q, cplx.grading, tol) if small else None
    if small:
        _structure(report, delta, dsp, tol)
        ghost_zero = commutant([cplx.G_total], tol)
        phys = brst_physical_algebra(delta, dsp, restrict_to=ghost_zero, K=cplx.krein, tol=tol)
        report.add("restriction_consistent", phys.restriction_residual, 100 * tol.abs)
        report.notes.append("physical algebra restricted to ghost number zero")
    else:
        phys = brst_physical_algebra(None, dsp, tol=tol)
        report.notes.append(f"total dimension {cplx.total_dim} exceeds the superoperator cap; "
                            "structure theorem skipped and physical algebra taken by compression")
    dirac = dirac_constrain(sys, tol, with_commutant=False)
    report.dims.update(brst_phys=dsp.dims[1], brst_algebra=phys.dim,
                       dirac_phys=dirac.physical_dim, dirac_algebra=dirac.physical_algebra.dim)
    if stage == "physical":
        return

    cmp = compare_dirac_brst(dirac, phys.algebra, tensor_identity_rule(ghosts.dim), dsp.P_s,
                             "A ↦ A ⊗ 1", ran_delta(delta, tol) if small else None, tol=tol)
    _verdict(report, cmp, dsp.dims[1] == 0 or dirac.empty, tol)


def _run_ko_abelian(spec: SystemSpec, stage: str, report: Report) -> None:
    tol = spec.tol
    b = spec.bosonic
    sector = build_bosonic_sector(b["dt_dim"], b["m"], b["cutoff"])
    ghosts = build_ghost_rep(b["m"])
    cplx = build_ko_abelian_Q(sector, ghosts)
    ccr = sector.ccr_residuals()
    report.add("ccr_guard", ccr["canonical"], 10 * tol.abs)
    report.add("guard_nilpotency", cplx.checks["guard_nilpotency"], tol.abs * max(1.0, opnorm(cplx.Q) ** 2))
    report.add("guard_krein_symmetry", cplx.checks["guard_krein_symmetry"], tol.abs * max(1.0, opnorm(cplx.Q)))
    sc = cplx.sector_complex()
    report.add("sector_invariance", sc.checks["invariance"], tol.abs)
    _charge_checks(report, sc.checks, sc.Q, tol, prefix="sector_")
    report.dims.update(ghost_dim=ghosts.dim, boson_dim=sector.dim, guard_dim=ccr["guard_dim"],
                       total_dim=cplx.total_dim, sector_dim=sc.total_dim)
    report.spectra["laplacian"] = _laplacian_spectrum(delta_operator(sc), tol)
    if stage == "check":
        return

    dsp = dsp_decompose(sc.Q, sc.krein, tol)
    _dsp_checks(report, dsp, tol)
    physicality = physicality_check(dsp, sc.krein, tol)
    report.add("stationary_positive", physicality.residual, 10 * tol.abs)
    if stage == "dsp":
        return

    if sc.total_dim <= SUPEROPERATOR_MAX_DIM:
        delta = superderivation_matrix(sc.Q, sc.grading, tol, labels=cplx.sector_labels)
        _structure(report, delta, dsp, tol)
        phys = brst_physical_algebra(delta, dsp, tol=tol)
    else:
        phys = brst_physical_algebra(None, dsp, tol=tol)
        report.notes.append(f"sector dimension {sc.total_dim} exceeds the superoperator cap; "
                            "structure theorem skipped and physical algebra taken by compression")
    report.dims.update(brst_phys=dsp.dims[1], brst_algebra=phys.dim)
    if sector.dt_dim:
        gb = gupta_bleuler_compare(sector, tol)
        report.add("gupta_bleuler_isometry", gb.isometry_residual, 10 * tol.abs)
        report.dims.update(dirac_phys=gb.quotient_dim, dirac_algebra=gb.quotient_dim**2)
        report.add("gupta_bleuler_matches_stationary", abs(gb.quotient_dim - dsp.dims[1]), 0.5)
    else:
        report.dims.update(dirac_phys=1, dirac_algebra=1)
        report.notes.append("no physical one-particle modes: the physical space is the vacuum")
    if stage == "physical":
        return

    # Fock(D_t) sits in the sector as states without D_1, D_2 quanta or ghosts
    occ_b = sector.occupations
    only_dt = np.all(occ_b[:, sector.dt_dim:] == 0, axis=1)
    flat = np.kron(only_dt.astype(complex), ghosts.vacuum)
    U = dagger(cplx.invariant_sector) @ np.eye(cplx.total_dim, dtype=complex)[:, np.flatnonzero(flat)]
    n = U.shape[1]
    gb_side = DiracResult(np.eye(n), np.zeros((n, n)), np.eye(n), OperatorSubspace.full(n),
                          OperatorSubspace.full(n), None)
    cmp = compare_dirac_brst(gb_side, phys.algebra, isometry_rule(U), dsp.P_s, "A ↦ U A U*", tol=tol)
    report.add("physical_sector_embedding", subspace_distance(U, dsp.stationary_basis)
               if U.shape[1] == dsp.dims[1] else float("inf"), 100 * tol.abs)
    _verdict(report, cmp, sector.dt_dim == 0 or dsp.dims[1] == 0, tol)


def _run_combined(spec: SystemSpec, stage: str, report: Report) -> None:
    tol = spec.tol
    sys = ConstraintSystem(spec.constraints, spec.structure_constants, tol)
    report.add("constraints_hermitian", sys.checks["hermitian"], tol.abs * 10)
    b = spec.bosonic
    if b.get("dt_dim", 0) != 0:
        raise SpecError("the coupled charge uses no physical bosonic modes", "/bosonic/dt_dim")
    if b.get("m", sys.n) != sys.n:
        raise SpecError("one bosonic constraint mode per constraint is required", "/bosonic/m")
    sector = build_bosonic_sector(0, sys.n, b["cutoff"])
    ghosts = build_ghost_rep(sys.n)
    cplx = build_combined_Q(sys, sector, ghosts)
    Q = cplx.Q
    report.add("guard_nilpotency", cplx.checks["guard_nilpotency"], tol.abs * max(1.0, opnorm(Q) ** 2))
    report.add("guard_krein_symmetry", cplx.checks["guard_krein_symmetry"], tol.abs * max(1.0, opnorm(Q)))
    report.add("ghost_number", cplx.checks["ghost_number"], tol.abs * max(1.0, opnorm(Q)))
    report.add("odd", cplx.checks["odd"], tol.abs * max(1.0, opnorm(Q)))
    report.dims.update(ghost_dim=ghosts.dim, boson_dim=sector.dim, total_dim=cplx.total_dim,
                       guard_dim=cplx.guard.shape[1])
    D = delta_operator(cplx)
    W = cplx.guard
    report.spectra["guard_laplacian"] = _laplacian_spectrum(dagger(W) @ D @ W, tol)
    report.notes.append("identities asserted on the guard subspace only")
    if stage == "check":
        return

    stationary = guarded_kernel(D, W, tol)
    target = combined_vacuum_target(sys, sector, ghosts, tol)
    match = subspace_distance(stationary, target) if stationary.shape == target.shape else float("inf")
    report.add("stationary_equals_vacuum_sector", match, 10 * tol.abs)
    P_s = projector(stationary)
    report.add("stationary_positive", opnorm(cplx.J_T @ P_s - P_s), 10 * tol.abs)
    report.dims.update(d_s=stationary.shape[1], d_d=None, d_p=None)
    report.notes.append("exact and coexact parts are not defined under truncation")
    if stage == "dsp":
        return

    algebra = OperatorSubspace.on_subspace(stationary)
    dirac = dirac_constrain(sys, tol, with_commutant=False)
    report.dims.update(brst_phys=stationary.shape[1], brst_algebra=algebra.dim,
                       dirac_phys=dirac.physical_dim, dirac_algebra=dirac.physical_algebra.dim)
    if stage == "physical":
        return

    cmp = compare_dirac_brst(dirac, algebra, tensor_identity_rule(sector.dim * ghosts.dim), P_s,
                             "A ↦ A ⊗ 1 ⊗ 1", tol=tol)
    _verdict(report, cmp, stationary.shape[1] == 0 or dirac.empty, tol)


_RUNNERS = {"hamiltonian": _run_hamiltonian, "ko_abelian": _run_ko_abelian, "combined": _run_combined}


def run_pipeline(spec: SystemSpec | dict, stage: str = "compare") -> Report:
    """Run the stages up to ``stage`` and collect checks, dimensions and a verdict."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    if isinstance(spec, dict):
        spec = SystemSpec.from_dict(spec)
    report = Report(spec.kind, stage)
    try:
        _RUNNERS[spec.kind](spec, stage, report)
    except (ShapeError, DimensionError, SizeError) as exc:
        raise SpecError(str(exc)) from exc
    return report


# serialization ------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _dump(obj) -> str:
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _dump([obj.real, obj.imag])
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {_dump(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


TEXT_TEMPLATE = """\
brstlab report
  kind     {kind}
  stage    {stage}
  verdict  {verdict}

dimensions
{dims}

checks
  {header}
{checks}

notes
{notes}
"""


def _text(data: dict) -> str:
    dims = "\n".join(f"  {k:<34}{'-' if v is None else v}" for k, v in sorted(data["dims"].items())) or "  (none)"
    header = f"{'name':<34}{'status':<8}{'residual':>24}{'threshold':>24}"
    rows = [
        f"  {c['name']:<34}{'pass' if c['pass'] else 'FAIL':<8}{_fmt_float(c['residual']):>24}"
        f"{_fmt_float(c['threshold']):>24}"
        for c in data["checks"]
    ]
    notes = "\n".join(f"  {n}" for n in data["notes"]) or "  (none)"
    return TEXT_TEMPLATE.format(kind=data["kind"], stage=data["stage"], verdict=data["verdict"] or "-",
                                dims=dims, header=header, checks="\n".join(rows) or "  (none)", notes=notes)


def emit(report: Report | dict, format: str = "json") -> bytes:
    """Serialize a report as UTF-8 JSON (sorted keys, 17 significant digits) or a text table."""
    data = report.to_dict() if isinstance(report, Report) else report
    if format == "json":
        return (_dump(data) + "\n").encode("utf-8")
    if format == "text":
        return _text(data).encode("utf-8")
    raise ValueError(f"unknown format {format!r}")
