"""Recovery map builders and QEC-matrix machinery.

Five recovery constructions are provided:

* ``petz``: the transpose channel {P A_i† A(P)^{-1/2}} adapted to the raw
  noise, with the inverse square root taken on the support of A(P).
* ``syndrome_petz``: the same construction adapted to an orthogonalized
  Kraus set, assembled per record from the block-diagonal QEC matrix.
* ``polar_recovery``: measure-then-rotate maps {P_k U_k†} built from the
  polar unitaries of the orthogonalized operators.
* ``leung_recovery``: the polar recovery restricted to the no-damping and
  single-damping operators; requires those images to be orthogonal already.
* ``stabilizer_lookup_recovery``: the standard syndrome-table recovery of a
  stabilizer code.

Every recovery is completed to trace preserving by an explicit projector
onto the complement of sum_k R_k† R_k, stored separately so its fidelity
contribution can be reported.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .channels import KrausChannel, PauliString, pauli_from_label
from .codes import QuantumCode, StabilizerGroup, pauli_syndrome
from .errors import (
    DimensionMismatch,
    NotEigenspace,
    SubspacesOverlap,
    ToleranceViolation,
)
from .linalg import (
    dagger,
    hermitize,
    kron,
    max_abs,
    min_eigenvalue,
    partial_trace_logical,
    psd_power,
    support_projector,
)
from .ortho import OrthogonalizedNoise, OrthoRecord, _pattern_weight, noise_on_code, orthogonalize

RECOVERY_TOL = 1e-9


@dataclass(frozen=True)
class QecMatrix:
    """Gram matrix M[(mu,k),(nu,l)] = <mu_L| A_k† A_l |nu_L>, mu fast."""

    d: int
    N: int
    entries: np.ndarray

    def __post_init__(self):
        m = hermitize(np.asarray(self.entries, dtype=complex))
        if m.shape != (self.d * self.N, self.d * self.N):
            raise DimensionMismatch(f"QEC matrix shape {m.shape}")
        object.__setattr__(self, "entries", m)

    def block(self, k: int, l: int) -> np.ndarray:
        d = self.d
        return self.entries[k * d : (k + 1) * d, l * d : (l + 1) * d]


@dataclass
class RecoveryMap:
    kind: str
    kraus_ops: list
    completion: np.ndarray | None = None
    labels: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.labels:
            self.labels = [f"R{i}" for i in range(len(self.kraus_ops))]
        dim = self.kraus_ops[0].shape[0]
        acc = np.zeros((dim, dim), dtype=complex)
        for r in self.kraus_ops:
            acc += dagger(r) @ r
        excess = float(np.linalg.eigvalsh(hermitize(acc))[-1]) - 1.0
        if excess > 1e-10:
            raise ToleranceViolation("recovery Kraus sum exceeds identity", excess)
        if self.completion is not None:
            defect = max_abs(acc + dagger(self.completion) @ self.completion - np.eye(dim))
            if defect > RECOVERY_TOL:
                raise ToleranceViolation("completion does not restore trace preservation", defect)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def all_ops(self) -> list:
        ops = list(self.kraus_ops)
        if self.completion is not None:
            ops.append(self.completion)
        return ops


def apply_recovery(recovery: RecoveryMap, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (recovery.dim, recovery.dim):
        raise DimensionMismatch(f"state shape {rho.shape} != recovery dim {recovery.dim}")
    out = np.zeros_like(rho)
    for r in recovery.all_ops():
        out += r @ rho @ dagger(r)
    return out


def qec_matrix(code: QuantumCode, ops) -> QecMatrix:
    """QEC matrix of a list of dense operators against the code."""
    c = code.codewords
    images = [np.asarray(a) @ c for a in ops]
    if any(im.shape != (code.dim, code.d) for im in images):
        raise DimensionMismatch("operator dimension does not match the code")
    v = np.hstack(images)  # columns ordered [mu fast, k slow]
    return QecMatrix(d=code.d, N=len(images), entries=dagger(v) @ v)


def qec_matrix_from_orth(orth: OrthogonalizedNoise) -> QecMatrix:
    return qec_matrix(orth.code, [r.E for r in orth.records])


def _completion_projector(dim: int, covered: np.ndarray) -> np.ndarray | None:
    comp = np.eye(dim, dtype=complex) - covered
    comp = hermitize(comp)
    if max_abs(comp) < 1e-12:
        return None
    return support_projector(comp)


def petz(code: QuantumCode, noise: KrausChannel, tol: float = RECOVERY_TOL) -> RecoveryMap:
    """Transpose-channel recovery {P A_i† A(P)^{-1/2}} plus completion.

    The inverse square root is the pseudo-inverse on the support of A(P); the
    completion is the projector onto the orthogonal complement of that
    support.  Trace preservation on the support is certified to ``tol``.
    """
    proj = code.projector
    a_on_p = noise_on_code(noise, proj)
    if max_abs(a_on_p) < 1e-14:
        raise ToleranceViolation("A(P) vanishes; Petz map undefined")
    s = psd_power(a_on_p, -0.5)
    supp = support_projector(a_on_p)
    ops = [proj @ dagger(a) @ s for a in noise.iter_dense()]
    acc = np.zeros_like(proj)
    for r in ops:
        acc += dagger(r) @ r
    defect = max_abs(acc - supp)
    if defect > tol:
        raise ToleranceViolation("Petz map not trace preserving on supp A(P)", defect)
    completion = _completion_projector(code.dim, supp)
    return RecoveryMap(
        kind="Petz",
        kraus_ops=ops,
        completion=completion,
        labels=[f"petz[{lab}]" for lab in noise.labels],
        diagnostics={"tp_defect_on_support": defect},
    )


def petz_kraus_from_qec_matrix(code: QuantumCode, noise: KrausChannel) -> list:
    """Petz Kraus operators via the QEC-matrix coefficient formula.

    R_l = sum_{mu,nu,k} (M^{-1/2})[(mu,l),(nu,k)] |mu_L><nu_L| A_k†, which
    equals P A_l† A(P)^{-1/2}; used as an independent cross-check of
    ``petz``.
    """
    ops = list(noise.iter_dense())
    m = qec_matrix(code, ops)
    root_inv = psd_power(m.entries, -0.5)
    c = code.codewords
    images = np.hstack([a @ c for a in ops])  # dim x (d*N)
    out = []
    for l in range(len(ops)):
        coeff = root_inv[l * code.d : (l + 1) * code.d, :]  # d x (d*N)
        out.append(c @ coeff @ dagger(images))
    return out


def _record_restricted_root_inv(code: QuantumCode, record: OrthoRecord) -> np.ndarray:
    """(Mtilde_kk)^{-1/2} in the logical basis, restricted to the record
    support (which may have been overridden)."""
    c = code.codewords
    m_log = dagger(c) @ record.M_tilde @ c
    p_log = dagger(c) @ record.P_support @ c
    m_res = hermitize(p_log @ m_log @ p_log)
    return psd_power(m_res, -0.5)


def syndrome_petz(code: QuantumCode, orth: OrthogonalizedNoise) -> RecoveryMap:
    """Petz recovery adapted to the orthogonalized Kraus set.

    One Kraus operator per surviving record, built from the record's block
    of the (block-diagonal) QEC matrix:

        R_l = sum_{mu,nu} (Mtilde_ll^{-1/2})[mu,nu] |mu_L><nu_L| E_l†

    Each R_l factors as G_l Pi_l with Pi_l = R_l† R_l the projector onto
    the l-th syndrome subspace, so the map is implementable by a syndrome
    measurement followed by a unitary.
    """
    c = code.codewords
    ops, labels = [], []
    covered = np.zeros((code.dim, code.dim), dtype=complex)
    for record in orth.records:
        root_inv = _record_restricted_root_inv(code, record)
        r = c @ root_inv @ dagger(c) @ dagger(record.E)
        ops.append(r)
        labels.append(f"syndrome_petz[{record.label}]")
        covered += dagger(r) @ r
    pi_defect = _mutual_projector_defect(ops)
    if pi_defect > RECOVERY_TOL:
        raise ToleranceViolation("syndrome projectors not mutually orthogonal", pi_defect)
    completion = _completion_projector(code.dim, hermitize(covered))
    return RecoveryMap(
        kind="SyndromePetz",
        kraus_ops=ops,
        completion=completion,
        labels=labels,
        diagnostics={"projector_defect": pi_defect},
    )


def _mutual_projector_defect(ops) -> float:
    """Largest violation of Pi_k = R_k† R_k being orthogonal projectors."""
    pis = [dagger(r) @ r for r in ops]
    worst = 0.0
    for i, pi in enumerate(pis):
        worst = max(worst, max_abs(pi @ pi - pi))
        for j in range(i + 1, len(pis)):
            worst = max(worst, max_abs(pi @ pis[j]))
    return worst


def polar_recovery(orth: OrthogonalizedNoise) -> RecoveryMap:
    """Measure-then-rotate recovery {P_k U_k†} from the polar unitaries.

    Equals {Mtilde_kk^{-1/2} P_k E_k†} (checked in tests); the Kraus
    operators are supported on the record supports only, never on the
    arbitrary completion of U_k.
    """
    ops, labels = [], []
    covered = np.zeros((orth.code.dim, orth.code.dim), dtype=complex)
    for record in orth.records:
        r = record.P_support @ dagger(record.U)
        ops.append(r)
        labels.append(f"polar[{record.label}]")
        covered += dagger(r) @ r
    completion = _completion_projector(orth.code.dim, hermitize(covered))
    return RecoveryMap(kind="PolarRE", kraus_ops=ops, completion=completion, labels=labels)


def damping_weight_one_labels(noise: KrausChannel) -> list:
    """Labels of the no-damping and single-damping operators."""
    return [lab for lab in noise.labels if lab.startswith("D_") and _pattern_weight(lab) <= 1]


def leung_recovery(code: QuantumCode, noise: KrausChannel, tol: float = RECOVERY_TOL) -> RecoveryMap:
    """Single-damping-correction recovery in the style of the original
    four-qubit construction.

    Requires the images of the codespace under the no-damping and
    single-damping operators to be mutually orthogonal (raises
    SubspacesOverlap otherwise), then applies the polar recovery built
    from exactly that restricted operator set; double and higher damping
    errors are left to the completion.
    """
    labels = damping_weight_one_labels(noise)
    if not labels:
        raise SubspacesOverlap("channel has no damping-pattern labels")
    c = code.codewords
    images = {lab: noise.op_by_label(lab) @ c for lab in labels}
    for i, la in enumerate(labels):
        for lb in labels[i + 1 :]:
            overlap = max_abs(dagger(images[la]) @ images[lb])
            if overlap > tol:
                raise SubspacesOverlap(
                    f"images of {la} and {lb} overlap ({overlap:.3e}); "
                    "single-damping syndrome recovery is not applicable"
                )
    sub = KrausChannel(
        [noise.op_by_label(lab) for lab in labels],
        labels=labels,
        tp_class="TraceNonIncreasing",
    )
    orth = orthogonalize(sub, code)
    rec = polar_recovery(orth)
    rec.kind = "Leung"
    rec.labels = [f"leung[{r}]" for r in orth.labels()]
    return rec


def stabilizer_lookup_recovery(
    code: QuantumCode, group: StabilizerGroup, errors: list
) -> RecoveryMap:
    """Standard stabilizer-measurement recovery from a syndrome table.

    For every syndrome signature the correction is the adjoint of the
    minimal-weight error producing it (ties broken by label); syndromes not
    produced by any listed error are corrected by the identity.  The Kraus
    operators E_min† Pi_s sum to the identity exactly, so there is no
    completion term.
    """
    n = group.n
    dim = 1 << n
    best: dict = {}
    for err in errors:
        p = err if isinstance(err, PauliString) else pauli_from_label(err, n)
        unit = PauliString(p.letters)
        key = pauli_syndrome(unit, group)
        entry = (unit.weight, unit.label())
        if key not in best or entry < best[key][:2]:
            best[key] = (unit.weight, unit.label(), unit)
    gens = [g.dense() for g in group.generators]
    eye = np.eye(dim, dtype=complex)
    ops, labels = [], []
    for s in np.ndindex(*(2,) * len(gens)):
        pi = eye
        for bit, g in zip(s, gens):
            pi = pi @ (eye + (1 - 2 * bit) * g) / 2.0
        if s in best:
            _, lab, correction = best[s]
            r = dagger(correction.dense()) @ pi
        else:
            r, lab = pi, "I"
        ops.append(r)
        labels.append(f"lookup[{''.join(map(str, s))}->{lab}]")
    return RecoveryMap(kind="StabilizerLookup", kraus_ops=ops, completion=None, labels=labels)


def restrict_recovery(recovery: RecoveryMap, indices: list) -> RecoveryMap:
    """Sub-map keeping the listed Kraus operators, recompleted to TP."""
    ops = [recovery.kraus_ops[i] for i in indices]
    covered = np.zeros((recovery.dim, recovery.dim), dtype=complex)
    for r in ops:
        covered += dagger(r) @ r
    completion = _completion_projector(recovery.dim, hermitize(covered))
    return RecoveryMap(
        kind="Restricted",
        kraus_ops=ops,
        completion=completion,
        labels=[recovery.labels[i] for i in indices],
    )


def optimality_check(m: QecMatrix) -> float:
    """Frobenius norm of [M, Tr_L(sqrt(M)) x I_d].

    Vanishes when the QEC matrix admits an optimal Petz recovery; the
    orthogonalized matrix satisfies it by block-diagonality while a generic
    raw QEC matrix does not.
    """
    return optimality_diagnostics(m)["commutator_fro"]


def optimality_diagnostics(m: QecMatrix) -> dict:
    root = psd_power(m.entries, 0.5)
    traced = partial_trace_logical(root, m.d, m.N)
    eye_d = np.eye(m.d)
    primary = kron(traced, eye_d)  # mu fast, k slow
    swapped = kron(eye_d, traced)  # the other index convention, for diagnostics
    comm = m.entries @ primary - primary @ m.entries
    comm_swapped = m.entries @ swapped - swapped @ m.entries
    return {
        "commutator_fro": float(np.linalg.norm(comm)),
        "commutator_fro_swapped_convention": float(np.linalg.norm(comm_swapped)),
        "traced_root": traced,
    }


@dataclass
class SyndromeRow:
    error_label: str
    primary_bits: tuple
    secondary_bits: tuple | None
    recovery_index: int


@dataclass
class SyndromeTable:
    rows: list
    primary_labels: tuple
    secondary_labels: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["error", "p1", "p2", "s1", "s2", "recovery"])
        for row in self.rows:
            s1, s2 = ("", "") if row.secondary_bits is None else row.secondary_bits
            writer.writerow(
                [row.error_label, *row.primary_bits, s1, s2, f"G{row.recovery_index}"]
            )
        return buf.getvalue()


def _image_eigenvalue(op: np.ndarray, basis: np.ndarray, tol: float):
    """Eigenvalue of ``op`` on span(basis); None when the span is not an
    eigenspace."""
    image = op @ basis
    lam = complex(np.vdot(basis[:, 0], image[:, 0]))
    if max_abs(image - lam * basis) > tol:
        return None
    return lam


def syndrome_table(
    code: QuantumCode,
    orth: OrthogonalizedNoise,
    primary: list,
    secondary: list,
    tol: float = 1e-9,
) -> SyndromeTable:
    """Measurement table for the orthogonalized error records.

    Primary operators must stabilize or anti-stabilize each record's
    syndrome subspace; their bits follow the usual convention +1 -> 0,
    -1 -> 1 (NotEigenspace otherwise).  Secondary bits flag which syndrome
    subspaces a secondary operator stabilizes: 1 when the image is a +1
    eigenspace, 0 when it is a -1 eigenspace or not an eigenspace at all.
    They are omitted when the primary bits are all zero, where no further
    discrimination is needed.
    """
    primary_ops = [p if isinstance(p, np.ndarray) else p.dense() for p in primary]
    secondary_ops = [s if isinstance(s, np.ndarray) else s.dense() for s in secondary]
    rows = []
    for idx, record in enumerate(orth.records):
        pi = record.syndrome_projector
        values, vectors = np.linalg.eigh(hermitize(pi))
        basis = vectors[:, values > 0.5]
        p_bits = []
        for op in primary_ops:
            lam = _image_eigenvalue(op, basis, tol)
            if lam is None or abs(abs(lam) - 1.0) > 1e-6:
                raise NotEigenspace(
                    f"record {record.label}: image is not an eigenspace of a primary operator"
                )
            p_bits.append(0 if lam.real > 0 else 1)
        if all(b == 0 for b in p_bits):
            s_bits = None
        else:
            s_bits = []
            for op in secondary_ops:
                lam = _image_eigenvalue(op, basis, tol)
                s_bits.append(1 if (lam is not None and lam.real > 0) else 0)
            s_bits = tuple(s_bits)
        rows.append(
            SyndromeRow(
                error_label=record.label,
                primary_bits=tuple(p_bits),
                secondary_bits=s_bits,
                recovery_index=idx,
            )
        )
    return SyndromeTable(
        rows=rows,
        primary_labels=tuple(getattr(p, "letters", "") for p in primary),
        secondary_labels=tuple(getattr(s, "letters", "") for s in secondary),
    )
