"""Subspace orthogonalization of a noise Kraus set against a code.

Given noise operators {A_k} and a codespace projector P, the transformed
operators

    E_k P = A_k P - sum_{i<k} U_i P_i U_i† A_k P

map the codespace to mutually orthogonal subspaces: P_k E_k† E_l P_l = 0
for k != l.  Here U_k is the polar unitary of E_k P and P_k the projector
onto the support of P E_k† E_k P.  Operators whose E_k P is numerically
null are dropped.  The syndrome subspaces Pi_k = U_k P_k U_k† accumulate
into W = sum_k Pi_k <= I, whose complement Q = I - W is the undetected
remainder.

The run is sequential in k by construction; the processing order is an
input, and different orders can change the surviving set and the record
supports.  All certificates (mutual orthogonality, unitary-part
orthogonality, W <= I, and M_kk - Mtilde_kk >= 0) are checked before an
instance is returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import TRACE_NON_INCREASING, KrausChannel
from .codes import QuantumCode
from .errors import DimensionMismatch, ToleranceViolation
from .linalg import (
    dagger,
    hermitize,
    max_abs,
    min_eigenvalue,
    polar_decompose,
    support_projector,
    support_rank,
)

CERT_TOL = 1e-10
NULL_DROP_TOL = 1e-9


@dataclass
class OrthoRecord:
    label: str
    source_label: str
    E: np.ndarray          # E_k P as a global operator
    U: np.ndarray          # polar unitary of E_k P (trust only on the support)
    P_support: np.ndarray  # projector onto supp(P E_k† E_k P), possibly overridden
    M_tilde: np.ndarray    # P E_k† E_k P
    M_source: np.ndarray   # P A_k† A_k P of the originating operator
    overridden: bool = False

    @property
    def syndrome_projector(self) -> np.ndarray:
        return self.U @ self.P_support @ dagger(self.U)

    @property
    def rank(self) -> int:
        return support_rank(self.P_support)


@dataclass
class OrthogonalizedNoise:
    records: list
    cumulative_W: np.ndarray
    dropped: list
    source_labels: dict
    code: QuantumCode
    source_channel: KrausChannel
    residuals: dict = field(default_factory=dict)

    def labels(self) -> list:
        return [r.label for r in self.records]

    def record(self, label: str) -> OrthoRecord:
        for r in self.records:
            if r.label == label:
                return r
        raise KeyError(label)


def _pattern_weight(label: str) -> int:
    """Error weight encoded in a label ("D_0110" -> 2, "X1Z3" -> 2, "I" -> 0)."""
    if label.startswith("D_"):
        return label[2:].count("1")
    if label == "I":
        return 0
    return sum(1 for c in label if c in "XYZ")


def weight_order(channel: KrausChannel) -> list:
    """Channel labels sorted by error weight, keeping the channel's own
    enumeration order within each weight."""
    return [
        lab
        for _, _, lab in sorted(
            (_pattern_weight(lab), i, lab) for i, lab in enumerate(channel.labels)
        )
    ]


def leung_damping_order() -> list:
    """Processing order for the four-qubit damping set on the Leung code:
    no damping, the single-damping patterns, the four double-damping
    patterns that annihilate |1_L>, then D_1100 and D_0011, then the rest."""
    head = [
        "D_0000",
        "D_0001", "D_0010", "D_0100", "D_1000",
        "D_1001", "D_0110", "D_0101", "D_1010",
        "D_1100", "D_0011",
    ]
    tail = ["D_0111", "D_1011", "D_1101", "D_1110", "D_1111"]
    return head + tail


def biconvex_damping_orders() -> tuple:
    """The two double-damping processing orders used with the biconvex code.

    Both start with no damping and the single-damping patterns.  The first
    defers {D_1010, D_0101}; the second defers {D_1100, D_0011} and is the
    one whose records 7 and 8 admit the rank-one support restriction that
    yields the best entanglement fidelity.
    """
    common = ["D_0000", "D_0001", "D_0010", "D_0100", "D_1000"]
    tail = ["D_0111", "D_1011", "D_1101", "D_1110", "D_1111"]
    flow_a = common + ["D_1001", "D_0110", "D_0011", "D_1100", "D_1010", "D_0101"] + tail
    flow_b = common + ["D_1001", "D_0110", "D_0101", "D_1010", "D_1100", "D_0011"] + tail
    return flow_a, flow_b


def logical_zero_override(code: QuantumCode) -> np.ndarray:
    """|0_L><0_L| as a support override for rank-restricted records."""
    zero = code.logical(0)
    return np.outer(zero, zero.conj())


def orthogonalize(
    noise: KrausChannel,
    code: QuantumCode,
    order: list | None = None,
    tol: float = NULL_DROP_TOL,
    support_overrides: dict | None = None,
    cert_tol: float = CERT_TOL,
) -> OrthogonalizedNoise:
    """Transform the noise Kraus set into syndrome-orthogonal operators.

    ``order`` lists noise labels to process (defaults to weight order);
    ``support_overrides`` maps a label to a projector that replaces the
    computed support of that record before later operators are processed.
    The override must be a subprojector of the computed support.
    Raises ToleranceViolation when any certificate fails.
    """
    if noise.dim != code.dim:
        raise DimensionMismatch(f"noise dim {noise.dim} != code dim {code.dim}")
    if order is None:
        order = weight_order(noise)
    else:
        missing = [lab for lab in order if lab not in noise.labels]
        if missing:
            raise KeyError(f"labels not in channel: {missing}")
    overrides = support_overrides or {}

    proj = code.projector
    dim = code.dim
    w = np.zeros((dim, dim), dtype=complex)
    records, dropped = [], []

    for label in order:
        a_full = noise.op_by_label(label)
        a_restricted = a_full @ proj
        a_norm = np.linalg.norm(a_restricted)
        e_restricted = a_restricted - w @ a_restricted
        if np.linalg.norm(e_restricted) <= tol * max(a_norm, 1e-300):
            dropped.append(label)
            continue
        m_tilde = hermitize(dagger(e_restricted) @ e_restricted)
        u, _ = polar_decompose(e_restricted)
        p_support = support_projector(m_tilde)
        overridden = False
        if label in overrides:
            cand = np.asarray(overrides[label], dtype=complex)
            if max_abs(cand @ cand - cand) > 1e-9 or max_abs(cand - dagger(cand)) > 1e-9:
                raise ToleranceViolation(f"override for {label} is not a projector")
            if max_abs(p_support @ cand - cand) > 1e-8:
                raise ToleranceViolation(
                    f"override for {label} is not inside the computed support"
                )
            p_support = cand
            overridden = True
        records.append(
            OrthoRecord(
                label=label,
                source_label=label,
                E=e_restricted,
                U=u,
                P_support=p_support,
                M_tilde=m_tilde,
                M_source=hermitize(dagger(a_restricted) @ a_restricted),
                overridden=overridden,
            )
        )
        w = w + records[-1].syndrome_projector

    orth = OrthogonalizedNoise(
        records=records,
        cumulative_W=hermitize(w),
        dropped=dropped,
        source_labels={r.label: r.source_label for r in records},
        code=code,
        source_channel=noise,
    )
    orth.residuals = certificates(orth)
    worst = max(
        orth.residuals["theorem1_max"],
        orth.residuals["unitary_orthogonality_max"],
        orth.residuals["w_eigenvalue_excess"],
        -orth.residuals["m_minus_mtilde_min_eig"],
    )
    if worst >= cert_tol:
        raise ToleranceViolation(
            f"orthogonalization certificate failed at {worst:.3e}", worst
        )
    return orth


def certificates(orth: OrthogonalizedNoise) -> dict:
    """Residuals of the orthogonality and positivity certificates.

    theorem1_max:      max_{k != l} |P_k E_k† E_l P_l|_max
    unitary_orthogonality_max: max_{k != l} |P_k U_k† U_l P_l|_max
    w_eigenvalue_excess: max(eig(W)) - 1, clipped at zero
    m_minus_mtilde_min_eig: min over records of min eig(M_kk - Mtilde_kk)
    """
    records = orth.records
    restricted = [r.E @ r.P_support for r in records]
    u_restricted = [r.U @ r.P_support for r in records]
    t1 = 0.0
    uo = 0.0
    for i in range(len(records)):
        ei = dagger(restricted[i])
        ui = dagger(u_restricted[i])
        for j in range(len(records)):
            if i == j:
                continue
            t1 = max(t1, max_abs(ei @ restricted[j]))
            uo = max(uo, max_abs(ui @ u_restricted[j]))
    w_excess = 0.0
    if records:
        top = float(np.linalg.eigvalsh(orth.cumulative_W)[-1])
        w_excess = max(0.0, top - 1.0)
    gap = min((min_eigenvalue(r.M_source - r.M_tilde) for r in records), default=0.0)
    return {
        "theorem1_max": t1,
        "unitary_orthogonality_max": uo,
        "w_eigenvalue_excess": w_excess,
        "m_minus_mtilde_min_eig": gap,
    }


def as_channel(orth: OrthogonalizedNoise) -> KrausChannel:
    """The orthogonalized operators as a trace non-increasing channel."""
    return KrausChannel(
        [r.E for r in orth.records],
        labels=[r.label for r in orth.records],
        tp_class=TRACE_NON_INCREASING,
    )


def noise_on_code(noise: KrausChannel, proj: np.ndarray) -> np.ndarray:
    """A(P) = sum_k A_k P A_k†."""
    acc = np.zeros_like(proj, dtype=complex)
    for a in noise.iter_dense():
        ap = a @ proj
        acc += ap @ dagger(ap)
    return hermitize(acc)


def orthogonalized_on_code(orth: OrthogonalizedNoise) -> np.ndarray:
    """E(P) = sum_k E_k P E_k†."""
    proj = orth.code.projector
    acc = np.zeros((orth.code.dim, orth.code.dim), dtype=complex)
    for r in orth.records:
        ep = r.E @ proj
        acc += ep @ dagger(ep)
    return hermitize(acc)


def six_qubit_correctable_set(orth: OrthogonalizedNoise, weight_cap: int) -> list:
    """Labels of surviving records with error weight up to ``weight_cap``."""
    return [r.label for r in orth.records if _pattern_weight(r.label) <= weight_cap]
