"""Quantum noise channels as Kraus operator sets.

Channels are immutable.  Small channels (amplitude damping and its n-fold
products) hold dense operators; Pauli channels hold signed-permutation
``PauliString`` operators and densify one operator at a time, so the full
4^n-operator depolarizing set on six qubits is never materialized as dense
matrices simultaneously.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, OutOfRange, ToleranceViolation
from .linalg import dagger, min_eigenvalue, max_abs

TP_TOL = 1e-10

TRACE_PRESERVING = "TracePreserving"
TRACE_NON_INCREASING = "TraceNonIncreasing"

_PAULI_DENSE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """A scaled n-qubit Pauli word, stored as letters over {I, X, Y, Z}.

    Qubit 1 is the leftmost letter (most significant bit of the basis
    index), matching the kron order I x X x ... of the dense expansion.
    """

    letters: str
    coefficient: float = 1.0
    phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        if any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"invalid Pauli word {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(1 for c in self.letters if c != "I")

    def label(self) -> str:
        if self.weight == 0:
            return "I"
        return "".join(f"{c}{i + 1}" for i, c in enumerate(self.letters) if c != "I")

    def permutation(self) -> tuple[np.ndarray, np.ndarray]:
        """Column action: sigma |j> = amp[j] |dest[j]> (unit coefficient)."""
        n = self.n
        dim = 1 << n
        src = np.arange(dim)
        dest = src.copy()
        amp = np.full(dim, self.phase, dtype=complex)
        for i, letter in enumerate(self.letters):
            bit = (src >> (n - 1 - i)) & 1
            if letter == "X":
                dest = dest ^ (1 << (n - 1 - i))
            elif letter == "Y":
                dest = dest ^ (1 << (n - 1 - i))
                amp = amp * (1j * (1 - 2 * bit))
            elif letter == "Z":
                amp = amp * (1 - 2 * bit)
        return dest, amp

    def dense(self) -> np.ndarray:
        dest, amp = self.permutation()
        dim = 1 << self.n
        m = np.zeros((dim, dim), dtype=complex)
        m[dest, np.arange(dim)] = self.coefficient * amp
        return m

    def apply_left(self, m: np.ndarray) -> np.ndarray:
        """sigma @ m without building the dense Pauli."""
        dest, amp = self.permutation()
        out = np.zeros_like(np.asarray(m, dtype=complex))
        out[dest, :] = (self.coefficient * amp)[:, None] * m
        return out

    def conjugate_state(self, rho: np.ndarray) -> np.ndarray:
        """sigma rho sigma† without dense matmuls."""
        dest, amp = self.permutation()
        scale = np.outer(amp, amp.conj()) * (self.coefficient**2)
        out = np.zeros_like(np.asarray(rho, dtype=complex))
        out[np.ix_(dest, dest)] = scale * rho
        return out


def pauli_from_label(label: str, n: int) -> PauliString:
    """Parse labels of the form "I", "X3" or "Z2Z4" into a PauliString."""
    letters = ["I"] * n
    if label != "I":
        for i in range(0, len(label), 2):
            letter, pos = label[i], int(label[i + 1])
            letters[pos - 1] = letter
    return PauliString("".join(letters))


class KrausChannel:
    """An immutable list of Kraus operators with trace metadata.

    Operators are either dense arrays or PauliStrings; ``op(i)`` always
    returns a dense matrix.
    """

    def __init__(self, ops, labels=None, tp_class=TRACE_PRESERVING, check=True):
        self._ops = list(ops)
        if not self._ops:
            raise ValueError("a channel needs at least one Kraus operator")
        first = self._ops[0]
        self.dim = (1 << first.n) if isinstance(first, PauliString) else first.shape[0]
        self.labels = list(labels) if labels is not None else [f"K{i}" for i in range(len(self._ops))]
        if len(self.labels) != len(self._ops):
            raise ValueError("labels and operators differ in length")
        self.tp_class = tp_class
        if check:
            self._check_completeness()

    def __len__(self) -> int:
        return len(self._ops)

    def raw_op(self, i: int):
        return self._ops[i]

    def op(self, i: int) -> np.ndarray:
        o = self._ops[i]
        return o.dense() if isinstance(o, PauliString) else o

    def op_by_label(self, label: str) -> np.ndarray:
        return self.op(self.labels.index(label))

    def iter_dense(self):
        for i in range(len(self)):
            yield self.op(i)

    @property
    def is_pauli(self) -> bool:
        return all(isinstance(o, PauliString) for o in self._ops)

    def _check_completeness(self):
        if self.is_pauli:
            total = sum((o.coefficient * abs(o.phase)) ** 2 for o in self._ops)
            if self.tp_class == TRACE_PRESERVING and abs(total - 1.0) >= TP_TOL:
                raise ToleranceViolation("Pauli channel coefficients do not sum to one", abs(total - 1.0))
            if self.tp_class == TRACE_NON_INCREASING and total > 1.0 + TP_TOL:
                raise ToleranceViolation("Pauli channel coefficients exceed one", total - 1.0)
            return
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for a in self.iter_dense():
            acc += dagger(a) @ a
        if self.tp_class == TRACE_PRESERVING:
            defect = max_abs(acc - np.eye(self.dim))
            if defect >= TP_TOL:
                raise ToleranceViolation("channel is not trace preserving", defect)
        else:
            lowest = min_eigenvalue(np.eye(self.dim) - acc)
            if lowest < -TP_TOL:
                raise ToleranceViolation("channel is trace increasing", -lowest)

    def completeness_defect(self) -> float:
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for a in self.iter_dense():
            acc += dagger(a) @ a
        return max_abs(acc - np.eye(self.dim))


def amplitude_damping(gamma: float) -> KrausChannel:
    """Single-qubit amplitude damping with decay probability gamma."""
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRange(f"gamma = {gamma} outside [0, 1]")
    d0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    d1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausChannel([d0, d1], labels=["D_0", "D_1"])


def n_fold_product(single: KrausChannel, n: int) -> KrausChannel:
    """Tensor power of a single-qubit channel, labeled by index strings.

    For amplitude damping this produces the damping-pattern operators
    D_ijkl = D_i x D_j x D_k x D_l with labels like "D_0100".
    """
    if single.dim != 2:
        raise DimensionMismatch("n_fold_product expects a single-qubit channel")
    if n == 1:
        return single
    base = [single.op(i) for i in range(len(single))]
    ops, labels = [], []
    for bits in itertools.product(range(len(base)), repeat=n):
        m = base[bits[0]]
        for b in bits[1:]:
            m = np.kron(m, base[b])
        ops.append(m)
        labels.append("D_" + "".join(str(b) for b in bits))
    return KrausChannel(ops, labels=labels, tp_class=single.tp_class)


def damping_channel(gamma: float, n: int) -> KrausChannel:
    return n_fold_product(amplitude_damping(gamma), n)


def depolarizing(p: float, n: int) -> KrausChannel:
    """n-qubit depolarizing noise as 4^n Pauli-string Kraus operators.

    A weight-w word carries coefficient sqrt((p/3)^w (1-p)^(n-w)).  The
    enumeration is ordered by increasing weight, then by qubit positions
    and letters (X < Y < Z), which fixes the orthogonalization order.
    """
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"p = {p} outside [0, 1]")
    ops, labels = [], []
    for w in range(n + 1):
        for positions in itertools.combinations(range(n), w):
            for assignment in itertools.product("XYZ", repeat=w):
                letters = ["I"] * n
                for pos, letter in zip(positions, assignment):
                    letters[pos] = letter
                coeff = math.sqrt((p / 3.0) ** w * (1.0 - p) ** (n - w))
                op = PauliString("".join(letters), coefficient=coeff)
                ops.append(op)
                labels.append(op.label())
    return KrausChannel(ops, labels=labels)


def apply(channel: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Apply the channel, sum_k A_k rho A_k†."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim, channel.dim):
        raise DimensionMismatch(f"state shape {rho.shape} != {(channel.dim, channel.dim)}")
    out = np.zeros_like(rho)
    for i in range(len(channel)):
        raw = channel.raw_op(i)
        if isinstance(raw, PauliString):
            out += raw.conjugate_state(rho)
        else:
            out += raw @ rho @ dagger(raw)
    return out


def compose(second: KrausChannel, first: KrausChannel, prune: float | None = None) -> KrausChannel:
    """Kraus set of second o first, {B_j A_k}, flattened.

    ``prune`` optionally drops products with Frobenius norm below it; the
    default keeps everything.
    """
    if second.dim != first.dim:
        raise DimensionMismatch("channel dimensions differ")
    ops, labels = [], []
    for j in range(len(second)):
        b = second.op(j)
        for k in range(len(first)):
            prod = b @ first.op(k)
            if prune is not None and np.linalg.norm(prod) < prune:
                continue
            ops.append(prod)
            labels.append(f"{second.labels[j]}.{first.labels[k]}")
    tp = (
        TRACE_PRESERVING
        if (second.tp_class == first.tp_class == TRACE_PRESERVING and prune is None)
        else TRACE_NON_INCREASING
    )
    return KrausChannel(ops, labels=labels, tp_class=tp, check=prune is None)


def gamma_from_delay(t: float, t1: float) -> float:
    """Damping strength accumulated over a delay t with lifetime T1."""
    if t < 0 or t1 <= 0:
        raise OutOfRange(f"need t >= 0 and T1 > 0, got t={t}, T1={t1}")
    return 1.0 - math.exp(-t / t1)
