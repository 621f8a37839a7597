"""Quantum codes: the four-qubit damping-adapted codes, stabilizer
codespaces, file-backed codes, and the four-qubit encoding unitary.

A ``QuantumCode`` stores its codewords as the columns of a 2^n x d matrix
and the codespace projector.  Codewords are always validated to be
orthonormal; the projector is built from them.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import PauliString
from .errors import (
    InconsistentGroup,
    NonOrthonormal,
    NonUnitary,
    OutOfRange,
    ParseError,
)
from .linalg import dagger, max_abs

ORTHONORMAL_TOL = 1e-10


@dataclass(frozen=True)
class QuantumCode:
    n: int
    d: int
    codewords: np.ndarray  # shape (2^n, d), columns are logical basis states
    projector: np.ndarray = field(init=False)
    prenorm_norms: tuple = ()  # diagnostic: norms before any renormalization

    def __post_init__(self):
        c = np.asarray(self.codewords, dtype=complex)
        if c.shape != (1 << self.n, self.d):
            raise ParseError(f"codeword matrix shape {c.shape} != {(1 << self.n, self.d)}")
        gram = dagger(c) @ c
        defect = max_abs(gram - np.eye(self.d))
        if defect >= ORTHONORMAL_TOL:
            raise NonOrthonormal(f"codeword Gram matrix off identity by {defect:.3e}")
        object.__setattr__(self, "codewords", c)
        object.__setattr__(self, "projector", c @ dagger(c))

    @property
    def dim(self) -> int:
        return 1 << self.n

    def logical(self, m: int) -> np.ndarray:
        return self.codewords[:, m]


def _basis_state(bits: str) -> np.ndarray:
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def _superposition(*terms) -> np.ndarray:
    """Sum of (amplitude, bitstring) pairs, not normalized."""
    total = None
    for amp, bits in terms:
        vec = amp * _basis_state(bits)
        total = vec if total is None else total + vec
    return total


def leung_code() -> QuantumCode:
    """The [[4,1]] code adapted to amplitude damping.

    |0_L> = (|0000> + |1111>)/sqrt(2),  |1_L> = (|0011> + |1100>)/sqrt(2).
    """
    s = 1.0 / math.sqrt(2.0)
    zero = _superposition((s, "0000"), (s, "1111"))
    one = _superposition((s, "0011"), (s, "1100"))
    return QuantumCode(4, 2, np.column_stack([zero, one]))


def biconvex_code(gamma: float) -> QuantumCode:
    """The damping-strength-dependent [[4,1]] code from biconvex search.

    Built from the published coefficients and then renormalized, since the
    printed |0_L> amplitudes do not square-sum to one for gamma > 0; the
    pre-normalization norms are kept as a diagnostic.
    """
    if gamma < 0:
        raise OutOfRange(f"gamma = {gamma} negative")
    inner = 1.0 - 1.0 / (2.0 * (1.0 - gamma**2)) if gamma < 1 else -1.0
    if inner < 0:
        raise OutOfRange(f"|0000> amplitude not real at gamma = {gamma}")
    zero = _superposition(
        (math.sqrt(inner), "0000"),
        (1.0 / (math.sqrt(2.0) * (1.0 - gamma)), "1111"),
    )
    one = _superposition(
        (0.5, "0011"), (0.5, "1100"), (0.5, "0101"), (-0.5, "1010")
    )
    norms = (float(np.linalg.norm(zero)), float(np.linalg.norm(one)))
    code = QuantumCode(
        4, 2, np.column_stack([zero / norms[0], one / norms[1]])
    )
    object.__setattr__(code, "prenorm_norms", norms)
    return code


@dataclass(frozen=True)
class StabilizerGroup:
    generators: tuple

    def __post_init__(self):
        gens = tuple(
            PauliString(g) if isinstance(g, str) else g for g in self.generators
        )
        for g in gens:
            if g.phase != 1 or g.coefficient != 1:
                raise InconsistentGroup("generators must be plain Pauli words")
            if g.weight == 0:
                raise InconsistentGroup("identity (or -I) is not a valid generator")
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                if not _commute(gens[i].letters, gens[j].letters):
                    raise InconsistentGroup(
                        f"generators {gens[i].letters} and {gens[j].letters} anticommute"
                    )
        object.__setattr__(self, "generators", gens)

    @property
    def n(self) -> int:
        return self.generators[0].n


def _commute(a: str, b: str) -> bool:
    clashes = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return clashes % 2 == 0


def six_qubit_code_group() -> StabilizerGroup:
    """Generators of the degenerate [[6,1,3]] code."""
    return StabilizerGroup(("YIZXXY", "ZXIIXZ", "IZXXXX", "IIIZIZ", "ZZZIZI"))


def pauli_syndrome(error: PauliString, group: StabilizerGroup) -> tuple:
    """Commutation signature of a Pauli error against each generator."""
    return tuple(
        0 if _commute(error.letters, g.letters) else 1 for g in group.generators
    )


def stabilizer_codespace(group: StabilizerGroup, tol: float = 1e-10) -> QuantumCode:
    """Joint +1 eigenspace of the generators.

    The logical basis is read off the projector's eigenvectors, each
    phase-fixed so its first significant amplitude is real positive; any
    orthonormal basis works for the fidelity measures used downstream.
    """
    n = group.n
    dim = 1 << n
    proj = np.eye(dim, dtype=complex)
    for g in group.generators:
        proj = proj @ (np.eye(dim, dtype=complex) + g.dense()) / 2.0
    proj = (proj + dagger(proj)) / 2.0
    values, vectors = np.linalg.eigh(proj)
    keep = values > 0.5
    d_expected = 1 << (n - len(group.generators))
    if int(np.count_nonzero(keep)) != d_expected:
        raise InconsistentGroup(
            f"projector rank {int(np.count_nonzero(keep))} != 2^(n-g) = {d_expected}"
        )
    basis = vectors[:, keep]
    for col in range(basis.shape[1]):
        idx = int(np.argmax(np.abs(basis[:, col]) > 1e-8))
        amp = basis[idx, col]
        basis[:, col] *= np.conj(amp) / abs(amp)
    return QuantumCode(n, d_expected, basis)


def load_code(path) -> QuantumCode:
    """Load a code from a JSON file {n, d, vectors: [[[re, im], ...], ...]}."""
    try:
        payload = json.loads(Path(path).read_text())
        n, d = int(payload["n"]), int(payload["d"])
        vectors = []
        for entry in payload["vectors"]:
            vec = np.array([complex(re, im) for re, im in entry], dtype=complex)
            vectors.append(vec)
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse code file {path}: {exc}") from exc
    if len(vectors) != d or any(v.shape != (1 << n,) for v in vectors):
        raise ParseError(f"code file {path} does not hold {d} vectors of length 2^{n}")
    if any(not np.all(np.isfinite(v.view(float))) for v in vectors):
        raise ParseError(f"code file {path} contains non-finite amplitudes")
    return QuantumCode(n, d, np.column_stack(vectors))


def save_code(code: QuantumCode, path) -> None:
    payload = {
        "n": code.n,
        "d": code.d,
        "vectors": [
            [[float(a.real), float(a.imag)] for a in code.codewords[:, m]]
            for m in range(code.d)
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True))


def encoding_unitary(code: QuantumCode, mapping: dict) -> np.ndarray:
    """Unitary built from a truth table {input bitstring: output vector}.

    Raises NonUnitary when the outputs are not an orthonormal basis.
    """
    dim = code.dim
    u = np.zeros((dim, dim), dtype=complex)
    if len(mapping) != dim:
        raise NonUnitary(f"truth table has {len(mapping)} rows, needs {dim}")
    for bits, out in mapping.items():
        u += np.outer(np.asarray(out, dtype=complex), _basis_state(bits).conj())
    defect = max_abs(dagger(u) @ u - np.eye(dim))
    if defect >= 1e-10:
        raise NonUnitary(f"truth table outputs not orthonormal, defect {defect:.3e}")
    return u


def _apply_x(vec: np.ndarray, qubits, n: int) -> np.ndarray:
    p = PauliString("".join("X" if (i + 1) in qubits else "I" for i in range(n)))
    return p.dense() @ vec


def leung_truth_table() -> dict:
    """Truth table of the four-qubit encoder: |0000> -> |0_L>, |0100> -> |1_L>.

    The remaining inputs map to X1/X4-translates of the codewords and of
    the sign-flipped partners, which together exhaust the 16 basis states.
    """
    s = 1.0 / math.sqrt(2.0)
    zero_l = _superposition((s, "0000"), (s, "1111"))
    one_l = _superposition((s, "0011"), (s, "1100"))
    zero_t = _superposition((s, "0000"), (-s, "1111"))
    one_t = _superposition((s, "1100"), (-s, "0011"))
    table = {
        "0000": zero_l,
        "0001": _apply_x(zero_l, {1}, 4),
        "0010": _apply_x(zero_l, {4}, 4),
        "0011": zero_t,
        "1000": _apply_x(zero_t, {4}, 4),
        "1001": _apply_x(zero_l, {1, 4}, 4),
        "1010": _apply_x(zero_t, {1}, 4),
        "1011": _apply_x(zero_t, {1, 4}, 4),
        "0100": one_l,
        "0101": _apply_x(one_l, {1}, 4),
        "0110": _apply_x(one_l, {4}, 4),
        "0111": one_t,
        "1100": _apply_x(one_t, {4}, 4),
        "1101": _apply_x(one_l, {1, 4}, 4),
        "1110": _apply_x(one_t, {1}, 4),
        "1111": _apply_x(one_t, {1, 4}, 4),
    }
    return table


def leung_encoder() -> np.ndarray:
    return encoding_unitary(leung_code(), leung_truth_table())
