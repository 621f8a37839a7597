"""Fidelity measures, polynomial fits, certificates, and the
encode-noise-recover-decode readout protocol.

Entanglement fidelity is evaluated as (1/d^2) sum_{k,l} |Tr(R_k A_l P)|^2
with the completion operator included in the recovery sum.  For the Petz
map adapted to the same channel there is an equivalent closed form,
(1/d^2) |Tr_L sqrt(M)|_F^2, which sidesteps materializing the recovery and
is used for large Pauli channels.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import KrausChannel, PauliString
from .codes import QuantumCode
from .errors import (
    DimensionMismatch,
    IllConditioned,
    TruthTableMismatch,
    UnsupportedDimension,
)
from .linalg import dagger, max_abs, psd_power
from .ortho import OrthogonalizedNoise, noise_on_code
from .recovery import RecoveryMap, apply_recovery, polar_recovery, syndrome_petz

_CHUNK = 512


def _noise_images(noise: KrausChannel, c: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Stack of (A_l C).T.reshape(-1) rows for l in [start, stop)."""
    rows = []
    for l in range(start, stop):
        raw = noise.raw_op(l)
        img = raw.apply_left(c) if isinstance(raw, PauliString) else raw @ c
        rows.append(img.T.reshape(-1))
    return np.array(rows)


def _recovery_rows(recovery: RecoveryMap, c: np.ndarray) -> np.ndarray:
    """Stack of (C† R_k).reshape(-1) rows, completion included."""
    return np.array([(dagger(c) @ r).reshape(-1) for r in recovery.all_ops()])


def entanglement_fidelity(
    recovery: RecoveryMap, noise: KrausChannel, code: QuantumCode
) -> float:
    """(1/d^2) sum_{k,l} |Tr(R_k A_l P)|^2, completion Kraus included."""
    if recovery.dim != noise.dim or noise.dim != code.dim:
        raise DimensionMismatch("recovery, noise, and code dimensions differ")
    c = code.codewords
    y = _recovery_rows(recovery, c)
    total = 0.0
    for start in range(0, len(noise), _CHUNK):
        z = _noise_images(noise, c, start, min(start + _CHUNK, len(noise)))
        t = y @ z.T
        total += float(np.sum(np.abs(t) ** 2))
    return total / code.d**2


def petz_entanglement_fidelity(code: QuantumCode, noise: KrausChannel) -> float:
    """Entanglement fidelity of the Petz recovery adapted to ``noise``.

    Uses Tr(R_k A_l P) = [Tr_L sqrt(M)]_{kl} with R the Petz map of the
    same channel, evaluated as C† A_k† A(P)^{-1/2} A_l C in chunks; the
    completion contributes nothing because A_l P is supported inside
    supp A(P).
    """
    c = code.codewords
    s = psd_power(noise_on_code(noise, code.projector), -0.5)
    n_ops = len(noise)
    y = np.empty((n_ops, code.d * code.dim), dtype=complex)
    for start in range(0, n_ops, _CHUNK):
        stop = min(start + _CHUNK, n_ops)
        for l in range(start, stop):
            raw = noise.raw_op(l)
            img = raw.apply_left(c) if isinstance(raw, PauliString) else raw @ c
            y[l] = (dagger(img) @ s).reshape(-1)
    total = 0.0
    for start in range(0, n_ops, _CHUNK):
        z = _noise_images(noise, c, start, min(start + _CHUNK, n_ops))
        t = y @ z.T
        total += float(np.sum(np.abs(t) ** 2))
    return total / code.d**2


def _logical_blocks(recovery: RecoveryMap, noise: KrausChannel, code: QuantumCode) -> np.ndarray:
    """All 2x2 logical blocks C† R_k A_l C, stacked."""
    c = code.codewords
    lefts = [dagger(c) @ r for r in recovery.all_ops()]
    blocks = []
    for l in range(len(noise)):
        raw = noise.raw_op(l)
        img = raw.apply_left(c) if isinstance(raw, PauliString) else raw @ c
        for left in lefts:
            blocks.append(left @ img)
    return np.array(blocks)


def _bloch_states(n_theta: int, n_phi: int) -> np.ndarray:
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    psi = np.stack(
        [np.cos(tt / 2), np.exp(1j * pp) * np.sin(tt / 2)], axis=-1
    ).reshape(-1, 2)
    return psi


def _fidelity_of_states(blocks: np.ndarray, psi: np.ndarray) -> np.ndarray:
    total = np.zeros(psi.shape[0])
    for start in range(0, blocks.shape[0], _CHUNK):
        sub = blocks[start : start + _CHUNK]
        amps = np.einsum("pa,kab,pb->pk", psi.conj(), sub, psi, optimize=True)
        total += np.sum(np.abs(amps) ** 2, axis=1)
    return total


def worst_case_fidelity(
    recovery: RecoveryMap,
    noise: KrausChannel,
    code: QuantumCode,
    grid: tuple = (64, 128),
    refine_step: float = 1e-4,
) -> tuple:
    """Minimum of <psi| R(A(|psi><psi|)) |psi> over pure code states.

    Only two-dimensional codespaces are supported; the state is
    parametrized as cos(theta/2)|0_L> + e^{i phi} sin(theta/2)|1_L>.  A
    deterministic coarse grid search is followed by compass refinement
    until the angular step is below ``refine_step``.  Returns the value
    and the minimizing state vector.
    """
    if code.d != 2:
        raise UnsupportedDimension(f"worst-case search needs d = 2, got d = {code.d}")
    blocks = _logical_blocks(recovery, noise, code)

    def eval_angles(theta: float, phi: float) -> float:
        psi = np.array([[math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)]])
        return float(_fidelity_of_states(blocks, psi)[0])

    psi_grid = _bloch_states(*grid)
    values = _fidelity_of_states(blocks, psi_grid)
    best = int(np.argmin(values))
    theta = math.pi * (best // grid[1]) / (grid[0] - 1)
    phi = 2.0 * math.pi * (best % grid[1]) / grid[1]
    value = float(values[best])
    step = max(math.pi / (grid[0] - 1), 2 * math.pi / grid[1])
    while step > refine_step:
        moved = False
        for dt, dp in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            cand = eval_angles(theta + dt, phi + dp)
            if cand < value - 1e-15:
                theta, phi, value = theta + dt, phi + dp, cand
                moved = True
                break
        if not moved:
            step /= 2.0
    state = code.codewords @ np.array(
        [math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)]
    )
    return value, state


def fidelity_poly_fit(gammas, values, degree: int = 5) -> np.ndarray:
    """Least-squares coefficients a_1..a_degree of 1 - sum_i a_i gamma^i."""
    g = np.asarray(gammas, dtype=float)
    f = np.asarray(values, dtype=float)
    if g.size < degree + 1:
        raise IllConditioned(f"{g.size} points cannot determine {degree} coefficients")
    design = np.column_stack([g**i for i in range(1, degree + 1)])
    cond = np.linalg.cond(design)
    if cond > 1e12:
        raise IllConditioned(f"design matrix condition number {cond:.3e}")
    coeffs, *_ = np.linalg.lstsq(design, 1.0 - f, rcond=None)
    return coeffs


def poly_fit_residual(gammas, values, coeffs) -> float:
    g = np.asarray(gammas, dtype=float)
    model = 1.0 - sum(a * g ** (i + 1) for i, a in enumerate(coeffs))
    return float(np.max(np.abs(model - np.asarray(values))))


@dataclass
class PolyFit:
    coefficients: np.ndarray
    residual: float

    def a(self, i: int) -> float:
        return float(self.coefficients[i - 1])


def fit_fidelity_curve(gammas, values, degree: int = 5) -> PolyFit:
    coeffs = fidelity_poly_fit(gammas, values, degree)
    return PolyFit(coeffs, poly_fit_residual(gammas, values, coeffs))


@dataclass
class FidelityReport:
    gamma_grid: list
    f_ent: list
    f_min: list | None = None
    fit_ent: PolyFit | None = None
    fit_min: PolyFit | None = None
    meta: dict = field(default_factory=dict)

    def finalize_fits(self, degree: int = 5) -> None:
        self.fit_ent = fit_fidelity_curve(self.gamma_grid, self.f_ent, degree)
        if self.f_min is not None:
            self.fit_min = fit_fidelity_curve(self.gamma_grid, self.f_min, degree)

    def to_csv(self) -> str:
        lines = ["gamma,f_ent,f_min"]
        for i, g in enumerate(self.gamma_grid):
            fmin = "" if self.f_min is None else f"{self.f_min[i]:.12g}"
            lines.append(f"{g:.12g},{self.f_ent[i]:.12g},{fmin}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = dict(self.meta)
        if self.fit_ent is not None:
            payload["fit_ent"] = {
                "coefficients": [float(a) for a in self.fit_ent.coefficients],
                "max_residual": self.fit_ent.residual,
            }
        if self.fit_min is not None:
            payload["fit_min"] = {
                "coefficients": [float(a) for a in self.fit_min.coefficients],
                "max_residual": self.fit_min.residual,
            }
        return json.dumps(payload, indent=1, sort_keys=True)


def theorem2_certificate(
    code: QuantumCode, noise: KrausChannel, orth: OrthogonalizedNoise
) -> tuple:
    """Fidelity losses of the Petz and syndrome-Petz recoveries and the
    two-sided bound check F_ent(Petz) >= F_ent(syndrome-Petz)^2, i.e.
    eta_P <= 2 eta_s, with slack 1e-9."""
    f_petz = petz_entanglement_fidelity(code, noise)
    f_syn = entanglement_fidelity(syndrome_petz(code, orth), noise, code)
    eta_p = 1.0 - f_petz
    eta_s = 1.0 - f_syn
    holds = (f_petz >= f_syn**2 - 1e-9) and (eta_p <= 2.0 * eta_s + 1e-9)
    return eta_p, eta_s, holds


def polar_bound_diagnostic(orth: OrthogonalizedNoise, code: QuantumCode) -> tuple:
    """Both sides of the published worst-case bound for the polar recovery.

    lhs: the computed worst-case fidelity of the polar recovery against the
    source channel.  rhs: (1/d^2) sum_{mu,k} |<mu_L| E_k† E_k |mu_L>|^2 as
    printed, which is state independent and not asserted against lhs.
    """
    rec = polar_recovery(orth)
    lhs, _ = worst_case_fidelity(rec, orth.source_channel, code)
    c = code.codewords
    rhs = 0.0
    for record in orth.records:
        diag = np.real(np.diag(dagger(c) @ record.M_tilde @ c))
        rhs += float(np.sum(diag**2))
    return lhs, rhs / code.d**2


def readout_probability(rho: np.ndarray, u_en: np.ndarray, m: int, n: int = 4, qubit: int = 2) -> float:
    """Marginal probability of outcome m on the given qubit after decoding."""
    decoded = dagger(u_en) @ rho @ u_en
    probs = np.real(np.diag(decoded))
    shift = n - qubit
    idx = np.arange(1 << n)
    mask = ((idx >> shift) & 1) == m
    return float(np.sum(probs[mask]))


def logical_readout_fidelity(
    code: QuantumCode,
    noise: KrausChannel,
    recovery: RecoveryMap,
    u_en: np.ndarray,
    m: int,
) -> float:
    """Probability of reading m on the input qubit of the encode, noise,
    recover, decode protocol, starting from |0m00>.

    Validated against the truth table (the encoder must map |0000> and
    |0100> to the codewords) and equal, for the recoveries used here, to
    the direct codespace fidelity <m_L| R(A(|m_L><m_L|)) |m_L>.
    """
    if m not in (0, 1):
        raise ValueError("m must be 0 or 1")
    for bit, col in ((0, 0), (1, 1)):
        idx = bit << 2  # |0m00> on four qubits
        if abs(abs(u_en[:, idx] @ code.codewords[:, col].conj()) - 1.0) > 1e-9:
            raise TruthTableMismatch(
                f"encoder does not map |0{bit}00> to logical {col}"
            )
    start = np.zeros(code.dim, dtype=complex)
    start[m << 2] = 1.0
    rho = np.outer(start, start.conj())
    rho = u_en @ rho @ dagger(u_en)
    from .channels import apply as apply_channel

    rho = apply_channel(noise, rho)
    rho = apply_recovery(recovery, rho)
    return readout_probability(rho, u_en, m, n=code.n)


def codespace_fidelity(
    code: QuantumCode, noise: KrausChannel, recovery: RecoveryMap, m: int
) -> float:
    """<m_L| R(A(|m_L><m_L|)) |m_L> computed directly."""
    from .channels import apply as apply_channel

    vec = code.logical(m)
    rho = apply_recovery(recovery, apply_channel(noise, np.outer(vec, vec.conj())))
    return float(np.real(np.vdot(vec, rho @ vec)))
