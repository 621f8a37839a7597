"""Multicycle lifetime experiments on the ideal damping channel.

An N-cycle run splits a total delay t into N windows; each window damps
every qubit with strength gamma(t/N - dt) and is followed by a recovery
rebuilt for that step strength.  The readout is the population of the
encoded |1> after decoding, exactly the quantity measured by the hardware
protocol.  Fitting f(t) = a + b exp(-t/T) to the resulting curve gives the
logical lifetime.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from .channels import apply as apply_channel
from .channels import damping_channel, gamma_from_delay, KrausChannel
from .codes import QuantumCode, leung_code, leung_encoder
from .errors import NoConvergence, OutOfRange
from .metrics import readout_probability
from .ortho import leung_damping_order, orthogonalize, weight_order
from .recovery import (
    RecoveryMap,
    apply_recovery,
    damping_weight_one_labels,
    petz,
    polar_recovery,
    syndrome_petz,
)


@dataclass
class MulticycleConfig:
    t1_us: float
    delay_grid_us: list
    cycles: int = 1
    recovery_time_us: float = 0.0
    code: QuantumCode | None = None
    recovery_kind: str = "syndrome_petz"
    restrict_to_single_qubit_corrections: bool = True

    def __post_init__(self):
        if self.cycles < 1:
            raise OutOfRange("need at least one cycle")
        if self.t1_us <= 0:
            raise OutOfRange("T1 must be positive")
        if self.code is None:
            self.code = leung_code()


@dataclass
class LifetimeFit:
    a: float
    b: float
    T: float
    residual: float

    def to_json_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "T_us": self.T, "max_residual": self.residual}


def _step_recovery(code: QuantumCode, gamma_step: float, kind: str, restrict: bool) -> tuple:
    """Noise channel and recovery for one cycle at the given step strength."""
    noise = damping_channel(gamma_step, code.n)
    if restrict:
        labels = damping_weight_one_labels(noise)
        build = KrausChannel(
            [noise.op_by_label(lab) for lab in labels],
            labels=labels,
            tp_class="TraceNonIncreasing",
        )
        order = labels
    else:
        build = noise
        order = leung_damping_order() if code.n == 4 else weight_order(noise)
    if kind == "petz":
        return noise, petz(code, noise)
    orth = orthogonalize(build, code, order=order)
    if kind == "polar":
        return noise, polar_recovery(orth)
    if kind == "syndrome_petz":
        return noise, syndrome_petz(code, orth)
    raise ValueError(f"unknown recovery kind {kind!r}")


def run_multicycle(cfg: MulticycleConfig) -> list:
    """Fidelity curve [(t_us, F)] for the encoded |1> under N QEC cycles.

    Each grid point evolves |1_L><1_L| through N rounds of damping at
    gamma(t/N - dt) followed by the step recovery, then reads out the
    input-qubit population through the decoder.  Points whose window
    t/N - dt is negative are skipped with a warning; t = 0 reports 1.
    """
    code = cfg.code
    u_en = leung_encoder() if code.n == 4 else None
    curve = []
    for t in cfg.delay_grid_us:
        if t == 0:
            curve.append((0.0, 1.0))
            continue
        window = t / cfg.cycles - cfg.recovery_time_us
        if window < 0:
            warnings.warn(
                f"delay {t} us leaves no room for {cfg.cycles} cycles with "
                f"dt = {cfg.recovery_time_us} us; point skipped"
            )
            continue
        gamma_step = gamma_from_delay(window, cfg.t1_us)
        noise, rec = _step_recovery(
            code, gamma_step, cfg.recovery_kind, cfg.restrict_to_single_qubit_corrections
        )
        one = code.logical(1)
        rho = np.outer(one, one.conj())
        for _ in range(cfg.cycles):
            rho = apply_recovery(rec, apply_channel(noise, rho))
        if u_en is not None:
            fid = readout_probability(rho, u_en, 1, n=code.n)
        else:
            fid = float(np.real(np.vdot(one, rho @ one)))
        curve.append((float(t), fid))
    return curve


def bare_qubit_curve(t1_us: float, delay_grid_us) -> list:
    """Excited-state population of an unencoded qubit, (t, e^{-t/T1})."""
    if t1_us <= 0:
        raise OutOfRange("T1 must be positive")
    return [(float(t), float(np.exp(-t / t1_us))) for t in delay_grid_us]


def exp_fit(ts, fs, t1_hint: float | None = None) -> LifetimeFit:
    """Fit f(t) = a + b exp(-t/T) by multi-start nonlinear least squares.

    Starting lifetimes are {hint/4, hint, 4 hint} with the hint defaulting
    to the largest delay; the best converged fit by summed squared error
    wins.  Raises NoConvergence when every start fails.
    """
    t = np.asarray(ts, dtype=float)
    f = np.asarray(fs, dtype=float)
    if t.size < 4:
        raise OutOfRange("need at least four points to fit a lifetime")
    hint = float(t1_hint) if t1_hint else float(np.max(t))
    if hint <= 0:
        raise OutOfRange("lifetime hint must be positive")

    def model(tt, a, b, tau):
        return a + b * np.exp(-tt / tau)

    best = None
    for tau0 in (hint / 4.0, hint, 4.0 * hint):
        p0 = (float(np.min(f)), float(np.max(f) - np.min(f)) or 1.0, tau0)
        try:
            popt, _ = curve_fit(model, t, f, p0=p0, xtol=1e-8, ftol=1e-12, maxfev=20000)
        except RuntimeError:
            continue
        if popt[2] <= 0:
            continue
        sse = float(np.sum((model(t, *popt) - f) ** 2))
        if best is None or sse < best[0]:
            best = (sse, popt)
    if best is None:
        raise NoConvergence("exponential fit failed from every starting point")
    a, b, tau = (float(x) for x in best[1])
    residual = float(np.max(np.abs(model(t, a, b, tau) - f)))
    return LifetimeFit(a=a, b=b, T=tau, residual=residual)
