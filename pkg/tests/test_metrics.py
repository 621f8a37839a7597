import numpy as np
import pytest

from synqec.channels import KrausChannel, damping_channel, depolarizing
from synqec.codes import leung_code, leung_encoder, six_qubit_code_group, stabilizer_codespace
from synqec.errors import IllConditioned, TruthTableMismatch, UnsupportedDimension
from synqec.metrics import (
    codespace_fidelity,
    entanglement_fidelity,
    fidelity_poly_fit,
    fit_fidelity_curve,
    logical_readout_fidelity,
    petz_entanglement_fidelity,
    polar_bound_diagnostic,
    theorem2_certificate,
    worst_case_fidelity,
)
from synqec.ortho import leung_damping_order, orthogonalize
from synqec.recovery import petz, restrict_recovery, syndrome_petz


@pytest.fixture(scope="module")
def leung_setup():
    code = leung_code()
    noise = damping_channel(0.1, 4)
    orth = orthogonalize(noise, code, order=leung_damping_order())
    return code, noise, orth


def identity_channel(dim):
    return KrausChannel([np.eye(dim, dtype=complex)], labels=["I"])


def test_entanglement_fidelity_identity():
    code = leung_code()
    ident = identity_channel(16)
    rec = petz(code, ident)
    assert abs(entanglement_fidelity(rec, ident, code) - 1.0) < 1e-12


def test_petz_closed_form_cross_check(leung_setup):
    # the chunked closed form must match the explicit Kraus evaluation
    code, noise, _ = leung_setup
    direct = entanglement_fidelity(petz(code, noise), noise, code)
    closed = petz_entanglement_fidelity(code, noise)
    assert abs(direct - closed) < 1e-10


def test_worst_case_identity():
    code = leung_code()
    ident = identity_channel(16)
    rec = petz(code, ident)
    value, state = worst_case_fidelity(rec, ident, code)
    assert abs(value - 1.0) < 1e-9
    assert abs(np.linalg.norm(state) - 1.0) < 1e-9


def test_worst_case_rejects_large_codespace():
    group = six_qubit_code_group()
    code = stabilizer_codespace(group)
    big = type(code)(code.n, 2, code.codewords)  # d = 2 fine; craft d=4 case below
    from synqec.codes import QuantumCode

    basis = np.eye(16)[:, :4]
    wide = QuantumCode(4, 4, basis)
    noise = damping_channel(0.1, 4)
    with pytest.raises(UnsupportedDimension):
        worst_case_fidelity(petz(wide, noise), noise, wide)


def test_worst_case_is_minimum_over_random_states(leung_setup):
    code, noise, orth = leung_setup
    rec = syndrome_petz(code, orth)
    value, _ = worst_case_fidelity(rec, noise, code)
    rng = np.random.default_rng(12)
    from synqec.channels import apply
    from synqec.recovery import apply_recovery

    for _ in range(100):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z /= np.linalg.norm(z)
        psi = code.codewords @ z
        rho = apply_recovery(rec, apply(noise, np.outer(psi, psi.conj())))
        fid = float(np.real(np.vdot(psi, rho @ psi)))
        assert fid >= value - 1e-9


def test_poly_fit_recovers_synthetic():
    g = np.linspace(0.01, 0.2, 30)
    f = 1 - 2.0 * g**2
    coeffs = fidelity_poly_fit(g, f, degree=5)
    assert abs(coeffs[1] - 2.0) < 1e-9
    assert max(abs(coeffs[0]), abs(coeffs[2]), abs(coeffs[3]), abs(coeffs[4])) < 1e-8


def test_poly_fit_rejects_underdetermined():
    with pytest.raises(IllConditioned):
        fidelity_poly_fit([0.1, 0.2], [0.99, 0.98], degree=5)


def test_fidelity_monotone_in_gamma():
    code = leung_code()
    gammas = np.arange(0.02, 0.2001, 0.02)
    prev_ent, prev_min = 2.0, 2.0
    for g in gammas:
        noise = damping_channel(g, 4)
        orth = orthogonalize(noise, code, order=leung_damping_order())
        rec = syndrome_petz(code, orth)
        f_ent = entanglement_fidelity(rec, noise, code)
        f_min, _ = worst_case_fidelity(rec, noise, code)
        assert f_ent <= prev_ent + 1e-9 and f_min <= prev_min + 1e-9
        assert 0.0 <= f_ent <= 1.0 + 1e-9 and 0.0 <= f_min <= 1.0 + 1e-9
        prev_ent, prev_min = f_ent, f_min


def test_theorem2_gamma_zero():
    code = leung_code()
    noise = damping_channel(0.0, 4)
    orth = orthogonalize(noise, code, order=leung_damping_order())
    eta_p, eta_s, holds = theorem2_certificate(code, noise, orth)
    assert holds and abs(eta_p) < 1e-9 and abs(eta_s) < 1e-9


def test_theorem2_across_grid():
    code = leung_code()
    for g in (0.02, 0.06, 0.1, 0.14, 0.18):
        noise = damping_channel(g, 4)
        orth = orthogonalize(noise, code, order=leung_damping_order())
        eta_p, eta_s, holds = theorem2_certificate(code, noise, orth)
        assert holds, (g, eta_p, eta_s)


def test_polar_bound_diagnostic_gamma_zero():
    code = leung_code()
    orth = orthogonalize(damping_channel(0.0, 4), code, order=leung_damping_order())
    lhs, rhs = polar_bound_diagnostic(orth, code)
    assert abs(lhs - 1.0) < 1e-9
    # as printed the right side equals sum over identity terms / d^2
    assert abs(rhs - 0.5) < 1e-9


def test_polar_bound_diagnostic_logged(leung_setup):
    code, _, orth = leung_setup
    lhs, rhs = polar_bound_diagnostic(orth, code)
    assert 0.0 < lhs <= 1.0 and rhs > 0.0


def test_readout_equals_codespace_fidelity(leung_setup):
    code, _, _ = leung_setup
    u_en = leung_encoder()
    for g in (0.05, 0.1):
        noise = damping_channel(g, 4)
        orth = orthogonalize(noise, code, order=leung_damping_order())
        rec = syndrome_petz(code, orth)
        for m in (0, 1):
            ro = logical_readout_fidelity(code, noise, rec, u_en, m)
            direct = codespace_fidelity(code, noise, rec, m)
            assert abs(ro - direct) < 1e-10


def test_readout_restricted_one_minus_gamma_squared(leung_setup):
    code, _, _ = leung_setup
    u_en = leung_encoder()
    for g in (0.02, 0.1, 0.3):
        noise = damping_channel(g, 4)
        orth = orthogonalize(noise, code, order=leung_damping_order())
        restricted = restrict_recovery(syndrome_petz(code, orth), [0, 1, 2, 3, 4])
        value = logical_readout_fidelity(code, noise, restricted, u_en, 1)
        assert abs(value - (1 - g**2)) < 1e-12
        # protocol equivalence also holds on the restricted map for m = 1
        assert abs(value - codespace_fidelity(code, noise, restricted, 1)) < 1e-10


def test_readout_gamma_zero_is_one(leung_setup):
    code, _, orth0 = leung_setup
    u_en = leung_encoder()
    noise = damping_channel(0.0, 4)
    orth = orthogonalize(noise, code, order=leung_damping_order())
    rec = syndrome_petz(code, orth)
    for m in (0, 1):
        assert abs(logical_readout_fidelity(code, noise, rec, u_en, m) - 1.0) < 1e-12


def test_readout_rejects_wrong_encoder(leung_setup):
    code, noise, orth = leung_setup
    rec = syndrome_petz(code, orth)
    with pytest.raises(TruthTableMismatch):
        logical_readout_fidelity(code, noise, rec, np.eye(16), 1)


def test_report_serialization(tmp_path):
    from synqec.metrics import FidelityReport

    report = FidelityReport(
        gamma_grid=[0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07],
        f_ent=[1 - 2 * g**2 for g in (0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07)],
        meta={"recovery": "test"},
    )
    report.finalize_fits()
    csv_text = report.to_csv()
    assert csv_text.startswith("gamma,f_ent,f_min\n")
    payload = report.to_json()
    assert '"fit_ent"' in payload and '"recovery": "test"' in payload
    assert abs(report.fit_ent.a(2) - 2.0) < 1e-9
