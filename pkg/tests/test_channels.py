import math

import numpy as np
import pytest

from synqec.channels import (
    PauliString,
    amplitude_damping,
    apply,
    compose,
    damping_channel,
    depolarizing,
    gamma_from_delay,
    n_fold_product,
    pauli_from_label,
)
from synqec.errors import OutOfRange
from synqec.linalg import dagger, max_abs


def test_ad_gamma_zero_is_identity():
    chan = amplitude_damping(0.0)
    assert np.allclose(chan.op(0), np.eye(2))
    assert max_abs(chan.op(1)) == 0.0
    rho = np.array([[0.3, 0.2], [0.2, 0.7]], dtype=complex)
    assert np.allclose(apply(chan, rho), rho)


def test_ad_full_decay():
    chan = amplitude_damping(1.0)
    assert np.allclose(chan.op(0), np.diag([1.0, 0.0]))
    one = np.diag([0.0, 1.0]).astype(complex)
    zero = np.diag([1.0, 0.0]).astype(complex)
    assert max_abs(apply(chan, one) - zero) < 1e-15


def test_ad_kraus_values():
    chan = amplitude_damping(0.1)
    assert np.allclose(chan.op(0), np.diag([1.0, math.sqrt(0.9)]))
    total = sum(dagger(a) @ a for a in chan.iter_dense())
    assert max_abs(total - np.eye(2)) < 1e-15


def test_ad_out_of_range():
    with pytest.raises(OutOfRange):
        amplitude_damping(1.5)


def test_n_fold_single_passthrough():
    chan = amplitude_damping(0.2)
    assert n_fold_product(chan, 1) is chan


def test_n_fold_sixteen_patterns():
    chan = damping_channel(0.1, 4)
    assert len(chan) == 16
    assert chan.labels[0] == "D_0000" and chan.labels[-1] == "D_1111"
    assert "D_0110" in chan.labels
    total = sum(dagger(a) @ a for a in chan.iter_dense())
    assert max_abs(total - np.eye(16)) < 1e-12


def test_depolarizing_weights():
    chan = depolarizing(0.3, 1)
    coeffs = sorted(chan.raw_op(i).coefficient for i in range(4))
    expected = sorted([math.sqrt(0.7)] + [math.sqrt(0.1)] * 3)
    assert np.allclose(coeffs, expected)


def test_depolarizing_zero_noise():
    chan = depolarizing(0.0, 2)
    nonzero = [i for i in range(len(chan)) if chan.raw_op(i).coefficient > 0]
    assert nonzero == [0] and chan.labels[0] == "I"


def test_depolarizing_completeness_six_qubits():
    chan = depolarizing(0.05, 6)
    assert len(chan) == 4096
    total = sum(chan.raw_op(i).coefficient ** 2 for i in range(len(chan)))
    assert abs(total - 1.0) < 1e-12


def test_depolarizing_weight_ordering():
    chan = depolarizing(0.05, 3)
    weights = [chan.raw_op(i).weight for i in range(len(chan))]
    assert weights == sorted(weights)
    assert chan.labels[:4] == ["I", "X1", "Y1", "Z1"]


def test_pauli_dense_roundtrip():
    rng = np.random.default_rng(5)
    kron_paulis = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1, -1]),
    }
    for _ in range(10):
        letters = "".join(rng.choice(list("IXYZ"), size=4))
        dense = PauliString(letters).dense()
        expected = np.eye(1)
        for c in letters:
            expected = np.kron(expected, kron_paulis[c])
        assert max_abs(dense - expected) < 1e-15


def test_pauli_label_roundtrip():
    p = PauliString("XIZY")
    assert p.label() == "X1Z3Y4"
    assert pauli_from_label(p.label(), 4).letters == "XIZY"
    assert pauli_from_label("I", 4).letters == "IIII"


def test_pauli_conjugate_matches_dense():
    rng = np.random.default_rng(2)
    rho = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    p = PauliString("YZXI", coefficient=0.7)
    dense = p.dense()
    assert max_abs(p.conjugate_state(rho) - dense @ rho @ dagger(dense)) < 1e-12


def test_apply_linearity():
    chan = damping_channel(0.15, 2)
    rng = np.random.default_rng(0)
    r1 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    r2 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    lhs = apply(chan, 0.3 * r1 + 0.7 * r2)
    rhs = 0.3 * apply(chan, r1) + 0.7 * apply(chan, r2)
    assert max_abs(lhs - rhs) < 1e-10


def test_ad_action_on_logical_one():
    # weights of the damped mixture of |1_L><1_L|: (1-g)^2 on the codeword,
    # g(1-g)/2 on each single-damping image, g^2 total on |0000>
    from synqec.codes import leung_code

    g = 0.1
    code = leung_code()
    chan = damping_channel(g, 4)
    one = code.logical(1)
    out = apply(chan, np.outer(one, one.conj()))
    assert abs(np.real(np.vdot(one, out @ one)) - (1 - g) ** 2) < 1e-12
    for bits in ("0100", "1000", "0010", "0001"):
        v = np.zeros(16, dtype=complex)
        v[int(bits, 2)] = 1.0
        assert abs(np.real(np.vdot(v, out @ v)) - g * (1 - g) / 2) < 1e-12
    vac = np.zeros(16, dtype=complex)
    vac[0] = 1.0
    # trace preservation forces weight g^2 on |0000>, not the printed 2 g^2
    assert abs(np.real(np.vdot(vac, out @ vac)) - g**2) < 1e-12
    assert abs(np.trace(out).real - 1.0) < 1e-12


def test_compose_identity():
    chan = damping_channel(0.2, 2)
    ident = n_fold_product(amplitude_damping(0.0), 2)
    both = compose(ident, chan)
    rho = np.diag([0.1, 0.2, 0.3, 0.4]).astype(complex)
    assert max_abs(apply(both, rho) - apply(chan, rho)) < 1e-12


def test_compose_semigroup():
    g1, g2 = 0.1, 0.25
    combined = compose(amplitude_damping(g2), amplitude_damping(g1))
    expected = amplitude_damping(1 - (1 - g1) * (1 - g2))
    rng = np.random.default_rng(9)
    for _ in range(4):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        rho = np.outer(v, v.conj())
        rho /= np.trace(rho)
        assert max_abs(apply(combined, rho) - apply(expected, rho)) < 1e-10


def test_compose_n_fold_self_composition():
    t1, t, n = 120.0, 60.0, 4
    step = amplitude_damping(gamma_from_delay(t / n, t1))
    chan = step
    for _ in range(n - 1):
        chan = compose(step, chan)
    expected = amplitude_damping(gamma_from_delay(t, t1))
    rho = np.array([[0.2, 0.1j], [-0.1j, 0.8]])
    assert max_abs(apply(chan, rho) - apply(expected, rho)) < 1e-10


def test_gamma_from_delay():
    assert gamma_from_delay(0.0, 100.0) == 0.0
    assert abs(gamma_from_delay(1e9, 100.0) - 1.0) < 1e-12
    assert abs(gamma_from_delay(100.0, 100.0) - (1 - 1 / math.e)) < 1e-12
    with pytest.raises(OutOfRange):
        gamma_from_delay(-1.0, 100.0)
