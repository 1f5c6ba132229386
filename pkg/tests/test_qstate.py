import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from vqclab.errors import ConfigurationError, InvalidGateError
from vqclab.qstate import (
    H,
    X,
    Gate1Q,
    StateVector,
    apply_1q,
    apply_cnot,
    apply_phase,
    prob_one,
    prob_zero,
    zero_state,
)

S2 = 1 / np.sqrt(2)


def test_zero_state():
    assert np.array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])
    s = zero_state(4)
    assert s.amplitudes.shape == (16,) and s.amplitudes[0] == 1


@pytest.mark.parametrize("n", [0, 11, -1])
def test_zero_state_rejects_bad_width(n):
    with pytest.raises(ConfigurationError):
        zero_state(n)


def test_hadamard_and_bit_convention():
    assert np.allclose(apply_1q(zero_state(1), H, 0).amplitudes, [S2, S2], atol=1e-15)
    # qubit 0 is the least-significant bit
    assert np.allclose(apply_1q(zero_state(2), X, 0).amplitudes, [0, 1, 0, 0])
    assert np.allclose(apply_1q(zero_state(2), X, 1).amplitudes, [0, 0, 1, 0])


def test_ry_pi_flips():
    g = Gate1Q.ry(np.pi)
    assert np.allclose(g.matrix, [[0, -1], [1, 0]], atol=1e-15)
    assert np.allclose(apply_1q(zero_state(1), g, 0).amplitudes, [0, 1], atol=1e-15)


def test_apply_1q_index_error():
    with pytest.raises(IndexError):
        apply_1q(zero_state(2), H, 2)


def test_non_unitary_gate_rejected():
    with pytest.raises(InvalidGateError):
        Gate1Q(np.array([[1, 1], [0, 1]]))


def test_phase_gate():
    s = apply_1q(zero_state(3), H, 1)
    assert np.array_equal(apply_phase(s, 1, 0.0).amplitudes, s.amplitudes)
    one = StateVector(1, [0, 1])
    assert np.allclose(apply_phase(one, 0, np.pi).amplitudes, [0, -1])
    plus = apply_1q(zero_state(1), H, 0)
    assert np.allclose(apply_phase(plus, 0, np.pi / 2).amplitudes, [S2, 1j * S2])
    with pytest.raises(IndexError):
        apply_phase(plus, 1, 0.3)


def test_cnot_truth_table():
    s = StateVector(2, [0, 1, 0, 0])  # q1=0, q0=1
    assert np.array_equal(apply_cnot(s, 0, 1).amplitudes, [0, 0, 0, 1])
    assert np.array_equal(apply_cnot(zero_state(2), 0, 1).amplitudes, [1, 0, 0, 0])
    uniform = StateVector(2, np.full(4, 0.5))
    assert np.array_equal(apply_cnot(uniform, 1, 0).amplitudes, uniform.amplitudes)
    with pytest.raises(InvalidGateError):
        apply_cnot(s, 1, 1)


def test_prob_zero_basic():
    assert prob_zero(zero_state(1), 0) == 1.0
    assert prob_zero(apply_1q(zero_state(1), H, 0), 0) == pytest.approx(0.5, abs=1e-15)


def test_prob_zero_matches_projector_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        psi = oracles.random_state(rng, 3)
        s = StateVector(3, psi)
        for q in range(3):
            assert abs(prob_zero(s, q) - oracles.p_zero(psi, 3, q)) < 1e-12
            assert abs(prob_zero(s, q) + prob_one(s, q) - 1.0) < 1e-12


def test_shot_mode_is_seeded_and_close():
    rng = np.random.default_rng(0)
    psi = oracles.random_state(rng, 3)
    s = StateVector(3, psi)
    a = prob_zero(s, 1, shots=20000, rng=np.random.default_rng(5))
    b = prob_zero(s, 1, shots=20000, rng=np.random.default_rng(5))
    assert a == b
    assert abs(a - prob_zero(s, 1)) < 0.02


def test_gate_then_adjoint_is_identity():
    rng = np.random.default_rng(3)
    s = StateVector(3, oracles.random_state(rng, 3))
    g = Gate1Q.ry(0.7)
    back = apply_1q(apply_1q(s, g, 2), g.adjoint, 2)
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) < 1e-12
    back = apply_cnot(apply_cnot(s, 0, 2), 0, 2)
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) < 1e-12
    back = apply_phase(apply_phase(s, 1, 0.4), 1, -0.4)
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) < 1e-12


_gate = st.one_of(
    st.tuples(st.just("ry"), st.floats(-7, 7), st.integers(0, 3)),
    st.tuples(st.just("rx"), st.floats(-7, 7), st.integers(0, 3)),
    st.tuples(st.just("p"), st.floats(-7, 7), st.integers(0, 3)),
    st.tuples(st.just("cx"), st.integers(0, 3), st.integers(0, 3)),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(_gate, min_size=1, max_size=40))
def test_norm_preserved_by_random_circuits(gates):
    s = apply_1q(zero_state(4), H, 0)
    for kind, a, b in gates:
        if kind == "ry":
            s = apply_1q(s, Gate1Q.ry(a), b)
        elif kind == "rx":
            s = apply_1q(s, Gate1Q.rx(a), b)
        elif kind == "p":
            s = apply_phase(s, b, a)
        elif a != b:
            s = apply_cnot(s, a, b)
    assert abs(s.norm - 1.0) < 1e-12
