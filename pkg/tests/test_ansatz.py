import numpy as np
import pytest

import oracles
from vqclab.ansatz import apply_ansatz, build_ansatz, circuit_stats, export_text
from vqclab.errors import ConfigurationError, ShapeError
from vqclab.featuremaps import EncoderConfig, Scheme
from vqclab.qstate import StateVector, prob_zero, zero_state
from vqclab.topology import Topology, entanglement_pairs


def test_pair_lists_n4():
    assert entanglement_pairs(Topology.LINEAR, 4) == [(0, 1), (1, 2), (2, 3)]
    assert entanglement_pairs(Topology.CIRCULAR, 4) == [(0, 1), (1, 2), (2, 3), (3, 0)]
    assert entanglement_pairs(Topology.FULL, 4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


@pytest.mark.parametrize("n", range(2, 11))
def test_pair_list_lengths(n):
    assert len(entanglement_pairs("linear", n)) == n - 1
    assert len(entanglement_pairs("circular", n)) == n
    assert len(entanglement_pairs("full", n)) == n * (n - 1) // 2


def test_pairs_need_two_qubits():
    with pytest.raises(ConfigurationError):
        entanglement_pairs("linear", 1)


@pytest.mark.parametrize(
    "n,layers,topology,params,cnots",
    [(4, 2, "circular", 12, 8), (4, 1, "full", 8, 6), (2, 1, "linear", 4, 1)],
)
def test_template_counts(n, layers, topology, params, cnots):
    tpl = build_ansatz(n, layers, topology)
    assert tpl.parameter_count == params
    assert sum(op.name == "CNOT" for op in tpl.gate_plan) == cnots
    slots = sorted(op.param for op in tpl.gate_plan if op.param is not None)
    assert slots == list(range(params))


def test_layer_bounds():
    for bad in (0, 7):
        with pytest.raises(ConfigurationError):
            build_ansatz(4, bad, "linear")


def test_zero_theta_is_identity_on_zero_state():
    tpl = build_ansatz(4, 3, "full")
    out = apply_ansatz(zero_state(4), tpl, np.zeros(tpl.parameter_count))
    assert np.array_equal(out.amplitudes, zero_state(4).amplitudes)


def test_truth_table_trace():
    tpl = build_ansatz(2, 1, "linear")
    out = apply_ansatz(zero_state(2), tpl, [np.pi, 0, 0, 0])
    assert np.allclose(np.abs(out.amplitudes), [0, 0, 0, 1], atol=1e-15)


def test_theta_length_mismatch():
    tpl = build_ansatz(2, 1, "linear")
    with pytest.raises(ShapeError):
        apply_ansatz(zero_state(2), tpl, np.zeros(3))


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("layers", [1, 2])
@pytest.mark.parametrize("topology", list(Topology))
def test_matches_dense_unitary(n, layers, topology):
    rng = np.random.default_rng(n * 10 + layers)
    tpl = build_ansatz(n, layers, topology)
    pairs = entanglement_pairs(topology, n)
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, tpl.parameter_count)
        psi = oracles.random_state(rng, n)
        got = apply_ansatz(StateVector(n, psi), tpl, theta).amplitudes
        ref = oracles.ansatz_unitary(n, layers, pairs, theta) @ psi
        assert np.max(np.abs(got - ref)) < 1e-12
        assert oracles.fidelity(got, ref) >= 1 - 1e-10


def test_gradient_is_not_identically_zero():
    rng = np.random.default_rng(9)
    tpl = build_ansatz(4, 2, "circular")
    theta = rng.uniform(-np.pi, np.pi, tpl.parameter_count)

    def p0(t):
        return prob_zero(apply_ansatz(zero_state(4), tpl, t), 0)

    grad = []
    for k in range(tpl.parameter_count):
        e = np.zeros_like(theta)
        e[k] = np.pi / 2
        grad.append((p0(theta + e) - p0(theta - e)) / 2)
    assert np.max(np.abs(grad)) > 1e-6


@pytest.mark.parametrize("topology,cnots", [("linear", 6), ("circular", 8), ("full", 12)])
def test_zz_encoder_cnot_counts(topology, cnots):
    cfg = EncoderConfig(Scheme.ZZ, 4, topology=topology, repetitions=1)
    stats = circuit_stats(cfg)
    assert stats["cnot_count"] == cnots
    assert stats["encoder"]["cnot_count"] == cnots


def test_stats_totals():
    angle = EncoderConfig(Scheme.ANGLE, 4)
    stats = circuit_stats(angle, build_ansatz(4, 1, "circular"))
    assert stats["cnot_count"] == 4
    assert stats["rotation_count"] == 4 + 8
    full = circuit_stats(angle, build_ansatz(4, 1, "full"))
    assert full["ansatz"]["cnot_count"] == 6
    assert stats["ansatz"]["cnot_count"] == 4
    zz = circuit_stats(EncoderConfig(Scheme.ZZ, 4, topology="circular"), build_ansatz(4, 2, "circular"))
    assert zz["cnot_count"] == 2 * 8 + 8
    assert zz["phase_gate_count"] == 2 * (4 + 4)
    assert zz["hadamard_count"] == 8


def test_depth_by_hand():
    # angle layer (1) + RY layer (1) + CNOT chain 0-1,1-2 (2) + final RY (1)
    stats = circuit_stats(EncoderConfig(Scheme.ANGLE, 3), build_ansatz(3, 1, "linear"))
    assert stats["depth"] == 5
    amp = circuit_stats(EncoderConfig(Scheme.AMPLITUDE, 2), build_ansatz(2, 1, "linear"))
    assert amp["encoder"]["depth"] == 1


def test_export_text():
    cfg = EncoderConfig(Scheme.ZZ, 2, topology="linear", repetitions=1)
    text = export_text(cfg, build_ansatz(2, 1, "linear"), x=[0.25 * np.pi, 0.5])
    lines = text.splitlines()
    assert lines[:3] == ["H q0", "H q1", "P(1.5708) q0"]
    assert "CNOT q0 q1" in lines
    assert lines[-1] == "RY(theta[3]) q1"
    assert len(lines) == 2 + 2 + 3 + 2 + 1 + 2
