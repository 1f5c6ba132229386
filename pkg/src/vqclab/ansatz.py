"""Trainable hardware-efficient ansatz and circuit structure statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError
from .featuremaps import EncoderConfig, encoder_ops
from .qstate import MAX_QUBITS, Op, StateVector, run_ops
from .topology import Topology, entanglement_pairs

__all__ = [
    "AnsatzTemplate",
    "Topology",
    "apply_ansatz",
    "apply_ansatz_amps",
    "build_ansatz",
    "circuit_stats",
    "entanglement_pairs",
    "export_text",
    "full_circuit_ops",
]

MAX_LAYERS = 6


@dataclass(frozen=True)
class AnsatzTemplate:
    n_qubits: int
    layers: int
    topology: Topology
    gate_plan: tuple

    @property
    def parameter_count(self) -> int:
        return self.n_qubits * (self.layers + 1)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "layers": self.layers, "topology": self.topology.value}

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzTemplate":
        return build_ansatz(d["n_qubits"], d["layers"], d["topology"])


def build_ansatz(n_qubits: int, layers: int, topology: Topology | str) -> AnsatzTemplate:
    """``layers`` x (RY on every qubit, CNOT per topology pair) + a closing RY layer.

    Parameter ``k`` drives the RY on qubit ``k % n`` in rotation layer ``k // n``.
    """
    topology = Topology.parse(topology)
    if not 1 <= layers <= MAX_LAYERS:
        raise ConfigurationError(f"layers must be in 1..{MAX_LAYERS}, got {layers}")
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
    pairs = entanglement_pairs(topology, n_qubits) if n_qubits > 1 else []
    plan: list[Op] = []
    k = 0
    for _ in range(layers):
        for q in range(n_qubits):
            plan.append(Op("RY", (q,), param=k))
            k += 1
        plan.extend(Op("CNOT", pair) for pair in pairs)
    for q in range(n_qubits):
        plan.append(Op("RY", (q,), param=k))
        k += 1
    return AnsatzTemplate(n_qubits, layers, topology, tuple(plan))


def _check_theta(theta, tpl: AnsatzTemplate) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 0 or theta.shape[-1] != tpl.parameter_count:
        raise ShapeError(f"expected {tpl.parameter_count} parameters, got shape {theta.shape}")
    return theta


def apply_ansatz_amps(amps: np.ndarray, tpl: AnsatzTemplate, theta) -> np.ndarray:
    """Batched form: ``amps`` is ``(..., 2**n)``, ``theta`` is ``(..., P)``."""
    theta = _check_theta(theta, tpl)
    return run_ops(amps, tpl.n_qubits, tpl.gate_plan, theta)


def apply_ansatz(state: StateVector, tpl: AnsatzTemplate, theta) -> StateVector:
    theta = _check_theta(theta, tpl)
    if theta.ndim != 1:
        raise ShapeError("apply_ansatz takes a single parameter vector")
    if state.n_qubits != tpl.n_qubits:
        raise ShapeError(f"state has {state.n_qubits} qubits, ansatz {tpl.n_qubits}")
    return StateVector(state.n_qubits, apply_ansatz_amps(state.amplitudes, tpl, theta))


def _stats(ops, n: int) -> dict:
    levels = [0] * n
    counts = {"cnot_count": 0, "phase_gate_count": 0, "rotation_count": 0, "hadamard_count": 0}
    for op in ops:
        if op.name == "CNOT":
            counts["cnot_count"] += 1
        elif op.name == "P":
            counts["phase_gate_count"] += 1
        elif op.name in ("RX", "RY", "RZ"):
            counts["rotation_count"] += 1
        elif op.name == "H":
            counts["hadamard_count"] += 1
        step = max(levels[q] for q in op.qubits) + 1
        for q in op.qubits:
            levels[q] = step
    counts["depth"] = max(levels) if levels else 0
    return counts


def full_circuit_ops(cfg: EncoderConfig, tpl: AnsatzTemplate | None, x=None) -> list[Op]:
    x = np.zeros(cfg.n_features) if x is None else np.asarray(x, dtype=float)
    ops = list(encoder_ops(x, cfg))
    if tpl is not None:
        if tpl.n_qubits != cfg.n_qubits:
            raise ConfigurationError("encoder and ansatz qubit counts differ")
        ops += list(tpl.gate_plan)
    return ops


def circuit_stats(cfg: EncoderConfig, tpl: AnsatzTemplate | None = None) -> dict:
    """Gate counts and depth of encoder + ansatz.

    Top-level counts cover the whole circuit; ``encoder`` and ``ansatz`` hold
    the same counts for each part alone. Depth is the longest per-qubit chain
    with a CNOT occupying both endpoints; amplitude state preparation counts as
    one step on every qubit.
    """
    n = cfg.n_qubits
    enc = encoder_ops(np.zeros(cfg.n_features), cfg)
    out = _stats(full_circuit_ops(cfg, tpl), n)
    out["encoder"] = _stats(enc, n)
    out["ansatz"] = _stats(tpl.gate_plan, n) if tpl is not None else _stats([], n)
    return out


def _format_op(op: Op, theta) -> str:
    qubits = " ".join(f"q{q}" for q in op.qubits)
    if op.name in ("H", "CNOT", "PREP"):
        return f"{op.name} {qubits}"
    if op.param is not None:
        if theta is None:
            return f"{op.name}(theta[{op.param}]) {qubits}"
        angle = float(theta[op.param])
    else:
        angle = float(np.ravel(op.angle)[0])
    return f"{op.name}({angle:.4f}) {qubits}"


def export_text(cfg: EncoderConfig | None, tpl: AnsatzTemplate | None, x=None, theta=None) -> str:
    """One gate per line, e.g. ``H q0``, ``P(1.5708) q2``, ``CNOT q0 q1``."""
    ops: list[Op] = []
    if cfg is not None:
        ops += encoder_ops(np.zeros(cfg.n_features) if x is None else x, cfg)
    if tpl is not None:
        ops += list(tpl.gate_plan)
    return "\n".join(_format_op(op, theta) for op in ops) + "\n"
