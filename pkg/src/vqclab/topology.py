"""Entanglement topologies: which qubit pairs get a two-qubit gate."""
from __future__ import annotations

import enum
from itertools import combinations

from .errors import ConfigurationError


class Topology(str, enum.Enum):
    LINEAR = "linear"
    CIRCULAR = "circular"
    FULL = "full"

    @classmethod
    def parse(cls, value: "str | Topology") -> "Topology":
        try:
            return cls(str(value.value if isinstance(value, cls) else value).lower())
        except ValueError:
            raise ConfigurationError(
                f"unknown topology {value!r}; expected one of {[t.value for t in cls]}"
            ) from None


def entanglement_pairs(topology: Topology | str, n_qubits: int) -> list[tuple[int, int]]:
    """Ordered (control, target) pairs.

    Linear is the chain (0,1)..(n-2,n-1); circular closes the ring with
    (n-1, 0); full lists every i<j lexicographically.
    """
    topology = Topology.parse(topology)
    if n_qubits < 2:
        raise ConfigurationError(f"entanglement needs at least 2 qubits, got {n_qubits}")
    chain = [(i, i + 1) for i in range(n_qubits - 1)]
    if topology is Topology.LINEAR:
        return chain
    if topology is Topology.CIRCULAR:
        return chain + [(n_qubits - 1, 0)]
    return list(combinations(range(n_qubits), 2))
