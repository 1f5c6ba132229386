"""
Feature maps: classical vector -> encoded statevector.

Every encoder has a batched form taking ``X`` of shape ``(B, d)`` and returning
amplitudes of shape ``(B, 2**n)``; the single-sample functions wrap it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EncodingError
from .qstate import MAX_QUBITS, Op, StateVector, run_ops
from .topology import Topology, entanglement_pairs


class Scheme(str, enum.Enum):
    ZZ = "zz"
    ANGLE = "angle"
    AMPLITUDE = "amplitude"

    @classmethod
    def parse(cls, value) -> "Scheme":
        try:
            return cls(str(value.value if isinstance(value, cls) else value).lower())
        except ValueError:
            raise ConfigurationError(
                f"unknown encoding scheme {value!r}; expected one of {[s.value for s in cls]}"
            ) from None


DEFAULT_REPETITIONS = {Scheme.ZZ: 2, Scheme.ANGLE: 1, Scheme.AMPLITUDE: 1}

# Upper end of the scaled input range each scheme expects. The ZZ map is
# pi-periodic in every feature (P(2x)); inputs in [0, 1] keep all single and
# pair phases below 2 rad, so distinct inputs stay distinguishable. RY(x) is
# injective on [0, pi]; amplitude encoding is scale invariant.
FEATURE_RANGE = {Scheme.ZZ: 1.0, Scheme.ANGLE: np.pi, Scheme.AMPLITUDE: np.pi}
_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class EncoderConfig:
    scheme: Scheme
    n_qubits: int
    topology: Topology = Topology.CIRCULAR
    repetitions: int | None = None
    rotation_axis: str = "y"
    # amplitude only: number of features written into the 2**n slots
    n_features: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        if self.repetitions is None:
            object.__setattr__(self, "repetitions", DEFAULT_REPETITIONS[self.scheme])
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be >= 1")
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in 1..{MAX_QUBITS}")
        axis = str(self.rotation_axis).lower()
        if axis not in _AXES:
            raise ConfigurationError(f"rotation_axis must be one of {_AXES}, got {self.rotation_axis!r}")
        object.__setattr__(self, "rotation_axis", axis)
        if self.scheme is Scheme.AMPLITUDE:
            d = self.n_features if self.n_features is not None else self.n_qubits
            if not 1 <= d <= 1 << self.n_qubits:
                raise ConfigurationError(f"{d} features do not fit in {self.n_qubits} qubits")
            object.__setattr__(self, "n_features", d)
        else:
            object.__setattr__(self, "n_features", self.n_qubits)

    @classmethod
    def for_features(cls, scheme, n_features: int, compact_amplitude: bool = False, **kw) -> "EncoderConfig":
        """Pick the register width for ``n_features`` inputs.

        Amplitude encoding shares the width of the other schemes by default
        (zero-padded); ``compact_amplitude`` uses ceil(log2 d) qubits instead.
        """
        scheme = Scheme.parse(scheme)
        n = n_features
        if scheme is Scheme.AMPLITUDE and compact_amplitude:
            n = max(1, int(np.ceil(np.log2(n_features))))
        return cls(scheme=scheme, n_qubits=n, n_features=n_features, **kw)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "n_qubits": self.n_qubits,
            "topology": self.topology.value,
            "repetitions": self.repetitions,
            "rotation_axis": self.rotation_axis,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderConfig":
        return cls(**d)


def _as_batch(X, cfg: EncoderConfig) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if cfg.scheme is Scheme.AMPLITUDE:
        ok = X.ndim == 2 and 1 <= X.shape[1] <= 1 << cfg.n_qubits
    else:
        ok = X.ndim == 2 and X.shape[1] == cfg.n_features
    if not ok:
        raise EncodingError(
            f"{cfg.scheme.value} encoder expects {cfg.n_features} features, got shape {X.shape[1:]}"
        )
    return X


def _zero_batch(batch: int, n: int) -> np.ndarray:
    amps = np.zeros((batch, 1 << n), dtype=complex)
    amps[:, 0] = 1.0
    return amps


def zz_ops(X, cfg: EncoderConfig) -> list[Op]:
    """Gate list of the ZZ map; angles carry one entry per row of ``X``.

    Per repetition: H on every qubit, P(2 x_i) on qubit i, then for each
    topology pair (i, j) the block CNOT(i,j) P(2 x_i x_j)@j CNOT(i,j).
    """
    X = _as_batch(X, cfg)
    n = cfg.n_qubits
    pairs = entanglement_pairs(cfg.topology, n) if n > 1 else []
    layer = [Op("H", (q,)) for q in range(n)]
    layer += [Op("P", (q,), 2.0 * X[:, q]) for q in range(n)]
    for i, j in pairs:
        layer += [
            Op("CNOT", (i, j)),
            Op("P", (j,), 2.0 * X[:, i] * X[:, j]),
            Op("CNOT", (i, j)),
        ]
    return layer * cfg.repetitions


def angle_ops(X, cfg: EncoderConfig) -> list[Op]:
    X = _as_batch(X, cfg)
    name = "R" + cfg.rotation_axis.upper()
    layer = [Op(name, (q,), X[:, q]) for q in range(cfg.n_qubits)]
    return layer * cfg.repetitions


def encoder_ops(X, cfg: EncoderConfig) -> list[Op]:
    if cfg.scheme is Scheme.ZZ:
        return zz_ops(X, cfg)
    if cfg.scheme is Scheme.ANGLE:
        return angle_ops(X, cfg)
    return [Op("PREP", tuple(range(cfg.n_qubits)))]


def amplitude_batch(X, cfg: EncoderConfig) -> np.ndarray:
    X = _as_batch(X, cfg)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        bad = int(np.flatnonzero((norms == 0) | ~np.isfinite(norms))[0])
        raise EncodingError(f"amplitude encoding needs a nonzero finite vector (row {bad})")
    amps = np.zeros((X.shape[0], 1 << cfg.n_qubits), dtype=complex)
    amps[:, : X.shape[1]] = X / norms[:, None]
    return amps


def encode_batch(X, cfg: EncoderConfig) -> np.ndarray:
    """Encode every row of ``X``; returns amplitudes of shape ``(B, 2**n)``."""
    X = _as_batch(X, cfg)
    if cfg.scheme is Scheme.AMPLITUDE:
        return amplitude_batch(X, cfg)
    return run_ops(_zero_batch(X.shape[0], cfg.n_qubits), cfg.n_qubits, encoder_ops(X, cfg))


def _check_scheme(cfg: EncoderConfig, scheme: Scheme) -> None:
    if cfg.scheme is not scheme:
        raise EncodingError(f"config is for {cfg.scheme.value}, not {scheme.value}")


def _single(x, cfg: EncoderConfig) -> StateVector:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise EncodingError("expected a single feature vector")
    return StateVector(cfg.n_qubits, encode_batch(x, cfg)[0])


def encode_zz(x, cfg: EncoderConfig) -> StateVector:
    _check_scheme(cfg, Scheme.ZZ)
    return _single(x, cfg)


def encode_angle(x, cfg: EncoderConfig) -> StateVector:
    _check_scheme(cfg, Scheme.ANGLE)
    return _single(x, cfg)


def encode_amplitude(x, cfg: EncoderConfig) -> StateVector:
    _check_scheme(cfg, Scheme.AMPLITUDE)
    return _single(x, cfg)


def encode(x, cfg: EncoderConfig) -> StateVector:
    return _single(x, cfg)
