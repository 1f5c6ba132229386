"""
Variational quantum classifier: forward pass, loss, parameter-shift gradients,
Adam and the training loop.

The readout is p0, the probability of measuring 0 on the readout qubit. The
loss feeds a logit ``z`` built from p0 into a clamped sigmoid cross-entropy:

* ``zexpectation`` (default): ``z = scale * (2*p0 - 1)``, i.e. a scaled <Z>.
* ``rawp0``: ``z = p0`` literally, which confines sigmoid(z) to [0.5, 0.731].
"""
from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import AnsatzTemplate, apply_ansatz_amps
from .errors import ConfigurationError, DivergenceError, InputError, ShapeError, TuningError
from .featuremaps import EncoderConfig, encode_batch
from .qstate import prob_zero_amps, sample_prob_zero

log = logging.getLogger(__name__)

SIGMOID_CLAMP = 1e-12
INIT_SCALE = np.pi / 10
THRESHOLD_GRID = np.round(np.arange(5, 96) / 100.0, 2)
MODEL_FORMAT = "vqclab-model/1"


class LogitMode(str, enum.Enum):
    RAW_P0 = "rawp0"
    Z_EXPECTATION = "zexpectation"

    @classmethod
    def parse(cls, value) -> "LogitMode":
        try:
            return cls(str(value.value if isinstance(value, cls) else value).lower())
        except ValueError:
            raise ConfigurationError(f"unknown logit mode {value!r}") from None


@dataclass(frozen=True)
class VqcConfig:
    encoder: EncoderConfig
    ansatz: AnsatzTemplate
    readout_qubit: int = 0
    logit_mode: LogitMode = LogitMode.Z_EXPECTATION
    logit_scale: float = 4.0
    threshold: float = 0.5
    shots: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "logit_mode", LogitMode.parse(self.logit_mode))
        if self.encoder.n_qubits != self.ansatz.n_qubits:
            raise ConfigurationError(
                f"encoder uses {self.encoder.n_qubits} qubits but ansatz {self.ansatz.n_qubits}"
            )
        if not 0 <= self.readout_qubit < self.n_qubits:
            raise ConfigurationError(f"readout qubit {self.readout_qubit} out of range")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigurationError("threshold must lie in [0, 1]")
        if not self.logit_scale > 0:
            raise ConfigurationError("logit_scale must be positive")
        if self.shots is not None and self.shots < 1:
            raise ConfigurationError("shots must be positive when given")

    @property
    def n_qubits(self) -> int:
        return self.encoder.n_qubits

    @property
    def parameter_count(self) -> int:
        return self.ansatz.parameter_count

    def to_dict(self) -> dict:
        return {
            "encoder": self.encoder.to_dict(),
            "ansatz": self.ansatz.to_dict(),
            "readout_qubit": self.readout_qubit,
            "logit_mode": self.logit_mode.value,
            "logit_scale": self.logit_scale,
            "threshold": self.threshold,
            "shots": self.shots,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VqcConfig":
        d = dict(d)
        d["encoder"] = EncoderConfig.from_dict(d["encoder"])
        d["ansatz"] = AnsatzTemplate.from_dict(d["ansatz"])
        return cls(**d)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    shift: float = np.pi / 2

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if not 0 < self.learning_rate < 1:
            raise ConfigurationError("learning_rate must lie in (0, 1)")
        if not 0 <= self.beta1 < 1 or not 0 <= self.beta2 < 1:
            raise ConfigurationError("Adam betas must lie in [0, 1)")
        if not 0 < self.shift < np.pi:
            raise ConfigurationError("parameter shift must lie in (0, pi)")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# ---------------------------------------------------------------------------
# Forward pass and loss
# ---------------------------------------------------------------------------

def forward_encoded(encoded: np.ndarray, theta, cfg: VqcConfig) -> np.ndarray:
    """p0 for pre-encoded states ``(..., 2**n)`` under ``theta`` ``(..., P)``."""
    out = apply_ansatz_amps(encoded, cfg.ansatz, theta)
    return prob_zero_amps(out, cfg.n_qubits, cfg.readout_qubit)


def forward(x, theta, cfg: VqcConfig, rng: np.random.Generator | None = None):
    """p0(x; theta). A 1-D ``x`` gives a float, a 2-D batch an array.

    With ``cfg.shots`` set the exact probabilities are replaced by seeded
    finite-shot estimates drawn from ``rng``.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    encoded = encode_batch(x, cfg.encoder)
    if cfg.shots is None:
        p0 = forward_encoded(encoded, theta, cfg)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        out = apply_ansatz_amps(encoded, cfg.ansatz, theta)
        p0 = np.array([
            sample_prob_zero(row, cfg.n_qubits, cfg.readout_qubit, cfg.shots, rng) for row in out
        ])
    return float(p0[0]) if single else p0


def classify(p0, tau: float):
    """1 (fraud) iff p0 >= tau."""
    if np.ndim(p0) == 0:
        return int(p0 >= tau)
    return (np.asarray(p0) >= tau).astype(int)


def logits(p0, cfg: VqcConfig) -> np.ndarray:
    p0 = np.asarray(p0, dtype=float)
    if cfg.logit_mode is LogitMode.RAW_P0:
        return p0
    return cfg.logit_scale * (2.0 * p0 - 1.0)


def _dlogit_dp0(cfg: VqcConfig) -> float:
    return 1.0 if cfg.logit_mode is LogitMode.RAW_P0 else 2.0 * cfg.logit_scale


def clamped_sigmoid(z) -> np.ndarray:
    with np.errstate(over="ignore"):
        s = 1.0 / (1.0 + np.exp(-np.asarray(z, dtype=float)))
    return np.clip(s, SIGMOID_CLAMP, 1.0 - SIGMOID_CLAMP)


def sample_losses(z, y) -> np.ndarray:
    s = clamped_sigmoid(z)
    y = np.asarray(y, dtype=float)
    return -(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))


def _check_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise InputError("batch must be a nonempty 1-D label array")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("labels must be 0 or 1")
    return y.astype(int)


def loss_from_p0(p0, y, cfg: VqcConfig) -> float:
    y = _check_labels(y)
    # fsum makes the mean independent of sample order
    return math.fsum(sample_losses(logits(p0, cfg), y)) / y.size


def batch_loss(theta, X, y, cfg: VqcConfig) -> float:
    """Mean clamped sigmoid cross-entropy over the batch ``(X, y)``."""
    y = _check_labels(y)
    X = np.asarray(X, dtype=float)
    if X.shape[0] != y.size:
        raise ShapeError("X and y lengths differ")
    return loss_from_p0(forward_encoded(encode_batch(X, cfg.encoder), theta, cfg), y, cfg)


# ---------------------------------------------------------------------------
# Gradients
# ---------------------------------------------------------------------------

def _shift_stack(theta: np.ndarray, shift: float) -> np.ndarray:
    """Rows: theta, then theta + s*e_k for every k, then theta - s*e_k."""
    eye = np.eye(theta.size) * shift
    return np.vstack([theta[None, :], theta + eye, theta - eye])


def _shifted_p0(encoded: np.ndarray, theta, cfg: VqcConfig, shift: float):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (cfg.parameter_count,):
        raise ShapeError(f"expected {cfg.parameter_count} parameters, got shape {theta.shape}")
    P = theta.size
    stack = _shift_stack(theta, shift)
    p = forward_encoded(encoded[None, :, :], stack[:, None, :], cfg)  # (2P+1, B)
    dp = (p[1 : P + 1] - p[P + 1 :]) / (2.0 * np.sin(shift))
    return p[0], dp.T  # (B,), (B, P)


def p0_gradient(x, theta, cfg: VqcConfig, shift: float = np.pi / 2) -> np.ndarray:
    """d p0 / d theta by the parameter-shift rule; shape ``(P,)`` or ``(B, P)``."""
    x = np.asarray(x, dtype=float)
    _, dp = _shifted_p0(encode_batch(x, cfg.encoder), theta, cfg, shift)
    return dp[0] if x.ndim == 1 else dp


def _loss_and_grad_encoded(encoded, y, theta, cfg: VqcConfig, shift: float):
    p0, dp = _shifted_p0(encoded, theta, cfg, shift)
    z = logits(p0, cfg)
    with np.errstate(over="ignore"):
        raw = 1.0 / (1.0 + np.exp(-z))
    s = np.clip(raw, SIGMOID_CLAMP, 1.0 - SIGMOID_CLAMP)
    dl_dz = np.where(s == raw, s - y, 0.0)
    loss = math.fsum(sample_losses(z, y)) / y.size
    grad = (dl_dz * _dlogit_dp0(cfg)) @ dp / y.size
    return loss, grad, p0


def grad_parameter_shift(theta, X, y, cfg: VqcConfig, shift: float = np.pi / 2) -> np.ndarray:
    """Exact dL/dtheta: parameter-shift p0 derivatives chained through the loss."""
    y = _check_labels(y)
    encoded = encode_batch(X, cfg.encoder)
    if encoded.shape[0] != y.size:
        raise ShapeError("X and y lengths differ")
    return _loss_and_grad_encoded(encoded, y, theta, cfg, shift)[1]


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(state: AdamState, theta, grad, tcfg: TrainConfig) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; returns new state and parameters."""
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if theta.shape != grad.shape or state.m.shape != theta.shape:
        raise ShapeError("theta, grad and optimiser moments must share a shape")
    t = state.t + 1
    m = tcfg.beta1 * state.m + (1.0 - tcfg.beta1) * grad
    v = tcfg.beta2 * state.v + (1.0 - tcfg.beta2) * grad * grad
    m_hat = m / (1.0 - tcfg.beta1**t)
    v_hat = v / (1.0 - tcfg.beta2**t)
    theta = theta - tcfg.learning_rate * m_hat / (np.sqrt(v_hat) + tcfg.epsilon)
    return AdamState(m, v, t), theta


# ---------------------------------------------------------------------------
# Threshold tuning
# ---------------------------------------------------------------------------

def _f1(pred: np.ndarray, truth: np.ndarray) -> float:
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == 0)))
    fn = int(np.sum((pred == 0) & (truth == 1)))
    return 0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn)


def tune_threshold(p0_values, labels) -> float:
    """Grid threshold in [0.05, 0.95] (step 0.01) maximising F1; ties go to the smaller value."""
    p0 = np.asarray(p0_values, dtype=float)
    y = _check_labels(labels)
    if p0.shape != y.shape:
        raise TuningError("p0 and label lengths differ")
    if y.min() == y.max():
        raise TuningError("threshold tuning needs both classes present")
    best_tau, best_f1 = float(THRESHOLD_GRID[0]), -1.0
    for tau in THRESHOLD_GRID:
        f1 = _f1(classify(p0, tau), y)
        if f1 > best_f1:
            best_tau, best_f1 = float(tau), f1
    return best_tau


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


@dataclass
class TrainedModel:
    theta: np.ndarray
    threshold: float
    config: VqcConfig
    train_config: TrainConfig
    history: list[EpochRecord] = field(default_factory=list)
    theta_history: list[np.ndarray] = field(default_factory=list)
    preprocessing: dict = field(default_factory=dict)

    def predict_proba(self, X) -> np.ndarray:
        return forward(np.atleast_2d(np.asarray(X, dtype=float)), self.theta, self.config)

    def predict(self, X) -> np.ndarray:
        return classify(self.predict_proba(X), self.threshold)


def init_theta(n_params: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-INIT_SCALE, INIT_SCALE, n_params)


def _evaluate(encoded, y, theta, cfg: VqcConfig) -> tuple[float, float]:
    p0 = forward_encoded(encoded, theta, cfg)
    loss = loss_from_p0(p0, y, cfg)
    acc = float(np.mean(classify(p0, cfg.threshold) == y))
    return loss, acc


def train(train_data, val_data, vcfg: VqcConfig, tcfg: TrainConfig) -> TrainedModel:
    """Mini-batch Adam on parameter-shift gradients.

    ``train_data`` and ``val_data`` are ``(X, y)`` pairs of scaled features.
    Everything random (init, shuffles) flows from ``tcfg.seed``. The returned
    threshold is tuned on the validation split.
    """
    Xtr, ytr = np.asarray(train_data[0], dtype=float), _check_labels(train_data[1])
    Xva, yva = np.asarray(val_data[0], dtype=float), _check_labels(val_data[1])
    if Xtr.shape[0] != ytr.size or Xva.shape[0] != yva.size:
        raise ShapeError("feature and label lengths differ")
    enc_tr = encode_batch(Xtr, vcfg.encoder)
    enc_va = encode_batch(Xva, vcfg.encoder)

    rng = np.random.default_rng(tcfg.seed)
    theta = init_theta(vcfg.parameter_count, rng)
    opt = AdamState.zeros(theta.size)
    history: list[EpochRecord] = []
    thetas: list[np.ndarray] = []
    n = ytr.size
    for epoch in range(1, tcfg.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, tcfg.batch_size):
            idx = np.sort(order[start : start + tcfg.batch_size])
            loss, grad, _ = _loss_and_grad_encoded(enc_tr[idx], ytr[idx], theta, vcfg, tcfg.shift)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise DivergenceError(f"non-finite loss/gradient at epoch {epoch}, batch offset {start}")
            opt, theta = adam_step(opt, theta, grad, tcfg)
        tr_loss, tr_acc = _evaluate(enc_tr, ytr, theta, vcfg)
        va_loss, va_acc = _evaluate(enc_va, yva, theta, vcfg)
        if not (np.isfinite(tr_loss) and np.isfinite(va_loss)):
            raise DivergenceError(f"non-finite loss after epoch {epoch}")
        history.append(EpochRecord(epoch, tr_loss, tr_acc, va_loss, va_acc))
        thetas.append(theta.copy())
        log.debug("epoch %d train_loss=%.5f val_loss=%.5f val_acc=%.4f", epoch, tr_loss, va_loss, va_acc)

    tau = tune_threshold(forward_encoded(enc_va, theta, vcfg), yva)
    return TrainedModel(theta, tau, vcfg, tcfg, history, thetas)


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

def save_model(model: TrainedModel, path) -> Path:
    """Write a JSON model file; floats that must round-trip are stored as hex."""
    doc = {
        "format": MODEL_FORMAT,
        "config": model.config.to_dict(),
        "train": {k: (float(v).hex() if isinstance(v, float) else v) for k, v in model.train_config.to_dict().items()},
        "seed": model.train_config.seed,
        "theta": [float(t).hex() for t in model.theta],
        "threshold": float(model.threshold).hex(),
        "preprocessing": model.preprocessing,
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def load_model(path) -> TrainedModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MODEL_FORMAT:
        raise InputError(f"{path}: not a {MODEL_FORMAT} file")
    train_cfg = {k: (float.fromhex(v) if isinstance(v, str) else v) for k, v in doc["train"].items()}
    return TrainedModel(
        theta=np.array([float.fromhex(t) for t in doc["theta"]]),
        threshold=float.fromhex(doc["threshold"]),
        config=VqcConfig.from_dict(doc["config"]),
        train_config=TrainConfig(**train_cfg),
        preprocessing=doc.get("preprocessing", {}),
    )
