"""
Experiment configuration files.

The format is line oriented::

    # comment
    seed = 42
    encoder.scheme = zz
    ansatz.layers = 2
    [train]
    epochs = 150        # keys under a [section] header get the section prefix

Values are int, float, true/false or strings (quotes optional). Every key must
appear in ``SCHEMA``; anything else is rejected by name.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

from .ansatz import build_ansatz
from .dataprep import DIFFICULTY_SEPARATION, RfParams
from .errors import ConfigurationError
from .featuremaps import FEATURE_RANGE, EncoderConfig, Scheme
from .topology import Topology
from .vqc import LogitMode, TrainConfig, VqcConfig

# key -> (type, default)
SCHEMA: dict[str, tuple[type, object]] = {
    "seed": (int, 42),
    "data.csv": (str, ""),
    "data.label_column": (str, "label"),
    "data.legit": (int, 1600),
    "data.fraud": (int, 800),
    "data.features": (int, 8),
    "data.difficulty": (str, "medium"),
    "select.k": (int, 4),
    "rf.n_trees": (int, 100),
    "rf.max_depth": (int, 8),
    "rf.min_samples_split": (int, 4),
    "split.train_fraction": (float, 0.7),
    "split.val_fraction": (float, 0.2),
    "encoder.scheme": (str, "zz"),
    "encoder.repetitions": (int, 0),
    "encoder.rotation_axis": (str, "y"),
    "encoder.amplitude_layout": (str, "padded"),
    "encoder.feature_range": (float, 0.0),
    "ansatz.topology": (str, "circular"),
    "ansatz.layers": (int, 2),
    "model.readout_qubit": (int, 0),
    "model.logit_mode": (str, "zexpectation"),
    "model.logit_scale": (float, 4.0),
    "model.threshold": (float, 0.5),
    "train.epochs": (int, 100),
    "train.batch_size": (int, 32),
    "train.learning_rate": (float, 0.01),
    "train.beta1": (float, 0.9),
    "train.beta2": (float, 0.999),
    "train.epsilon": (float, 1e-8),
    "train.shift": (float, math.pi / 2),
    "output.dir": (str, "runs"),
    "grid.encoders": (str, "zz,angle,amplitude"),
    "grid.topologies": (str, "linear,circular,full"),
    "grid.baseline": (str, "zz+circular"),
}


def _parse_value(raw: str):
    raw = raw.strip()
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if ch in "\"'":
            quote = None if quote == ch else (ch if quote is None else quote)
        elif ch == "#" and quote is None:
            return line[:i]
    return line


def _coerce(key: str, value):
    kind, _ = SCHEMA[key]
    if kind is str:
        return str(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{key}: expected a number, got {value!r}")
    return float(value)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values: dict = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if section:
            key = f"{section}.{key}"
        if key not in SCHEMA:
            raise ConfigurationError(f"{source}:{lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key '{key}'")
        values[key] = _coerce(key, _parse_value(raw))
    return values


def derive_seed(master: int, label: str) -> int:
    """A 63-bit seed that depends only on ``(master, label)``."""
    digest = hashlib.sha256(f"{master}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass(frozen=True)
class ExperimentConfig:
    values: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def __post_init__(self):
        merged = {k: default for k, (_, default) in SCHEMA.items()}
        for k, v in self.values.items():
            if k not in SCHEMA:
                raise ConfigurationError(f"unknown key '{k}'")
            merged[k] = _coerce(k, v)
        object.__setattr__(self, "values", merged)
        self.validate()

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        return cls(parse_config_text(text, str(path)), path.parent)

    def __getitem__(self, key: str):
        return self.values[key]

    def with_values(self, updates: dict) -> "ExperimentConfig":
        """Copy with dotted-key overrides, e.g. ``{"ansatz.layers": 3}``."""
        return ExperimentConfig({**self.values, **updates}, self.base_dir)

    def validate(self) -> None:
        v = self.values
        for key in ("split.train_fraction", "split.val_fraction"):
            if not 0.0 < v[key] < 1.0:
                raise ConfigurationError(f"{key} must lie in (0, 1)")
        if v["data.csv"] and not self.csv_path.is_file():
            raise ConfigurationError(f"data.csv: file not found: {self.csv_path}")
        if not v["data.csv"]:
            if v["data.legit"] < 2 or v["data.fraud"] < 2:
                raise ConfigurationError("data.legit and data.fraud must be >= 2")
            if v["data.features"] < 4:
                raise ConfigurationError("data.features must be >= 4")
            if v["data.difficulty"] not in DIFFICULTY_SEPARATION:
                raise ConfigurationError(f"data.difficulty must be one of {sorted(DIFFICULTY_SEPARATION)}")
        if v["encoder.amplitude_layout"] not in ("padded", "compact"):
            raise ConfigurationError("encoder.amplitude_layout must be 'padded' or 'compact'")
        if v["encoder.feature_range"] < 0:
            raise ConfigurationError("encoder.feature_range must be >= 0 (0 = scheme default)")
        if v["encoder.repetitions"] < 0:
            raise ConfigurationError("encoder.repetitions must be >= 0 (0 = scheme default)")
        if v["select.k"] < 1:
            raise ConfigurationError("select.k must be >= 1")
        Scheme.parse(v["encoder.scheme"])
        Topology.parse(v["ansatz.topology"])
        LogitMode.parse(v["model.logit_mode"])
        for s in self.grid_encoders:
            Scheme.parse(s)
        for t in self.grid_topologies:
            Topology.parse(t)
        self.train_config()
        self.rf_params()

    @property
    def csv_path(self) -> Path:
        p = Path(self.values["data.csv"])
        return p if p.is_absolute() else self.base_dir / p

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def cell_name(self) -> str:
        return f"{Scheme.parse(self['encoder.scheme']).value}+{Topology.parse(self['ansatz.topology']).value}"

    @property
    def grid_encoders(self) -> list[str]:
        return [s.strip() for s in self.values["grid.encoders"].split(",") if s.strip()]

    @property
    def grid_topologies(self) -> list[str]:
        return [s.strip() for s in self.values["grid.topologies"].split(",") if s.strip()]

    @property
    def feature_range(self) -> float:
        """Upper end of the [0, r] range features are scaled to for this encoder."""
        return self["encoder.feature_range"] or FEATURE_RANGE[Scheme.parse(self["encoder.scheme"])]

    def rf_params(self) -> RfParams:
        return RfParams(
            n_trees=self["rf.n_trees"],
            max_depth=self["rf.max_depth"],
            min_samples_split=self["rf.min_samples_split"],
            seed=derive_seed(self.seed, "rf"),
        )

    def train_config(self, seed: int | None = None) -> TrainConfig:
        return TrainConfig(
            epochs=self["train.epochs"],
            batch_size=self["train.batch_size"],
            learning_rate=self["train.learning_rate"],
            beta1=self["train.beta1"],
            beta2=self["train.beta2"],
            epsilon=self["train.epsilon"],
            seed=derive_seed(self.seed, self.cell_name) if seed is None else seed,
            shift=self["train.shift"],
        )

    def vqc_config(self, n_features: int) -> VqcConfig:
        reps = self["encoder.repetitions"] or None
        enc = EncoderConfig.for_features(
            self["encoder.scheme"],
            n_features,
            compact_amplitude=self["encoder.amplitude_layout"] == "compact",
            topology=self["ansatz.topology"],
            repetitions=reps,
            rotation_axis=self["encoder.rotation_axis"],
        )
        tpl = build_ansatz(enc.n_qubits, self["ansatz.layers"], self["ansatz.topology"])
        return VqcConfig(
            encoder=enc,
            ansatz=tpl,
            readout_qubit=self["model.readout_qubit"],
            logit_mode=self["model.logit_mode"],
            logit_scale=self["model.logit_scale"],
            threshold=self["model.threshold"],
        )

    def snapshot(self) -> dict:
        """Settings recorded in reports; the output location is left out."""
        return {k: v for k, v in sorted(self.values.items()) if k != "output.dir"}
