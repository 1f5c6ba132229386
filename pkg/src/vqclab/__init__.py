"""Exact statevector simulation and training of variational quantum classifiers."""

from .ansatz import AnsatzTemplate, apply_ansatz, build_ansatz, circuit_stats, entanglement_pairs
from .dataprep import Dataset, RfParams, generate_synthetic, load_csv, rf_importance, select_top_k, stratified_split
from .featuremaps import EncoderConfig, Scheme, encode, encode_amplitude, encode_angle, encode_zz
from .metrics import ConfusionMatrix, MetricPanel, compare_runs, confusion, panel
from .qstate import Gate1Q, StateVector, apply_1q, apply_cnot, apply_phase, prob_zero, zero_state
from .topology import Topology
from .vqc import TrainConfig, TrainedModel, VqcConfig, classify, forward, train, tune_threshold

__version__ = "0.1.0"
