"""
Model-ready data: synthetic fraud generator, CSV I/O, min-max scaling to
[0, pi], stratified splitting and random-forest feature selection.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ParseError, SelectionError, SplitError, TrainingError

DIFFICULTY_SEPARATION = {"easy": 3.0, "medium": 1.5, "hard": 0.75}
# fraud clusters are tighter than legitimate traffic (in legit-sigma units)
FRAUD_SPREAD = 0.5
N_NOISE_FEATURES = 2
SCALE_MAX = np.pi


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if X.ndim != 2:
            raise ConfigurationError("features must be a 2-D matrix")
        if y.shape != (X.shape[0],):
            raise ConfigurationError("labels must have one entry per row")
        if not np.all((y == 0) | (y == 1)):
            raise ConfigurationError("labels must be 0 or 1")
        names = tuple(self.feature_names)
        if len(names) != X.shape[1]:
            raise ConfigurationError("one feature name per column required")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y.astype(int))
        object.__setattr__(self, "feature_names", names)

    def __len__(self) -> int:
        return self.labels.size

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        n_fraud = int(self.labels.sum())
        return len(self) - n_fraud, n_fraud

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names)

    def select_columns(self, cols) -> "Dataset":
        cols = list(cols)
        return Dataset(self.features[:, cols], self.labels, tuple(self.feature_names[c] for c in cols))


# ---------------------------------------------------------------------------
# Generator and CSV
# ---------------------------------------------------------------------------

def generate_synthetic(
    n_legit: int,
    n_fraud: int,
    d_raw: int = 8,
    difficulty: str = "medium",
    seed: int = 0,
) -> Dataset:
    """Two seeded Gaussian classes in ``d_raw`` dimensions.

    Informative features shift the fraud mean by ``separation`` legit-class
    standard deviations (easy 3, medium 1.5, hard 0.75) with a random sign; the
    fraud spread is half the legit spread. Two columns, named ``noise*`` and
    placed at seeded positions, share one distribution across both classes.
    Each column then gets its own seeded offset and scale to look like raw
    transaction units.
    """
    if n_legit < 1 or n_fraud < 1:
        raise ConfigurationError("both class counts must be >= 1")
    if d_raw < 4:
        raise ConfigurationError("d_raw must be >= 4")
    try:
        sep = DIFFICULTY_SEPARATION[difficulty]
    except KeyError:
        raise ConfigurationError(
            f"difficulty must be one of {sorted(DIFFICULTY_SEPARATION)}, got {difficulty!r}"
        ) from None

    rng = np.random.default_rng(seed)
    n = n_legit + n_fraud
    noise_cols = np.sort(rng.choice(d_raw, N_NOISE_FEATURES, replace=False))
    informative = np.setdiff1d(np.arange(d_raw), noise_cols)
    signs = rng.choice([-1.0, 1.0], size=informative.size)
    scales = 10.0 ** rng.uniform(0.0, 2.0, d_raw)
    offsets = rng.uniform(-100.0, 100.0, d_raw)

    y = np.concatenate([np.zeros(n_legit, dtype=int), np.ones(n_fraud, dtype=int)])
    Z = rng.standard_normal((n, d_raw))
    fraud = y == 1
    Z[np.ix_(fraud, informative)] = Z[np.ix_(fraud, informative)] * FRAUD_SPREAD + signs * sep
    X = offsets + scales * Z

    order = rng.permutation(n)
    names = []
    k_inf = k_noise = 0
    for j in range(d_raw):
        if j in noise_cols:
            names.append(f"noise{k_noise}")
            k_noise += 1
        else:
            names.append(f"v{k_inf}")
            k_inf += 1
    return Dataset(X[order], y[order], tuple(names))


def write_csv(ds: Dataset, path, label_column: str = "label") -> Path:
    """Header row then one row per sample; floats use shortest round-trip repr."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.feature_names) + [label_column])
        for row, label in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in row] + [int(label)])
    return path


def load_csv(path, label_column: str = "label") -> Dataset:
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ParseError(f"{path}: empty file (no header row)")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ParseError(f"{path}: label column {label_column!r} not in header")
        li = header.index(label_column)
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(f"{path}: row {lineno} has {len(rec)} fields, expected {len(header)}")
            vals = []
            for name, cell in zip(header, rec):
                cell = cell.strip()
                if cell == "":
                    raise ParseError(f"{path}: row {lineno}: missing value in column {name!r}")
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{path}: row {lineno}: malformed number {cell!r} in column {name!r}") from None
                if not math.isfinite(v):
                    raise ParseError(f"{path}: row {lineno}: non-finite value in column {name!r}")
                vals.append(v)
            label = vals.pop(li)
            if label not in (0.0, 1.0):
                raise ParseError(f"{path}: row {lineno}: label must be 0 or 1, got {rec[li].strip()!r}")
            rows.append(vals)
            labels.append(int(label))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    names = tuple(h for i, h in enumerate(header) if i != li)
    return Dataset(np.array(rows), np.array(labels), names)


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalerState:
    """Per-feature min/max from the training rows, mapped onto [0, upper]."""

    mins: np.ndarray
    maxs: np.ndarray
    upper: float = SCALE_MAX

    @classmethod
    def fit(cls, X, upper: float = SCALE_MAX) -> "ScalerState":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ConfigurationError("scaler needs a nonempty 2-D training matrix")
        if not upper > 0:
            raise ConfigurationError("scaler upper bound must be positive")
        return cls(X.min(axis=0), X.max(axis=0), float(upper))

    def with_upper(self, upper: float) -> "ScalerState":
        return ScalerState(self.mins, self.maxs, float(upper))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        span = self.maxs - self.mins
        safe = np.where(span > 0, span, 1.0)
        scaled = self.upper * (X - self.mins) / safe
        # constant training columns carry no information: pin them to 0
        scaled = np.where(span > 0, scaled, 0.0)
        return np.clip(scaled, 0.0, self.upper)

    def to_dict(self) -> dict:
        return {
            "min": [float(v).hex() for v in self.mins],
            "max": [float(v).hex() for v in self.maxs],
            "upper": float(self.upper).hex(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerState":
        return cls(
            np.array([float.fromhex(v) for v in d["min"]]),
            np.array([float.fromhex(v) for v in d["max"]]),
            float.fromhex(d["upper"]),
        )


def fit_apply_scaler(train, *others, upper: float = SCALE_MAX):
    """Fit min-max on ``train`` only and map ``train`` and every other matrix to [0, upper].

    Returns ``(state, train_scaled, *others_scaled)``. Values outside the
    training range are clamped.
    """
    state = ScalerState.fit(train, upper)
    return (state, state.transform(train), *(state.transform(o) for o in others))


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

def stratified_split_indices(labels, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    y = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        if members.size < 2:
            raise SplitError(f"class {cls} has {members.size} samples; need at least 2")
        cut = math.floor(train_fraction * members.size + 1e-9)
        if cut == 0 or cut == members.size:
            raise SplitError(f"fraction {train_fraction} leaves one side of class {cls} empty")
        shuffled = rng.permutation(members)
        train_idx.append(shuffled[:cut])
        test_idx.append(shuffled[cut:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(test_idx))


def stratified_split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    tr, te = stratified_split_indices(ds.labels, train_fraction, seed)
    return ds.subset(tr), ds.subset(te)


# ---------------------------------------------------------------------------
# Random-forest importance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RfParams:
    n_trees: int = 100
    max_depth: int = 8
    min_samples_split: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.min_samples_split < 2:
            raise ConfigurationError("need n_trees >= 1, max_depth >= 1, min_samples_split >= 2")


def _best_split(X: np.ndarray, y: np.ndarray, feature_order, max_features: int):
    """Lowest weighted child Gini over up to ``max_features`` non-constant features.

    Returns ``(weighted_child_impurity, feature, left_rows)`` or None. Weighted
    impurity is in sample counts: n_left*gini_left + n_right*gini_right.
    """
    n = y.size
    pos = y.sum()
    nl = np.arange(1, n)
    nr = n - nl
    best = None
    visited = 0
    for f in feature_order:
        if visited == max_features:
            break
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        valid = xs[1:] > xs[:-1]
        if not valid.any():
            continue
        visited += 1
        cum = np.cumsum(y[order])[:-1]
        pl = cum / nl
        pr = (pos - cum) / nr
        imp = 2.0 * (nl * pl * (1.0 - pl) + nr * pr * (1.0 - pr))
        imp[~valid] = np.inf
        i = int(np.argmin(imp))
        if best is None or imp[i] < best[0]:
            best = (float(imp[i]), int(f), order[: i + 1])
    return best


def _column_order(X: np.ndarray) -> np.ndarray:
    # feature draws index this content-keyed order, so permuting columns
    # permutes the importances and nothing else
    digests = [hashlib.sha256(np.ascontiguousarray(X[:, j]).tobytes()).digest() for j in range(X.shape[1])]
    return np.array(sorted(range(X.shape[1]), key=lambda j: digests[j]))


def _tree_importance(
    X: np.ndarray, y: np.ndarray, params: RfParams, rng: np.random.Generator, columns: np.ndarray
) -> np.ndarray:
    n, d = X.shape
    max_features = max(1, int(math.isqrt(d)))
    gains = np.zeros(d)
    stack = [(np.arange(n), 0)]
    while stack:
        rows, depth = stack.pop()
        yn = y[rows]
        m = rows.size
        p = yn.mean()
        if depth >= params.max_depth or m < params.min_samples_split or p in (0.0, 1.0):
            continue
        split = _best_split(X[rows], yn, columns[rng.permutation(d)], max_features)
        if split is None:
            continue
        child_imp, f, left_local = split
        gain = m * 2.0 * p * (1.0 - p) - child_imp
        if gain <= 0:
            continue
        gains[f] += gain
        mask = np.zeros(m, dtype=bool)
        mask[left_local] = True
        stack.append((rows[~mask], depth + 1))
        stack.append((rows[mask], depth + 1))
    return gains


def _canonical_seed(X: np.ndarray, y: np.ndarray, seed: int) -> int:
    digest = hashlib.sha256(np.ascontiguousarray(X).tobytes() + y.astype(np.int64).tobytes()).digest()
    return int.from_bytes(digest[:8], "little") ^ (seed & 0xFFFFFFFFFFFFFFFF)


def rf_importance(ds: Dataset, params: RfParams = RfParams(), canonical: bool = False) -> np.ndarray:
    """Mean decrease in Gini impurity per feature, normalised to sum to 1.

    Each tree is a bootstrap CART grown with sqrt(d) candidate features per
    split and seeded from ``(params.seed, tree_index)``. Per-tree gains are
    normalised before averaging. With ``canonical`` the rows are sorted first
    and the seed is mixed with a hash of the sorted content, so the result does
    not depend on row order.
    """
    X, y = ds.features, ds.labels
    if y.min() == y.max():
        raise TrainingError("random forest needs both classes present")
    seed = params.seed
    if canonical:
        order = np.lexsort(np.column_stack([X, y]).T[::-1])
        X, y = X[order], y[order]
        seed = _canonical_seed(X, y, seed)
    n = y.size
    columns = _column_order(X)
    total = np.zeros(X.shape[1])
    used = 0
    for t in range(params.n_trees):
        rng = np.random.default_rng([seed, t])
        boot = rng.integers(0, n, n)
        gains = _tree_importance(X[boot], y[boot], params, rng, columns)
        s = gains.sum()
        if s > 0:
            total += gains / s
            used += 1
    if used == 0:
        raise TrainingError("no tree found an impurity-reducing split")
    return total / total.sum()


def select_top_k(scores, k: int) -> list[int]:
    """Indices of the ``k`` largest scores, descending; ties go to the lower index."""
    scores = np.asarray(scores, dtype=float)
    if not 1 <= k <= scores.size:
        raise SelectionError(f"k must lie in 1..{scores.size}, got {k}")
    return sorted(range(scores.size), key=lambda i: (-scores[i], i))[:k]
