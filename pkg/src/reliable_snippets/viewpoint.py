"""Viewpoint classifiers.

Anything with ``classify(text, ic) -> ViewpointDistribution`` and an
``identity`` string can drive snippet extraction. This module ships two toy
classifiers used in tests and a trainable tf-idf + multinomial logistic
regression baseline.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .corpus import VIEWPOINTS, InterventionCondition, tokenize

BASELINE_VERSION = "tfidf-logreg/1"
SUM_TOLERANCE = 1e-9


class EmptyInputError(ValueError):
    pass


@dataclass(frozen=True)
class ViewpointDistribution:
    """Scores for (effective, inconclusive, ineffective), in that order."""

    effective: float
    inconclusive: float
    ineffective: float

    def __post_init__(self):
        values = self.values
        for v in values:
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"viewpoint score {v!r} outside [0, 1]")
        if abs(sum(values) - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"viewpoint scores sum to {sum(values)!r}, not 1")

    @classmethod
    def from_mapping(cls, scores: Mapping[str, float]) -> "ViewpointDistribution":
        return cls(*(float(scores[v]) for v in VIEWPOINTS))

    @classmethod
    def normalized(cls, raw: Sequence[float]) -> "ViewpointDistribution":
        total = math.fsum(raw)
        if not total > 0:
            raise ValueError("cannot normalize scores with a non-positive sum")
        return cls(*(x / total for x in raw))

    @property
    def values(self) -> tuple[float, float, float]:
        return (self.effective, self.inconclusive, self.ineffective)

    def score(self, viewpoint: str) -> float:
        return self.values[VIEWPOINTS.index(viewpoint)]

    @property
    def predicted(self) -> str:
        # max() keeps the first maximal element, which is the fixed tie order
        return max(VIEWPOINTS, key=self.score)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(VIEWPOINTS, self.values))


class ViewpointClassifier(Protocol):
    identity: str

    def classify(self, text: str, ic: InterventionCondition) -> ViewpointDistribution: ...


def classify(model: ViewpointClassifier, text: str, ic: InterventionCondition) -> ViewpointDistribution:
    if not text.strip():
        raise EmptyInputError("empty classifier input")
    return model.classify(text, ic)


class UniformClassifier:
    identity = "uniform"

    def classify(self, text, ic):
        return ViewpointDistribution(1 / 3, 1 / 3, 1 / 3)


class KeywordClassifier:
    """Laplace-smoothed marker-token counts, normalized over the three classes.

    ``scale`` multiplies the raw scores before normalization; it must not
    change anything downstream.
    """

    def __init__(self, markers: Sequence[str] = ("good", "unclear", "bad"), scale: float = 1.0):
        self.markers = tuple(markers)
        self.scale = scale
        self.identity = f"keyword:{','.join(self.markers)}"

    def classify(self, text, ic):
        counts = Counter(tokenize(text))
        return ViewpointDistribution.normalized([self.scale * (counts[m] + 1) for m in self.markers])


# --- baseline: tf-idf + multinomial logistic regression ------------------------------


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 300
    learning_rate: float = 1.0
    l2: float = 1e-4
    init_scale: float = 0.01


class BaselineModel:
    def __init__(
        self, vocabulary, idf, weights, bias, seed, hyperparams: Hyperparams | None = None, feature_scale: float = 1.0
    ):
        self.vocabulary = dict(vocabulary)
        self.idf = np.asarray(idf, dtype=np.float64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        self.seed = int(seed)
        self.hyperparams = hyperparams or Hyperparams()
        self.feature_scale = float(feature_scale)
        n_vocab = len(self.vocabulary)
        if self.weights.shape != (len(VIEWPOINTS), n_vocab) or self.idf.shape != (n_vocab,):
            raise ValueError("baseline model arrays do not match the vocabulary size")

    @property
    def identity(self) -> str:
        return f"baseline:{BASELINE_VERSION}:seed={self.seed}:vocab={len(self.vocabulary)}"

    def features(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        """Sparse tf-idf vector as (indices, values).

        Divided by one corpus-wide constant rather than per-document norms,
        so each logit stays linear in token counts.
        """
        counts = Counter(t for t in tokenize(text) if t in self.vocabulary)
        if not counts:
            return np.zeros(0, dtype=np.intp), np.zeros(0)
        terms = sorted(counts)
        idx = np.array([self.vocabulary[t] for t in terms], dtype=np.intp)
        vals = np.array([counts[t] for t in terms], dtype=np.float64) * self.idf[idx]
        return idx, vals / self.feature_scale

    def logits(self, text: str) -> np.ndarray:
        idx, vals = self.features(text)
        return self.weights[:, idx] @ vals + self.bias

    def classify(self, text, ic=None):
        return ViewpointDistribution(*_softmax(self.logits(text)))

    def to_json(self) -> dict:
        vocab = sorted(self.vocabulary, key=self.vocabulary.__getitem__)
        return {
            "version": BASELINE_VERSION,
            "seed": self.seed,
            "hyperparams": asdict(self.hyperparams),
            "classes": list(VIEWPOINTS),
            "feature_scale": self.feature_scale,
            "vocabulary": vocab,
            "idf": self.idf.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, obj: dict) -> "BaselineModel":
        if obj.get("version") != BASELINE_VERSION:
            raise ValueError(f"unsupported baseline model version {obj.get('version')!r}")
        if list(obj.get("classes", [])) != list(VIEWPOINTS):
            raise ValueError("baseline model class order does not match")
        vocab = {t: i for i, t in enumerate(obj["vocabulary"])}
        return cls(
            vocab,
            obj["idf"],
            obj["weights"],
            obj["bias"],
            obj["seed"],
            Hyperparams(**obj["hyperparams"]),
            obj["feature_scale"],
        )

    @classmethod
    def load(cls, path: str | Path) -> "BaselineModel":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls.from_json(obj)
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValueError(f"{path}: not a baseline model file ({exc})") from None


def _softmax(z: np.ndarray) -> tuple[float, float, float]:
    e = np.exp(z - z.max())
    p = e / e.sum()
    return tuple(float(x) for x in p)


def train_baseline(
    examples: Iterable[tuple[str, str]], hyperparams: Hyperparams | None = None, seed: int = 0
) -> BaselineModel:
    """Fit the baseline by full-batch gradient descent on L2-regularized cross entropy."""
    hp = hyperparams or Hyperparams()
    texts, labels = [], []
    for text, label in examples:
        if label not in VIEWPOINTS:
            raise ValueError(f"training label {label!r} is not one of {VIEWPOINTS}")
        texts.append(text)
        labels.append(label)
    for cls in VIEWPOINTS:
        if cls not in labels:
            raise ValueError(f"no training examples for class {cls!r}")

    docs = [Counter(tokenize(t)) for t in texts]
    df: Counter = Counter()
    for c in docs:
        df.update(c.keys())
    vocab = {t: i for i, t in enumerate(sorted(df))}
    n = len(docs)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in sorted(df)])

    X = np.zeros((n, len(vocab)))
    for row, counts in enumerate(docs):
        for t, c in counts.items():
            X[row, vocab[t]] = c
    X *= idf
    scale = float(np.sqrt((X * X).sum(axis=1)).max()) or 1.0
    X /= scale

    y = np.array([VIEWPOINTS.index(label) for label in labels])
    Y = np.eye(len(VIEWPOINTS))[y]

    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, hp.init_scale, size=(len(VIEWPOINTS), len(vocab)))
    b = np.zeros(len(VIEWPOINTS))
    for _ in range(hp.epochs):
        Z = X @ W.T + b
        Z -= Z.max(axis=1, keepdims=True)
        P = np.exp(Z)
        P /= P.sum(axis=1, keepdims=True)
        G = (P - Y) / n
        W -= hp.learning_rate * (G.T @ X + hp.l2 * W)
        b -= hp.learning_rate * G.sum(axis=0)
    return BaselineModel(vocab, idf, W, b, seed, hp, scale)
