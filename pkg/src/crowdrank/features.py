"""Per-candidate feature scores, normalization, and weighted fusion.

Thread candidates carry seven features (four similarity + three social),
answer candidates four. All features are min-max normalized over the current
candidate set before fusion, except the question score, which is mapped
through a fixed privilege-style ladder.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .embeddings import IdfMap

THREAD_FEATURES = ("sentence", "asym_title", "asym_body", "tf",
                   "answer_count", "total_answer_score", "question_score")
THREAD_SIMILARITY_FEATURES = THREAD_FEATURES[:4]
SOCIAL_FEATURES = THREAD_FEATURES[4:]
ANSWER_FEATURES = ("asym", "tfidf", "top_method", "thread_score")

QUESTION_SCORE_LADDER = (
    (1, 0.1), (5, 0.2), (10, 0.3), (25, 0.4), (50, 0.5),
    (75, 0.6), (100, 0.7), (200, 0.8), (500, 0.9),
)

ANTONYM_TARGET_MODES = ("TR", "ANS", "TR_ANS")

# identifier, optionally preceded by a dotted receiver chain, followed by "("
METHOD_CALL_RE = re.compile(r"(?:\b[A-Za-z_]\w*\s*\.\s*)*\b([A-Za-z_]\w*)\s*\(")
METHOD_KEYWORDS = frozenset({"if", "for", "while", "switch", "catch", "return", "new"})


@dataclass
class WeightConfig:
    """Weights, funnel thresholds and filter toggles for one pipeline run."""

    thread_weights: dict[str, float] = field(
        default_factory=lambda: {f: 0.5 for f in THREAD_FEATURES})
    answer_weights: dict[str, float] = field(
        default_factory=lambda: {"asym": 1.0, "tfidf": 0.5,
                                 "top_method": 0.75, "thread_score": 0.75})
    bm25_top: int = 500
    stage1_keep: int = 250
    stage2_keep: int = 100
    answer_k: int = 150
    final_n: int = 10
    antonym_enabled: bool = False
    antonym_pos_mode: str = "NN"
    antonym_targets: str = "ANS"  # TR | ANS | TR_ANS
    method_scale: float = 10.0
    clamp_negative_cosine: bool = True

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        missing = set(THREAD_FEATURES) - set(self.thread_weights)
        if missing:
            raise ValueError(f"missing thread weights: {sorted(missing)}")
        missing = set(ANSWER_FEATURES) - set(self.answer_weights)
        if missing:
            raise ValueError(f"missing answer weights: {sorted(missing)}")
        if any(w < 0 for w in self.thread_weights.values()):
            raise ValueError("thread weights must be >= 0")
        if any(w < 0 for w in self.answer_weights.values()):
            raise ValueError("answer weights must be >= 0")
        if not (self.bm25_top >= self.stage1_keep >= self.stage2_keep > 0):
            raise ValueError("funnel thresholds must be positive and non-increasing")
        if self.answer_k <= 0:
            raise ValueError("answer_k must be positive")
        if self.method_scale <= 0:
            raise ValueError("method_scale must be positive")
        if self.antonym_targets not in ANTONYM_TARGET_MODES:
            raise ValueError(f"bad antonym_targets {self.antonym_targets!r}")

    @property
    def filter_threads(self) -> bool:
        return self.antonym_enabled and self.antonym_targets in ("TR", "TR_ANS")

    @property
    def filter_answers(self) -> bool:
        return self.antonym_enabled and self.antonym_targets in ("ANS", "TR_ANS")

    def to_flat(self) -> dict[str, str]:
        flat = {f"thread_weight.{k}": repr(v) for k, v in self.thread_weights.items()}
        flat.update({f"answer_weight.{k}": repr(v) for k, v in self.answer_weights.items()})
        flat.update({
            "bm25_top": str(self.bm25_top),
            "stage1_keep": str(self.stage1_keep),
            "stage2_keep": str(self.stage2_keep),
            "answer_k": str(self.answer_k),
            "final_n": str(self.final_n),
            "antonym_enabled": str(self.antonym_enabled).lower(),
            "antonym_pos_mode": self.antonym_pos_mode,
            "antonym_targets": self.antonym_targets,
            "method_scale": repr(self.method_scale),
            "clamp_negative_cosine": str(self.clamp_negative_cosine).lower(),
        })
        return flat

    def save(self, path: str | Path) -> None:
        lines = [f"{k}={v}" for k, v in sorted(self.to_flat().items())]
        Path(path).write_text("\n".join(lines) + "\n", "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "WeightConfig":
        config = cls()
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            key, value = key.strip(), value.strip()
            if key.startswith("thread_weight."):
                config.thread_weights[key.removeprefix("thread_weight.")] = float(value)
            elif key.startswith("answer_weight."):
                config.answer_weights[key.removeprefix("answer_weight.")] = float(value)
            elif key in ("bm25_top", "stage1_keep", "stage2_keep", "answer_k", "final_n"):
                setattr(config, key, int(value))
            elif key == "method_scale":
                config.method_scale = float(value)
            elif key in ("antonym_enabled", "clamp_negative_cosine"):
                setattr(config, key, value.lower() == "true")
            elif key in ("antonym_pos_mode", "antonym_targets"):
                setattr(config, key, value)
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        config.validate()
        return config


@dataclass
class FeatureVector:
    raw: dict[str, float]
    normalized: dict[str, float] = field(default_factory=dict)


def tf_score(bag_q: Mapping[str, int], bag_t: Mapping[str, int]) -> float:
    """Cosine of raw term-frequency vectors; 0 if either bag is empty."""
    if not bag_q or not bag_t:
        return 0.0
    dot = sum(bag_q[w] * bag_t[w] for w in bag_q.keys() & bag_t.keys())
    norm_q = math.sqrt(sum(c * c for c in bag_q.values()))
    norm_t = math.sqrt(sum(c * c for c in bag_t.values()))
    return dot / (norm_q * norm_t)


def tfidf_score(bag_q: Mapping[str, int], bag_a: Mapping[str, int], idf_map: IdfMap) -> float:
    """Cosine of TF*IDF-weighted vectors; 0 if either side has no weight."""
    if not bag_q or not bag_a:
        return 0.0
    wq = {w: c * idf_map.idf(w) for w, c in bag_q.items()}
    wa = {w: c * idf_map.idf(w) for w, c in bag_a.items()}
    dot = sum(wq[w] * wa[w] for w in wq.keys() & wa.keys())
    norm_q = math.sqrt(sum(v * v for v in wq.values()))
    norm_a = math.sqrt(sum(v * v for v in wa.values()))
    if norm_q == 0.0 or norm_a == 0.0:
        return 0.0
    return dot / (norm_q * norm_a)


def question_score_value(score: int) -> float:
    """Ladder lookup mapping a question score to [0.1, 1.0]."""
    for upper, value in QUESTION_SCORE_LADDER:
        if score <= upper:
            return value
    return 1.0


def normalize_social(values: Sequence[float]) -> list[float]:
    """Min-max over the candidate set; an all-equal column maps to 1.0."""
    if not values:
        return []
    lo, hi = min(values), max(values)
    if hi == lo:
        return [1.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def extract_methods(code_text: str) -> list[str]:
    """Method-call identifiers in raw code, language keywords excluded."""
    return [m for m in METHOD_CALL_RE.findall(code_text) if m not in METHOD_KEYWORDS]


def top_method_score(answers: Sequence[tuple[int, str]], scale: float = 10.0) -> dict[int, float]:
    """Score answers by the single globally most frequent method call.

    ``answers`` is (answer_id, raw code text). Answers containing the top
    method m get log2(f_m)/scale, the rest 0. Frequency ties break on the
    lexicographically smallest method name.
    """
    per_answer: dict[int, set[str]] = {}
    freq: Counter = Counter()
    for answer_id, code_text in answers:
        methods = extract_methods(code_text)
        per_answer[answer_id] = set(methods)
        freq.update(methods)
    if not freq:
        return {answer_id: 0.0 for answer_id, _ in answers}
    top = min(freq, key=lambda m: (-freq[m], m))
    value = math.log2(freq[top]) / scale
    return {answer_id: (value if top in methods else 0.0)
            for answer_id, methods in per_answer.items()}


def final_score(fv: FeatureVector, weights: Mapping[str, float]) -> float:
    """Weighted sum of normalized feature scores."""
    try:
        return sum(fv.normalized[name] * w for name, w in weights.items())
    except KeyError as exc:
        raise ValueError(f"feature {exc.args[0]!r} missing from normalized vector") from None


def normalize_and_fuse(raws: Sequence[dict[str, float]], weights: Mapping[str, float],
                       ladder_features: frozenset[str] = frozenset({"question_score"}),
                       ) -> list[tuple[FeatureVector, float]]:
    """Min-max normalize each feature column over the candidate set and fuse.

    Features named in ``ladder_features`` bypass min-max and go through the
    question-score ladder instead.
    """
    if not raws:
        return []
    vectors = [FeatureVector(raw=dict(r)) for r in raws]
    for name in weights:
        column = [fv.raw[name] for fv in vectors]
        if name in ladder_features:
            normed = [question_score_value(int(v)) for v in column]
        else:
            normed = normalize_social(column)
        for fv, value in zip(vectors, normed):
            fv.normalized[name] = value
    return [(fv, final_score(fv, weights)) for fv in vectors]
