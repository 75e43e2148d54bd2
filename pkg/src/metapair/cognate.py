"""Cross-dataset attribute pairing and similarity scoring.

Every column of one dataset is paired with every column of another. Each
pair gets three string-similarity features which a fixed-weight linear
model folds into an integer percent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .catalog import ColumnDescriptor, MetadataRecord, normalize_text

DEFAULT_TAU_CONN = 70
WEIGHT_SUM_TOLERANCE = 1e-9
# Absorbs float error so that an exact .5 still rounds up.
_ROUND_EPS = 1e-9


@dataclass(frozen=True)
class AttributePair:
    left: ColumnDescriptor
    right: ColumnDescriptor

    def __post_init__(self) -> None:
        if self.left.dataset_id == self.right.dataset_id:
            raise ValueError(f"pair members share dataset {self.left.dataset_id!r}")


@dataclass(frozen=True)
class FeatureVector:
    token_jaccard: float
    trigram_dice: float
    norm_levenshtein: float

    def __post_init__(self) -> None:
        for name in ("token_jaccard", "trigram_dice", "norm_levenshtein"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


@dataclass(frozen=True)
class RegressionWeights:
    w_jaccard: float = 0.4
    w_dice: float = 0.3
    w_lev: float = 0.3

    def __post_init__(self) -> None:
        ws = (self.w_jaccard, self.w_dice, self.w_lev)
        if any(w < 0 or math.isnan(w) for w in ws):
            raise ValueError(f"weights must be nonnegative, got {ws}")
        if abs(sum(ws) - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {sum(ws)!r}")

    @classmethod
    def parse(cls, text: str) -> "RegressionWeights":
        """Parse ``"j,d,l"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated weights, got {text!r}")
        return cls(*(float(p) for p in parts))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_jaccard, self.w_dice, self.w_lev)


@dataclass(frozen=True)
class SimilarityTriple:
    source_column: str
    target_column: str
    percent: int

    def __post_init__(self) -> None:
        if isinstance(self.percent, bool) or not isinstance(self.percent, int):
            raise TypeError(f"percent must be an int, got {type(self.percent).__name__}")
        if not 0 <= self.percent <= 100:
            raise ValueError(f"percent {self.percent} outside 0..100")

    def to_record(self) -> dict:
        return {"source": self.source_column, "target": self.target_column, "percent": self.percent}

    @classmethod
    def from_record(cls, rec: dict) -> "SimilarityTriple":
        return cls(rec["source"], rec["target"], rec["percent"])


@dataclass(frozen=True)
class ConnectionEvidence:
    dataset_a: str
    dataset_b: str
    max_percent: int
    strong_pairs: int
    connected: bool

    def __post_init__(self) -> None:
        if self.connected != (self.strong_pairs >= 1):
            raise ValueError("connected must hold exactly when strong_pairs >= 1")

    def to_record(self) -> dict:
        return {
            "dataset_a": self.dataset_a,
            "dataset_b": self.dataset_b,
            "max_percent": self.max_percent,
            "strong_pairs": self.strong_pairs,
            "connected": self.connected,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ConnectionEvidence":
        return cls(rec["dataset_a"], rec["dataset_b"], rec["max_percent"], rec["strong_pairs"], rec["connected"])


def generate_pairs(a: MetadataRecord, b: MetadataRecord) -> list[AttributePair]:
    """All ``|a| x |b|`` column pairs, ordered by (left index, right index)."""
    if a.dataset.id == b.dataset.id:
        raise ValueError(f"cannot pair dataset {a.dataset.id!r} with itself")
    return [AttributePair(l, r) for l in a.columns for r in b.columns]


def token_jaccard(t1: Sequence[str], t2: Sequence[str]) -> float:
    s1, s2 = set(t1), set(t2)
    union = s1 | s2
    if not union:
        return 1.0
    return len(s1 & s2) / len(union)


def trigrams(s: str) -> set[str]:
    return {s[i : i + 3] for i in range(len(s) - 2)}


def trigram_dice(s1: str, s2: str) -> float:
    """Dice coefficient over character-trigram sets.

    Strings shorter than three characters have no trigrams; they score 1.0
    against an equal string and 0.0 otherwise.
    """
    if len(s1) < 3 or len(s2) < 3:
        return 1.0 if s1 == s2 else 0.0
    g1, g2 = trigrams(s1), trigrams(s2)
    return 2 * len(g1 & g2) / (len(g1) + len(g2))


def levenshtein(s1: str, s2: str) -> int:
    """Unit-cost edit distance (two-row dynamic programme)."""
    if len(s1) < len(s2):
        s1, s2 = s2, s1
    prev = list(range(len(s2) + 1))
    for i, c1 in enumerate(s1, 1):
        cur = [i]
        for j, c2 in enumerate(s2, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (c1 != c2)))
        prev = cur
    return prev[-1]


def normalized_levenshtein(s1: str, s2: str) -> float:
    longest = max(len(s1), len(s2))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(s1, s2) / longest


def features(tokens_a: Sequence[str], tokens_b: Sequence[str]) -> FeatureVector:
    """Feature vector for two normalized token lists."""
    ja, jb = " ".join(tokens_a), " ".join(tokens_b)
    return FeatureVector(
        token_jaccard=token_jaccard(tokens_a, tokens_b),
        trigram_dice=trigram_dice(ja, jb),
        norm_levenshtein=normalized_levenshtein(ja, jb),
    )


def regression_similarity(f: FeatureVector, w: RegressionWeights) -> int:
    """Weighted feature sum as an integer percent, rounded half-up."""
    score = w.w_jaccard * f.token_jaccard + w.w_dice * f.trigram_dice + w.w_lev * f.norm_levenshtein
    percent = math.floor(100.0 * score + 0.5 + _ROUND_EPS)
    return min(100, max(0, percent))


def score_tokens(tokens_a: Sequence[str], tokens_b: Sequence[str], w: RegressionWeights) -> int:
    return regression_similarity(features(tokens_a, tokens_b), w)


def score_pair(pair: AttributePair, w: RegressionWeights) -> SimilarityTriple:
    return SimilarityTriple(
        pair.left.qualified_name,
        pair.right.qualified_name,
        score_tokens(pair.left.norm_tokens, pair.right.norm_tokens, w),
    )


def cognate_map(
    a: MetadataRecord,
    b: MetadataRecord,
    w: RegressionWeights | None = None,
    tau_conn: int = DEFAULT_TAU_CONN,
    include_descriptions: bool = False,
) -> tuple[list[SimilarityTriple], ConnectionEvidence]:
    """Score every attribute pair of ``a`` x ``b`` and aggregate the evidence.

    With ``include_descriptions`` and both records carrying a description, one
    extra ``a.desc`` / ``b.desc`` triple is appended after the column triples.
    """
    w = w or RegressionWeights()
    triples = [score_pair(p, w) for p in generate_pairs(a, b)]
    if include_descriptions and a.description and b.description:
        pct = score_tokens(normalize_text(a.description), normalize_text(b.description), w)
        triples.append(SimilarityTriple(f"{a.dataset.id}.desc", f"{b.dataset.id}.desc", pct))
    strong = sum(1 for t in triples if t.percent >= tau_conn)
    evidence = ConnectionEvidence(
        dataset_a=a.dataset.id,
        dataset_b=b.dataset.id,
        max_percent=max(t.percent for t in triples),
        strong_pairs=strong,
        connected=strong >= 1,
    )
    return triples, evidence
