"""Turn per-sentence relation scores into per-pair candidate sets.

Each entity pair is seen through one or more mentions (sentences), each
carrying a relation -> score map. A mention admits its top-k relations
above a confidence floor as candidates; the pair-level confidence of a
relation is the sum of its scores over the mentions that admitted it.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

log = logging.getLogger(__name__)

# Reserved no-relation label; never becomes a candidate.
NA_LABEL = "NA"

DEFAULT_TOP_K = 3
DEFAULT_MIN_CONF = 0.1


class PredictionFileError(ValueError):
    """Malformed predictions file; carries the 1-based line number."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = f"{self.path or '<input>'}:{line}" if line is not None else str(self.path)
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class MentionPrediction:
    """One sentence-level score distribution for an entity pair."""

    pair_id: str
    subject: str
    object: str
    mention_id: str
    scores: Mapping[str, float]

    def __post_init__(self):
        for rel, score in self.scores.items():
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"score for {rel!r} out of [0,1]: {score}")


@dataclass(frozen=True)
class Candidate:
    conf: float
    max_mention: float
    supporting_mentions: tuple[str, ...]


@dataclass(frozen=True)
class PairCandidates:
    pair_id: str
    subject: str
    object: str
    candidates: Mapping[str, Candidate]


def select_mention_candidates(
    scores: Mapping[str, float],
    top_k: int = DEFAULT_TOP_K,
    min_conf: float = DEFAULT_MIN_CONF,
) -> list[str]:
    """The mention's up-to-top_k relations by score, floor applied.

    NA and non-positive scores are excluded; ties at the cut fall to the
    lexicographically smaller relation name.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    if not 0.0 <= min_conf <= 1.0:
        raise ValueError(f"min_conf must be in [0,1], got {min_conf}")
    eligible = [
        rel
        for rel, score in scores.items()
        if rel != NA_LABEL and score > 0.0 and score >= min_conf
    ]
    eligible.sort(key=lambda rel: (-scores[rel], rel))
    return eligible[:top_k]


def aggregate(
    mentions: Sequence[MentionPrediction],
    top_k: int = DEFAULT_TOP_K,
    min_conf: float = DEFAULT_MIN_CONF,
) -> PairCandidates:
    """Combine one pair's mentions into its candidate relation set.

    A relation's confidence sums the scores of exactly the mentions that
    admitted it as a candidate; max_mention is the best of those scores.
    """
    if not mentions:
        raise ValueError("aggregate needs at least one mention")
    first = mentions[0]
    seen_ids: set[str] = set()
    for m in mentions:
        if (m.pair_id, m.subject, m.object) != (first.pair_id, first.subject, first.object):
            raise ValueError(
                f"mention {m.mention_id!r} does not match pair {first.pair_id!r}"
            )
        if m.mention_id in seen_ids:
            raise ValueError(f"duplicate mention id {m.mention_id!r} in pair {m.pair_id!r}")
        seen_ids.add(m.mention_id)

    supporters: dict[str, list[MentionPrediction]] = {}
    for m in mentions:
        for rel in select_mention_candidates(m.scores, top_k, min_conf):
            supporters.setdefault(rel, []).append(m)

    candidates: dict[str, Candidate] = {}
    for rel in sorted(supporters):
        ms = sorted(supporters[rel], key=lambda m: m.mention_id)
        # fsum in mention-id order keeps the stored value exactly
        # recomputable from the raw input.
        conf = math.fsum(m.scores[rel] for m in ms)
        candidates[rel] = Candidate(
            conf=conf,
            max_mention=max(m.scores[rel] for m in ms),
            supporting_mentions=tuple(m.mention_id for m in ms),
        )
    return PairCandidates(
        pair_id=first.pair_id,
        subject=first.subject,
        object=first.object,
        candidates=candidates,
    )


def build_pair_candidates(
    mentions_by_pair: Mapping[str, Sequence[MentionPrediction]],
    top_k: int = DEFAULT_TOP_K,
    min_conf: float = DEFAULT_MIN_CONF,
) -> list[PairCandidates]:
    """Aggregate every pair, dropping pairs with no surviving candidate."""
    pairs = []
    for pair_id in sorted(mentions_by_pair):
        pc = aggregate(mentions_by_pair[pair_id], top_k, min_conf)
        if pc.candidates:
            pairs.append(pc)
    return pairs


def load_predictions(path: str | Path) -> dict[str, list[MentionPrediction]]:
    """Read the line-delimited JSON predictions file, grouped by pair.

    Each line is an object with pair_id, subject, object, mention_id and a
    relation -> score map. Scores are taken as given; mentions whose scores
    sum past a distribution (> 1 plus float slack) are counted and flagged
    with a single warning, not rescaled.
    """
    grouped: dict[str, list[MentionPrediction]] = {}
    unnormalized = 0
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PredictionFileError(f"invalid JSON ({exc})", path, lineno) from exc
            try:
                mention = MentionPrediction(
                    pair_id=str(record["pair_id"]),
                    subject=str(record["subject"]),
                    object=str(record["object"]),
                    mention_id=str(record["mention_id"]),
                    scores={str(r): float(s) for r, s in record["scores"].items()},
                )
            except (KeyError, TypeError, AttributeError, ValueError) as exc:
                raise PredictionFileError(f"bad record ({exc})", path, lineno) from exc
            if math.fsum(mention.scores.values()) > 1.0 + 1e-6 * len(mention.scores):
                unnormalized += 1
            grouped.setdefault(mention.pair_id, []).append(mention)
    if unnormalized:
        log.warning(
            "%d mention(s) in %s have scores summing past 1; left unscaled", unnormalized, path
        )
    return grouped


def write_predictions_file(path: str | Path, mentions: Iterable[MentionPrediction]) -> None:
    """Serialize mentions in the load_predictions line format."""
    with open(path, "w", encoding="utf-8") as handle:
        for m in mentions:
            record = {
                "pair_id": m.pair_id,
                "subject": m.subject,
                "object": m.object,
                "mention_id": m.mention_id,
                "scores": {rel: m.scores[rel] for rel in sorted(m.scores)},
            }
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
