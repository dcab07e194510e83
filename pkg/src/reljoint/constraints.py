"""Instantiate consistency constraints over candidate predictions.

Every (pair, candidate relation) becomes a binary decision variable whose
objective coefficient is conf + best mention score. Clue lookups joined
through shared entities yield five at-most-one constraint families; the
three type families can optionally be relaxed into penalized soft
constraints backed by auxiliary variables.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .candidates import PairCandidates
from .clues import ClueSet, TypeClue, UniquenessClue

log = logging.getLogger(__name__)

TYPE_FAMILIES = ("sr", "ro", "rer")
FAMILY_ORDER = {"sr": 0, "ro": 1, "rer": 2, "ou": 3, "su": 4}


@dataclass(frozen=True)
class DecisionVar:
    id: int
    pair_id: str
    subject: str
    object: str
    relation: str
    objective_coeff: float

    def __post_init__(self):
        if self.objective_coeff <= 0:
            raise ValueError(
                f"objective coefficient must be positive, got {self.objective_coeff}"
            )


@dataclass(frozen=True)
class HardConstraint:
    """At-most-one over `var_ids`; 2 vars for type families, >= 2 for
    uniqueness groups."""

    family: str
    var_ids: tuple[int, ...]
    clue: TypeClue | UniquenessClue

    @property
    def k_score(self) -> float:
        return self.clue.k_score if isinstance(self.clue, TypeClue) else float("-inf")


@dataclass(frozen=True)
class AuxVar:
    """Violation indicator for one relaxed type constraint: forced to 1
    exactly when both endpoint variables are selected, costing `penalty`."""

    id: int
    var_a: int
    var_b: int
    penalty: float
    family: str
    clue: TypeClue


@dataclass(frozen=True)
class SoftAugmentation:
    aux_vars: tuple[AuxVar, ...]


def build_decision_vars(candidates: Sequence[PairCandidates]) -> list[DecisionVar]:
    """One densely numbered variable per (pair, candidate relation)."""
    out: list[DecisionVar] = []
    seen_pairs: set[str] = set()
    for pc in sorted(candidates, key=lambda p: p.pair_id):
        if pc.pair_id in seen_pairs:
            raise ValueError(f"duplicate pair id {pc.pair_id!r}")
        seen_pairs.add(pc.pair_id)
        for rel in sorted(pc.candidates):
            cand = pc.candidates[rel]
            out.append(
                DecisionVar(
                    id=len(out),
                    pair_id=pc.pair_id,
                    subject=pc.subject,
                    object=pc.object,
                    relation=rel,
                    objective_coeff=cand.conf + cand.max_mention,
                )
            )
    return out


def generate_hard(
    candidates: Sequence[PairCandidates], clues: ClueSet
) -> tuple[list[DecisionVar], list[HardConstraint]]:
    """Join candidate variables through shared entities against the clues.

    Emits, deduplicated and canonically sorted:

    * `sr` - variable pairs whose pairs share a subject (the same pair
      included) and whose relations form an sr clue;
    * `ro` - likewise over shared objects;
    * `rer` - ordered variable pairs where the first pair's object is the
      second pair's subject and the directed rer clue exists; joins of a
      pair against itself are degenerate and skipped (counted in the log);
    * `ou`/`su` - per clued relation and entity, one at-most-one group over
      the competing variables; singleton groups are vacuous and dropped.
    """
    vars = build_decision_vars(candidates)

    by_subject: dict[str, list[DecisionVar]] = defaultdict(list)
    by_object: dict[str, list[DecisionVar]] = defaultdict(list)
    for v in vars:
        by_subject[v.subject].append(v)
        by_object[v.object].append(v)

    constraints: dict[tuple, HardConstraint] = {}

    def emit(family: str, var_ids: tuple[int, ...], clue) -> None:
        key = (family, var_ids)
        if key not in constraints:
            constraints[key] = HardConstraint(family, var_ids, clue)

    for entity_vars in by_subject.values():
        for i, va in enumerate(entity_vars):
            for vb in entity_vars[i + 1 :]:
                clue = clues.sr_clue(va.relation, vb.relation)
                if clue is not None:
                    emit("sr", (min(va.id, vb.id), max(va.id, vb.id)), clue)

    for entity_vars in by_object.values():
        for i, va in enumerate(entity_vars):
            for vb in entity_vars[i + 1 :]:
                clue = clues.ro_clue(va.relation, vb.relation)
                if clue is not None:
                    emit("ro", (min(va.id, vb.id), max(va.id, vb.id)), clue)

    degenerate_rer = 0
    for entity, obj_vars in by_object.items():
        subj_vars = by_subject.get(entity)
        if not subj_vars:
            continue
        for va in obj_vars:  # va's pair has `entity` as object
            for vb in subj_vars:  # vb's pair has it as subject
                if va.pair_id == vb.pair_id:
                    degenerate_rer += 1
                    continue
                clue = clues.rer_clue(va.relation, vb.relation)
                if clue is not None:
                    emit("rer", (va.id, vb.id), clue)
    if degenerate_rer:
        log.debug("skipped %d degenerate same-pair rer joins", degenerate_rer)

    grouped: dict[tuple[str, str, str], list[int]] = defaultdict(list)
    for v in vars:
        if clues.ou_clue(v.relation) is not None:
            grouped[("ou", v.relation, v.subject)].append(v.id)
        if clues.su_clue(v.relation) is not None:
            grouped[("su", v.relation, v.object)].append(v.id)
    for (family, relation, _entity), ids in grouped.items():
        if len(ids) < 2:
            continue
        clue = clues.ou_clue(relation) if family == "ou" else clues.su_clue(relation)
        emit(family, tuple(sorted(ids)), clue)

    ordered = sorted(constraints.values(), key=lambda c: (FAMILY_ORDER[c.family], c.var_ids))
    return vars, ordered


def soften(
    vars: Sequence[DecisionVar],
    hard: Sequence[HardConstraint],
    alpha: float,
) -> tuple[list[HardConstraint], SoftAugmentation]:
    """Relax finite-score type constraints into penalized violations.

    Each such constraint gets an auxiliary variable with penalty
    -alpha * k_score; uniqueness groups and -inf (manual) constraints stay
    hard. Auxiliary ids continue after the decision variables.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    remaining: list[HardConstraint] = []
    aux: list[AuxVar] = []
    next_id = len(vars)
    for constraint in hard:
        if constraint.family in TYPE_FAMILIES and math.isfinite(constraint.k_score):
            a, b = constraint.var_ids
            aux.append(
                AuxVar(
                    id=next_id,
                    var_a=a,
                    var_b=b,
                    penalty=-alpha * constraint.k_score,
                    family=constraint.family,
                    clue=constraint.clue,  # type: ignore[arg-type]
                )
            )
            next_id += 1
        else:
            remaining.append(constraint)
    return remaining, SoftAugmentation(aux_vars=tuple(aux))


def census(
    constraints: Sequence[HardConstraint], soft: SoftAugmentation | None = None
) -> dict[str, dict[str, int]]:
    """Constraint counts per family, split into hard rows and soft
    (penalized) rows."""
    hard_counts = {family: 0 for family in FAMILY_ORDER}
    for c in constraints:
        hard_counts[c.family] += 1
    soft_counts = {family: 0 for family in FAMILY_ORDER}
    if soft is not None:
        for a in soft.aux_vars:
            soft_counts[a.family] += 1
    return {"hard": hard_counts, "soft": soft_counts}


def _clue_label(clue: TypeClue | UniquenessClue) -> str:
    if isinstance(clue, TypeClue):
        return f"{clue.rel_a}|{clue.rel_b}"
    return clue.rel


def dump_constraints(
    path,
    vars: Sequence[DecisionVar],
    hard: Sequence[HardConstraint],
    soft: SoftAugmentation | None = None,
) -> None:
    """Write one constraint per line (kind, family, clue, bound variables)
    for debugging generated models."""
    by_id = {v.id: v for v in vars}

    def describe(var_id: int) -> str:
        v = by_id[var_id]
        return f"{v.pair_id}:{v.relation}"

    with open(path, "w", encoding="utf-8") as handle:
        for c in hard:
            members = " ".join(describe(i) for i in c.var_ids)
            handle.write(f"hard\t{c.family}\t{_clue_label(c.clue)}\t{members}\n")
        if soft is not None:
            for a in soft.aux_vars:
                handle.write(
                    f"soft\t{a.family}\t{_clue_label(a.clue)}\t"
                    f"{describe(a.var_a)} {describe(a.var_b)}\tpenalty={a.penalty!r}\n"
                )
