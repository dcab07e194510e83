"""0-1 integer linear program: model, exact solver, oracle, LP export.

The model only ever contains three row shapes - pairwise exclusions
(x_i + x_j <= 1), at-most-one groups, and the three-row linking gadget
that forces an auxiliary variable to the AND of its two endpoints. That
restriction buys an exact, deterministic solver: the constraint graph is
decomposed into connected components, and each component is searched by
depth-first branch and bound that re-splits the remaining free variables
after every branch, with an at-most-one-tightened upper bound for
pruning.

Feasibility forces every auxiliary variable to equal the AND of its
endpoints, so the search only branches on decision variables; a link's
penalty is folded into the partner's coefficient once one endpoint is
committed.

Determinism contract: fixed inputs give a fixed result whenever the
search completes within budget, with ties resolved toward the
lexicographically smallest selected-id set. Objectives are evaluated
with math.fsum over ascending variable ids, so equal selections always
yield bit-identical values. One corner of the tie-break is approximate:
a variable whose effective coefficient is exactly zero creates
equal-value optima of different sizes, and when such ties span separate
components the component-wise choice may differ from the whole-model
lexicographic minimum (decision variables are strictly positive by
construction, so this needs an exact float collision during penalty
folding; the returned objective is unaffected either way).
"""

from __future__ import annotations

import math
import re
import sys
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .constraints import DecisionVar, HardConstraint, SoftAugmentation

BRUTE_FORCE_LIMIT = 25
DEFAULT_TIME_BUDGET_MS = 60_000
# Slack for pruning and near-tie detection; well above float64 noise at
# desk scale, far below any genuine coefficient gap.
TIE_EPS = 1e-9

_CHUNK_BITS = 18  # brute-force enumeration block size (2**18 masks)
_THREAD_STACK_THRESHOLD = 1200  # components above this solve on a big-stack thread


class ModelError(ValueError):
    pass


@dataclass
class IlpModel:
    """Binary maximization model.

    `coeffs[i]` is variable i's objective coefficient; ids are dense.
    Variables with id >= num_decision are auxiliary: each appears as the
    third element of exactly one link and nowhere else.
    """

    coeffs: list[float]
    num_decision: int
    pairwise: list[tuple[int, int]] = field(default_factory=list)
    groups: list[tuple[int, ...]] = field(default_factory=list)
    links: list[tuple[int, int, int]] = field(default_factory=list)
    names: list[str] | None = None

    def __post_init__(self):
        if self.names is None:
            self.names = [f"x{i}" for i in range(len(self.coeffs))]
        self.validate()

    @property
    def num_vars(self) -> int:
        return len(self.coeffs)

    def validate(self) -> None:
        n = len(self.coeffs)
        if len(self.names) != n:
            raise ModelError("names/coeffs length mismatch")
        if len(set(self.names)) != n:
            raise ModelError("variable names are not unique")
        if not 0 <= self.num_decision <= n:
            raise ModelError("num_decision out of range")

        def check(i: int, where: str) -> None:
            if not 0 <= i < n:
                raise ModelError(f"{where} references unknown variable {i}")

        aux_ids = set()
        for a, b, aux in self.links:
            for i in (a, b, aux):
                check(i, "link")
            if len({a, b, aux}) != 3:
                raise ModelError(f"degenerate link ({a}, {b}, {aux})")
            if aux in aux_ids:
                raise ModelError(f"auxiliary variable {aux} used by two links")
            aux_ids.add(aux)
        expected_aux = set(range(self.num_decision, n))
        if aux_ids != expected_aux:
            raise ModelError("auxiliary ids must be exactly the ids past num_decision")
        for a, b, _aux in self.links:
            if a in expected_aux or b in expected_aux:
                raise ModelError("link endpoints must be decision variables")
        for i, j in self.pairwise:
            check(i, "pairwise")
            check(j, "pairwise")
            if i == j:
                raise ModelError(f"pairwise constraint on a single variable {i}")
            if i in expected_aux or j in expected_aux:
                raise ModelError("pairwise constraints may not touch auxiliary variables")
        for group in self.groups:
            if len(group) < 2 or len(set(group)) != len(group):
                raise ModelError(f"bad group {group}")
            for i in group:
                check(i, "group")
                if i in expected_aux:
                    raise ModelError("groups may not touch auxiliary variables")


@dataclass
class SolveStats:
    nodes: int = 0
    components: int = 0
    wall_ms: float = 0.0


@dataclass
class Solution:
    assignment: dict[int, int]
    objective_value: float
    optimal: bool
    stats: SolveStats

    def selected(self) -> list[int]:
        return sorted(i for i, v in self.assignment.items() if v == 1)


def build_model(
    vars: Sequence[DecisionVar],
    hard: Sequence[HardConstraint],
    soft: SoftAugmentation | None = None,
) -> IlpModel:
    """Assemble the model from generated variables and constraints."""
    for expected, v in enumerate(vars):
        if v.id != expected:
            raise ModelError(f"variable ids must be dense, found {v.id} at position {expected}")
    n = len(vars)
    coeffs = [v.objective_coeff for v in vars]
    names = _unique_names(_var_name(v) for v in vars)
    pairwise: list[tuple[int, int]] = []
    groups: list[tuple[int, ...]] = []
    for c in hard:
        for i in c.var_ids:
            if not 0 <= i < n:
                raise ModelError(f"constraint references unknown variable {i}")
        if len(c.var_ids) == 2:
            pairwise.append((c.var_ids[0], c.var_ids[1]))
        else:
            groups.append(c.var_ids)
    links: list[tuple[int, int, int]] = []
    if soft is not None:
        for aux in soft.aux_vars:
            if aux.id != len(coeffs):
                raise ModelError(f"auxiliary ids must continue densely, found {aux.id}")
            if not (0 <= aux.var_a < n and 0 <= aux.var_b < n):
                raise ModelError("auxiliary variable links unknown decision variables")
            coeffs.append(-aux.penalty)
            names.append(_unique_name(names, f"aux_{aux.var_a}_{aux.var_b}"))
            links.append((aux.var_a, aux.var_b, aux.id))
    return IlpModel(
        coeffs=coeffs,
        num_decision=n,
        pairwise=pairwise,
        groups=groups,
        links=links,
        names=names,
    )


def _var_name(v: DecisionVar) -> str:
    return _sanitize(f"d_{v.pair_id}_{v.relation}")


def _sanitize(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", name)


def _unique_name(taken: Sequence[str], name: str) -> str:
    if name not in taken:
        return name
    suffix = 2
    while f"{name}_{suffix}" in taken:
        suffix += 1
    return f"{name}_{suffix}"


def _unique_names(names: Iterable[str]) -> list[str]:
    out: list[str] = []
    seen: set[str] = set()
    for name in names:
        if name in seen:
            suffix = 2
            while f"{name}_{suffix}" in seen:
                suffix += 1
            name = f"{name}_{suffix}"
        seen.add(name)
        out.append(name)
    return out


def selection_objective(model: IlpModel, selected: Iterable[int]) -> float:
    """Canonical objective of a selection: fsum over ascending ids."""
    return math.fsum(model.coeffs[i] for i in sorted(selected))


def forced_aux(model: IlpModel, selected_decisions: set[int]) -> set[int]:
    """Auxiliary ids feasibility forces to 1 for the given decision set."""
    return {
        aux for a, b, aux in model.links if a in selected_decisions and b in selected_decisions
    }


def check_assignment(model: IlpModel, assignment: Mapping[int, int]) -> list[str]:
    """All constraint violations of an assignment (empty = feasible)."""
    problems: list[str] = []
    for i in range(model.num_vars):
        if assignment.get(i) not in (0, 1):
            problems.append(f"variable {i} is not binary")
    for i, j in model.pairwise:
        if assignment.get(i, 0) + assignment.get(j, 0) > 1:
            problems.append(f"pairwise ({i}, {j}) violated")
    for group in model.groups:
        if sum(assignment.get(i, 0) for i in group) > 1:
            problems.append(f"group {group} violated")
    for a, b, aux in model.links:
        xa, xb, xx = assignment.get(a, 0), assignment.get(b, 0), assignment.get(aux, 0)
        if xx > xa or xx > xb or xa + xb - xx > 1:
            problems.append(f"link ({a}, {b}, {aux}) violated")
    return problems


@dataclass
class Component:
    """A connected sub-model plus the map from its local ids back to the
    parent model's ids."""

    model: IlpModel
    var_map: tuple[int, ...]


def decompose(model: IlpModel) -> list[Component]:
    """Split into connected components of the constraint graph.

    Links connect their endpoints and auxiliary variable; unconstrained
    variables become singleton components. Components are ordered by their
    smallest parent id, so the output is independent of traversal order.
    """
    n = model.num_vars
    adjacency: list[list[int]] = [[] for _ in range(n)]

    def connect(i: int, j: int) -> None:
        adjacency[i].append(j)
        adjacency[j].append(i)

    for i, j in model.pairwise:
        connect(i, j)
    for group in model.groups:
        anchor = group[0]
        for i in group[1:]:
            connect(anchor, i)
    for a, b, aux in model.links:
        connect(a, aux)
        connect(b, aux)
        connect(a, b)

    seen = [False] * n
    components: list[Component] = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        members = [start]
        while queue:
            node = queue.popleft()
            for neighbor in adjacency[node]:
                if not seen[neighbor]:
                    seen[neighbor] = True
                    members.append(neighbor)
                    queue.append(neighbor)
        members.sort()
        local = {gid: lid for lid, gid in enumerate(members)}
        member_set = set(members)
        sub = IlpModel(
            coeffs=[model.coeffs[g] for g in members],
            num_decision=sum(1 for g in members if g < model.num_decision),
            pairwise=sorted(
                (min(local[i], local[j]), max(local[i], local[j]))
                for i, j in model.pairwise
                if i in member_set
            ),
            groups=sorted(
                tuple(sorted(local[i] for i in group))
                for group in model.groups
                if group[0] in member_set
            ),
            links=sorted(
                (local[a], local[b], local[aux])
                for a, b, aux in model.links
                if a in member_set
            ),
            names=[model.names[g] for g in members],
        )
        components.append(Component(model=sub, var_map=tuple(members)))
    return components


class _Timeout(Exception):
    pass


class _ComponentSolver:
    """Exact search over one connected component.

    Every subproblem is first shrunk by a weighted domination rule: a
    link-free variable whose coefficient strictly outweighs the positive
    coefficients of its whole conflict neighborhood belongs to every
    optimal solution, so it is committed and its neighborhood dropped
    (run to fixpoint). What remains is re-split into connected parts and
    searched by branching on the best-connected variable, so components
    shatter quickly. Committing a variable to 1 folds its link penalties
    into the partners' coefficients; the recursion solves what is left.
    """

    def __init__(self, model: IlpModel, deadline: float | None):
        self.model = model
        self.deadline = deadline
        self.nodes = 0
        n = model.num_vars
        self.coeff = list(model.coeffs)
        self.is_aux = [i >= model.num_decision for i in range(n)]

        conflict: list[set[int]] = [set() for _ in range(n)]
        for i, j in model.pairwise:
            conflict[i].add(j)
            conflict[j].add(i)
        for group in model.groups:
            for i in group:
                for j in group:
                    if i != j:
                        conflict[i].add(j)
        self.conflict = [frozenset(c) for c in conflict]

        # at-most-one cliques in canonical order, for the bound discounts
        self.cliques: list[tuple[int, ...]] = [
            (i, j) for i, j in sorted(model.pairwise)
        ] + sorted(model.groups)

        # links_at[v] = (partner, aux id, aux coefficient, link index)
        self.links_at: list[list[tuple[int, int, float, int]]] = [[] for _ in range(n)]
        self.link_active = [True] * len(model.links)
        for idx, (a, b, aux) in enumerate(model.links):
            self.links_at[a].append((b, aux, model.coeffs[aux], idx))
            self.links_at[b].append((a, aux, model.coeffs[aux], idx))
        # aux ids forced onto a variable by links already folded at an
        # ancestor whose endpoint was committed to 1
        self.folded_aux: list[list[int]] = [[] for _ in range(n)]

        struct: list[set[int]] = [set(c) for c in conflict]
        for a, b, _aux in model.links:
            struct[a].add(b)
            struct[b].add(a)
        self.struct = [frozenset(s) for s in struct]

    def run(self) -> tuple[frozenset[int], bool]:
        """Best decision-variable selection and whether it is proven optimal."""
        free = frozenset(i for i in range(self.model.num_vars) if not self.is_aux[i])
        try:
            return frozenset(self._solve_free(free)), True
        except _Timeout:
            return self._greedy(free), False

    def _tick(self) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % 1024 == 0:
            if time.monotonic() > self.deadline:
                raise _Timeout

    def _greedy(self, free: frozenset[int]) -> frozenset[int]:
        taken: set[int] = set()
        blocked: set[int] = set()
        for v in sorted(free, key=lambda i: (-self.coeff[i], i)):
            if v in blocked or self.coeff[v] <= 0:
                continue
            taken.add(v)
            blocked.update(self.conflict[v])
        return frozenset(taken)

    def _split(self, free: frozenset[int]) -> list[frozenset[int]]:
        seen: set[int] = set()
        parts: list[frozenset[int]] = []
        for start in sorted(free):
            if start in seen:
                continue
            queue = deque([start])
            seen.add(start)
            part = {start}
            while queue:
                node = queue.popleft()
                for neighbor in self.struct[node]:
                    if neighbor in free and neighbor not in seen:
                        seen.add(neighbor)
                        part.add(neighbor)
                        queue.append(neighbor)
            parts.append(frozenset(part))
        return parts

    def _value_and_tiebreak(
        self, selection: Iterable[int]
    ) -> tuple[float, tuple[int, ...]]:
        """Canonical subproblem value and global tie-break tuple.

        The value sums the current (fold-adjusted) coefficients plus the
        penalties of still-active links internal to the selection; the
        tie-break tuple additionally carries the auxiliary ids the
        selection forces, both from active internal links and from links
        folded by committed ancestors.
        """
        sel = set(selection)
        ordered = sorted(sel)
        terms = [self.coeff[i] for i in ordered]
        aux_ids: list[int] = []
        link_terms: list[tuple[int, float]] = []
        for i in ordered:
            aux_ids.extend(self.folded_aux[i])
            for partner, aux, aux_coeff, idx in self.links_at[i]:
                if i < partner and partner in sel and self.link_active[idx]:
                    link_terms.append((aux, aux_coeff))
                    aux_ids.append(aux)
        link_terms.sort()
        value = math.fsum(terms + [coeff for _aux, coeff in link_terms])
        return value, tuple(sorted(sel.union(aux_ids)))

    def _upper_bound(self, free: frozenset[int]) -> float:
        """Optimistic value of a free set: positive coefficients, each
        at-most-one clique discounted to its single best free member.
        Active link penalties are nonpositive, so they add nothing."""
        bound = 0.0
        consumed: set[int] = set()
        for i in free:
            c = self.coeff[i]
            if c > 0:
                bound += c
        for clique in self.cliques:
            members = [
                i for i in clique if i in free and self.coeff[i] > 0 and i not in consumed
            ]
            if len(members) > 1:
                total = sum(self.coeff[i] for i in members)
                best = max(self.coeff[i] for i in members)
                bound -= total - best
                consumed.update(members)
        return bound

    def _has_live_link(self, v: int, free: set[int] | frozenset[int]) -> bool:
        return any(
            self.link_active[idx] and partner in free
            for partner, _aux, _coeff, idx in self.links_at[v]
        )

    def _reduce(self, free: frozenset[int]) -> tuple[list[int], frozenset[int]]:
        """Shrink a subproblem with exactness- and tie-preserving rules.

        Run to fixpoint over the current graph:

        * negative coefficient: selecting it strictly loses, so drop
          (exactly-zero coefficients stay: whether the tie-break set wants
          them depends on where their id falls, so the search decides);
        * neighborhood-sum domination: a link-free variable strictly
          outweighing its whole conflict neighborhood is in every optimum,
          so commit it and drop the neighborhood;
        * adjacent domination: a variable whose link-free neighbor covers
          its remaining neighborhood at no smaller weight (ties to the
          smaller id) is in no tie-preferred optimum, so drop it;
        * simplicial: a link-free variable strictly heavier than each
          member of a clique neighborhood is in every optimum.
        """
        remaining = set(free)
        forced: list[int] = []
        changed = True
        while changed:
            changed = False
            for v in sorted(remaining):
                if v not in remaining:
                    continue
                if self.coeff[v] < 0:
                    remaining.discard(v)
                    changed = True
                    continue
                neighborhood = self.conflict[v] & remaining
                link_free = not self._has_live_link(v, remaining)
                if link_free:
                    rival = sum(
                        self.coeff[u] for u in neighborhood if self.coeff[u] > 0
                    )
                    if self.coeff[v] > rival:
                        forced.append(v)
                        remaining.discard(v)
                        remaining.difference_update(neighborhood)
                        changed = True
                        continue
                dominated = False
                for u in neighborhood:
                    if self.coeff[u] < self.coeff[v] or (
                        self.coeff[u] == self.coeff[v] and u > v
                    ):
                        continue
                    if self._has_live_link(u, remaining):
                        continue
                    if ((self.conflict[u] & remaining) - {v}) <= (neighborhood - {u}):
                        dominated = True
                        break
                if dominated:
                    remaining.discard(v)
                    changed = True
                    continue
                if link_free and len(neighborhood) <= 8:
                    members = sorted(neighborhood)
                    if all(self.coeff[v] > self.coeff[u] for u in members) and all(
                        members[j] in self.conflict[members[i]]
                        for i in range(len(members))
                        for j in range(i + 1, len(members))
                    ):
                        forced.append(v)
                        remaining.discard(v)
                        remaining.difference_update(members)
                        changed = True
        return forced, frozenset(remaining)

    def _solve_free(self, free: frozenset[int]) -> tuple[int, ...]:
        if not free:
            return ()
        self._tick()
        forced, free = self._reduce(free)
        selected: list[int] = list(forced)
        for part in self._split(free):
            selected.extend(self._solve_connected(part))
        return tuple(selected)

    def _solve_connected(self, free: frozenset[int]) -> tuple[int, ...]:
        self._tick()
        if len(free) == 1:
            (v,) = free
            return (v,) if self.coeff[v] > 0 else ()
        # branch where the graph shatters: best-connected first
        v = min(
            free,
            key=lambda i: (-len(self.conflict[i] & free), -self.coeff[i], i),
        )

        best: tuple[float, tuple[int, ...], tuple[int, ...]] | None = None
        # a strictly negative variable is in no optimum; zero-coefficient
        # ones still branch, since the tie-break may want them selected
        if self.coeff[v] >= 0:
            rest = free - {v} - self.conflict[v]
            undo = self._fold_links(v, rest)
            try:
                sub = self._solve_free(rest)
            finally:
                self._unfold_links(undo)
            include = (v,) + sub
            value, tiebreak = self._value_and_tiebreak(include)
            best = (value, tiebreak, include)

        rest0 = free - {v}
        explore = best is None or self._upper_bound(rest0) >= best[0] - TIE_EPS
        if explore:
            sub0 = self._solve_free(rest0)
            value0, tiebreak0 = self._value_and_tiebreak(sub0)
            if best is None or value0 > best[0] or (value0 == best[0] and tiebreak0 < best[1]):
                best = (value0, tiebreak0, sub0)
        return best[2]

    def _fold_links(self, v: int, remaining: frozenset[int]) -> list[tuple[int, float, int]]:
        """Commit v=1: fold each active link's penalty into its partner.

        Afterwards a partner's selection already pays the forced auxiliary
        penalty through its adjusted coefficient."""
        undo: list[tuple[int, float, int]] = []
        for partner, aux, aux_coeff, idx in self.links_at[v]:
            if self.link_active[idx] and partner in remaining:
                undo.append((partner, self.coeff[partner], idx))
                self.coeff[partner] += aux_coeff
                self.link_active[idx] = False
                self.folded_aux[partner].append(aux)
        return undo

    def _unfold_links(self, undo: list[tuple[int, float, int]]) -> None:
        for partner, old_coeff, idx in reversed(undo):
            self.coeff[partner] = old_coeff
            self.link_active[idx] = True
            self.folded_aux[partner].pop()


def _solve_component(sub: IlpModel, deadline: float | None) -> tuple[frozenset[int], bool, int]:
    solver = _ComponentSolver(sub, deadline)
    needed = 6 * sub.num_vars + 2000
    if sys.getrecursionlimit() < needed:
        sys.setrecursionlimit(needed)
    if sub.num_vars > _THREAD_STACK_THRESHOLD:
        result: dict = {}

        def runner() -> None:
            try:
                result["value"] = solver.run()
            except BaseException as exc:  # propagate to caller
                result["error"] = exc

        old_stack = threading.stack_size(256 * 1024 * 1024)
        try:
            worker = threading.Thread(target=runner, name="reljoint-solver")
            worker.start()
            worker.join()
        finally:
            threading.stack_size(old_stack)
        if "error" in result:
            raise result["error"]
        selection, optimal = result["value"]
    else:
        selection, optimal = solver.run()
    return selection, optimal, solver.nodes


def solve(model: IlpModel, time_budget_ms: float = DEFAULT_TIME_BUDGET_MS) -> Solution:
    """Exact maximization; `time_budget_ms` caps each component's search.

    On budget exhaustion a component falls back to its greedy incumbent
    and the solution is flagged non-optimal. The all-zeros assignment is
    always feasible, so a solution always exists.
    """
    start = time.monotonic()
    components = decompose(model)
    assignment = {i: 0 for i in range(model.num_vars)}
    nodes = 0
    optimal = True
    # Budget priority goes to the largest components; results merge by id,
    # so the order cannot change the outcome.
    for component in sorted(components, key=lambda c: (-c.model.num_vars, c.var_map)):
        sub = component.model
        if sub.num_vars == 1:
            local_selected: frozenset[int] = (
                frozenset([0]) if sub.coeffs[0] > 0 else frozenset()
            )
            comp_optimal = True
        else:
            deadline = (
                time.monotonic() + time_budget_ms / 1000.0 if time_budget_ms else None
            )
            local_selected, comp_optimal, comp_nodes = _solve_component(sub, deadline)
            nodes += comp_nodes
        for local in local_selected:
            assignment[component.var_map[local]] = 1
        for _a, _b, aux in sub.links:
            if all(
                assignment[component.var_map[end]] == 1 for end in (_a, _b)
            ):
                assignment[component.var_map[aux]] = 1
        optimal = optimal and comp_optimal

    problems = check_assignment(model, assignment)
    if problems:  # internal consistency; never expected to fire
        raise AssertionError(f"solver produced an infeasible assignment: {problems}")
    objective = selection_objective(model, (i for i, v in assignment.items() if v == 1))
    wall_ms = (time.monotonic() - start) * 1000.0
    return Solution(
        assignment=assignment,
        objective_value=objective,
        optimal=optimal,
        stats=SolveStats(nodes=nodes, components=len(components), wall_ms=wall_ms),
    )


def brute_force(model: IlpModel) -> Solution:
    """Exhaustive oracle over every feasible assignment (<= 25 variables).

    Uses the same canonical objective and tie-break as solve. The
    enumeration is vectorized in blocks; near-maximal assignments are
    re-evaluated exactly before the winner is chosen.
    """
    start = time.monotonic()
    n = model.num_vars
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute_force refuses models with more than {BRUTE_FORCE_LIMIT} variables")
    coeffs = np.asarray(model.coeffs, dtype=np.float64)
    total = 1 << n
    best_approx = -math.inf
    candidates: list[int] = []

    for chunk_start in range(0, total, 1 << _CHUNK_BITS):
        chunk_end = min(total, chunk_start + (1 << _CHUNK_BITS))
        masks = np.arange(chunk_start, chunk_end, dtype=np.uint32)
        bits = [((masks >> i) & 1).astype(np.int16) for i in range(n)]
        feasible = np.ones(masks.shape, dtype=bool)
        for i, j in model.pairwise:
            feasible &= (bits[i] + bits[j]) <= 1
        for group in model.groups:
            total_sel = np.zeros(masks.shape, dtype=np.int16)
            for i in group:
                total_sel += bits[i]
            feasible &= total_sel <= 1
        for a, b, aux in model.links:
            feasible &= bits[aux] <= bits[a]
            feasible &= bits[aux] <= bits[b]
            feasible &= (bits[a] + bits[b] - bits[aux]) <= 1
        objective = np.zeros(masks.shape, dtype=np.float64)
        for i in range(n):
            objective += coeffs[i] * bits[i]
        objective[~feasible] = -np.inf
        chunk_best = float(objective.max())
        if chunk_best == -math.inf:
            continue
        best_approx = max(best_approx, chunk_best)
        near = np.nonzero(objective >= best_approx - TIE_EPS)[0]
        candidates.extend(int(masks[k]) for k in near)
        if len(candidates) > (1 << 20):
            raise RuntimeError("degenerate tie plateau in brute-force enumeration")

    best_value = -math.inf
    best_tuple: tuple[int, ...] | None = None
    for mask in candidates:
        selected = tuple(i for i in range(n) if mask >> i & 1)
        value = selection_objective(model, selected)
        if value < best_approx - TIE_EPS:
            continue
        if best_tuple is None or value > best_value or (
            value == best_value and selected < best_tuple
        ):
            best_value = value
            best_tuple = selected

    assignment = {i: 0 for i in range(n)}
    if best_tuple:
        for i in best_tuple:
            assignment[i] = 1
    objective = selection_objective(model, best_tuple or ())
    wall_ms = (time.monotonic() - start) * 1000.0
    return Solution(
        assignment=assignment,
        objective_value=objective,
        optimal=True,
        stats=SolveStats(nodes=total, components=1, wall_ms=wall_ms),
    )


def _format_coeff(value: float) -> str:
    return f"{value:.9g}"


def export_lp(model: IlpModel, path: str | Path) -> None:
    """Write the model as a deterministic LP text file.

    Sections are Maximize / Subject To / Binary / End; constraint rows are
    named c1, c2, ... in model order (pairwise, groups, then the three
    linking rows per auxiliary variable). Coefficients carry 9 significant
    digits; zero-coefficient variables are kept binary but skipped in the
    objective.
    """
    lines = ["Maximize"]
    terms: list[str] = []
    for i, coeff in enumerate(model.coeffs):
        if coeff == 0:
            continue
        magnitude = _format_coeff(abs(coeff))
        if not terms:
            prefix = "" if coeff > 0 else "- "
        else:
            prefix = "+ " if coeff > 0 else "- "
        terms.append(f"{prefix}{magnitude} {model.names[i]}")
    lines.append(" obj: " + " ".join(terms) if terms else " obj:")
    lines.append("Subject To")
    row = 0

    def row_name() -> str:
        nonlocal row
        row += 1
        return f"c{row}"

    for i, j in model.pairwise:
        lines.append(f" {row_name()}: {model.names[i]} + {model.names[j]} <= 1")
    for group in model.groups:
        body = " + ".join(model.names[i] for i in group)
        lines.append(f" {row_name()}: {body} <= 1")
    for a, b, aux in model.links:
        na, nb, nx = model.names[a], model.names[b], model.names[aux]
        lines.append(f" {row_name()}: {nx} - {na} <= 0")
        lines.append(f" {row_name()}: {nx} - {nb} <= 0")
        lines.append(f" {row_name()}: {na} + {nb} - {nx} <= 1")
    lines.append("Binary")
    for name in model.names:
        lines.append(f" {name}")
    lines.append("End")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")
