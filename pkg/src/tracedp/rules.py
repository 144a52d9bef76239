"""Behavioural rules between activity pairs and prefix harm scoring.

For every ordered pair ``(a1, a2)`` the log decides whether ``a1`` is
always, sometimes or never eventually followed by ``a2``, and likewise
whether it is always, sometimes or never preceded by ``a2``. Both relations
are evaluated per occurrence of ``a1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from .event_log import EmptyLogError, EventLog, Variant


class RelationKind(enum.Enum):
    ALWAYS = "A"
    SOMETIMES = "S"
    NEVER = "N"


class UnknownActivityError(ValueError):
    pass


Pair = tuple[str, str]


@dataclass(frozen=True)
class HarmAssessment:
    violation_count: int

    @property
    def harmless(self) -> bool:
        return self.violation_count == 0


@dataclass(frozen=True, eq=False)
class RuleSet:
    """Follows/precedes relations, total over ``universe x universe``.

    ``follows[(a1, a2)]`` classifies what comes after each occurrence of
    ``a1``; ``precedes[(a1, a2)]`` classifies what comes before it.
    """

    follows: Mapping[Pair, RelationKind]
    precedes: Mapping[Pair, RelationKind]
    universe: frozenset[str]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        # Lookup tables for the checker.
        never = frozenset(p for p, k in self.follows.items() if k is RelationKind.NEVER)
        never |= frozenset((b, a) for (a, b), k in self.precedes.items() if k is RelationKind.NEVER)
        always_after: dict[str, list[str]] = {a: [] for a in self.universe}
        always_before: dict[str, list[str]] = {a: [] for a in self.universe}
        for (a, b), kind in sorted(self.follows.items()):
            if kind is RelationKind.ALWAYS:
                always_after[a].append(b)
        for (a, b), kind in sorted(self.precedes.items()):
            if kind is RelationKind.ALWAYS:
                always_before[a].append(b)
        object.__setattr__(self, "_never", never)
        object.__setattr__(self, "_always_after", always_after)
        object.__setattr__(self, "_always_before", always_before)

    def __eq__(self, other):
        if not isinstance(other, RuleSet):
            return NotImplemented
        return (
            self.universe == other.universe
            and dict(self.follows) == dict(other.follows)
            and dict(self.precedes) == dict(other.precedes)
        )

    __hash__ = None

    def to_tsv(self) -> str:
        """Render both relation matrices as TSV tables."""
        acts = sorted(self.universe)
        out = []
        for name, table in (("follows", self.follows), ("precedes", self.precedes)):
            out.append("\t".join([name] + acts))
            for a1 in acts:
                out.append("\t".join([a1] + [table[(a1, a2)].value for a2 in acts]))
            out.append("")
        return "\n".join(out)


def _classify(hits: int, total: int) -> RelationKind:
    if hits == 0:
        return RelationKind.NEVER
    if hits == total:
        return RelationKind.ALWAYS
    return RelationKind.SOMETIMES


def derive_rules(log: EventLog) -> RuleSet:
    if not log.traces:
        raise EmptyLogError("cannot derive rules from an empty log")
    universe = log.activity_universe
    occurrences = dict.fromkeys(universe, 0)
    followed: dict[Pair, int] = {}
    preceded: dict[Pair, int] = {}
    for trace in log.traces:
        acts = trace.activities
        n = len(acts)
        # suffix_sets[i]: activities strictly after position i
        suffix_sets = [frozenset()] * n
        later: set[str] = set()
        for i in range(n - 1, -1, -1):
            suffix_sets[i] = frozenset(later)
            later.add(acts[i])
        earlier: set[str] = set()
        for i, a in enumerate(acts):
            occurrences[a] += 1
            for b in suffix_sets[i]:
                followed[(a, b)] = followed.get((a, b), 0) + 1
            for b in earlier:
                preceded[(a, b)] = preceded.get((a, b), 0) + 1
            earlier.add(a)

    follows = {}
    precedes = {}
    for a in universe:
        for b in universe:
            follows[(a, b)] = _classify(followed.get((a, b), 0), occurrences[a])
            precedes[(a, b)] = _classify(preceded.get((a, b), 0), occurrences[a])
    return RuleSet(follows, precedes, frozenset(universe))


def assess_prefix(rules: RuleSet, prefix: Variant) -> HarmAssessment:
    """Count the rule violations a prefix exhibits.

    Every ordered pair of positions whose labels are never observed in that
    order counts once. Unmet always-rules count only when the prefix is
    terminated, since an open suffix may still satisfy them.
    """
    key = (prefix.activities, prefix.terminated)
    cached = rules._cache.get(key)
    if cached is not None:
        return cached

    acts = prefix.activities
    for a in acts:
        if a not in rules.universe:
            raise UnknownActivityError(f"activity {a!r} is not covered by the rule set")
    never = rules._never
    violations = 0
    for j in range(1, len(acts)):
        b = acts[j]
        for i in range(j):
            if (acts[i], b) in never:
                violations += 1

    if prefix.terminated:
        n = len(acts)
        seen_after: set[str] = set()
        for i in range(n - 1, -1, -1):
            for b in rules._always_after[acts[i]]:
                if b not in seen_after:
                    violations += 1
            seen_after.add(acts[i])
        seen_before: set[str] = set()
        for a in acts:
            if a not in seen_before:
                for b in rules._always_before[a]:
                    if b not in seen_before:
                        violations += 1
            seen_before.add(a)

    result = HarmAssessment(violations)
    rules._cache[key] = result
    return result


@dataclass(frozen=True)
class ScoreFunction:
    """Binary or capped-continuous utility score of a prefix.

    ``sensitivity`` is the score range, which calibrates the exponential
    mechanism.
    """

    mode: str = "binary"
    cap: int = 3

    def __post_init__(self):
        if self.mode not in ("binary", "continuous"):
            raise ValueError(f"unknown score mode {self.mode!r}")
        if self.mode == "continuous" and (int(self.cap) != self.cap or self.cap < 1):
            raise ValueError(f"cap must be a positive integer, got {self.cap!r}")

    @property
    def sensitivity(self) -> int:
        return 1 if self.mode == "binary" else int(self.cap)

    def from_violations(self, violation_count: int) -> int:
        if self.mode == "binary":
            return 1 if violation_count == 0 else 0
        return self.cap - min(violation_count, self.cap)


def score(fn: ScoreFunction, rules: RuleSet, prefix: Variant) -> int:
    return fn.from_violations(assess_prefix(rules, prefix).violation_count)
