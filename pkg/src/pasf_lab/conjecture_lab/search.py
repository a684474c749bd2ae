"""Shared search machinery: reports, budgets and set-partition enumeration."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

HOLDS = "holds-with-witness"
REFUTED = "refuted-with-witness"
INCONCLUSIVE = "exhausted-inconclusive"
STATUSES = (HOLDS, REFUTED, INCONCLUSIVE)

EXHAUSTIVE = "exhaustive"
GREEDY = "greedy"
LOCAL_SEARCH = "local-search"

# exhaustive enumeration limit on the number of frame elements
EXHAUSTIVE_N = 12


@dataclass(frozen=True)
class Budget:
    max_nodes: int = 20_000_000
    max_seconds: float | None = None

    def __post_init__(self):
        if self.max_nodes <= 0:
            raise ValueError("node budget must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("wall-clock budget must be positive")


class BudgetCounter:
    """Node counter shared by one search; ``tick`` returns False once spent."""

    def __init__(self, budget: Budget | None = None):
        self.budget = budget or Budget()
        self.nodes = 0
        self.node_budget_exceeded = False
        self.wall_budget_exceeded = False
        self._t0 = time.monotonic()

    def tick(self, k: int = 1) -> bool:
        self.nodes += k
        if self.nodes > self.budget.max_nodes:
            self.node_budget_exceeded = True
        elif self.budget.max_seconds is not None and self.nodes % 256 == 0:
            if time.monotonic() - self._t0 > self.budget.max_seconds:
                self.wall_budget_exceeded = True
        return not self.exhausted

    @property
    def exhausted(self) -> bool:
        return self.node_budget_exceeded or self.wall_budget_exceeded


@dataclass
class SearchReport:
    status: str
    witness: dict | None
    nodes_examined: int
    strategy: str
    seed: int = 0
    wall_budget_exceeded: bool = False
    citation: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "citation": self.citation,
            "strategy": self.strategy,
            "seed": self.seed,
            "nodes_examined": self.nodes_examined,
            "wall_budget_exceeded": self.wall_budget_exceeded,
            "witness": self.witness,
            "details": self.details,
        }


@dataclass
class PartitionCertificate:
    parts: list[list[int]]
    per_part: list[dict]
    criterion: str
    thresholds: dict
    verified: bool = False

    @property
    def M(self) -> int:
        return len(self.parts)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "parts": [list(p) for p in self.parts],
            "per_part": self.per_part,
            "thresholds": self.thresholds,
            "verified": self.verified,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PartitionCertificate":
        try:
            parts = [[int(i) for i in part] for part in data["parts"]]
            return cls(
                parts=parts,
                per_part=list(data.get("per_part", [])),
                criterion=str(data["criterion"]),
                thresholds=dict(data["thresholds"]),
                verified=bool(data.get("verified", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed certificate: {exc}") from exc


def labels_to_parts(labels: Sequence[int]) -> list[list[int]]:
    """Blocks of a labeling, ordered by first element, empty blocks dropped."""
    blocks: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(i)
    return sorted(blocks.values(), key=lambda b: b[0])


def canonical_labels(labels: Sequence[int]) -> tuple[int, ...]:
    """Relabel by first occurrence, giving the restricted-growth string."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(lab, len(seen)) for lab in labels)


def restricted_growth_strings(n: int, max_blocks: int | None = None) -> Iterator[tuple[int, ...]]:
    """Set partitions of range(n) with at most ``max_blocks`` blocks, lexicographically."""
    if n <= 0:
        yield ()
        return
    limit = n if max_blocks is None else max_blocks
    if limit < 1:
        return
    a = [0] * n
    # standard iterative successor on restricted-growth strings
    maxes = [0] * n  # maxes[i] = max(a[:i+1])
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and (a[i] > maxes[i - 1] or a[i] + 1 >= limit):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        maxes[i] = max(maxes[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            maxes[j] = maxes[i]


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def _mask(items) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


class PartOracle:
    """Memoized hereditary predicate on index subsets (keyed by bitmask)."""

    def __init__(self, predicate: Callable[[list[int]], bool]):
        self._predicate = predicate
        self._cache: dict[int, bool] = {}
        self.evaluations = 0

    def __call__(self, items: Sequence[int]) -> bool:
        key = _mask(items)
        hit = self._cache.get(key)
        if hit is None:
            self.evaluations += 1
            hit = bool(self._predicate(sorted(items)))
            self._cache[key] = hit
        return hit


def min_hereditary_partition(
    n: int, part_ok: PartOracle, max_M: int, counter: BudgetCounter
) -> tuple[int | None, tuple[int, ...] | None, bool]:
    """Smallest M <= max_M admitting a partition whose blocks all pass ``part_ok``.

    ``part_ok`` must be hereditary (subsets of a passing block pass), which
    makes block-wise pruning exact.  Blocks are filled in restricted-growth
    order, so the first hit for a given M is the lexicographically smallest.
    Returns (M, labels, complete) where complete is False if the budget ran out.
    """
    for i in range(n):
        if not part_ok([i]):
            return None, None, True

    for M in range(1, max_M + 1):
        labels = [0] * n
        blocks: list[list[int]] = []

        def dfs(i: int) -> bool:
            if i == n:
                return True
            for lab in range(min(len(blocks) + 1, M)):
                if not counter.tick():
                    return False
                if lab == len(blocks):
                    blocks.append([i])
                    labels[i] = lab
                    if dfs(i + 1):
                        return True
                    blocks.pop()
                    if counter.exhausted:
                        return False
                else:
                    block = blocks[lab]
                    block.append(i)
                    if part_ok(block):
                        labels[i] = lab
                        if dfs(i + 1):
                            return True
                    block.pop()
                    if counter.exhausted:
                        return False
            return False

        if dfs(0):
            return M, tuple(labels), True
        if counter.exhausted:
            return None, None, False
    return None, None, True


def greedy_partition(
    n: int, part_ok: PartOracle, seed: int, restarts: int, counter: BudgetCounter
) -> tuple[int, ...] | None:
    """First-fit placement followed by block-elimination moves, best of restarts."""
    rng = random.Random(seed)
    best: tuple[int, ...] | None = None
    for attempt in range(restarts):
        order = list(range(n))
        if attempt:
            rng.shuffle(order)
        blocks: list[list[int]] = []
        failed = False
        for i in order:
            counter.tick()
            for block in blocks:
                if part_ok(block + [i]):
                    block.append(i)
                    break
            else:
                if not part_ok([i]):
                    failed = True
                    break
                blocks.append([i])
        if failed:
            return None
        improved = True
        while improved and len(blocks) > 1 and not counter.exhausted:
            improved = False
            for victim in sorted(range(len(blocks)), key=lambda b: len(blocks[b])):
                others = [b for b in range(len(blocks)) if b != victim]
                trial = {b: list(blocks[b]) for b in others}
                moved = True
                for i in blocks[victim]:
                    counter.tick()
                    for b in others:
                        if part_ok(trial[b] + [i]):
                            trial[b].append(i)
                            break
                    else:
                        moved = False
                        break
                if moved:
                    blocks = [trial[b] for b in others]
                    improved = True
                    break
        labels = [0] * n
        for lab, block in enumerate(blocks):
            for i in block:
                labels[i] = lab
        cand = canonical_labels(labels)
        if best is None or (max(cand) + 1, cand) < (max(best) + 1, best):
            best = cand
        if counter.exhausted:
            break
    return best
