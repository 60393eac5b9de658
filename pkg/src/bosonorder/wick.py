"""Wick contractions of boson words and their link to set partitions.

A contraction removes pairs ``(i, j)`` where position ``i`` holds ``a`` and a
later position ``j`` holds ``a+``. For the word ``(a+ a)^n`` the contracted
pairs chain the ``n`` blocks together, and the chains are exactly the blocks
of a set partition of ``{1..n}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

from .algebra import A, ADAG, BosonWord, NormalForm

__all__ = [
    "Contraction",
    "SetPartition",
    "ResourceLimitError",
    "MAX_PARTITION_N",
    "enumerate_contractions",
    "wick_normal_order",
    "contraction_to_partition",
    "partition_to_contraction",
    "enumerate_partitions",
    "iter_partitions",
    "number_word",
    "block_histogram",
]

MAX_PARTITION_N = 12


class ResourceLimitError(ValueError):
    pass


def number_word(n: int) -> BosonWord:
    """``(a+ a)^n``."""
    return BosonWord(((ADAG, 1), (A, 1))) ** n


@dataclass(frozen=True)
class Contraction:
    """A set of disjoint ``(a, a+)`` position pairs on ``word`` (0-based)."""

    word: BosonWord
    pairs: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(i), int(j)) for i, j in self.pairs))
        letters = self.word.letters
        used: set[int] = set()
        for i, j in pairs:
            if not 0 <= i < j < len(letters):
                raise ValueError(f"pair {(i, j)} out of range or not ordered i < j")
            if letters[i] is not A or letters[j] is not ADAG:
                raise ValueError(f"pair {(i, j)} must join an a (left) to an a+ (right)")
            if i in used or j in used:
                raise ValueError(f"position reused in pair {(i, j)}")
            used.update((i, j))
        object.__setattr__(self, "pairs", pairs)

    def residue(self) -> BosonWord:
        """The word with all contracted positions removed."""
        gone = {p for pair in self.pairs for p in pair}
        return BosonWord.from_letters(l for i, l in enumerate(self.word.letters) if i not in gone)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class SetPartition:
    """Partition of ``{1..n}``; blocks are sorted internally and ordered by minimum."""

    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = [tuple(sorted(b)) for b in self.blocks]
        if any(not b for b in blocks):
            raise ValueError("empty block")
        blocks.sort(key=lambda b: b[0])
        flat = [x for b in blocks for x in b]
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise ValueError(f"blocks must partition 1..n exactly, got {self.blocks!r}")
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def to_json(self) -> str:
        return json.dumps([list(b) for b in self.blocks])

    @classmethod
    def from_json(cls, text: str) -> SetPartition:
        return cls(tuple(tuple(b) for b in json.loads(text)))

    def __str__(self) -> str:
        return " ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)


def enumerate_contractions(word: BosonWord) -> list[Contraction]:
    """All contractions of ``word`` including the empty one, sorted by pair list."""
    letters = word.letters
    found: list[tuple] = []

    def extend(start: int, pairs: list, used: frozenset):
        found.append(tuple(pairs))
        for i in range(start, len(letters)):
            if letters[i] is not A or i in used:
                continue
            for j in range(i + 1, len(letters)):
                if letters[j] is ADAG and j not in used:
                    pairs.append((i, j))
                    extend(i + 1, pairs, used | {i, j})
                    pairs.pop()

    extend(0, [], frozenset())
    found.sort()
    return [Contraction(word, p) for p in found]


def wick_normal_order(word: BosonWord) -> NormalForm:
    """Sum of the double-dotted residues over every contraction."""
    acc: dict[tuple[int, int], int] = {}
    for c in enumerate_contractions(word):
        r = c.residue()
        key = (r.creations, r.annihilations)
        acc[key] = acc.get(key, 0) + 1
    return NormalForm(acc)


def contraction_to_partition(c: Contraction, n: int) -> SetPartition:
    """Group the blocks of ``(a+ a)^n`` that are linked by contracted pairs."""
    if c.word != number_word(n):
        raise ValueError(f"contraction is not on the word (a+ a)^{n}")
    parent = list(range(n + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in c.pairs:
        # block b occupies positions 2(b-1) (a+) and 2(b-1)+1 (a)
        left, right = i // 2 + 1, j // 2 + 1
        parent[find(left)] = find(right)
    groups: dict[int, list[int]] = {}
    for b in range(1, n + 1):
        groups.setdefault(find(b), []).append(b)
    return SetPartition(tuple(tuple(g) for g in groups.values()))


def partition_to_contraction(p: SetPartition) -> Contraction:
    """Link consecutive members of each block: the ``a`` of one to the ``a+`` of the next."""
    pairs = []
    for block in p.blocks:
        for b, nxt in zip(block, block[1:]):
            pairs.append((2 * (b - 1) + 1, 2 * (nxt - 1)))
    return Contraction(number_word(p.n), tuple(pairs))


def iter_partitions(n: int) -> Iterator[SetPartition]:
    """Set partitions of ``{1..n}`` in lexicographic restricted-growth-string order."""
    if n < 1:
        raise ValueError("n must be positive")
    rgs = [0] * n
    maxes = [0] * n  # maxes[i] = max(rgs[:i+1])
    while True:
        blocks: list[list[int]] = [[] for _ in range(maxes[-1] + 1)]
        for elem, b in enumerate(rgs, start=1):
            blocks[b].append(elem)
        yield SetPartition(tuple(tuple(b) for b in blocks))
        i = n - 1
        while i > 0 and rgs[i] > maxes[i - 1]:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        maxes[i] = max(maxes[i - 1], rgs[i])
        for t in range(i + 1, n):
            rgs[t] = 0
            maxes[t] = maxes[i]


def enumerate_partitions(n: int, k: int | None = None) -> list[SetPartition]:
    """All partitions of ``{1..n}`` (optionally only those with ``k`` blocks)."""
    if n > MAX_PARTITION_N:
        raise ResourceLimitError(f"partition enumeration capped at n={MAX_PARTITION_N}, got {n}")
    parts = iter_partitions(n)
    if k is None:
        return list(parts)
    return [p for p in parts if len(p) == k]


def block_histogram(parts: Sequence[SetPartition]) -> dict[int, int]:
    hist: dict[int, int] = {}
    for p in parts:
        hist[len(p)] = hist.get(len(p), 0) + 1
    return hist
