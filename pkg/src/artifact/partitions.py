"""Set partitions: enumeration, block orders, signs and refinement."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import DimensionError

Block = tuple[int, ...]

ORDERS = ("glex", "lex", "given")


def glex_key(I: Iterable[int]) -> tuple:
    """Sort key: even cardinality first, then by size, then lexicographic."""
    I = tuple(I)
    return (len(I) % 2, len(I), I)


def lex_key(I: Iterable[int]) -> tuple:
    return tuple(I)


def graded_lex_compare(I: Iterable[int], J: Iterable[int]) -> int:
    """-1, 0 or 1 as ``I`` sorts before, equal to or after ``J``."""
    a, b = glex_key(sorted(I)), glex_key(sorted(J))
    return (a > b) - (a < b)


def perm_sign(seq: Sequence) -> int:
    """Parity of the permutation sorting ``seq`` (entries distinct)."""
    sign = 1
    seq = list(seq)
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Partition:
    total: Block
    blocks: tuple[Block, ...]
    order: str = "glex"

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"unknown block order {self.order!r}")
        seen: list[int] = []
        for b in self.blocks:
            if not b or list(b) != sorted(set(b)):
                raise DimensionError(f"block {b} is empty or not strictly increasing")
            seen.extend(b)
        if len(seen) != len(set(seen)) or tuple(sorted(seen)) != self.total:
            raise DimensionError(f"blocks {self.blocks} do not partition {self.total}")

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]], order: str = "glex") -> "Partition":
        bl = [tuple(sorted(b)) for b in blocks]
        total = tuple(sorted(i for b in bl for i in b))
        if order == "glex":
            bl.sort(key=glex_key)
        elif order == "lex":
            bl.sort(key=lex_key)
        return cls(total, tuple(bl), order)

    def reorder(self, order: str) -> "Partition":
        return Partition.of(self.blocks, order) if order != "given" else self

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def length(self) -> int:
        return len(self.blocks)

    @property
    def n_even(self) -> int:
        return sum(1 for b in self.blocks if len(b) % 2 == 0)

    @property
    def n_odd(self) -> int:
        return sum(1 for b in self.blocks if len(b) % 2 == 1)

    def is_even(self) -> bool:
        return self.n_odd == 0

    def key(self) -> tuple[Block, ...]:
        """Blocks in graded lexicographic order, independent of ``order``."""
        return tuple(sorted(self.blocks, key=glex_key))

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]


def sign(nu: Partition) -> int:
    return perm_sign([i for b in nu.blocks for i in b])


def _rgs(m: int) -> Iterator[list[int]]:
    """Restricted growth strings of length ``m``, iteratively."""
    if m == 0:
        yield []
        return
    a = [0] * m
    b = [0] * m  # b[i] = 1 + max(a[:i])
    b[0] = 1
    for i in range(1, m):
        b[i] = 1
    while True:
        yield list(a)
        i = m - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, m):
            a[j] = 0
            b[j] = max(b[j - 1], a[j - 1] + 1)


def enumerate_partitions(A: Iterable[int], filter: str | int = "all", order: str = "glex") -> list[Partition]:
    """All partitions of ``A``.

    ``filter`` is ``"all"``, ``"even_blocks"`` or an int length. The empty set
    has exactly one partition, the empty one.
    """
    A = tuple(sorted(set(A)))
    return list(_enumerate_cached(A, filter, order))


@lru_cache(maxsize=4096)
def _enumerate_cached(A: Block, filter, order: str) -> tuple[Partition, ...]:
    out = []
    for s in _rgs(len(A)):
        k = (max(s) + 1) if s else 0
        if isinstance(filter, int) and not isinstance(filter, bool):
            if k != filter:
                continue
        blocks = [[] for _ in range(k)]
        for pos, lab in enumerate(s):
            blocks[lab].append(A[pos])
        if filter == "even_blocks" and any(len(b) % 2 for b in blocks):
            continue
        if filter not in ("all", "even_blocks") and not isinstance(filter, int):
            raise ValueError(f"unknown filter {filter!r}")
        out.append(Partition.of(blocks, order))
    return tuple(out)


def bell(m: int) -> int:
    """Bell number via the triangle recursion."""
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def restrict(O: Iterable[int], nu: Partition) -> Partition:
    """``O|nu``: the blocks of ``nu`` contained in ``O``."""
    O = set(O)
    return Partition.of([b for b in nu.blocks if set(b) <= O], nu.order if nu.order != "given" else "glex")


def is_coarser(omega: Partition, nu: Partition) -> bool:
    if omega.total != nu.total:
        raise DimensionError(f"partitions of different sets: {omega.total} vs {nu.total}")
    osets = [set(b) for b in omega.blocks]
    return all(any(set(L) <= O for O in osets) for L in nu.blocks)


def coarser_of(nu: Partition, order: str = "glex") -> list[Partition]:
    """Every partition ω with ω ⪯ ν, via partitions of the block index set."""
    out = []
    for pi in enumerate_partitions(range(len(nu.blocks)), "all", "lex"):
        out.append(Partition.of([[i for j in grp for i in nu.blocks[j]] for grp in pi.blocks], order))
    return out


@dataclass(frozen=True)
class Refinement:
    is_coarser: bool
    induced: dict
    coarser_of: list


def refinement(omega: Partition, nu: Partition) -> Refinement:
    ok = is_coarser(omega, nu)
    induced = {O: restrict(O, nu) for O in omega.blocks} if ok else {}
    return Refinement(ok, induced, coarser_of(nu))


def partition_from_json(doc, order: str = "glex") -> Partition:
    if not isinstance(doc, list) or not all(isinstance(b, list) for b in doc):
        raise DimensionError("partition must be a list of lists")
    return Partition.of(doc, order)
