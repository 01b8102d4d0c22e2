"""Combinatorics of same-gate circuits on a periodic chain.

A circuit on ``N`` sites is the time-ordered list of gate numbers
``(i_1, ..., i_N)``; gate ``i`` acts on sites ``(i, i+1 mod N)`` and ``i_1`` is
applied first.  Gate numbers are 1-based and modular arithmetic maps into
``1..N``.
"""

from __future__ import annotations

import math
from collections import abc, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import (
    DuplicateGate,
    IllegalSwap,
    InternalInvariantViolation,
    InvalidClassParameters,
    InvalidP,
    InvalidSequence,
    MissingGate,
    OutOfRange,
    TooLarge,
)

BRUTEFORCE_MAX_N = 8


def wrap(value: int, n_sites: int) -> int:
    """Reduce ``value`` modulo ``n_sites`` into ``1..n_sites``."""
    return (value - 1) % n_sites + 1


def are_neighbors(a: int, b: int, n_sites: int) -> bool:
    """True when gates ``a`` and ``b`` share a site (and therefore do not commute)."""
    return (a - b) % n_sites in (1, n_sites - 1)


@dataclass(frozen=True)
class GateSequence:
    n_sites: int
    order: tuple[int, ...]

    def __str__(self) -> str:
        return format_sequence(self.order)

    def __len__(self) -> int:
        return len(self.order)

    def position(self) -> list[int]:
        """``pos[g]`` is the 0-based time index of gate ``g`` (index 0 unused)."""
        pos = [0] * (self.n_sites + 1)
        for t, g in enumerate(self.order):
            pos[g] = t
        return pos


@dataclass(frozen=True)
class EquivalenceMove:
    kind: str  # "swap" or "rotate"
    index: int | None = None  # 1-based time index l for swaps of (l, l+1)

    @classmethod
    def swap(cls, index: int) -> "EquivalenceMove":
        return cls("swap", index)

    @classmethod
    def rotate(cls) -> "EquivalenceMove":
        return cls("rotate")

    def __str__(self) -> str:
        return f"swap({self.index})" if self.kind == "swap" else "rotate"


SWAP = EquivalenceMove.swap
ROTATE = EquivalenceMove.rotate()


@dataclass(frozen=True)
class CanonicalClass:
    n_sites: int
    q: int
    r: int
    p: int

    @property
    def family(self) -> str:
        return "S" if self.q == self.n_sites else "BW"

    def to_json(self) -> dict:
        return {"n": self.n_sites, "q": self.q, "r": self.r, "p": self.p}


@dataclass
class CompressionReport:
    layers: list[tuple[int, ...]]
    periods_used: int
    filling: Fraction
    n_sites: int = field(default=0)

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    def to_json(self) -> dict:
        return {
            "n": self.n_sites,
            "periods": self.periods_used,
            "layers": [list(layer) for layer in self.layers],
            "layer_count": self.layer_count,
            "filling": str(self.filling),
        }


def validate(order: Iterable[int], n_sites: int) -> GateSequence:
    order = tuple(int(g) for g in order)
    if n_sites < 2:
        raise InvalidSequence(f"need at least 2 sites, got {n_sites}")
    seen = set()
    for g in order:
        if not 1 <= g <= n_sites:
            raise OutOfRange(g, n_sites)
        if g in seen:
            raise DuplicateGate(g)
        seen.add(g)
    for g in range(1, n_sites + 1):
        if g not in seen:
            raise MissingGate(g)
    return GateSequence(n_sites, order)


def parse_sequence(text: str, n_sites: int | None = None) -> GateSequence:
    """Parse the comma-separated form ``"1,4,3,6,5,2"``; ``N`` defaults to its length."""
    try:
        order = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise InvalidSequence(f"cannot parse sequence {text!r}") from exc
    return validate(order, len(order) if n_sites is None else n_sites)


def format_sequence(order: Sequence[int]) -> str:
    return ",".join(str(g) for g in order)


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for k in range(1, math.isqrt(n) + 1):
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
    return small + large[::-1]


@lru_cache(maxsize=None)
def _totient(q: int) -> int:
    result, m, p = q, q, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


class QrLabels(abc.Sequence):
    """The class labels ``(q, r)`` of a chain, generated lazily.

    Staircase-type labels (``q = N``, ascending ``r``) come first, then the
    brick-wall-type labels by ascending ``q`` and ``r``.  The length is the sum of
    Euler totients over the admissible ``q`` and costs no enumeration.
    """

    def __init__(self, n_sites: int):
        if n_sites < 2:
            raise InvalidSequence(f"need at least 2 sites, got {n_sites}")
        self.n_sites = n_sites
        self.qs = [n_sites] + [q for q in _divisors(n_sites) if 2 <= q < n_sites]
        self._items: list[tuple[int, int]] | None = None

    def __len__(self) -> int:
        return sum(_totient(q) for q in self.qs)

    def __iter__(self):
        for q in self.qs:
            for r in range(1, q):
                if math.gcd(q, r) == 1:
                    yield (q, r)

    def __getitem__(self, index):
        if self._items is None:
            self._items = list(self)
        return self._items[index]

    def __eq__(self, other) -> bool:
        return list(self) == list(other) if isinstance(other, (abc.Sequence, list)) else NotImplemented

    def __repr__(self) -> str:
        return f"QrLabels({self.n_sites})"


def allowed_qr(n_sites: int) -> QrLabels:
    """All class labels ``(q, r)`` for ``n_sites``; see :class:`QrLabels` for the order."""
    return QrLabels(n_sites)


def is_allowed(n_sites: int, q: int, r: int) -> bool:
    return 2 <= q <= n_sites and n_sites % q == 0 and 1 <= r < q and math.gcd(q, r) == 1


def canonical_fqr(n_sites: int, q: int, r: int) -> GateSequence:
    """Layered canonical circuit: layer ``j`` holds gates ``1 + j*r + i*q``."""
    if not is_allowed(n_sites, q, r):
        raise InvalidClassParameters(n_sites, q, r)
    per_layer = n_sites // q
    order = [wrap(1 + j * r + i * q, n_sites) for j in range(q) for i in range(per_layer)]
    return GateSequence(n_sites, tuple(order))


def canonical_fp(n_sites: int, p: int) -> GateSequence:
    """Double staircase ``(1, ..., N-p, N, N-1, ..., N-p+1)``."""
    if not 1 <= p <= n_sites - 1:
        raise InvalidP(f"p = {p} outside 1..{n_sites - 1}")
    head = range(1, n_sites - p + 1)
    tail = range(n_sites, n_sites - p, -1)
    return GateSequence(n_sites, (*head, *tail))


def invariant_c(seq: GateSequence) -> int:
    """Number of gates whose right neighbour ``i+1 (mod N)`` is applied earlier."""
    n = seq.n_sites
    pos = seq.position()
    return sum(1 for g in range(1, n + 1) if pos[g % n + 1] < pos[g])


def c_of_class(n_sites: int, q: int, r: int) -> int:
    return invariant_c(canonical_fqr(n_sites, q, r))


def c_of_class_closed_form(n_sites: int, q: int, r: int) -> int:
    """``C`` of a canonical class without building the circuit.

    For ``q = N`` gate ``N`` sits at time index ``k_N`` with ``(k_N - 1) r = -1 (mod N)``
    and ``C = N - k_N + 1``.  A layered class behaves like the staircase on its
    ``q`` layers, each of ``N/q`` gates.
    """
    if not is_allowed(n_sites, q, r):
        raise InvalidClassParameters(n_sites, q, r)
    steps = (-pow(r, -1, q)) % q  # k_N - 1 on the q-layer staircase
    return (n_sites // q) * (q - steps)


@lru_cache(maxsize=256)
def _class_table(n_sites: int) -> dict[int, tuple[int, int]]:
    table = {}
    for q, r in allowed_qr(n_sites):
        c = c_of_class(n_sites, q, r)
        if c in table:
            raise InternalInvariantViolation(
                f"C = {c} shared by {table[c]} and {(q, r)} at N = {n_sites}"
            )
        table[c] = (q, r)
    return table


def class_table(n_sites: int) -> dict[int, tuple[int, int]]:
    """Map ``C -> (q, r)`` over every allowed class of ``n_sites``."""
    return dict(_class_table(n_sites))


def classify(seq: GateSequence) -> CanonicalClass:
    c = invariant_c(seq)
    try:
        q, r = _class_table(seq.n_sites)[c]
    except KeyError:
        raise InternalInvariantViolation(
            f"no canonical class has C = {c} at N = {seq.n_sites}"
        ) from None
    return CanonicalClass(seq.n_sites, q, r, c)


def _apply_inplace(work: list[int], move: EquivalenceMove, n_sites: int) -> None:
    if move.kind == "rotate":
        work.append(work.pop(0))
        return
    if move.kind != "swap":
        raise ValueError(f"unknown move kind {move.kind!r}")
    l = move.index
    if l is None or not 1 <= l <= n_sites - 1:
        raise IllegalSwap(f"swap index {l} outside 1..{n_sites - 1}")
    a, b = work[l - 1], work[l]
    if are_neighbors(a, b, n_sites):
        raise IllegalSwap(f"gates {a} and {b} at times {l}, {l + 1} share a site")
    work[l - 1], work[l] = b, a


def apply_move(seq: GateSequence, move: EquivalenceMove) -> GateSequence:
    work = list(seq.order)
    _apply_inplace(work, move, seq.n_sites)
    return GateSequence(seq.n_sites, tuple(work))


def replay(seq: GateSequence, moves: Iterable[EquivalenceMove]) -> GateSequence:
    """Apply ``moves`` in order, checking each for legality."""
    work = list(seq.order)
    for move in moves:
        _apply_inplace(work, move, seq.n_sites)
    return GateSequence(seq.n_sites, tuple(work))


class _Reducer:
    """Move recorder for the constructive reduction to a double staircase."""

    def __init__(self, seq: GateSequence):
        self.n = seq.n_sites
        self.work = list(seq.order)
        self.moves: list[EquivalenceMove] = []

    def swap(self, t: int) -> None:
        # t is the 0-based time index of the earlier of the two gates
        w = self.work
        if are_neighbors(w[t], w[t + 1], self.n):
            raise InternalInvariantViolation(f"reduction tried to swap {w[t]} and {w[t + 1]}")
        w[t], w[t + 1] = w[t + 1], w[t]
        self.moves.append(SWAP(t + 1))

    def rotate(self) -> None:
        self.work.append(self.work.pop(0))
        self.moves.append(ROTATE)

    def move_left(self, src: int, dst: int) -> None:
        for t in range(src - 1, dst - 1, -1):
            self.swap(t)

    def slide_block(self, lo: int, hi: int, dst: int) -> None:
        """Move the contiguous block ``work[lo:hi+1]`` so that it starts at ``dst``."""
        for j in range(hi - lo + 1):
            self.move_left(lo + j, dst + j)

    def run(self) -> int:
        n, w = self.n, self.work
        for _ in range(w.index(1)):
            self.rotate()
        k = 1  # gates 1..k sit at time indices 0..k-1
        while k < n - 1:
            g = k + 1
            lo = hi = w.index(g)
            top = g  # block is (top, top-1, ..., g), contiguous at lo..hi
            while True:
                if top == n:
                    # block holds every gate after the prefix: (1..k, N, ..., k+1)
                    return n - k
                nxt = w.index(top + 1)
                if nxt > hi:
                    self.slide_block(lo, hi, k)
                    size = hi - lo + 1
                    for j in range(size - 1):
                        self.move_left(k + j, j)
                    for _ in range(size - 1):
                        self.rotate()
                    k += 1
                    break
                size = hi - lo + 1
                self.slide_block(lo, hi, nxt + 1)
                lo, hi = nxt, nxt + size
                top += 1
        return 1


def reduce_to_fp(seq: GateSequence) -> tuple[int, list[EquivalenceMove]]:
    """Reduce ``seq`` to a double staircase, returning ``(p, moves)``.

    Replaying ``moves`` on ``seq`` yields ``canonical_fp(N, p)`` exactly.  The
    gate-1-first rotation, the block-growing rule and the block hoisting follow
    a fixed order, so the move trace is deterministic.
    """
    reducer = _Reducer(seq)
    p = reducer.run()
    return p, reducer.moves


def _neighbors_of(order: tuple[int, ...], n_sites: int):
    yield order[1:] + order[:1]
    for t in range(n_sites - 1):
        a, b = order[t], order[t + 1]
        if not are_neighbors(a, b, n_sites):
            yield order[:t] + (b, a) + order[t + 2 :]


def equivalence_classes_bruteforce(n_sites: int, force: bool = False) -> list[list[tuple[int, ...]]]:
    """Partition all ``N!`` orders into classes closed under the two moves.

    Classes are returned as sorted lists, ordered by their smallest member.
    """
    if n_sites > BRUTEFORCE_MAX_N and not force:
        raise TooLarge(f"brute force over {n_sites}! orders refused (limit N = {BRUTEFORCE_MAX_N})")
    from itertools import permutations

    label: dict[tuple[int, ...], int] = {}
    classes: list[list[tuple[int, ...]]] = []
    for start in permutations(range(1, n_sites + 1)):
        if start in label:
            continue
        cid = len(classes)
        label[start] = cid
        members = [start]
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for nb in _neighbors_of(cur, n_sites):
                if nb not in label:
                    label[nb] = cid
                    members.append(nb)
                    queue.append(nb)
        members.sort()
        classes.append(members)
    return classes


def compress(seq: GateSequence, t: int = 1) -> CompressionReport:
    """Greedy earliest-layer packing of ``t`` periods of ``seq``.

    A gate lands one layer after the latest earlier gate it does not commute
    with (itself or a spatial neighbour).
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    n = seq.n_sites
    last = [-1] * (n + 1)  # latest layer used by each gate number so far
    layers: list[list[int]] = []
    for _ in range(t):
        for g in seq.order:
            left, right = wrap(g - 1, n), wrap(g + 1, n)
            slot = max(last[g], last[left], last[right]) + 1
            if slot == len(layers):
                layers.append([])
            layers[slot].append(g)
            last[g] = slot
    filling = Fraction(2 * t * n, n * len(layers))
    return CompressionReport([tuple(layer) for layer in layers], t, filling, n)


def asymptotic_filling(seq: GateSequence, max_periods: int | None = None) -> Fraction:
    """Long-run filling of the greedily compressed ``seq**t``.

    The greedy schedule becomes periodic in ``t``; the per-period layer
    increments are scanned for the shortest repeating tail and the filling is
    ``2 * period / (layers added per period)``.
    """
    n = seq.n_sites
    if max_periods is None:
        max_periods = 4 * n + 4
    counts = [compress(seq, t).layer_count for t in range(1, max_periods + 1)]
    steps = [b - a for a, b in zip(counts, counts[1:])]
    tail = steps[len(steps) // 2 :]
    for period in range(1, len(tail) // 2 + 1):
        if all(tail[i] == tail[i + period] for i in range(len(tail) - period)):
            return Fraction(2 * period, sum(tail[-period:]))
    return Fraction(2 * max_periods, counts[-1])
