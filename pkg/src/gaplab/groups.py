"""Computational group descriptors.

Four kinds of groups are supported, all unimodular:

* ``lattice``    -- the integer lattice Z^d with counting measure,
* ``free``       -- the free group F_k, elements stored as reduced words,
* ``real-grid``  -- R^d discretized as (1/q)Z^d, cell volume q^{-d},
* ``torus-grid`` -- (R/Z)^d discretized as (Z/N)^d, cell weight N^{-d}.

Elements are plain tuples of ints: lattice/grid coordinates, torus
residues in [0, N), or reduced words over the alphabet {+-1, ..., +-k}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import ResourceLimitError, UnsupportedKindError

Element = tuple[int, ...]

LATTICE = "lattice"
FREE = "free"
REAL_GRID = "real-grid"
TORUS_GRID = "torus-grid"

_KINDS = (LATTICE, FREE, REAL_GRID, TORUS_GRID)

#: kinds whose elements are grid cells with a genuine Haar density
GRID_KINDS = (REAL_GRID, TORUS_GRID)
#: kinds that are discrete groups in the usual sense
DISCRETE_KINDS = (LATTICE, FREE)
#: kinds on which the regular-representation norm oracles for amenable
#: groups apply (all abelian here)
ABELIAN_KINDS = (LATTICE, REAL_GRID, TORUS_GRID)


@dataclass(frozen=True)
class GroupDescriptor:
    """A computational group: kind, size parameters, Haar cell weight.

    ``dimension`` is d for the lattice kinds and the rank k for ``free``.
    ``resolution`` is the grid parameter q of ``real-grid`` (cell spacing
    1/q); ``size`` is the torus parameter N.  ``unimodular`` is always
    True for the supported kinds and stored only to make the standing
    hypothesis explicit.
    """

    kind: str
    dimension: int = 1
    resolution: int = 1
    size: int = 0
    unimodular: bool = True

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UnsupportedKindError(f"unknown group kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension/rank must be >= 1")
        if self.kind == REAL_GRID and self.resolution < 1:
            raise ValueError("real-grid resolution q must be >= 1")
        if self.kind == TORUS_GRID and self.size < 1:
            raise ValueError("torus-grid size N must be >= 1")
        if not self.unimodular:
            raise UnsupportedKindError("only unimodular groups are supported")

    # -- basic structure ------------------------------------------------

    def identity(self) -> Element:
        if self.kind == FREE:
            return ()
        return (0,) * self.dimension

    def compose(self, a: Element, b: Element) -> Element:
        if self.kind == FREE:
            return _reduce_word(a + b)
        if self.kind == TORUS_GRID:
            return tuple((x + y) % self.size for x, y in zip(a, b))
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a: Element) -> Element:
        if self.kind == FREE:
            return tuple(-letter for letter in reversed(a))
        if self.kind == TORUS_GRID:
            return tuple((-x) % self.size for x in a)
        return tuple(-x for x in a)

    @property
    def cell_volume(self) -> float:
        """Haar weight of a single atom/cell."""
        if self.kind == REAL_GRID:
            return float(self.resolution) ** (-self.dimension)
        if self.kind == TORUS_GRID:
            return float(self.size) ** (-self.dimension)
        return 1.0

    @property
    def is_grid(self) -> bool:
        return self.kind in GRID_KINDS

    @property
    def is_discrete(self) -> bool:
        return self.kind in DISCRETE_KINDS

    @property
    def is_abelian(self) -> bool:
        return self.kind in ABELIAN_KINDS

    # -- geometry -------------------------------------------------------

    def value(self, a: Element) -> tuple[float, ...]:
        """Physical coordinates of an element (word length for free groups)."""
        if self.kind == LATTICE:
            return tuple(float(x) for x in a)
        if self.kind == REAL_GRID:
            return tuple(x / self.resolution for x in a)
        if self.kind == TORUS_GRID:
            return tuple(_torus_rep(x, self.size) / self.size for x in a)
        return (float(len(a)),)

    def norm(self, a: Element) -> float:
        """Euclidean norm of the value; word length on the free group."""
        if self.kind == FREE:
            return float(len(a))
        return math.sqrt(sum(v * v for v in self.value(a)))

    def ball(self, radius: float) -> list[Element]:
        """All elements of norm <= radius, in deterministic order."""
        if radius < 0:
            return []
        if self.kind == FREE:
            return _free_ball(self.dimension, int(radius))
        if self.kind == LATTICE:
            return _euclid_ball(self.dimension, radius, 1)
        if self.kind == REAL_GRID:
            return _euclid_ball(self.dimension, radius, self.resolution)
        # torus: residues whose representative lies in the ball
        reach = min(radius, 0.5)
        coords = [
            r % self.size
            for r in range(-self.size // 2, self.size // 2 + 1)
            if abs(r) / self.size <= reach
        ]
        cells = []
        for tup in itertools.product(sorted(set(coords)), repeat=self.dimension):
            if math.sqrt(sum((_torus_rep(x, self.size) / self.size) ** 2 for x in tup)) <= radius:
                cells.append(tup)
        return sorted(cells)

    def sort_key(self, a: Element):
        """Deterministic ordering key: lexicographic, words by length first."""
        if self.kind == FREE:
            return (len(a), a)
        return a


def _torus_rep(x: int, n: int) -> int:
    """Representative of x mod n in [-n/2, n/2)."""
    r = x % n
    return r - n if r >= (n + 1) // 2 else r


def _reduce_word(word: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    for letter in word:
        if letter == 0:
            raise ValueError("free-group letters must be nonzero")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def _free_ball(rank: int, radius: int) -> list[Element]:
    letters = [i for i in range(-rank, rank + 1) if i != 0]
    words: list[Element] = [()]
    frontier: list[Element] = [()]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for letter in letters:
                if w and w[-1] == -letter:
                    continue
                nxt.append(w + (letter,))
        words.extend(nxt)
        frontier = nxt
    return sorted(words, key=lambda w: (len(w), w))


def _euclid_ball(dim: int, radius: float, scale: int) -> list[Element]:
    reach = int(math.floor(radius * scale + 1e-12))
    cells = []
    for tup in itertools.product(range(-reach, reach + 1), repeat=dim):
        if math.sqrt(sum((x / scale) ** 2 for x in tup)) <= radius + 1e-12:
            cells.append(tup)
    return sorted(cells)


# -- finite set arithmetic ---------------------------------------------


def product_set(
    group: GroupDescriptor,
    xs: list[Element] | tuple[Element, ...],
    ys: list[Element] | tuple[Element, ...],
    cap: int = 10_000_000,
) -> list[Element]:
    """The product set {x*y}, deduplicated, in deterministic order."""
    out = set()
    for x in xs:
        for y in ys:
            out.add(group.compose(x, y))
            if len(out) > cap:
                raise ResourceLimitError(
                    f"product set exceeded the support cap of {cap} elements"
                )
    return sorted(out, key=group.sort_key)


def inverse_set(group: GroupDescriptor, xs) -> list[Element]:
    return sorted({group.inverse(x) for x in xs}, key=group.sort_key)


def power_set(
    group: GroupDescriptor, base, n: int, cap: int = 10_000_000
) -> list[Element]:
    """The n-fold product set base^n (base^0 = {e})."""
    if n < 0:
        raise ValueError("power must be >= 0")
    acc: list[Element] = [group.identity()]
    for _ in range(n):
        acc = product_set(group, acc, base, cap=cap)
    return acc


def is_symmetric_set(group: GroupDescriptor, xs) -> bool:
    s = set(xs)
    return all(group.inverse(x) in s for x in s)
