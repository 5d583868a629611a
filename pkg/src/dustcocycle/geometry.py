"""Square-based iterated function systems with exact triadic coordinates.

All maps here are translations composed with scaling by 1/3, so a level-n
square is fully described by its word (symbol sequence), its corner numerators
over 3**n, and the edge 3**-n.  Coordinates stay integers until a kernel
actually needs floats; vertex coincidences and the ternary digit map require
that exactness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator

import numpy as np

MAX_LEVEL_WITHOUT_OVERRIDE = 16


@dataclass(frozen=True)
class IfsPreset:
    """A family of similitudes x -> x/3 + offset/3 on the unit square."""

    name: str
    offsets: tuple  # (ox, oy) pairs, each in {0, 1, 2}

    @property
    def nmaps(self):
        return len(self.offsets)

    @property
    def ratios(self):
        return (Fraction(1, 3),) * self.nmaps

    def offset_arrays(self):
        off = np.array(self.offsets, dtype=np.int64)
        return off[:, 0].copy(), off[:, 1].copy()


CANTOR_DUST = IfsPreset("cantor-dust", ((0, 0), (0, 2), (2, 0), (2, 2)))
SIERPINSKI_CARPET = IfsPreset(
    "sierpinski-carpet",
    tuple(p for p in product((0, 1, 2), repeat=2) if p != (1, 1)),
)
FULL_SUBDIVISION_3 = IfsPreset("full-subdivision-3", tuple(product((0, 1, 2), repeat=2)))

PRESETS = {p.name: p for p in (CANTOR_DUST, SIERPINSKI_CARPET, FULL_SUBDIVISION_3)}


def get_preset(name: str) -> IfsPreset:
    key = name.strip().lower().replace("_", "-")
    if key not in PRESETS:
        raise KeyError(f"unknown IFS preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key]


@dataclass(frozen=True)
class TriadicPoint:
    """Exact planar point (px/3**level, py/3**level)."""

    px: int
    py: int
    level: int

    def __post_init__(self):
        lim = 3**self.level
        if not (0 <= self.px <= lim and 0 <= self.py <= lim):
            raise ValueError(f"triadic numerators out of range at level {self.level}")

    def as_floats(self):
        d = float(3**self.level)
        return self.px / d, self.py / d

    def as_fractions(self):
        d = 3**self.level
        return Fraction(self.px, d), Fraction(self.py, d)


@dataclass(frozen=True)
class SquareGeom:
    """One level-n square: word address, exact corner numerators, edge 3**-n."""

    word: tuple
    kx: int
    ky: int

    @property
    def level(self):
        return len(self.word)

    @property
    def edge(self) -> Fraction:
        return Fraction(1, 3**self.level)

    @property
    def corner(self) -> TriadicPoint:
        return TriadicPoint(self.kx, self.ky, self.level)


@dataclass(frozen=True)
class DyadicCell:
    """One cell of the 2**level-fold subdivision: corner (i, j)/2**level."""

    i: int
    j: int
    level: int

    @property
    def edge(self) -> Fraction:
        return Fraction(1, 2**self.level)

    def corner_fractions(self):
        d = 2**self.level
        return Fraction(self.i, d), Fraction(self.j, d)


def enumerate_squares(
    preset: IfsPreset, n: int, prefix: tuple = (), allow_large: bool = False
) -> Iterator[SquareGeom]:
    """Yield the level-n squares in lexicographic word order.

    Streaming: nothing is materialized.  ``prefix`` restricts the stream to
    words starting with the given symbols, so disjoint prefix sub-streams can
    be recreated independently on separate workers.  Levels above
    ``MAX_LEVEL_WITHOUT_OVERRIDE`` are refused unless ``allow_large`` is set.
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    if len(prefix) > n:
        raise ValueError("prefix longer than the word length")
    if n > MAX_LEVEL_WITHOUT_OVERRIDE and not allow_large:
        raise ValueError(
            f"level {n} exceeds the guard ({MAX_LEVEL_WITHOUT_OVERRIDE}); "
            "pass allow_large=True to override"
        )
    offsets = preset.offsets
    if any(not 0 <= s < preset.nmaps for s in prefix):
        raise ValueError(f"prefix symbols must lie in [0, {preset.nmaps})")
    for tail in product(range(preset.nmaps), repeat=n - len(prefix)):
        word = prefix + tail
        kx = 0
        ky = 0
        for s in word:
            kx = 3 * kx + offsets[s][0]
            ky = 3 * ky + offsets[s][1]
        yield SquareGeom(word, kx, ky)


def vertices(sq: SquareGeom):
    """The four vertices (v0, v1, v2, v3): corner, right, opposite, up."""
    n = sq.level
    return (
        TriadicPoint(sq.kx, sq.ky, n),
        TriadicPoint(sq.kx + 1, sq.ky, n),
        TriadicPoint(sq.kx + 1, sq.ky + 1, n),
        TriadicPoint(sq.kx, sq.ky + 1, n),
    )


def subdivision_cells(n: int) -> Iterator[DyadicCell]:
    """The 4**n cells of the 2**n-fold subdivision, row-major."""
    if n < 0:
        raise ValueError("level must be >= 0")
    side = 2**n
    for j in range(side):
        for i in range(side):
            yield DyadicCell(i, j, n)


def similarity_dimension(preset, tol: float = 1e-13) -> float:
    """The exponent d with sum(r**d) = 1, found by bisection.

    ``preset`` is an :class:`IfsPreset` or a plain iterable of contraction
    ratios.  The contraction sum is strictly decreasing in d, equal to the
    map count at d = 0.
    """
    ratios = [float(r) for r in (preset.ratios if isinstance(preset, IfsPreset) else preset)]
    if not ratios:
        raise ValueError("preset has no maps")
    if any(not (0.0 < r < 1.0) for r in ratios):
        raise ValueError("similarity ratios must lie in (0, 1)")

    def excess(d):
        return sum(r**d for r in ratios) - 1.0

    lo, hi = 0.0, 1.0
    while excess(hi) > 0.0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
