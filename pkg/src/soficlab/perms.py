"""Exact arithmetic for permutations, partial injections and dyadic labelings.

Everything lives on the dense 0-based point set {0..n-1}.  Set-like objects
are point subsets or label arrays, never matrices.  All types are immutable
after construction and safe to share between threads; the operations are
pure functions.

Convention: ``images[x]`` is the image of the point ``x``, i.e. permutations
act on the left.  (The matrix picture "one 1 per row, acting on column
vectors" is the transpose of this; we fix the point-map convention and keep
it everywhere.)
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Optional, Sequence


class Permutation:
    """A bijection of {0..n-1}, stored as the tuple of images."""

    __slots__ = ("images",)

    def __init__(self, images: Sequence[int]):
        images = tuple(images)
        n = len(images)
        seen = bytearray(n)
        for y in images:
            if not isinstance(y, int) or not 0 <= y < n or seen[y]:
                raise ValueError("images do not form a bijection of {0..n-1}")
            seen[y] = 1
        self.images = images

    @property
    def n(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    def __getitem__(self, x: int) -> int:
        return self.images[x]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        if self.n <= 16:
            return f"Permutation({list(self.images)})"
        return f"Permutation(n={self.n})"

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def is_identity(self) -> bool:
        return all(y == x for x, y in enumerate(self.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for x, y in enumerate(self.images):
            inv[y] = x
        return Permutation(inv)

    def fixed_points(self) -> int:
        return sum(1 for x, y in enumerate(self.images) if x == y)

    def cycles(self, include_fixed: bool = True):
        """Cycle decomposition; each cycle starts at its smallest point,
        cycles sorted by (length, smallest point)."""
        seen = bytearray(self.n)
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = 1
            y = self.images[start]
            while y != start:
                cyc.append(y)
                seen[y] = 1
                y = self.images[y]
            if include_fixed or len(cyc) > 1:
                out.append(tuple(cyc))
        out.sort(key=lambda c: (len(c), c[0]))
        return out


def compose(a: Permutation, b: Permutation) -> Permutation:
    """(a ∘ b), i.e. apply ``b`` first: result[x] = a[b[x]]."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    ai = a.images
    return Permutation([ai[y] for y in b.images])


def inverse(a: Permutation) -> Permutation:
    return a.inverse()


def normalized_hamming(a: Permutation, b: Permutation) -> Fraction:
    """Fraction of points where ``a`` and ``b`` disagree (bi-invariant metric)."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    if a.n == 0:
        return Fraction(0)
    diff = sum(1 for x, y in zip(a.images, b.images) if x != y)
    return Fraction(diff, a.n)


def two_norm_sq(a: Permutation, b: Permutation) -> Fraction:
    """Normalized Frobenius distance squared of the permutation matrices.

    For permutation matrices ||u - v||_2^2 = 2 d(u, v); this is the bridge
    between 2-norm bounds and Hamming bounds.
    """
    return 2 * normalized_hamming(a, b)


def fixed_fraction(a: Permutation) -> Fraction:
    """Fraction of fixed points; the normalized trace of the matrix of ``a``."""
    if a.n == 0:
        return Fraction(1)
    return Fraction(a.fixed_points(), a.n)


def random_permutation(n: int, rng: random.Random) -> Permutation:
    images = list(range(n))
    rng.shuffle(images)
    return Permutation(images)


class PartialInjection:
    """An injective partial map of {0..n-1} (a piece of a permutation)."""

    __slots__ = ("n", "pairs", "_map")

    def __init__(self, n: int, mapping):
        if n < 0:
            raise ValueError("negative point count")
        pairs = sorted(dict(mapping).items()) if not isinstance(mapping, dict) \
            else sorted(mapping.items())
        mp = {}
        image = set()
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"pair ({x},{y}) out of range for n={n}")
            if y in image:
                raise ValueError("map is not injective")
            image.add(y)
            mp[x] = y
        self.n = n
        self.pairs = tuple(pairs)
        self._map = mp

    @classmethod
    def empty(cls, n: int) -> "PartialInjection":
        return cls(n, {})

    @classmethod
    def identity_on(cls, n: int, support: Iterable[int]) -> "PartialInjection":
        return cls(n, {x: x for x in support})

    @classmethod
    def from_permutation(cls, p: Permutation, support: Iterable[int]) -> "PartialInjection":
        """Restriction of a permutation to a point subset (e·p)."""
        return cls(p.n, {x: p[x] for x in support})

    def domain(self):
        return tuple(x for x, _ in self.pairs)

    def image(self):
        return tuple(sorted(y for _, y in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, x: int) -> bool:
        return x in self._map

    def __call__(self, x: int) -> Optional[int]:
        return self._map.get(x)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PartialInjection)
                and self.n == other.n and self.pairs == other.pairs)

    def __hash__(self) -> int:
        return hash((self.n, self.pairs))

    def __repr__(self) -> str:
        return f"PartialInjection(n={self.n}, {dict(self.pairs)})"

    def inverse(self) -> "PartialInjection":
        return PartialInjection(self.n, {y: x for x, y in self.pairs})

    def is_identity_on_support(self) -> bool:
        return all(x == y for x, y in self.pairs)


def pinj_compose(a: PartialInjection, b: PartialInjection) -> PartialInjection:
    """Groupoid product (apply ``b`` first): defined where b(x) lands in dom(a)."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    out = {}
    for x, y in b.pairs:
        z = a(y)
        if z is not None:
            out[x] = z
    return PartialInjection(a.n, out)


class DyadicLabeling:
    """Per-point labels realizing a dyadic basic sequence of partitions.

    ``labels[x]`` is the deepest-level label in {1..2^depth}; the level-j
    label of x is ceil(labels[x] / 2^(depth-j)), so level-(j-1) cell i is
    the disjoint union of level-j cells 2i-1 and 2i by construction.

    Coarser levels are derived arithmetically; only the deepest level is
    stored.  Cell sizes are not forced equal (n need not be divisible);
    the measure deviation is exposed via :meth:`trace_deviation`.
    """

    __slots__ = ("n", "depth", "labels")

    def __init__(self, n: int, depth: int, labels: Sequence[int]):
        if depth < 0:
            raise ValueError("negative depth")
        labels = tuple(labels)
        if len(labels) != n:
            raise ValueError(f"expected {n} labels, got {len(labels)}")
        top = 1 << depth
        for lab in labels:
            if not 1 <= lab <= top:
                raise ValueError(f"label {lab} outside 1..{top}")
        self.n = n
        self.depth = depth
        self.labels = labels

    @classmethod
    def trivial(cls, n: int) -> "DyadicLabeling":
        return cls(n, 0, [1] * n)

    @classmethod
    def balanced(cls, n: int, depth: int) -> "DyadicLabeling":
        """Canonical labeling with contiguous cells, sizes split as evenly as
        possible at every level (all level-j cells within 1 of each other)."""
        sizes = [n]
        for _ in range(depth):
            sizes = [part for s in sizes for part in ((s + 1) // 2, s // 2)]
        labels = []
        for i, s in enumerate(sizes):
            labels.extend([i + 1] * s)
        return cls(n, depth, labels)

    def __eq__(self, other) -> bool:
        return (isinstance(other, DyadicLabeling) and self.n == other.n
                and self.depth == other.depth and self.labels == other.labels)

    def __hash__(self) -> int:
        return hash((self.n, self.depth, self.labels))

    def __repr__(self) -> str:
        return f"DyadicLabeling(n={self.n}, depth={self.depth})"

    def level_label(self, x: int, level: int) -> int:
        if not 0 <= level <= self.depth:
            raise ValueError(f"level {level} outside 0..{self.depth}")
        return ((self.labels[x] - 1) >> (self.depth - level)) + 1

    def cells(self, level: Optional[int] = None):
        """Point sets of the level cells, index i holding label i+1 (may be empty)."""
        if level is None:
            level = self.depth
        out = [[] for _ in range(1 << level)]
        shift = self.depth - level
        for x, lab in enumerate(self.labels):
            out[(lab - 1) >> shift].append(x)
        return [tuple(c) for c in out]

    def cell_sizes(self, level: Optional[int] = None):
        if level is None:
            level = self.depth
        sizes = [0] * (1 << level)
        shift = self.depth - level
        for lab in self.labels:
            sizes[(lab - 1) >> shift] += 1
        return sizes

    def trace_deviation(self) -> Fraction:
        """max_i |card(cell_i)/n - 2^(-depth)| over deepest-level cells."""
        if self.n == 0:
            return Fraction(0)
        target = Fraction(1, 1 << self.depth)
        return max(abs(Fraction(s, self.n) - target) for s in self.cell_sizes())

    def coarsen(self, level: int) -> "DyadicLabeling":
        return DyadicLabeling(self.n, level,
                              [self.level_label(x, level) for x in range(self.n)])

    def pushforward(self, u: Permutation) -> "DyadicLabeling":
        """Labeling carried along u: new label of u(x) is the label of x."""
        if u.n != self.n:
            raise ValueError(f"size mismatch: {u.n} vs {self.n}")
        labels = [0] * self.n
        for x, lab in enumerate(self.labels):
            labels[u[x]] = lab
        return DyadicLabeling(self.n, self.depth, labels)

    def lift(self, m: int) -> "DyadicLabeling":
        """Labeling of the product with an m-point second factor (x,j) -> x*m+j."""
        if m < 1:
            raise ValueError("lift factor must be >= 1")
        labels = []
        for lab in self.labels:
            labels.extend([lab] * m)
        return DyadicLabeling(self.n * m, self.depth, labels)
