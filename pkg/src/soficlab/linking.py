"""Constructive linking: sums of permutation pieces, rounding, conjugation.

The rounding operation turns a 0/1 matrix with one entry per row (a total
point function) into a permutation by moving the colliding rows onto the
missed columns; the defect identity ||v - w||_2^2 = 2r/n holds with exact
rational equality, r being the number of missed columns.

All operations here are deterministic pure functions: repeated runs are
bit-identical.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

from .perms import PartialInjection, Permutation, pinj_compose


class RowFunction:
    """A total (not necessarily injective) point function {0..n-1} -> {0..n-1}.

    The matrix picture has exactly one entry of 1 on each line.
    """

    __slots__ = ("values",)

    def __init__(self, values: Sequence[int]):
        values = tuple(values)
        n = len(values)
        for y in values:
            if not 0 <= y < n:
                raise ValueError(f"value {y} out of range for n={n}")
        self.values = values

    @property
    def n(self) -> int:
        return len(self.values)

    def __getitem__(self, x: int) -> int:
        return self.values[x]

    def __eq__(self, other) -> bool:
        return isinstance(other, RowFunction) and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"RowFunction({list(self.values)})"

    def is_injective(self) -> bool:
        return len(set(self.values)) == self.n


def sum_of_pieces(partition: Sequence[Iterable[int]],
                  perms: Sequence[Permutation]) -> RowFunction:
    """f(x) = perms[i][x] for x in partition[i].

    ``partition`` must cover {0..n-1} exactly (disjoint blocks, full union).
    """
    if len(partition) != len(perms):
        raise ValueError("partition and permutation sequences differ in length")
    if not perms:
        raise ValueError("empty partition")
    n = perms[0].n
    for p in perms:
        if p.n != n:
            raise ValueError(f"size mismatch: {p.n} vs {n}")
    values = [-1] * n
    for block, p in zip(partition, perms):
        for x in block:
            if not 0 <= x < n:
                raise ValueError(f"point {x} out of range for n={n}")
            if values[x] >= 0:
                raise ValueError(f"overlapping partition at point {x}")
            values[x] = p[x]
    if any(v < 0 for v in values):
        missing = values.index(-1)
        raise ValueError(f"partition does not cover point {missing}")
    return RowFunction(values)


def round_to_permutation(v: RowFunction) -> Tuple[Permutation, int]:
    """Round a row function to a permutation, returning (w, moved).

    ``moved`` is the number of columns missed by the image of v, and w
    agrees with v on exactly n - moved points, so ||v - w||_2^2 = 2*moved/n
    exactly.  Tie-break: when several points share an image the
    smallest-index point keeps it; evicted points are reassigned to missed
    values, increasing point order against increasing value order.
    """
    n = v.n
    keeper = [-1] * n
    for x, y in enumerate(v.values):
        if keeper[y] < 0:
            keeper[y] = x
    missed = [y for y in range(n) if keeper[y] < 0]
    images = list(v.values)
    evicted = (x for x in range(n) if keeper[images[x]] != x)
    for x, y in zip(evicted, missed):
        images[x] = y
    return Permutation(images), len(missed)


def _check_subset(s, n, what):
    pts = sorted(set(s))
    if len(pts) != len(tuple(s)):
        raise ValueError(f"{what} contains repeated points")
    if pts and not (0 <= pts[0] and pts[-1] < n):
        raise ValueError(f"{what} out of range for n={n}")
    return pts


def conjugate_subsets(e: Iterable[int], f: Iterable[int], n: int) -> Permutation:
    """Deterministic permutation u with u(e) = f, by the sorting construction:
    i-th smallest of e -> i-th smallest of f, and likewise on complements."""
    e = tuple(e)
    f = tuple(f)
    es = _check_subset(e, n, "e")
    fs = _check_subset(f, n, "f")
    if len(es) != len(fs):
        raise ValueError(f"unequal cardinalities: {len(es)} vs {len(fs)}")
    in_e = set(es)
    in_f = set(fs)
    ec = [x for x in range(n) if x not in in_e]
    fc = [x for x in range(n) if x not in in_f]
    images = [0] * n
    for x, y in zip(es, fs):
        images[x] = y
    for x, y in zip(ec, fc):
        images[x] = y
    return Permutation(images)


def _check_partition(blocks, n, what):
    seen = bytearray(n)
    for block in blocks:
        for x in block:
            if not 0 <= x < n:
                raise ValueError(f"{what}: point {x} out of range for n={n}")
            if seen[x]:
                raise ValueError(f"{what}: point {x} repeated")
            seen[x] = 1
    if not all(seen):
        raise ValueError(f"{what} is not a partition of the point set")


def conjugate_partitions(es: Sequence[Iterable[int]],
                         fs: Sequence[Iterable[int]], n: int) -> Permutation:
    """Permutation u with u(es[i]) = fs[i] for all i.

    Built as a sum of per-block subset conjugators; the rounding step is a
    no-op here (the pieces have disjoint bijective images).
    """
    es = [tuple(b) for b in es]
    fs = [tuple(b) for b in fs]
    if len(es) != len(fs):
        raise ValueError("partitions have different block counts")
    _check_partition(es, n, "es")
    _check_partition(fs, n, "fs")
    for i, (e, f) in enumerate(zip(es, fs)):
        if len(e) != len(f):
            raise ValueError(f"cardinality mismatch at index {i}: {len(e)} vs {len(f)}")
    conjugators = [conjugate_subsets(e, f, n) for e, f in zip(es, fs)]
    v = sum_of_pieces(es, conjugators)
    w, moved = round_to_permutation(v)
    assert moved == 0, "disjoint bijective pieces must already be a permutation"
    return w


def align_labelings(l1, l2) -> Permutation:
    """Permutation u carrying labeling l1 to l2 exactly (all levels).

    Requires equal n, depth and equal deepest-level cell cardinalities;
    callers with unequal cell sizes must equalize via amplification first,
    or use :func:`align_labelings_approx`.
    """
    if l1.n != l2.n:
        raise ValueError(f"size mismatch: {l1.n} vs {l2.n}")
    if l1.depth != l2.depth:
        raise ValueError(f"depth mismatch: {l1.depth} vs {l2.depth}")
    c1 = l1.cells()
    c2 = l2.cells()
    for i, (a, b) in enumerate(zip(c1, c2)):
        if len(a) != len(b):
            raise ValueError(
                f"cell {i + 1} cardinality mismatch ({len(a)} vs {len(b)}); "
                "amplify to a common size first or use align_labelings_approx")
    return conjugate_partitions(c1, c2, l1.n)


def align_labelings_approx(l1, l2) -> Tuple[Permutation, Fraction]:
    """Best-effort alignment minimizing the relabeled symmetric difference.

    Returns (u, residual) where residual is the fraction of points whose
    pushed-forward l1 label differs from their l2 label; the greedy
    cell-by-cell matching attains the minimum (1/2n) * sum_i ||e_i|-|f_i||.
    """
    if l1.n != l2.n:
        raise ValueError(f"size mismatch: {l1.n} vs {l2.n}")
    if l1.depth != l2.depth:
        raise ValueError(f"depth mismatch: {l1.depth} vs {l2.depth}")
    n = l1.n
    c1 = l1.cells()
    c2 = l2.cells()
    images = [-1] * n
    left1 = []
    left2 = []
    matched = 0
    for a, b in zip(c1, c2):
        m = min(len(a), len(b))
        for x, y in zip(a[:m], b[:m]):
            images[x] = y
        matched += m
        left1.extend(a[m:])
        left2.extend(b[m:])
    for x, y in zip(sorted(left1), sorted(left2)):
        images[x] = y
    return Permutation(images), Fraction(n - matched, n) if n else Fraction(0)


class MatrixUnitSystem:
    """A system of matrix units on {0..n-1} given as partial injections.

    Block v has size s_v and pairwise-disjoint equal-cardinality supports
    D_1..D_{s_v}; the unit e[i][j] maps D_j bijectively onto D_i, with
    e[i][j] ∘ e[j][k] = e[i][k] and e[j][i] the inverse of e[i][j].  The
    diagonal units are identities and their supports cover the point set.

    Internally each block stores rows[i] = e[i][1] (D_1 -> D_i); every other
    unit is derived by composition.
    """

    __slots__ = ("n", "blocks")

    def __init__(self, n: int, blocks: Sequence[Tuple[Sequence[Sequence[int]],
                                                      Sequence[PartialInjection]]]):
        covered = bytearray(n)
        norm_blocks = []
        for bi, (supports, rows) in enumerate(blocks):
            supports = [tuple(sorted(s)) for s in supports]
            s_v = len(supports)
            if s_v == 0:
                raise ValueError(f"block {bi}: empty block")
            if len(rows) != s_v:
                raise ValueError(f"block {bi}: expected {s_v} rows, got {len(rows)}")
            card = len(supports[0])
            for sup in supports:
                if len(sup) != card:
                    raise ValueError(f"block {bi}: supports of unequal cardinality")
                for x in sup:
                    if not 0 <= x < n:
                        raise ValueError(f"block {bi}: point {x} out of range")
                    if covered[x]:
                        raise ValueError(f"block {bi}: point {x} in two supports")
                    covered[x] = 1
            for i, row in enumerate(rows):
                if row.n != n:
                    raise ValueError(f"block {bi}: row {i} has wrong point count")
                if row.domain() != supports[0] or row.image() != supports[i]:
                    raise ValueError(
                        f"block {bi}: row {i} is not a bijection D_1 -> D_{i + 1}")
            if not rows[0].is_identity_on_support():
                raise ValueError(f"block {bi}: first row must be the identity on D_1")
            norm_blocks.append((tuple(supports), tuple(rows)))
        if not all(covered):
            raise ValueError("diagonal supports do not cover the point set")
        self.n = n
        self.blocks = tuple(norm_blocks)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def block_sizes(self):
        return [len(sup) for sup, _ in self.blocks]

    def supports(self, v: int):
        return self.blocks[v][0]

    def unit(self, v: int, i: int, j: int) -> PartialInjection:
        """e[i][j] of block v (0-based i, j): maps D_{j+1} onto D_{i+1}."""
        supports, rows = self.blocks[v]
        s_v = len(supports)
        if not (0 <= i < s_v and 0 <= j < s_v):
            raise ValueError(f"unit index ({i},{j}) outside block of size {s_v}")
        return pinj_compose(rows[i], rows[j].inverse())

    def same_structure(self, other: "MatrixUnitSystem") -> bool:
        """Identical block structure and identical diagonal supports."""
        if self.n != other.n or self.block_count != other.block_count:
            return False
        return all(a[0] == b[0] for a, b in zip(self.blocks, other.blocks))

    def __eq__(self, other) -> bool:
        return (isinstance(other, MatrixUnitSystem) and self.n == other.n
                and self.blocks == other.blocks)

    def __repr__(self) -> str:
        return f"MatrixUnitSystem(n={self.n}, t={self.block_count})"


def link_matrix_units(s1: MatrixUnitSystem, s2: MatrixUnitSystem) -> Permutation:
    """The permutation p = sum over blocks and j of e2[j][1] ∘ e1[1][j].

    Requires identical block structure and diagonal supports; conjugation
    by p then carries every s1 unit to the corresponding s2 unit:
    p ∘ e1[i][j] ∘ p^{-1} = e2[i][j].
    """
    if s1.n != s2.n:
        raise ValueError(f"size mismatch: {s1.n} vs {s2.n}")
    if not s1.same_structure(s2):
        raise ValueError("mismatched block structure or diagonal supports")
    images = [-1] * s1.n
    for v in range(s1.block_count):
        _, rows1 = s1.blocks[v]
        _, rows2 = s2.blocks[v]
        for j in range(len(rows1)):
            down = rows1[j].inverse()   # e1[1][j]: D_j -> D_1
            up = rows2[j]               # e2[j][1]: D_1 -> D_j
            for x, y in down.pairs:
                images[x] = up(y)
    return Permutation(images)


def conjugate_pinj(p: Permutation, a: PartialInjection) -> PartialInjection:
    """p ∘ a ∘ p^{-1} as a partial injection."""
    if p.n != a.n:
        raise ValueError(f"size mismatch: {p.n} vs {a.n}")
    return PartialInjection(a.n, {p[x]: p[y] for x, y in a.pairs})


def random_matrix_unit_system(n: int, rng: random.Random,
                              max_block_size: int = 4) -> MatrixUnitSystem:
    """Seeded random system with mixed block sizes covering {0..n-1}."""
    structure = []
    rem = n
    while rem > 0:
        s = rng.randint(1, min(max_block_size, rem))
        c = rng.randint(1, rem // s)
        structure.append((s, c))
        rem -= s * c
    points = list(range(n))
    rng.shuffle(points)
    supports_per_block = []
    pos = 0
    for s, c in structure:
        sups = []
        for _ in range(s):
            sups.append(tuple(sorted(points[pos:pos + c])))
            pos += c
        supports_per_block.append(sups)
    return fill_random_rows(n, supports_per_block, rng)


def fill_random_rows(n: int, supports_per_block, rng: random.Random) -> MatrixUnitSystem:
    """Build a system on the given diagonal supports with random row bijections."""
    blocks = []
    for sups in supports_per_block:
        base = sups[0]
        rows = [PartialInjection.identity_on(n, base)]
        for sup in sups[1:]:
            tgt = list(sup)
            rng.shuffle(tgt)
            rows.append(PartialInjection(n, dict(zip(base, tgt))))
        blocks.append((sups, rows))
    return MatrixUnitSystem(n, blocks)


def random_compatible_pair(n: int, rng: random.Random, max_block_size: int = 4):
    """Two systems with identical block structure and diagonal supports but
    independent off-diagonal units."""
    first = random_matrix_unit_system(n, rng, max_block_size)
    sups = [list(b[0]) for b in first.blocks]
    second = fill_random_rows(n, sups, rng)
    return first, second
