"""Derived approximations: amalgamated gluings, product actions, integer
actions with dyadic targets, and treeing restrictions.

The amalgam glue conjugates the right factor so that the designated subgroup
generators evaluate identically through both factors whenever that is
achievable (equal labeled cell sizes, conjugate subgroup images); otherwise
it applies a greedy orbit-class matching and publishes the residual Hamming
defects instead of failing.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .approx import (ActionApproximation, SoficApproximation, amplify,
                     conjugate_approximation, evaluate_word, make_base,
                     tensor_pair)
from .groups import GroupSpec, Word
from .linking import (MatrixUnitSystem, align_labelings,
                      align_labelings_approx, conjugate_partitions,
                      link_matrix_units)
from .perms import (DyadicLabeling, PartialInjection, Permutation, compose,
                    normalized_hamming, pinj_compose)

# -- amalgamated gluing ------------------------------------------------------


def orbit_unit_system(p: Permutation) -> MatrixUnitSystem:
    """Matrix units of the orbit structure of a permutation: one block per
    cycle, singleton supports along the cycle, off-diagonal units the
    corresponding pieces of the powers of p."""
    blocks = []
    for cyc in p.cycles():
        supports = [(x,) for x in cyc]
        rows = [PartialInjection(p.n, {cyc[0]: x}) for x in cyc]
        blocks.append((supports, rows))
    return MatrixUnitSystem(p.n, blocks)


def _cycle_pairing(b: Permutation, a: Permutation) -> Permutation:
    """Deterministic w with w b w^{-1} = a when cycle types match: cycles are
    paired by (length, smallest point) and matched position by position."""
    bc = b.cycles()
    ac = a.cycles()
    images = [0] * b.n
    for cb, ca in zip(bc, ac):
        for x, y in zip(cb, ca):
            images[x] = y
    return Permutation(images)


def _greedy_pairing(b: Permutation, a: Permutation) -> Permutation:
    """Total matching when cycle types differ: equal lengths first, leftovers
    flattened longest-first and matched positionally."""
    from collections import defaultdict
    bl = defaultdict(list)
    al = defaultdict(list)
    for c in b.cycles():
        bl[len(c)].append(c)
    for c in a.cycles():
        al[len(c)].append(c)
    images = [-1] * b.n
    left_b: List[Tuple[int, ...]] = []
    left_a: List[Tuple[int, ...]] = []
    for ln in sorted(set(bl) | set(al)):
        cb, ca = bl.get(ln, []), al.get(ln, [])
        for x_cycle, y_cycle in zip(cb, ca):
            for x, y in zip(x_cycle, y_cycle):
                images[x] = y
        left_b.extend(cb[len(ca):])
        left_a.extend(ca[len(cb):])
    order = lambda cycles: [x for c in sorted(cycles, key=lambda c: (-len(c), c[0]))
                            for x in c]
    for x, y in zip(order(left_b), order(left_a)):
        images[x] = y
    return Permutation(images)


@dataclass
class AmalgamResult:
    action: ActionApproximation
    h_residuals: Tuple[Fraction, ...]
    label_residual: Fraction
    left_k: int
    right_k: int

    @property
    def max_h_residual(self) -> Fraction:
        return max(self.h_residuals, default=Fraction(0))


def _shift_word(w: Word, offset: int) -> Word:
    return Word([(g + offset, s) for g, s in w.letters], reduce=False)


def amalgam_glue(left: ActionApproximation, right: ActionApproximation,
                 h_left: Sequence[Word], h_right: Sequence[Word]) -> AmalgamResult:
    """Glue two action approximations along designated subgroup generators.

    h_left[i] and h_right[i] are words denoting the same subgroup generator
    through the respective factors.  The factors are amplified to a common
    size, the labelings aligned, and the right factor conjugated so that the
    subgroup images match; matching is exact (residual 0) when the subgroup
    images are conjugate permutations, and a greedy best effort otherwise.
    The result carries the union generator set and per-generator residuals.
    """
    if len(h_left) != len(h_right):
        raise ValueError("subgroup generator lists differ in length")
    if left.n != right.n:
        target = left.n * right.n // math.gcd(left.n, right.n)
        if left.n != target:
            left = ActionApproximation(amplify(left.approx, target // left.n),
                                       left.labeling.lift(target // left.n))
        if right.n != target:
            right = ActionApproximation(amplify(right.approx, target // right.n),
                                        right.labeling.lift(target // right.n))
    lspec, rspec = left.approx.spec, right.approx.spec

    if not h_left:
        # free product: no alignment performed
        glued = _union_action(left, right, (), ())
        return AmalgamResult(glued, (), Fraction(0), lspec.k, rspec.k)

    if left.labeling.depth != right.labeling.depth:
        raise ValueError("labeling depth mismatch between factors")
    try:
        u1 = align_labelings(right.labeling, left.labeling)
        label_residual = Fraction(0)
    except ValueError:
        u1, label_residual = align_labelings_approx(right.labeling, left.labeling)
    right_adj = conjugate_approximation(right.approx, u1)

    a0 = evaluate_word(left.approx, h_left[0])
    b0 = evaluate_word(right_adj, h_right[0])
    type_a = sorted(len(c) for c in a0.cycles())
    type_b = sorted(len(c) for c in b0.cycles())
    if type_a == type_b:
        q = _cycle_pairing(b0, a0)
        # route the now-aligned orbit structures through the unit linking
        mid = compose(q, compose(b0, q.inverse()))
        p = link_matrix_units(orbit_unit_system(mid), orbit_unit_system(a0))
        w = compose(p, q)
    else:
        w = _greedy_pairing(b0, a0)
    right_final = conjugate_approximation(right_adj, w)

    residuals = tuple(
        normalized_hamming(evaluate_word(left.approx, wl),
                           evaluate_word(right_final, wr))
        for wl, wr in zip(h_left, h_right))
    glued = _union_action(ActionApproximation(left.approx, left.labeling),
                          ActionApproximation(right_final, left.labeling),
                          h_left, h_right)
    return AmalgamResult(glued, residuals, label_residual, lspec.k, rspec.k)


def _union_action(left: ActionApproximation, right: ActionApproximation,
                  h_left: Sequence[Word], h_right: Sequence[Word]) -> ActionApproximation:
    lspec, rspec = left.approx.spec, right.approx.spec
    k = lspec.k + rspec.k
    relators = list(lspec.relators)
    relators += [_shift_word(w, lspec.k) for w in rspec.relators]
    # the amalgamation relations: h_left[i] * h_right[i]^{-1}
    for wl, wr in zip(h_left, h_right):
        rel = wl * _shift_word(wr, lspec.k).inverse()
        if rel:
            relators.append(rel)
    nontrivial = [Word(le, reduce=False) for le in lspec.nontrivial]
    nontrivial += [_shift_word(Word(le, reduce=False), lspec.k)
                   for le in rspec.nontrivial]
    names = [f"a{i + 1}" for i in range(lspec.k)]
    names += [f"b{i + 1}" for i in range(rspec.k)]
    spec = GroupSpec.presented(
        k, relators, nontrivial=nontrivial,
        name=f"{lspec.name or 'G1'}*{rspec.name or 'G2'}")
    approx = SoficApproximation(spec, left.n, left.approx.gens + right.approx.gens,
                                gen_names=names,
                                provenance=("amalgam",))
    return ActionApproximation(approx, left.labeling)


# -- product actions ---------------------------------------------------------


def product_action(a: ActionApproximation,
                   free_part: SoficApproximation) -> ActionApproximation:
    """Diagonal action on the product, labeling lifted from the first factor.

    The fixed fraction of every word is at most its value on the free part.
    """
    return ActionApproximation(tensor_pair(a.approx, free_part),
                               a.labeling.lift(free_part.n))


# -- integer actions ---------------------------------------------------------


@dataclass(frozen=True)
class CellAutomorphism:
    """An automorphism of the depth-d dyadic algebra: a permutation of the
    2^d deepest cells (0-based cell indices)."""
    depth: int
    cell_perm: Permutation

    def __post_init__(self):
        if self.cell_perm.n != 1 << self.depth:
            raise ValueError(f"cell permutation on {self.cell_perm.n} points, "
                             f"expected {1 << self.depth}")


def odometer(depth: int) -> CellAutomorphism:
    """The dyadic odometer at the given depth: each cell maps to its successor."""
    m = 1 << depth
    return CellAutomorphism(depth, Permutation([(i + 1) % m for i in range(m)]))


def cell_swap(depth: int, i: int, j: int) -> CellAutomorphism:
    m = 1 << depth
    images = list(range(m))
    images[i], images[j] = images[j], images[i]
    return CellAutomorphism(depth, Permutation(images))


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def cell_conjugator(auto: CellAutomorphism, n: int,
                    labeling: Optional[DyadicLabeling] = None) -> Tuple[Permutation, DyadicLabeling]:
    """The point permutation realizing the cell automorphism on a labeling.

    Obtained by aligning the labeling with its image under the automorphism;
    requires all deepest cells of equal size (exact measure preservation).
    """
    m = 1 << auto.depth
    if labeling is None:
        if n % m:
            raise ValueError(f"n={n} is not divisible by 2^depth={m}")
        labeling = DyadicLabeling.balanced(n, auto.depth)
    if labeling.n != n or labeling.depth != auto.depth:
        raise ValueError("labeling does not match the automorphism depth")
    cells = labeling.cells()
    sizes = {len(c) for c in cells}
    if len(sizes) != 1:
        raise ValueError("automorphism not measure-preserving on cells "
                         "(unequal cell sizes)")
    fs = [cells[auto.cell_perm[i]] for i in range(m)]
    return conjugate_partitions(cells, fs, n), labeling


def integer_action_approx(auto: CellAutomorphism, n: int, p: int,
                          labeling: Optional[DyadicLabeling] = None) -> ActionApproximation:
    """Integer-action approximation realizing a dyadic cell automorphism.

    The generator conjugates every deepest cell onto its image cell exactly;
    tensoring with a p-cycle (p prime) kills the traces of the powers
    gamma^m for 0 < |m| < p.  The output lives on n*p points.
    """
    if not _is_prime(p):
        raise ValueError(f"p={p} is not prime")
    u, labeling = cell_conjugator(auto, n, labeling)
    base = SoficApproximation(GroupSpec.integer(), n, [u],
                              provenance=(f"cell-automorphism depth={auto.depth}",))
    killer = make_base(GroupSpec.integer(), p)
    return ActionApproximation(tensor_pair(base, killer), labeling.lift(p))


# -- treeings ---------------------------------------------------------------


class TreeingFamily:
    """Partial injections obtained by restricting generator permutations.

    Supports groupoid-word evaluation: a sequence of signed indices composes
    the partial maps, shrinking domains as needed.  Groupoid words are NOT
    freely reduced (phi . phi^{-1} is the identity on image(phi), not the
    full identity), so evaluation accepts raw letter sequences.
    """

    def __init__(self, n: int, maps: Sequence[PartialInjection]):
        for m in maps:
            if m.n != n:
                raise ValueError(f"partial map on {m.n} points, expected {n}")
        self.n = n
        self.maps = tuple(maps)

    @property
    def k(self) -> int:
        return len(self.maps)

    def evaluate(self, letters) -> PartialInjection:
        """Compose the maps along a groupoid word, rightmost letter first.

        ``letters`` is a Word or an iterable of (index, sign) pairs; the
        sequence is taken literally, without free reduction.
        """
        if isinstance(letters, Word):
            letters = letters.letters
        letters = tuple(letters)
        out = PartialInjection.identity_on(self.n, range(self.n))
        for g, s in letters:
            if not 0 <= g < self.k:
                raise ValueError(f"index {g} outside the family")
            m = self.maps[g] if s == 1 else self.maps[g].inverse()
            out = pinj_compose(out, m)
        return out

    def domain_fraction(self, letters) -> Fraction:
        return Fraction(len(self.evaluate(letters)), self.n) if self.n else Fraction(0)

    def trace(self, letters) -> Fraction:
        """Normalized count of fixed points inside the domain."""
        ev = self.evaluate(letters)
        fixed = sum(1 for x, y in ev.pairs if x == y)
        return Fraction(fixed, self.n) if self.n else Fraction(0)


def treeing_restrict(a: ActionApproximation,
                     supports: Sequence[Sequence[int]]) -> TreeingFamily:
    """Restrict the first len(supports) generators to the given supports."""
    if len(supports) > a.k:
        raise ValueError(f"{len(supports)} supports but only {a.k} generators")
    maps = []
    for i, sup in enumerate(supports):
        for x in sup:
            if not 0 <= x < a.n:
                raise ValueError(f"support {i}: point {x} out of range")
        maps.append(PartialInjection.from_permutation(a.approx.gens[i], sup))
    return TreeingFamily(a.n, maps)


# -- the integers-glued-over-(2,3) preset ------------------------------------


def _interleave_pair(images: List[int], c1: Sequence[int], c2: Sequence[int],
                     offset: int):
    """Square root of the union of two equal-length cycles: interleave them."""
    ln = len(c1)
    for t in range(ln):
        images[c1[t]] = c2[(t + offset) % ln]
        images[c2[(t + offset) % ln]] = c1[(t + 1) % ln]


def _interleave_triple(images: List[int], c1, c2, c3, o1: int, o2: int):
    """Cube root of the union of three equal-length cycles."""
    ln = len(c1)
    for t in range(ln):
        images[c1[t]] = c2[(t + o1) % ln]
        images[c2[(t + o1) % ln]] = c3[(t + o1 + o2) % ln]
        images[c3[(t + o1 + o2) % ln]] = c1[(t + 1) % ln]


def square_root_of_blocks(n: int, m: int, rng: random.Random) -> Permutation:
    """A permutation s with s^2 equal to the product of the canonical
    m-cycles on consecutive blocks; built by randomly pairing blocks."""
    t = n // m
    if n % m or t % 2:
        raise ValueError("need n = m * t with t even")
    blocks = [[b * m + i for i in range(m)] for b in range(t)]
    order = list(range(t))
    rng.shuffle(order)
    images = [0] * n
    for idx in range(0, t, 2):
        _interleave_pair(images, blocks[order[idx]], blocks[order[idx + 1]],
                         rng.randrange(m))
    return Permutation(images)


def cube_root_of_blocks(n: int, m: int, rng: random.Random) -> Permutation:
    """A permutation s with s^3 equal to the product of the canonical
    m-cycles; blocks are grouped into random triples where possible and the
    rest take the in-block root (requires gcd(m, 3) = 1)."""
    t = n // m
    if n % m:
        raise ValueError("need n = m * t")
    if math.gcd(m, 3) != 1 and t % 3:
        raise ValueError("need gcd(m,3)=1 or t divisible by 3")
    blocks = [[b * m + i for i in range(m)] for b in range(t)]
    order = list(range(t))
    rng.shuffle(order)
    triples = rng.randint(0, t // 3) if math.gcd(m, 3) == 1 else t // 3
    images = [0] * n
    pos = 0
    for _ in range(triples):
        b1, b2, b3 = order[pos], order[pos + 1], order[pos + 2]
        _interleave_triple(images, blocks[b1], blocks[b2], blocks[b3],
                           rng.randrange(m), rng.randrange(m))
        pos += 3
    k_inv = pow(3, -1, m) if math.gcd(m, 3) == 1 else None
    for idx in order[pos:]:
        blk = blocks[idx]
        for i in range(m):
            images[blk[i]] = blk[(i + k_inv) % m]
    return Permutation(images)


def block_cycles(n: int, m: int) -> Permutation:
    """The product of m-cycles on consecutive blocks (the shared subgroup image)."""
    if n % m:
        raise ValueError("need m | n")
    return Permutation([x - x % m + (x % m + 1) % m for x in range(n)])


def z_amalgam_23_preset(n: int, seed: int, m: int = 16,
                        depth: int = 2) -> AmalgamResult:
    """Two integer actions glued over the subgroup generated by the squared
    left generator = the cubed right generator.

    Both factors are built from the same block-cycle permutation tau: the
    left generator is a seeded random square root of tau, the right a seeded
    random cube root, so the subgroup images agree exactly and the glue
    reports zero residual.
    """
    rng = random.Random(seed)
    s1 = square_root_of_blocks(n, m, rng)
    s2 = cube_root_of_blocks(n, m, rng)
    labeling = DyadicLabeling.balanced(n, depth)
    left = ActionApproximation(
        SoficApproximation(GroupSpec.integer(), n, [s1], seed=seed), labeling)
    right = ActionApproximation(
        SoficApproximation(GroupSpec.integer(), n, [s2], seed=seed), labeling)
    return amalgam_glue(left, right, [Word.gen(0, 2)], [Word.gen(0, 3)])
