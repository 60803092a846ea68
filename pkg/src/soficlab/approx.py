"""Sofic approximations: generator permutations, defect metrics, amplification.

A :class:`SoficApproximation` assigns one permutation per generator of a
:class:`~soficlab.groups.GroupSpec`.  Words evaluate through the generators
(exactly multiplicative on freely reduced concatenation); the quality of an
approximation is measured by relator Hamming defects and by the fixed-point
fractions (normalized traces) of nontrivial words.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .groups import GroupSpec, Word, reduced_words
from .perms import (DyadicLabeling, Permutation, compose, fixed_fraction,
                    normalized_hamming)


class SoficApproximation:
    """Generator permutations on n points for a group spec."""

    def __init__(self, spec: GroupSpec, n: int, gens: Sequence[Permutation],
                 seed: Optional[int] = None,
                 gen_names: Optional[Sequence[str]] = None,
                 provenance: Sequence[str] = ()):
        gens = tuple(gens)
        if len(gens) != spec.k:
            raise ValueError(f"expected {spec.k} generators, got {len(gens)}")
        for g in gens:
            if g.n != n:
                raise ValueError(f"generator on {g.n} points, expected {n}")
        self.spec = spec
        self.n = n
        self.gens = gens
        self.seed = seed
        self.gen_names = tuple(gen_names) if gen_names is not None else None
        self.provenance = tuple(provenance)
        self._inverses: Dict[int, Permutation] = {}

    @property
    def k(self) -> int:
        return self.spec.k

    def gen_inverse(self, i: int) -> Permutation:
        if i not in self._inverses:
            self._inverses[i] = self.gens[i].inverse()
        return self._inverses[i]

    def evaluate(self, w: Word) -> Permutation:
        return evaluate_word(self, w)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SoficApproximation) and self.spec == other.spec
                and self.n == other.n and self.gens == other.gens)

    def __repr__(self) -> str:
        return f"SoficApproximation({self.spec!r}, n={self.n})"


def evaluate_word(a: SoficApproximation, w: Word) -> Permutation:
    """Product of generator permutations in word order (rightmost applied first)."""
    if w.max_generator() >= a.k:
        raise ValueError(f"word uses generator {w.max_generator() + 1}, "
                         f"approximation has {a.k}")
    out = Permutation.identity(a.n)
    for g, s in w.letters:
        p = a.gens[g] if s == 1 else a.gen_inverse(g)
        out = compose(out, p)
    return out


class DefectReport:
    """Per-relator Hamming defects and a per-word trace table over a ball."""

    def __init__(self, radius: int,
                 relator_defects: Sequence[Tuple[Word, Fraction]],
                 word_traces: Sequence[Tuple[Word, Fraction]]):
        self.radius = radius
        self.relator_defects = tuple(relator_defects)
        self.word_traces = tuple(word_traces)

    @property
    def max_relator_defect(self) -> Fraction:
        return max((d for _, d in self.relator_defects), default=Fraction(0))

    @property
    def mean_relator_defect(self) -> Fraction:
        if not self.relator_defects:
            return Fraction(0)
        return sum(d for _, d in self.relator_defects) / len(self.relator_defects)

    @property
    def max_word_trace(self) -> Fraction:
        return max((t for _, t in self.word_traces), default=Fraction(0))

    @property
    def mean_word_trace(self) -> Fraction:
        if not self.word_traces:
            return Fraction(0)
        return sum(t for _, t in self.word_traces) / len(self.word_traces)

    def to_text(self) -> str:
        lines = [f"defect report (radius {self.radius})"]
        lines.append(f"relators {len(self.relator_defects)}")
        for w, d in self.relator_defects:
            lines.append(f"relator {w.to_text()} defect {d}")
        lines.append(f"words {len(self.word_traces)}")
        for w, t in self.word_traces:
            lines.append(f"word {w.to_text()} trace {t}")
        lines.append(f"max_relator_defect {self.max_relator_defect}")
        lines.append(f"mean_relator_defect {self.mean_relator_defect}")
        lines.append(f"max_word_trace {self.max_word_trace}")
        lines.append(f"mean_word_trace {self.mean_word_trace}")
        return "\n".join(lines) + "\n"


def defect_report(a: SoficApproximation, radius: int,
                  nontrivial_words: Optional[Iterable[Word]] = None) -> DefectReport:
    """Relator defects plus fixed fractions of nontrivial words in the ball.

    The ball is over the approximation's own generator set.  Which words
    count as nontrivial is decided by the spec (table/exponent/reduction);
    for presented groups the caller supplies the list.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    ident = Permutation.identity(a.n)
    rel = [(w, normalized_hamming(evaluate_word(a, w), ident))
           for w in a.spec.relators]
    if nontrivial_words is not None:
        candidates = [(w, True) for w in nontrivial_words]
    else:
        candidates = [(w, a.spec.word_is_nontrivial(w))
                      for w in reduced_words(a.k, radius) if w]
    traces = [(w, fixed_fraction(evaluate_word(a, w)))
              for w, nontriv in candidates if nontriv]
    return DefectReport(radius, rel, traces)


def amplify(a: SoficApproximation, r: int) -> SoficApproximation:
    """Tensor with an identity on r points: (x, j) -> (g(x), j), index x*r+j.

    Fixed fractions of every word are preserved exactly.
    """
    if r < 1:
        raise ValueError("amplification factor must be >= 1")
    if r == 1:
        return a
    gens = []
    for g in a.gens:
        images = [0] * (a.n * r)
        for x, y in enumerate(g.images):
            base = y * r
            xr = x * r
            for j in range(r):
                images[xr + j] = base + j
        gens.append(Permutation(images))
    return SoficApproximation(a.spec, a.n * r, gens, seed=a.seed,
                              gen_names=a.gen_names,
                              provenance=a.provenance + (f"amplify {r}",))


def tensor_pair(a: SoficApproximation, b: SoficApproximation) -> SoficApproximation:
    """Diagonal product: generator i acts as (x, y) -> (g_a(x), g_b(y)).

    Point (x, y) is encoded as x*b.n + y; the fixed fraction of every word
    is the product of the factors' fixed fractions.
    """
    if a.k != b.k:
        raise ValueError(f"generator-count mismatch: {a.k} vs {b.k}")
    gens = []
    bn = b.n
    for ga, gb in zip(a.gens, b.gens):
        images = [0] * (a.n * bn)
        for x, xx in enumerate(ga.images):
            base = xx * bn
            xb = x * bn
            for y, yy in enumerate(gb.images):
                images[xb + y] = base + yy
        gens.append(Permutation(images))
    return SoficApproximation(a.spec, a.n * bn, gens,
                              provenance=a.provenance + (f"tensor n={b.n}",))


def make_base(spec: GroupSpec, n: int, seed: Optional[int] = None) -> SoficApproximation:
    """Canonical base approximations per kind.

    cyclic: disjoint order-cycles; finite-from-table: copies of the regular
    representation; free: independent seeded uniform permutations; integer:
    one n-cycle; folner-box: axis translations with wrap-around.
    """
    if n < 1:
        raise ValueError("point count must be >= 1")
    if spec.kind == "cyclic":
        m = spec.order
        if n % m:
            raise ValueError(f"n={n} is not a multiple of the cyclic order {m}")
        images = [x - x % m + (x % m + 1) % m for x in range(n)]
        return SoficApproximation(spec, n, [Permutation(images)])
    if spec.kind == "integer":
        return SoficApproximation(spec, n, [Permutation([(x + 1) % n for x in range(n)])])
    if spec.kind == "finite-from-table":
        m = len(spec.table)
        if n % m:
            raise ValueError(f"n={n} is not a multiple of the group order {m}")
        gens = []
        for g in spec.generators:
            row = spec.table[g]
            images = [x - x % m + row[x % m] for x in range(n)]
            gens.append(Permutation(images))
        return SoficApproximation(spec, n, gens)
    if spec.kind == "free":
        if seed is None:
            raise ValueError("free-kind bases are randomized; a seed is required")
        rng = random.Random(seed)
        gens = []
        for _ in range(spec.k):
            images = list(range(n))
            rng.shuffle(images)
            gens.append(Permutation(images))
        return SoficApproximation(spec, n, gens, seed=seed)
    if spec.kind == "folner-box":
        box = spec.box
        volume = 1
        for b in box:
            volume *= b
        if n != volume:
            raise ValueError(f"n={n} must equal the box volume {volume}")
        strides = []
        acc = 1
        for b in reversed(box):
            strides.append(acc)
            acc *= b
        strides.reverse()
        gens = []
        for axis, b in enumerate(box):
            stride = strides[axis]
            images = []
            for x in range(n):
                coord = (x // stride) % b
                images.append(x + stride if coord + 1 < b else x - (b - 1) * stride)
            gens.append(Permutation(images))
        return SoficApproximation(spec, n, gens)
    raise ValueError(f"no base constructor for kind {spec.kind!r}")


class ActionApproximation:
    """A sofic approximation together with a dyadic labeling (X-set structure)."""

    def __init__(self, approx: SoficApproximation, labeling: DyadicLabeling):
        if labeling.n != approx.n:
            raise ValueError(f"labeling on {labeling.n} points, "
                             f"approximation on {approx.n}")
        self.approx = approx
        self.labeling = labeling

    @property
    def n(self) -> int:
        return self.approx.n

    @property
    def k(self) -> int:
        return self.approx.k

    def evaluate(self, w: Word) -> Permutation:
        return self.approx.evaluate(w)

    def __repr__(self) -> str:
        return (f"ActionApproximation(n={self.n}, k={self.k}, "
                f"depth={self.labeling.depth})")


def amplify_action(a: ActionApproximation, r: int) -> ActionApproximation:
    """Amplify generators and lift the labeling: neighborhoods are preserved."""
    return ActionApproximation(amplify(a.approx, r), a.labeling.lift(r))


def conjugate_approximation(a: SoficApproximation, u: Permutation) -> SoficApproximation:
    """Generator-wise conjugation g -> u g u^{-1}."""
    if u.n != a.n:
        raise ValueError(f"size mismatch: {u.n} vs {a.n}")
    uinv = u.inverse()
    gens = [compose(u, compose(g, uinv)) for g in a.gens]
    return SoficApproximation(a.spec, a.n, gens, seed=a.seed,
                              gen_names=a.gen_names,
                              provenance=a.provenance + ("conjugated",))


def pad_generators(a: SoficApproximation, k: int) -> SoficApproximation:
    """Extend to k generators, the new ones acting as the identity."""
    if k <= a.k:
        return a
    extra = k - a.k
    free_pad = GroupSpec.presented(k, [w for w in a.spec.relators],
                                   abelian=False, name=f"{a.spec.name}+pad")
    gens = list(a.gens) + [Permutation.identity(a.n)] * extra
    names = None
    if a.gen_names is not None:
        names = list(a.gen_names) + [f"pad{i + 1}" for i in range(extra)]
    return SoficApproximation(free_pad, a.n, gens, seed=a.seed, gen_names=names,
                              provenance=a.provenance + (f"pad {k}",))
