"""Bernoulli extensions: the product of a base approximation with symbol space.

The extended point set is Y x Z with Y = {0..n-1} and Z = A^Y (all symbol
configurations), so it has n * a^n points and is never materialized: the
group acts on the first factor only, and every query is answered either by
exact per-configuration counting (equivalent to full enumeration of Z) or
by uniform i.i.d. sampling of configurations with a recorded seed.

Cylinder events constrain the configuration at the points eval(g_j)^{-1}(xi);
their exact measures obey |trace - a^(-m)| <= 1 - (injectivity fraction).
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .approx import SoficApproximation, evaluate_word
from .groups import Word
from .util import run_chunks, text_salt

DEFAULT_EXACT_BUDGET = 16 * 2 ** 16  # n <= 16 at alphabet 2


class CylinderSpec:
    """Group elements (as words) and required symbols, one per element."""

    def __init__(self, elements: Sequence[Word], symbols: Sequence[int]):
        self.elements = tuple(elements)
        self.symbols = tuple(symbols)
        if len(self.elements) != len(self.symbols):
            raise ValueError("elements and symbols differ in length")

    @property
    def m(self) -> int:
        return len(self.elements)

    def key(self) -> str:
        return ";".join(f"{w.to_text()}={i}"
                        for w, i in zip(self.elements, self.symbols))

    def __repr__(self) -> str:
        return f"CylinderSpec({self.key()!r})"


class CylinderTrace:
    """Result of a cylinder-measure query."""

    def __init__(self, trace, injectivity_fraction: Fraction, m: int,
                 alphabet: int, mode: str, samples: int = 0,
                 seed: Optional[int] = None):
        self.trace = trace
        self.injectivity_fraction = injectivity_fraction
        self.m = m
        self.alphabet = alphabet
        self.mode = mode
        self.samples = samples
        self.seed = seed

    @property
    def ideal(self) -> Fraction:
        return Fraction(1, self.alphabet ** self.m)

    @property
    def error_bound(self) -> Fraction:
        """|trace - a^(-m)| <= 1 - injectivity fraction (exact mode)."""
        return 1 - self.injectivity_fraction

    def __repr__(self) -> str:
        return (f"CylinderTrace(trace={self.trace}, "
                f"injectivity={self.injectivity_fraction}, m={self.m})")


class BernoulliApproximation:
    """Extension of a base approximation by an alphabet-valued configuration.

    mode "exact" requires n * a^n within the configured budget (default
    16 * 2^16 extended points); mode "sampled" carries a sample count and
    seed, and equal seeds reproduce identical statistics.
    """

    def __init__(self, base: SoficApproximation, alphabet: int = 2,
                 mode: str = "exact", samples: int = 0,
                 seed: Optional[int] = None,
                 exact_budget: int = DEFAULT_EXACT_BUDGET):
        if alphabet < 2:
            raise ValueError("alphabet size must be >= 2")
        if mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "exact":
            if base.n * alphabet ** base.n > exact_budget:
                raise ValueError(
                    f"exact mode budget exceeded: {base.n} * {alphabet}^{base.n} "
                    f"> {exact_budget} extended points (raise exact_budget to force)")
        else:
            if samples < 1:
                raise ValueError("sampled mode needs a positive sample count")
            if seed is None:
                raise ValueError("sampled mode needs a seed")
        self.base = base
        self.alphabet = alphabet
        self.mode = mode
        self.samples = samples
        self.seed = seed
        self.exact_budget = exact_budget
        self._inv_cache: Dict[Tuple, Tuple[int, ...]] = {}

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def extended_size(self) -> int:
        return self.base.n * self.alphabet ** self.base.n

    def __repr__(self) -> str:
        return (f"BernoulliApproximation(n={self.n}, a={self.alphabet}, "
                f"mode={self.mode})")

    # -- coordinate machinery ----------------------------------------------

    def inverse_images(self, w: Word) -> Tuple[int, ...]:
        """The tuple eval(w)^{-1} used as a configuration-coordinate map."""
        key = w.letters
        if key not in self._inv_cache:
            self._inv_cache[key] = evaluate_word(self.base, w).inverse().images
        return self._inv_cache[key]

    def _columns(self, c: CylinderSpec,
                 check_distinct: bool = True) -> List[Tuple[int, ...]]:
        for w, s in zip(c.elements, c.symbols):
            if not 0 <= s < self.alphabet:
                raise ValueError(f"symbol {s} outside alphabet of size {self.alphabet}")
        perms = [evaluate_word(self.base, w) for w in c.elements]
        if check_distinct and len({p.images for p in perms}) != len(perms):
            raise ValueError("malformed cylinder: elements coincide after evaluation")
        return [p.inverse().images for p in perms]

    def label_elements(self, depth: int) -> List[Word]:
        """First `depth` group elements (identity first) whose configuration
        coordinates define the canonical cylinder labeling."""
        return self.base.spec.enumerate_elements(depth)

    # -- cylinder traces -----------------------------------------------------

    def injectivity_fraction(self, c: CylinderSpec) -> Fraction:
        cols = self._columns(c)
        if not cols:
            return Fraction(1)
        good = sum(1 for xi in range(self.n)
                   if len({col[xi] for col in cols}) == len(cols))
        return Fraction(good, self.n)

    def cylinder_trace(self, c: CylinderSpec) -> CylinderTrace:
        inj = self.injectivity_fraction(c)
        if self.mode == "exact":
            trace = self._exact_cylinder_trace(c)
            return CylinderTrace(trace, inj, c.m, self.alphabet, "exact")
        hits = self._sampled_cylinder_hits(c)
        return CylinderTrace(hits / self.samples, inj, c.m, self.alphabet,
                             "sampled", self.samples, self.seed)

    def _exact_cylinder_trace(self, c: CylinderSpec) -> Fraction:
        """Sum over xi of the exact configuration count satisfying the
        constraints (a^(n-d) for d distinct consistent coordinates)."""
        cols = self._columns(c)
        a, n = self.alphabet, self.n
        total = 0
        for xi in range(n):
            need: Dict[int, int] = {}
            ok = True
            for col, sym in zip(cols, c.symbols):
                y = col[xi]
                if need.setdefault(y, sym) != sym:
                    ok = False
                    break
            if ok:
                total += a ** (n - len(need))
        return Fraction(total, n * a ** n)

    def _sampled_cylinder_hits(self, c: CylinderSpec) -> int:
        cols = self._columns(c)
        symbols = c.symbols
        a, n = self.alphabet, self.n
        salt = text_salt("cylinder:" + c.key())

        def task(rng: random.Random, count: int) -> int:
            hits = 0
            for _ in range(count):
                xi = rng.randrange(n)
                drawn: Dict[int, int] = {}
                ok = True
                for col, sym in zip(cols, symbols):
                    y = col[xi]
                    val = drawn.get(y)
                    if val is None:
                        val = rng.randrange(a)
                        drawn[y] = val
                    if val != sym:
                        ok = False
                        break
                hits += ok
            return hits

        return sum(run_chunks(self.samples, self.seed, salt, task))

    # -- equivariance ---------------------------------------------------------

    def shifted_cylinder(self, g: Word, c: CylinderSpec) -> CylinderSpec:
        """The cylinder on the group products g*g_j (group normal forms)."""
        spec = self.base.spec
        return CylinderSpec([spec.multiply(g, w) for w in c.elements], c.symbols)

    def equivariance_defect(self, g: Word, c: CylinderSpec):
        """Normalized measure of the symmetric difference between the
        g-conjugated cylinder and the shifted cylinder; exactly 0 when the
        base is a homomorphism on the words involved."""
        if c.m == 0:
            return Fraction(0) if self.mode == "exact" else 0.0
        shifted = self.shifted_cylinder(g, c)
        cols_t = self._columns(c)
        g_inv = self.inverse_images(g)
        cols_t = [tuple(col[y] for y in g_inv) for col in cols_t]
        # the shifted side may degenerate under a defective base; its measure
        # is still well defined, so skip the distinctness check there
        cols_s = self._columns(shifted, check_distinct=False)
        if self.mode == "exact":
            return self._exact_symmetric_difference(cols_t, cols_s, c.symbols)
        return self._sampled_symmetric_difference(cols_t, cols_s, c.symbols,
                                                  g, c)

    def _exact_symmetric_difference(self, cols_t, cols_s, symbols) -> Fraction:
        a, n = self.alphabet, self.n

        def count(constraints) -> int:
            need: Dict[int, int] = {}
            for y, sym in constraints:
                if need.setdefault(y, sym) != sym:
                    return 0
            return a ** (n - len(need))

        total = 0
        for xi in range(n):
            ct = [(col[xi], s) for col, s in zip(cols_t, symbols)]
            cs = [(col[xi], s) for col, s in zip(cols_s, symbols)]
            total += count(ct) + count(cs) - 2 * count(ct + cs)
        return Fraction(total, n * a ** n)

    def _sampled_symmetric_difference(self, cols_t, cols_s, symbols, g, c) -> float:
        a, n = self.alphabet, self.n
        salt = text_salt(f"equivariance:{g.to_text()}:{c.key()}")

        def task(rng: random.Random, count: int) -> int:
            hits = 0
            for _ in range(count):
                xi = rng.randrange(n)
                drawn: Dict[int, int] = {}

                def member(cols) -> bool:
                    for col, sym in zip(cols, symbols):
                        y = col[xi]
                        val = drawn.get(y)
                        if val is None:
                            val = rng.randrange(a)
                            drawn[y] = val
                        if val != sym:
                            return False
                    return True

                hits += member(cols_t) != member(cols_s)
            return hits

        return sum(run_chunks(self.samples, self.seed, salt, task)) / self.samples


def bernoulli_extend(base: SoficApproximation, alphabet: int = 2,
                     mode: str = "exact", samples: int = 0,
                     seed: Optional[int] = None,
                     exact_budget: int = DEFAULT_EXACT_BUDGET) -> BernoulliApproximation:
    return BernoulliApproximation(base, alphabet, mode, samples, seed, exact_budget)


def descriptor_approximation(b: BernoulliApproximation) -> SoficApproximation:
    """The base approximation tagged with the extension parameters, so the
    serialized file reconstructs the extension on load."""
    tag = (f"bernoulli alphabet={b.alphabet} mode={b.mode} "
           f"samples={b.samples} seed={b.seed}")
    return SoficApproximation(b.base.spec, b.base.n, b.base.gens,
                              seed=b.base.seed, gen_names=b.base.gen_names,
                              provenance=b.base.provenance + (tag,))


def cylinder_trace(b: BernoulliApproximation, c: CylinderSpec) -> CylinderTrace:
    return b.cylinder_trace(c)


def equivariance_defect(b: BernoulliApproximation, g: Word, c: CylinderSpec):
    return b.equivariance_defect(g, c)


def generalized_bernoulli(base: SoficApproximation, multiplicity: int,
                          alphabet: int = 2, mode: str = "exact",
                          samples: int = 0, seed: Optional[int] = None,
                          exact_budget: int = DEFAULT_EXACT_BUDGET) -> BernoulliApproximation:
    """Shift on configurations over (group x multiplicity) index set; equals
    the plain extension with alphabet a^multiplicity."""
    if multiplicity < 1:
        raise ValueError("multiplicity must be >= 1")
    return BernoulliApproximation(base, alphabet ** multiplicity, mode,
                                  samples, seed, exact_budget)
