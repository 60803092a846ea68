"""Local statistics of labeled actions: word balls, neighborhood classes,
class distributions, analytic shift oracles and the verification suite.

A radius-r neighborhood of a point is encoded canonically as the quotient of
the word ball W_r (all reduced words of length <= r in r generators) by the
point-collision pattern, together with the level-r labels of the class
representatives.  For total actions every vertex has exactly one out-edge
per color, so this quotient IS the rooted edge-colored vertex-labeled graph:
no isomorphism search is needed and encodings collide exactly when the
neighborhoods are isomorphic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .approx import ActionApproximation, SoficApproximation
from .bernoulli import BernoulliApproximation
from .groups import GroupSpec, Word, reduced_words
from .perms import Permutation, compose
from .util import run_chunks, text_salt

Z99 = 2.5758293035489004  # two-sided 99% normal quantile


class WordBall:
    """Reduced words of length <= r in the first r generators, in canonical
    order (length, then lexicographic); index 0 is the empty word."""

    def __init__(self, radius: int):
        self.radius = radius
        self.words = tuple(reduced_words(radius, radius))
        self.index = {w.letters: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __repr__(self) -> str:
        return f"WordBall(r={self.radius}, size={len(self.words)})"


def enumerate_words(r: int) -> WordBall:
    return WordBall(r)


@dataclass(frozen=True)
class NeighborhoodClass:
    """Canonical encoding of a rooted r-neighborhood.

    ``classes[i]`` is the smallest word index with the same image point as
    word i (or -1 if the image is undefined, for partial actions only);
    ``labels`` lists the level-r label of each defined class representative
    in ascending representative order.
    """
    radius: int
    classes: Tuple[int, ...]
    labels: Tuple[int, ...]

    def encode(self) -> str:
        cls = ",".join("u" if c < 0 else str(c) for c in self.classes)
        lab = ",".join(str(x) for x in self.labels)
        return f"{self.radius};{cls};{lab}"

    @classmethod
    def parse(cls, text: str) -> "NeighborhoodClass":
        try:
            r_s, cls_s, lab_s = text.split(";")
            classes = tuple(-1 if t == "u" else int(t)
                            for t in cls_s.split(",")) if cls_s else ()
            labels = tuple(int(t) for t in lab_s.split(",")) if lab_s else ()
            return cls(int(r_s), classes, labels)
        except Exception as exc:
            raise ValueError(f"bad neighborhood encoding {text!r}") from exc


def _ball_permutations(approx: SoficApproximation, ball: WordBall,
                       pad: bool) -> List[Permutation]:
    """Evaluate every ball word, reusing length-(L-1) prefixes."""
    r = ball.radius
    if approx.k < r and not pad:
        raise ValueError(f"action has {approx.k} generators, radius {r} needs "
                         f"{r}; pass pad=True to pad with identities")
    ident = Permutation.identity(approx.n)

    def letter_perm(g: int, s: int) -> Permutation:
        if g >= approx.k:
            return ident
        return approx.gens[g] if s == 1 else approx.gen_inverse(g)

    perms: List[Permutation] = [ident] * len(ball.words)
    for i, w in enumerate(ball.words):
        if not w.letters:
            continue
        prefix = ball.index[w.letters[:-1]]
        g, s = w.letters[-1]
        perms[i] = compose(perms[prefix], letter_perm(g, s))
    return perms


def _classify(vertex_values: Sequence) -> Tuple[Tuple[int, ...], List[int]]:
    """Class vector plus the list of representative word indices."""
    first: Dict = {}
    classes = []
    reps = []
    for i, v in enumerate(vertex_values):
        j = first.setdefault(v, i)
        classes.append(j)
        if j == i:
            reps.append(i)
    return tuple(classes), reps


def neighborhood(action: ActionApproximation, x: int, r: int,
                 pad: bool = False) -> NeighborhoodClass:
    """The canonical r-neighborhood class of a point."""
    if action.labeling.depth < r:
        raise ValueError(f"labeling depth {action.labeling.depth} < radius {r}")
    ball = WordBall(r)
    perms = _ball_permutations(action.approx, ball, pad)
    points = [p[x] for p in perms]
    classes, reps = _classify(points)
    labels = tuple(action.labeling.level_label(points[i], r) for i in reps)
    return NeighborhoodClass(r, classes, labels)


class LocalStats:
    """A probability distribution over neighborhood-class encodings."""

    def __init__(self, radius: int, masses: Dict[str, Union[Fraction, float]],
                 mode: str = "exact", n: int = 0, samples: int = 0,
                 seed: Optional[int] = None,
                 halfwidths: Optional[Dict[str, float]] = None):
        self.radius = radius
        self.masses = dict(masses)
        self.mode = mode
        self.n = n
        self.samples = samples
        self.seed = seed
        self.halfwidths = dict(halfwidths) if halfwidths else {}

    def total(self):
        return sum(self.masses.values())

    def support(self):
        return sorted(self.masses)

    def __len__(self) -> int:
        return len(self.masses)

    def __getitem__(self, enc: str):
        return self.masses.get(enc, Fraction(0))

    def __repr__(self) -> str:
        return (f"LocalStats(r={self.radius}, classes={len(self.masses)}, "
                f"mode={self.mode})")


def stats_distance(s1: LocalStats, s2: LocalStats):
    """(sup-norm, total-variation) over the union of realized classes."""
    if s1.radius != s2.radius:
        raise ValueError(f"radius mismatch: {s1.radius} vs {s2.radius}")
    zero = Fraction(0)
    sup, tv = zero, zero
    for key in set(s1.masses) | set(s2.masses):
        d = abs(s1.masses.get(key, zero) - s2.masses.get(key, zero))
        sup = max(sup, d)
        tv += d
    return sup, tv / 2


def _action_stats_exact(action: ActionApproximation, r: int,
                        pad: bool) -> LocalStats:
    if action.labeling.depth < r:
        raise ValueError(f"labeling depth {action.labeling.depth} < radius {r}")
    ball = WordBall(r)
    perms = _ball_permutations(action.approx, ball, pad)
    images = [p.images for p in perms]
    level = [action.labeling.level_label(y, r) for y in range(action.n)]
    counts: Dict[str, int] = {}
    for x in range(action.n):
        points = [im[x] for im in images]
        classes, reps = _classify(points)
        labels = tuple(level[points[i]] for i in reps)
        enc = NeighborhoodClass(r, classes, labels).encode()
        counts[enc] = counts.get(enc, 0) + 1
    masses = {enc: Fraction(c, action.n) for enc, c in counts.items()}
    return LocalStats(r, masses, "exact", n=action.n)


def _action_stats_sampled(action: ActionApproximation, r: int, samples: int,
                          seed: int, pad: bool) -> LocalStats:
    ball = WordBall(r)
    perms = _ball_permutations(action.approx, ball, pad)
    images = [p.images for p in perms]
    level = [action.labeling.level_label(y, r) for y in range(action.n)]
    n = action.n
    salt = text_salt(f"action-stats:{r}")

    def task(rng: random.Random, count: int) -> Dict[str, int]:
        local: Dict[str, int] = {}
        for _ in range(count):
            x = rng.randrange(n)
            points = [im[x] for im in images]
            classes, reps = _classify(points)
            labels = tuple(level[points[i]] for i in reps)
            enc = NeighborhoodClass(r, classes, labels).encode()
            local[enc] = local.get(enc, 0) + 1
        return local

    counts: Dict[str, int] = {}
    for chunk in run_chunks(samples, seed, salt, task):
        for enc, c in chunk.items():
            counts[enc] = counts.get(enc, 0) + c
    masses = {enc: c / samples for enc, c in counts.items()}
    hw = {enc: Z99 * (p * (1 - p) / samples) ** 0.5 for enc, p in masses.items()}
    return LocalStats(r, masses, "sampled", n=action.n, samples=samples,
                      seed=seed, halfwidths=hw)


def _bernoulli_label_columns(b: BernoulliApproximation, r: int):
    if b.alphabet != 2:
        raise ValueError("neighborhood labels require alphabet 2 "
                         "(dyadic label structure)")
    return [b.inverse_images(w) for w in b.label_elements(r)]


def _bernoulli_stats_exact(b: BernoulliApproximation, r: int,
                           pad: bool) -> LocalStats:
    """Exact class distribution of the extended action.

    The group moves only the base point, so for fixed xi the class vector is
    determined and the labels depend on the configuration through finitely
    many coordinates; enumerating those coordinates is exactly the
    enumeration over the configuration factor.
    """
    if b.mode != "exact":
        raise ValueError("exact statistics need an exact-mode extension")
    ball = WordBall(r)
    perms = _ball_permutations(b.base, ball, pad)
    images = [p.images for p in perms]
    h_cols = _bernoulli_label_columns(b, r)
    n = b.n
    masses: Dict[str, Fraction] = {}
    for xi in range(n):
        points = [im[xi] for im in images]
        classes, reps = _classify(points)
        coords: List[int] = []
        seen: Dict[int, int] = {}
        rep_coords = []
        for i in reps:
            per_rep = []
            for col in h_cols:
                c = col[points[i]]
                if c not in seen:
                    seen[c] = len(coords)
                    coords.append(c)
                per_rep.append(seen[c])
            rep_coords.append(per_rep)
        d = len(coords)
        weight = Fraction(1, n << d)
        for assign in range(1 << d):
            labels = tuple(
                1 + sum(((assign >> ci) & 1) << (r - 1 - j)
                        for j, ci in enumerate(per_rep))
                for per_rep in rep_coords)
            enc = NeighborhoodClass(r, classes, labels).encode()
            masses[enc] = masses.get(enc, Fraction(0)) + weight
    return LocalStats(r, masses, "exact", n=n)


def _bernoulli_stats_sampled(b: BernoulliApproximation, r: int, samples: int,
                             seed: int, pad: bool) -> LocalStats:
    ball = WordBall(r)
    perms = _ball_permutations(b.base, ball, pad)
    images = [p.images for p in perms]
    h_cols = _bernoulli_label_columns(b, r)
    n = b.n
    salt = text_salt(f"bernoulli-stats:{r}")

    def task(rng: random.Random, count: int) -> Dict[str, int]:
        local: Dict[str, int] = {}
        for _ in range(count):
            xi = rng.randrange(n)
            points = [im[xi] for im in images]
            classes, reps = _classify(points)
            drawn: Dict[int, int] = {}
            labels = []
            for i in reps:
                lab = 1
                y = points[i]
                for j, col in enumerate(h_cols):
                    c = col[y]
                    bit = drawn.get(c)
                    if bit is None:
                        bit = rng.getrandbits(1)
                        drawn[c] = bit
                    lab += bit << (r - 1 - j)
                labels.append(lab)
            enc = NeighborhoodClass(r, classes, tuple(labels)).encode()
            local[enc] = local.get(enc, 0) + 1
        return local

    counts: Dict[str, int] = {}
    for chunk in run_chunks(samples, seed, salt, task):
        for enc, c in chunk.items():
            counts[enc] = counts.get(enc, 0) + c
    masses = {enc: c / samples for enc, c in counts.items()}
    hw = {enc: Z99 * (p * (1 - p) / samples) ** 0.5 for enc, p in masses.items()}
    return LocalStats(r, masses, "sampled", n=n, samples=samples, seed=seed,
                      halfwidths=hw)


StatSource = Union[ActionApproximation, BernoulliApproximation]


def local_stats(source: StatSource, r: int, mode: str = "exact",
                samples: int = 0, seed: Optional[int] = None,
                pad: bool = False) -> LocalStats:
    """Distribution of neighborhood classes over all points (exact) or over
    seeded uniform samples."""
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and (samples < 1 or seed is None):
        raise ValueError("sampled mode needs a sample count and a seed")
    if isinstance(source, BernoulliApproximation):
        if mode == "exact":
            return _bernoulli_stats_exact(source, r, pad)
        return _bernoulli_stats_sampled(source, r, samples, seed, pad)
    if mode == "exact":
        return _action_stats_exact(source, r, pad)
    return _action_stats_sampled(source, r, samples, seed, pad)


# -- partial actions (treeings) ----------------------------------------------


def treeing_neighborhood(family, labeling, x: int, r: int) -> NeighborhoodClass:
    """Neighborhood class of a partial action; undefined images are marked."""
    if labeling.depth < r:
        raise ValueError(f"labeling depth {labeling.depth} < radius {r}")
    ball = WordBall(r)
    values: List[Optional[int]] = [None] * len(ball.words)
    values[0] = x
    for i, w in enumerate(ball.words):
        if not w.letters:
            continue
        # the image under w applies the first letter last (suffix first)
        suffix = ball.index[w.letters[1:]]
        g, s = w.letters[0]
        prev = values[suffix]
        if prev is None or g >= family.k:
            values[i] = None
        else:
            m = family.maps[g] if s == 1 else family.maps[g].inverse()
            values[i] = m(prev)
    first: Dict[int, int] = {}
    classes = []
    reps = []
    for i, v in enumerate(values):
        if v is None:
            classes.append(-1)
            continue
        j = first.setdefault(v, i)
        classes.append(j)
        if j == i:
            reps.append(i)
    labels = tuple(labeling.level_label(values[i], r) for i in reps)
    return NeighborhoodClass(r, tuple(classes), labels)


# -- analytic shift oracle ----------------------------------------------------


def _element_ops(spec: GroupSpec):
    if spec.kind == "integer":
        return (lambda e: -e), (lambda a, b: a + b)
    if spec.kind == "free":
        inv = lambda e: tuple((g, -s) for g, s in reversed(e))
        mul = lambda a, b: (Word(a, reduce=False) * Word(b, reduce=False)).letters
        return inv, mul
    if spec.kind == "cyclic":
        m = spec.order
        return (lambda e: (-e) % m), (lambda a, b: (a + b) % m)
    if spec.kind == "finite-from-table":
        table = spec.table
        inv_table = spec._table_inverses()
        return (lambda e: inv_table[e]), (lambda a, b: table[a][b])
    raise ValueError(f"oracle supports integer, free and finite kinds, "
                     f"not {spec.kind!r}")


def bernoulli_oracle(spec: GroupSpec, alphabet: int, r: int,
                     budget: int = 24) -> LocalStats:
    """Exact neighborhood-class distribution targeted by extensions of the
    group's canonical bases, with the canonical cylinder labeling.

    Generators beyond the group's own are padded with the identity.  The
    collision pattern is the word-to-element fiber structure of the ball
    (the Cayley quotient; almost-every-point exact for the shift of the
    integers and free groups, and the regular-representation pattern for
    finite groups, whose true shift is not free).  The label joint law is
    enumerated exactly over the coordinate set C = {v^{-1} h_j}, which must
    stay within the budget.
    """
    if alphabet != 2:
        raise ValueError("oracle labels require alphabet 2")
    if r < 1:
        raise ValueError("radius must be >= 1")
    ball = WordBall(r)
    inv, mul = _element_ops(spec)
    elements = [spec.element_of(w.drop_generators_above(spec.k))
                for w in ball.words]
    classes, reps = _classify(elements)
    h_elems = [spec.element_of(w) for w in spec.enumerate_elements(r)]
    coords: List = []
    seen: Dict = {}
    rep_coords = []
    for i in reps:
        per_rep = []
        gv_inv = inv(elements[i])
        for h in h_elems:
            c = mul(gv_inv, h)
            if c not in seen:
                seen[c] = len(coords)
                coords.append(c)
            per_rep.append(seen[c])
        rep_coords.append(per_rep)
    d = len(coords)
    if d > budget:
        raise ValueError(f"coordinate budget exceeded: |C|={d} > {budget}")
    masses: Dict[str, Fraction] = {}
    weight = Fraction(1, 1 << d)
    for assign in range(1 << d):
        labels = tuple(
            1 + sum(((assign >> ci) & 1) << (r - 1 - j)
                    for j, ci in enumerate(per_rep))
            for per_rep in rep_coords)
        enc = NeighborhoodClass(r, classes, labels).encode()
        masses[enc] = masses.get(enc, Fraction(0)) + weight
    return LocalStats(r, masses, "exact", n=0)


# -- verification -------------------------------------------------------------


@dataclass
class ClassCheck:
    encoding: str
    candidate_mass: float
    target_mass: float
    halfwidth: float
    label_violations: float
    collision_violations: float
    separation_violations: float


@dataclass
class ElVerifyReport:
    passed: bool
    radius: int
    epsilon: float
    sup_distance: float
    tv_distance: float
    mode: str
    classes: Tuple[ClassCheck, ...]
    realized_classes: int
    ball_size: int
    epsilon1_budget: float
    notes: Tuple[str, ...] = ()

    def to_text(self) -> str:
        lines = [f"el-verify radius={self.radius} mode={self.mode} "
                 f"epsilon={self.epsilon}"]
        lines.append(f"result {'PASS' if self.passed else 'FAIL'}")
        lines.append(f"sup_distance {self.sup_distance}")
        lines.append(f"tv_distance {self.tv_distance}")
        lines.append(f"realized_classes {self.realized_classes}")
        lines.append(f"ball_size {self.ball_size}")
        lines.append(
            f"epsilon1_budget {self.epsilon1_budget}  "
            f"(largest eps1 with 2*U*(|W|+2|W|^2)*eps1 < eps)")
        lines.append("classes:")
        for c in self.classes:
            lines.append(
                f"  {c.encoding} cand={c.candidate_mass} target={c.target_mass} "
                f"hw={c.halfwidth:.6g} viol=({c.label_violations},"
                f"{c.collision_violations},{c.separation_violations})")
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines) + "\n"


def _recheck_action_classes(action: ActionApproximation, r: int,
                            pad: bool) -> Dict[str, Tuple[int, int, int, int]]:
    """Per-class (points, label-, collision-, separation-violations) by
    re-deriving every point's conditions against its own class pattern."""
    ball = WordBall(r)
    perms = _ball_permutations(action.approx, ball, pad)
    images = [p.images for p in perms]
    level = [action.labeling.level_label(y, r) for y in range(action.n)]
    out: Dict[str, List[int]] = {}
    for x in range(action.n):
        points = [im[x] for im in images]
        classes, reps = _classify(points)
        labels = tuple(level[points[i]] for i in reps)
        enc = NeighborhoodClass(r, classes, labels).encode()
        rep_pos = {rep: t for t, rep in enumerate(reps)}
        label_bad = any(level[points[i]] != labels[rep_pos[classes[i]]]
                        for i in range(len(points)))
        collision_bad = any(points[i] != points[classes[i]]
                            for i in range(len(points)))
        separation_bad = any(
            points[i] == points[j] and classes[i] != classes[j]
            for i in range(len(points)) for j in range(i + 1, len(points)))
        rec = out.setdefault(enc, [0, 0, 0, 0])
        rec[0] += 1
        rec[1] += label_bad
        rec[2] += collision_bad
        rec[3] += separation_bad
    return {k: tuple(v) for k, v in out.items()}


def el_verify(candidate, target: LocalStats, r: int, epsilon,
              mode: str = "exact", samples: int = 0,
              seed: Optional[int] = None, pad: bool = False) -> ElVerifyReport:
    """Compare candidate local statistics with target statistics.

    PASS iff the sup distance is below epsilon; in sampled mode the per-class
    99% binomial half-width is added to the tolerance.  The report itemizes,
    per realized class, the fraction of its points violating the label,
    collision and separation conditions of their own class (zero for total
    actions, where the class is derived from exactly these conditions), and
    the epsilon-budget arithmetic for the realized class count.
    """
    if target.radius != r:
        raise ValueError(f"radius mismatch: target {target.radius} vs {r}")
    notes: List[str] = []
    if isinstance(candidate, LocalStats):
        cand = candidate
        if cand.radius != r:
            raise ValueError(f"radius mismatch: candidate {cand.radius} vs {r}")
        recheck = None
        notes.append("candidate given as precomputed statistics; "
                     "per-point condition checks unavailable")
    else:
        cand = local_stats(candidate, r, mode=mode, samples=samples,
                           seed=seed, pad=pad)
        if isinstance(candidate, ActionApproximation) and mode == "exact":
            recheck = _recheck_action_classes(candidate, r, pad)
        else:
            recheck = None
            notes.append("classes are derived point by point, so the label, "
                         "collision and separation conditions hold by "
                         "construction (violations reported as 0)")

    sup, tv = stats_distance(cand, target)
    keys = sorted(set(cand.masses) | set(target.masses))
    checks = []
    passed = True
    for key in keys:
        cm = cand.masses.get(key, Fraction(0))
        tm = target.masses.get(key, Fraction(0))
        hw = cand.halfwidths.get(key, 0.0)
        diff = abs(cm - tm)
        if cand.mode == "sampled":
            if diff >= epsilon + hw:
                passed = False
        if recheck is not None and key in recheck:
            tot, lab, col, sep = recheck[key]
            viol = (lab / tot, col / tot, sep / tot)
        else:
            viol = (0.0, 0.0, 0.0)
        checks.append(ClassCheck(key, float(cm), float(tm), float(hw), *viol))
    if cand.mode != "sampled":
        passed = sup < epsilon
    realized = len(cand.masses)
    w = len(WordBall(r).words)
    denom = 2 * max(realized, 1) * (w + 2 * w * w)
    eps1 = float(epsilon) / denom
    return ElVerifyReport(passed, r, float(epsilon), float(sup), float(tv),
                          cand.mode, tuple(checks), realized, w, eps1,
                          tuple(notes))
