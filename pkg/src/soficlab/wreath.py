"""Wreath-product approximations built over exact Bernoulli extensions.

Points are triples ((xi, eta), j): an extended Bernoulli point and a lamp
coordinate.  The shift generators act on the first factor only; the lamp
generator attached to a group element g acts on j exactly over the cylinder
{eta(eval(g)^{-1} xi) = 1} and trivially over its complement, so its trace
is (1 + fixed_fraction(lamp))/2, exactly 1/2 for the two-point flip.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from .approx import SoficApproximation
from .bernoulli import BernoulliApproximation
from .groups import GroupSpec, Word, builtin_table_spec
from .perms import Permutation, compose, normalized_hamming


def _validate_realized(b: BernoulliApproximation, f_elements: Sequence[Word]):
    if b.mode != "exact":
        raise ValueError("wreath construction requires an exact-mode extension")
    if b.alphabet != 2:
        raise ValueError("wreath construction requires alphabet 2")
    spec = b.base.spec
    elems = [spec.element_of(w) for w in f_elements]
    if len(set(elems)) != len(elems):
        raise ValueError("lamp elements must be distinct group elements")
    return list(f_elements), elems


def _u_generator(b: BernoulliApproximation, p: Permutation, m: int) -> Permutation:
    n = b.n
    code_count = 1 << n
    images = [0] * (n * code_count * m)
    for xi in range(n):
        tgt_base = p[xi] * code_count
        src_base = xi * code_count
        for eta in range(code_count):
            t = (tgt_base + eta) * m
            s = (src_base + eta) * m
            for j in range(m):
                images[s + j] = t + j
    return Permutation(images)


def _lamp_generator(b: BernoulliApproximation, g: Word,
                    lamp: Permutation) -> Permutation:
    n = b.n
    m = lamp.n
    code_count = 1 << n
    col = b.inverse_images(g)
    images = list(range(n * code_count * m))
    for xi in range(n):
        bit = 1 << col[xi]
        base = xi * code_count
        for eta in range(code_count):
            if eta & bit:
                s = (base + eta) * m
                for j in range(m):
                    images[s + j] = s + lamp[j]
    return Permutation(images)


def _conjugation_relators(base_spec: GroupSpec, elems, letter_pairs):
    """Relators u_t f_g u_t^{-1} = f_{t*g} for realized pairs (g, t*g)."""
    rel = []
    index = {e: i for i, e in enumerate(elems)}
    for t in range(base_spec.k):
        tw = Word.gen(t)
        for i, e in enumerate(elems):
            gw = base_spec.word_for_element(e)
            shifted = base_spec.element_of(base_spec.multiply(tw, gw))
            i2 = index.get(shifted)
            if i2 is None:
                continue
            for f1, f2 in letter_pairs(i, i2):
                rel.append(Word([(t, 1), (f1, 1), (t, -1), (f2, -1)]))
    return rel


def wreath_z2(b: BernoulliApproximation,
              f_elements: Sequence[Word] = (Word.empty(),)) -> SoficApproximation:
    """Lamplighter over the base group with two-point lamps.

    Output generators: the base shift generators, then one involutive lamp
    generator per requested group element.  Every lamp generator has fixed
    fraction exactly 1/2.
    """
    f_elements, elems = _validate_realized(b, f_elements)
    base_spec = b.base.spec
    k = base_spec.k
    flip = Permutation([1, 0])
    gens: List[Permutation] = [_u_generator(b, p, 2) for p in b.base.gens]
    gens += [_lamp_generator(b, g, flip) for g in f_elements]

    k_out = k + len(f_elements)
    relators = list(base_spec.relators)
    for i in range(len(f_elements)):
        relators.append(Word.gen(k + i, 2))
    for i in range(len(f_elements)):
        for j in range(i + 1, len(f_elements)):
            a, bb = Word.gen(k + i), Word.gen(k + j)
            relators.append(a * bb * a.inverse() * bb.inverse())
    relators += _conjugation_relators(
        base_spec, elems, lambda i, i2: [(k + i, k + i2)])
    relators = [w for w in relators if w]

    nontrivial = [Word.gen(k + i) for i in range(len(f_elements))]
    nontrivial += [Word.gen(t) for t in range(k)
                   if base_spec.word_is_nontrivial(Word.gen(t))]
    names = [f"u{t + 1}" for t in range(k)]
    names += [f"f[{g.to_text()}]" for g in f_elements]
    spec = GroupSpec.presented(k_out, relators, nontrivial=nontrivial,
                               name=f"Z2wr({base_spec.name})")
    return SoficApproximation(spec, 2 * b.extended_size, gens,
                              gen_names=names,
                              provenance=b.base.provenance
                              + (f"wreath-z2 base_n={b.n}",))


def wreath_general(b: BernoulliApproximation, lamps: SoficApproximation,
                   f_elements: Sequence[Word] = (Word.empty(),)) -> SoficApproximation:
    """Wreath product with an abelian lamp group acting on the lamp coordinate.

    ``lamps`` is a sofic approximation of the (abelian) lamp group; its
    generator permutations act on the lamp factor over the symbol-1 cylinder
    of each realized group element.  Non-abelian lamp specs are rejected.
    """
    f_elements, elems = _validate_realized(b, f_elements)
    if not lamps.spec.is_abelian():
        raise ValueError("lamp group spec must be abelian")
    base_spec = b.base.spec
    k = base_spec.k
    hk = lamps.k
    m = lamps.n

    commutation_defect = max(
        (normalized_hamming(compose(lamps.gens[i], lamps.gens[j]),
                            compose(lamps.gens[j], lamps.gens[i]))
         for i in range(hk) for j in range(i + 1, hk)),
        default=None)

    gens: List[Permutation] = [_u_generator(b, p, m) for p in b.base.gens]
    for g in f_elements:
        for lamp in lamps.gens:
            gens.append(_lamp_generator(b, g, lamp))

    def f_letter(gi: int, hi: int) -> int:
        return k + gi * hk + hi

    relators = list(base_spec.relators)
    for gi in range(len(f_elements)):
        for rel in lamps.spec.relators:
            relators.append(Word([(f_letter(gi, h), s) for h, s in rel.letters]))
        for h1 in range(hk):
            for h2 in range(h1 + 1, hk):
                a, bb = Word.gen(f_letter(gi, h1)), Word.gen(f_letter(gi, h2))
                relators.append(a * bb * a.inverse() * bb.inverse())
    for g1 in range(len(f_elements)):
        for g2 in range(g1 + 1, len(f_elements)):
            for h1 in range(hk):
                for h2 in range(hk):
                    a, bb = Word.gen(f_letter(g1, h1)), Word.gen(f_letter(g2, h2))
                    relators.append(a * bb * a.inverse() * bb.inverse())
    relators += _conjugation_relators(
        base_spec, elems,
        lambda i, i2: [(f_letter(i, h), f_letter(i2, h)) for h in range(hk)])
    relators = [w for w in relators if w]

    nontrivial = []
    for gi in range(len(f_elements)):
        for h in range(hk):
            if lamps.spec.word_is_nontrivial(Word.gen(h)):
                nontrivial.append(Word.gen(f_letter(gi, h)))
    nontrivial += [Word.gen(t) for t in range(k)
                   if base_spec.word_is_nontrivial(Word.gen(t))]
    names = [f"u{t + 1}" for t in range(k)]
    for g in f_elements:
        for h in range(hk):
            names.append(f"f[{g.to_text()}]^h{h + 1}")
    spec = GroupSpec.presented(k + len(f_elements) * hk, relators,
                               nontrivial=nontrivial,
                               name=f"{lamps.spec.name}wr({base_spec.name})")
    out = SoficApproximation(spec, m * b.extended_size, gens,
                             gen_names=names,
                             provenance=b.base.provenance
                             + (f"wreath base_n={b.n} lamps_n={m}",))
    out.lamp_commutation_defect = commutation_defect
    return out


def z2_lamp_approximation() -> SoficApproximation:
    """Regular representation of the two-element lamp group."""
    from .approx import make_base
    return make_base(builtin_table_spec("z2"), 2)
