"""Wreath products over exact extensions: traces, relations, pairing."""

from fractions import Fraction

import pytest

from soficlab import (GroupSpec, Word, bernoulli_extend, builtin_table_spec,
                      compose, defect_report, fixed_fraction, make_base,
                      wreath_general, wreath_z2)
from soficlab.wreath import z2_lamp_approximation


def _extension(name="z4", n=None):
    spec = builtin_table_spec(name)
    base = make_base(spec, n or len(spec.table))
    return bernoulli_extend(base, 2, "exact")


F_ELS = [Word.empty(), Word.gen(0), Word.gen(0, 2)]


def test_wreath_z2_point_count():
    b = _extension()
    w = wreath_z2(b, F_ELS)
    assert w.n == 2 * b.extended_size


def test_wreath_z2_traces():
    w = wreath_z2(_extension(), F_ELS)
    assert fixed_fraction(w.gens[0]) == 0            # shift of trace-0 base
    for i in range(1, 4):
        assert fixed_fraction(w.gens[i]) == Fraction(1, 2)


def test_wreath_z2_lamp_involution():
    w = wreath_z2(_extension(), F_ELS)
    for i in range(1, 4):
        assert compose(w.gens[i], w.gens[i]).is_identity()


def test_wreath_z2_lamps_commute():
    w = wreath_z2(_extension(), F_ELS)
    for i in range(1, 4):
        for j in range(i + 1, 4):
            assert compose(w.gens[i], w.gens[j]) == compose(w.gens[j], w.gens[i])


def test_wreath_z2_relator_defects_zero():
    rep = defect_report(wreath_z2(_extension(), F_ELS), 1)
    assert rep.relator_defects and rep.max_relator_defect == 0


def test_wreath_z2_conjugation_relation():
    # u f[g] u^{-1} = f[gamma*g] exactly, for realized pairs
    b = _extension()
    w = wreath_z2(b, F_ELS)
    u, f_e, f_g = w.gens[0], w.gens[1], w.gens[2]
    assert compose(u, compose(f_e, u.inverse())) == f_g


def test_wreath_z2_requires_exact_alphabet2():
    base = make_base(GroupSpec.integer(), 8)
    sampled = bernoulli_extend(base, 2, "sampled", samples=10, seed=1)
    with pytest.raises(ValueError):
        wreath_z2(sampled)
    wide = bernoulli_extend(base, 4, "exact")
    with pytest.raises(ValueError):
        wreath_z2(wide)


def test_wreath_z2_distinct_lamp_elements():
    b = _extension()
    with pytest.raises(ValueError):
        wreath_z2(b, [Word.empty(), Word.gen(0, 4)])  # same element as e


def test_wreath_general_matches_z2_exhaustively():
    for name, n in (("z2", 2), ("z4", 4), ("z2", 4)):
        b = _extension(name, n)
        f_els = [Word.empty(), Word.gen(0)]
        w1 = wreath_z2(b, f_els)
        w2 = wreath_general(b, z2_lamp_approximation(), f_els)
        assert [g.images for g in w1.gens] == [g.images for g in w2.gens]


def test_wreath_general_trace_formula():
    # Tr f[g]^h = (1 + fixed_fraction(lamp(h))) / 2, two-cylinder split
    b = _extension()
    lamps = make_base(builtin_table_spec("z4"), 4)
    w = wreath_general(b, lamps, [Word.empty()])
    lamp_gen = lamps.gens[0]
    assert fixed_fraction(w.gens[1]) == (1 + fixed_fraction(lamp_gen)) / 2
    # and via an amplified lamp with fixed points
    lamps8 = make_base(builtin_table_spec("z2"), 8)
    w8 = wreath_general(_extension("z2", 2), lamps8, [Word.empty()])
    assert fixed_fraction(w8.gens[1]) == (1 + fixed_fraction(lamps8.gens[0])) / 2


def test_wreath_general_relators_zero_for_exact_abelian_lamps():
    b = _extension()
    for lamp_name in ("z2", "z4", "z2xz2"):
        lamps = make_base(builtin_table_spec(lamp_name),
                          len(builtin_table_spec(lamp_name).table))
        w = wreath_general(b, lamps, [Word.empty(), Word.gen(0)])
        rep = defect_report(w, 1)
        assert rep.relator_defects and rep.max_relator_defect == 0
        assert w.lamp_commutation_defect in (None, 0)


def test_wreath_general_rejects_nonabelian():
    b = _extension()
    nonabelian = make_base(GroupSpec.free(2), 8, seed=1)
    with pytest.raises(ValueError):
        wreath_general(b, nonabelian)


def test_wreath_nontrivial_words_have_reported_traces():
    w = wreath_z2(_extension(), [Word.empty()])
    rep = defect_report(w, 1)
    traces = {wd.to_text(): t for wd, t in rep.word_traces}
    assert traces["1"] == 0              # the shift generator
    assert traces["2"] == Fraction(1, 2)  # the lamp generator


def test_wreath_lamp_product_trace():
    # flipping over two independent cylinders fixes a point unless exactly
    # one cylinder holds, so the product of two lamp generators has trace
    # 1 - P(exactly one) = 1/2 on an exact base
    w = wreath_z2(_extension(), F_ELS)
    f_e, f_g = w.gens[1], w.gens[2]
    assert fixed_fraction(compose(f_e, f_g)) == Fraction(1, 2)


def test_wreath_over_nonabelian_base():
    # only the lamps must be abelian; the base group may not be
    from itertools import permutations as iperms
    elems = [(0, 1, 2)] + sorted(p for p in iperms(range(3)) if p != (0, 1, 2))
    index = {p: i for i, p in enumerate(elems)}
    table = [[index[tuple(a[b[i]] for i in range(3))] for b in elems]
             for a in elems]
    spec = GroupSpec.from_table(table, (index[(1, 0, 2)], index[(1, 2, 0)]))
    b = bernoulli_extend(make_base(spec, 6), 2, "exact")
    f_els = [Word.empty(), Word.gen(0), Word.gen(1)]
    w = wreath_z2(b, f_els)
    rep = defect_report(w, 1)
    assert rep.max_relator_defect == 0   # includes conjugation relators
    for i in range(2, w.k):
        assert fixed_fraction(w.gens[i]) == Fraction(1, 2)
