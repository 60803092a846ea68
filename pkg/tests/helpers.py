"""Independent brute-force oracles shared by the test modules.

These deliberately avoid the library's own fast paths: partial injections
become 0/1 matrices, extensions are materialized point by point, and
neighborhood isomorphism is decided by exhaustive bijection search.
"""

from fractions import Fraction
from itertools import permutations, product

from soficlab import Word
from soficlab.localstats import WordBall
from soficlab.perms import PartialInjection, Permutation


def pinj_matrix(a: PartialInjection):
    """M[y][x] = 1 iff a maps x to y."""
    m = [[0] * a.n for _ in range(a.n)]
    for x, y in a.pairs:
        m[y][x] = 1
    return m


def matmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)]


def matrix_to_pinj(m, n):
    pairs = {}
    for y in range(n):
        for x in range(n):
            if m[y][x]:
                pairs[x] = y
    return PartialInjection(n, pairs)


def perm_matrix(p: Permutation):
    m = [[0] * p.n for _ in range(p.n)]
    for x in range(p.n):
        m[p[x]][x] = 1
    return m


def frobenius_sq_normalized(a, b):
    n = len(a)
    total = sum((a[i][j] - b[i][j]) ** 2 for i in range(n) for j in range(n))
    return Fraction(total, n)


def brute_cylinder_trace(b, c):
    """Materialize the whole extended space and count membership."""
    n, a = b.n, b.alphabet
    perms = [b.base.evaluate(w) for w in c.elements]
    cols = [p.inverse() for p in perms]
    hits = 0
    for xi in range(n):
        for eta in product(range(a), repeat=n):
            if all(eta[col[xi]] == s for col, s in zip(cols, c.symbols)):
                hits += 1
    return Fraction(hits, n * a ** n)


def brute_equivariance_defect(b, g, c):
    n, a = b.n, b.alphabet
    shifted = b.shifted_cylinder(g, c)
    pg_inv = b.base.evaluate(g).inverse()
    cols_t = [b.base.evaluate(w).inverse() for w in c.elements]
    cols_s = [b.base.evaluate(w).inverse() for w in shifted.elements]
    count = 0
    for xi in range(n):
        for eta in product(range(a), repeat=n):
            in_t = all(eta[col[pg_inv[xi]]] == s
                       for col, s in zip(cols_t, c.symbols))
            in_s = all(eta[col[xi]] == s
                       for col, s in zip(cols_s, shifted.symbols))
            count += in_t != in_s
    return Fraction(count, n * a ** n)


def quotient_graph(action, x, r, pad=False):
    """The rooted colored quotient graph of a point's word-ball images.

    Vertices are image points; there is a c-colored edge v -> w whenever
    some ball word gamma has image v and the ball also contains the word
    c*gamma, with image w.  Root, vertex labels and edges together are the
    data a neighborhood encoding must determine.
    """
    ball = WordBall(r)
    images = {}
    for w in ball.words:
        p = x
        for g, s in reversed(w.letters):
            if g >= action.k:
                continue
            gen = action.approx.gens[g]
            p = gen[p] if s == 1 else gen.inverse()[p]
        images[w.letters] = p
    vertices = sorted(set(images.values()))
    edges = set()
    for w in ball.words:
        for g in range(r):
            for s in (1, -1):
                extended = Word([(g, s)]) * Word(w.letters, reduce=False)
                if extended.letters in images:
                    edges.add((images[w.letters], (g, s),
                               images[extended.letters]))
    labels = {v: action.labeling.level_label(v, r) for v in vertices}
    return x, vertices, labels, edges


def rooted_isomorphic(g1, g2):
    """Exhaustive search for a root-, color- and label-preserving bijection."""
    root1, v1, lab1, e1 = g1
    root2, v2, lab2, e2 = g2
    if len(v1) != len(v2):
        return False
    others1 = [v for v in v1 if v != root1]
    others2 = [v for v in v2 if v != root2]
    for perm in permutations(others2):
        phi = {root1: root2}
        phi.update(zip(others1, perm))
        if any(lab1[v] != lab2[phi[v]] for v in v1):
            continue
        if {(phi[a], c, phi[b]) for a, c, b in e1} == e2:
            return True
    return False


def random_word(rng, k, max_len):
    return Word([(rng.randrange(k), rng.choice((1, -1)))
                 for _ in range(rng.randrange(max_len + 1))])
