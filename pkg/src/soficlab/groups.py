"""Reduced words and finitely generated group descriptions.

A :class:`Word` is a freely reduced sequence of signed generator letters
(0-based generator index, sign ±1).  The text form uses signed 1-based
integers, e.g. ``"1 -2 1"``; the empty word prints as ``"e"``.

A :class:`GroupSpec` describes the group a sofic approximation targets.
Kinds: cyclic, finite-from-table, free, integer, folner-box, presented.
For the built-in kinds the word problem is decidable (table lookup,
exponent arithmetic, free reduction); for presented groups a caller-supplied
nontriviality list stands in.
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Tuple


class Word:
    """A freely reduced word; letters are (generator, sign) with sign ±1."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[Tuple[int, int]] = (), reduce: bool = True):
        stack: List[Tuple[int, int]] = []
        for g, s in letters:
            if s not in (1, -1):
                raise ValueError(f"sign must be ±1, got {s}")
            if g < 0:
                raise ValueError(f"negative generator index {g}")
            if reduce and stack and stack[-1][0] == g and stack[-1][1] == -s:
                stack.pop()
            else:
                stack.append((g, s))
        if not reduce:
            for (g1, s1), (g2, s2) in zip(stack, stack[1:]):
                if g1 == g2 and s1 == -s2:
                    raise ValueError("word is not reduced")
        self.letters = tuple(stack)

    @classmethod
    def empty(cls) -> "Word":
        return cls(())

    @classmethod
    def gen(cls, g: int, power: int = 1) -> "Word":
        sign = 1 if power >= 0 else -1
        return cls([(g, sign)] * abs(power))

    @classmethod
    def from_text(cls, text: str) -> "Word":
        text = text.replace(",", " ").strip()
        if text in ("", "e"):
            return cls.empty()
        letters = []
        for tok in text.split():
            v = int(tok)
            if v == 0:
                raise ValueError("word letters are signed 1-based integers (0 invalid)")
            letters.append((abs(v) - 1, 1 if v > 0 else -1))
        return cls(letters)

    def to_text(self) -> str:
        if not self.letters:
            return "e"
        return " ".join(str((g + 1) * s) for g, s in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __repr__(self) -> str:
        return f"Word({self.to_text()!r})"

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word([(g, -s) for g, s in reversed(self.letters)], reduce=False)

    def __pow__(self, m: int) -> "Word":
        if m < 0:
            return self.inverse() ** (-m)
        out = Word.empty()
        for _ in range(m):
            out = out * self
        return out

    def max_generator(self) -> int:
        """Largest generator index used, or -1 for the empty word."""
        return max((g for g, _ in self.letters), default=-1)

    def exponent_sums(self, k: int) -> Tuple[int, ...]:
        sums = [0] * k
        for g, s in self.letters:
            if g < k:
                sums[g] += s
        return tuple(sums)

    def drop_generators_above(self, k: int) -> "Word":
        """Delete letters with generator index >= k (padding them to identity)."""
        return Word([(g, s) for g, s in self.letters if g < k])


def letter_rank(g: int, sign: int) -> int:
    """Canonical letter order: g1 < g1^-1 < g2 < g2^-1 < ..."""
    return 2 * g + (0 if sign == 1 else 1)


def reduced_words(k: int, radius: int) -> List[Word]:
    """All reduced words of length <= radius in k generators, ordered by
    length then lexicographically by letter rank.  Index 0 is the empty word."""
    if radius < 0:
        raise ValueError("negative radius")
    letters = sorted(((g, s) for g in range(k) for s in (1, -1)),
                     key=lambda ls: letter_rank(*ls))
    out = [Word.empty()]
    level = [()]
    for _ in range(radius):
        nxt = []
        for w in level:
            for g, s in letters:
                if w and w[-1][0] == g and w[-1][1] == -s:
                    continue
                nxt.append(w + ((g, s),))
        out.extend(Word(w, reduce=False) for w in nxt)
        level = nxt
    return out


def _check_table(table) -> Tuple[Tuple[int, ...], ...]:
    m = len(table)
    table = tuple(tuple(row) for row in table)
    for row in table:
        if len(row) != m or sorted(row) != list(range(m)):
            raise ValueError("malformed table: rows must be permutations of 0..m-1")
    for x in range(m):
        if table[0][x] != x or table[x][0] != x:
            raise ValueError("malformed table: element 0 must be the identity")
    for x in range(m):
        for y in range(m):
            for z in range(m):
                if table[table[x][y]][z] != table[x][table[y][z]]:
                    raise ValueError("malformed table: product is not associative")
    return table


class GroupSpec:
    """Generator count, relators and the word calculus of a target group."""

    def __init__(self, kind: str, k: int, relators: Sequence[Word] = (),
                 order: Optional[int] = None, table=None,
                 generators: Optional[Sequence[int]] = None,
                 box: Optional[Sequence[int]] = None,
                 nontrivial: Sequence[Word] = (), abelian: Optional[bool] = None,
                 name: Optional[str] = None):
        self.kind = kind
        self.k = k
        self.relators = tuple(relators)
        self.order = order
        self.table = table
        self.generators = tuple(generators) if generators is not None else None
        self.box = tuple(box) if box is not None else None
        self.nontrivial = frozenset(w.letters for w in nontrivial)
        self._abelian = abelian
        self.name = name
        self._element_words: Optional[List[Word]] = None
        for w in self.relators:
            if w.max_generator() >= k:
                raise ValueError("relator uses a generator outside the spec")

    # -- constructors ------------------------------------------------------

    @classmethod
    def cyclic(cls, order: int) -> "GroupSpec":
        if order < 1:
            raise ValueError("cyclic order must be >= 1")
        return cls("cyclic", 1, [Word.gen(0, order)], order=order,
                   name=f"Z/{order}")

    @classmethod
    def integer(cls) -> "GroupSpec":
        return cls("integer", 1, [], name="Z")

    @classmethod
    def free(cls, rank: int) -> "GroupSpec":
        if rank < 1:
            raise ValueError("free rank must be >= 1")
        return cls("free", rank, [], name=f"F{rank}")

    @classmethod
    def folner_box(cls, box: Sequence[int]) -> "GroupSpec":
        box = tuple(box)
        if not box or any(b < 1 for b in box):
            raise ValueError("box dimensions must be positive")
        d = len(box)
        relators = []
        for i in range(d):
            for j in range(i + 1, d):
                relators.append(Word.gen(i) * Word.gen(j)
                                * Word.gen(i, -1) * Word.gen(j, -1))
        return cls("folner-box", d, relators, box=box, name=f"Z^{d}")

    @classmethod
    def from_table(cls, table, generators: Sequence[int],
                   name: Optional[str] = None) -> "GroupSpec":
        table = _check_table(table)
        generators = tuple(generators)
        if not generators:
            raise ValueError("at least one generator element required")
        m = len(table)
        for g in generators:
            if not 0 < g < m:
                raise ValueError(f"generator element {g} invalid (identity is 0)")
        relators = []
        for i, g in enumerate(generators):
            order, x = 1, g
            while x != 0:
                x = table[x][g]
                order += 1
            relators.append(Word.gen(i, order))
        spec = cls("finite-from-table", len(generators), relators,
                   order=m, table=table, generators=generators, name=name)
        spec._check_generates()
        return spec

    @classmethod
    def presented(cls, k: int, relators: Sequence[Word],
                  nontrivial: Sequence[Word] = (),
                  abelian: bool = False, name: Optional[str] = None) -> "GroupSpec":
        return cls("presented", k, relators, nontrivial=nontrivial,
                   abelian=abelian, name=name)

    # -- word calculus -----------------------------------------------------

    def _check_generates(self):
        reached = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for g in self.generators:
                y = self.table[g][x]
                if y not in reached:
                    reached.add(y)
                    frontier.append(y)
        if len(reached) != len(self.table):
            raise ValueError("generator elements do not generate the group")

    def element_of(self, w: Word):
        """Canonical element of the group represented by ``w``.

        cyclic: exponent mod order; integer: exponent; folner-box: exponent
        vector; finite-from-table: table element; free/presented: the reduced
        word itself (free reduction only).
        """
        if w.max_generator() >= self.k:
            raise ValueError("word uses a generator outside the spec")
        if self.kind == "cyclic":
            return w.exponent_sums(1)[0] % self.order
        if self.kind == "integer":
            return w.exponent_sums(1)[0]
        if self.kind == "folner-box":
            return w.exponent_sums(self.k)
        if self.kind == "finite-from-table":
            # left-to-right product, so the regular representation (left
            # multiplication per letter) evaluates words consistently
            x = 0
            inv = self._table_inverses()
            for g, s in w.letters:
                e = self.generators[g] if s == 1 else inv[self.generators[g]]
                x = self.table[x][e]
            return x
        return w.letters

    def _table_inverses(self):
        inv = [0] * len(self.table)
        for x in range(len(self.table)):
            for y in range(len(self.table)):
                if self.table[x][y] == 0:
                    inv[x] = y
                    break
        return inv

    def word_for_element(self, elem) -> Word:
        if self.kind == "cyclic":
            return Word.gen(0, elem % self.order)
        if self.kind == "integer":
            return Word.gen(0, elem)
        if self.kind == "folner-box":
            out = Word.empty()
            for i, e in enumerate(elem):
                out = out * Word.gen(i, e)
            return out
        if self.kind == "finite-from-table":
            return self._element_word_table()[elem]
        return Word(elem, reduce=False)

    def _element_word_table(self) -> List[Word]:
        """Shortest word per table element, via BFS from the identity."""
        if self._element_words is None:
            m = len(self.table)
            inv = self._table_inverses()
            words: List[Optional[Word]] = [None] * m
            words[0] = Word.empty()
            queue = [0]
            while queue:
                x = queue.pop(0)
                for i, g in enumerate(self.generators):
                    for s, e in ((1, g), (-1, inv[g])):
                        y = self.table[x][e]
                        if words[y] is None:
                            words[y] = words[x] * Word.gen(i, s)
                            queue.append(y)
            self._element_words = words  # type: ignore[assignment]
        return self._element_words  # type: ignore[return-value]

    def multiply(self, w1: Word, w2: Word) -> Word:
        """Normal-form word of the group product of w1 and w2."""
        if self.kind in ("free", "presented"):
            return w1 * w2
        if self.kind == "finite-from-table":
            prod = self.table[self.element_of(w1)][self.element_of(w2)]
            return self.word_for_element(prod)
        if self.kind == "cyclic":
            return self.word_for_element(self.element_of(w1) + self.element_of(w2))
        if self.kind == "integer":
            return self.word_for_element(self.element_of(w1) + self.element_of(w2))
        e1 = self.element_of(w1)
        e2 = self.element_of(w2)
        return self.word_for_element(tuple(a + b for a, b in zip(e1, e2)))

    def word_is_identity(self, w: Word) -> Optional[bool]:
        """True/False for decidable kinds; None when unknown (presented)."""
        if self.kind == "free":
            return not w
        if self.kind == "presented":
            if not w:
                return True
            if (w.letters in self.nontrivial
                    or w.inverse().letters in self.nontrivial):
                return False
            return None
        if self.kind == "cyclic":
            return self.element_of(w) == 0
        if self.kind == "integer":
            return self.element_of(w) == 0
        if self.kind == "folner-box":
            return all(e == 0 for e in self.element_of(w))
        return self.element_of(w) == 0

    def word_is_nontrivial(self, w: Word) -> Optional[bool]:
        ident = self.word_is_identity(w)
        return None if ident is None else not ident

    def is_abelian(self) -> bool:
        if self._abelian is not None:
            return self._abelian
        if self.kind in ("cyclic", "integer", "folner-box"):
            return True
        if self.kind == "finite-from-table":
            m = len(self.table)
            return all(self.table[x][y] == self.table[y][x]
                       for x in range(m) for y in range(m))
        if self.kind == "free":
            return self.k == 1
        return False

    def enumerate_elements(self, count: int, max_radius: int = 12) -> List[Word]:
        """The first ``count`` distinct group elements, as normal-form words,
        in canonical word order starting at the identity."""
        seen = set()
        out: List[Word] = []
        for r in range(max_radius + 1):
            for w in reduced_words(self.k, r):
                key = self.element_of(w)
                if key not in seen:
                    seen.add(key)
                    out.append(self.word_for_element(key)
                               if self.kind not in ("free", "presented") else w)
                    if len(out) == count:
                        return out
        raise ValueError(f"could not enumerate {count} distinct elements "
                         f"within radius {max_radius}")

    def __eq__(self, other) -> bool:
        return (isinstance(other, GroupSpec) and self.kind == other.kind
                and self.k == other.k and self.relators == other.relators
                and self.order == other.order and self.table == other.table
                and self.generators == other.generators and self.box == other.box)

    def __repr__(self) -> str:
        return f"GroupSpec({self.name or self.kind}, k={self.k})"


# -- built-in finite tables ------------------------------------------------

def cyclic_table(m: int):
    return [[(x + y) % m for y in range(m)] for x in range(m)]


def klein_table():
    """Z/2 x Z/2 with elements encoded as 2-bit integers (XOR product)."""
    return [[x ^ y for y in range(4)] for x in range(4)]


BUILTIN_TABLES = {
    "z2": (cyclic_table(2), (1,)),
    "z3": (cyclic_table(3), (1,)),
    "z4": (cyclic_table(4), (1,)),
    "z2xz2": (klein_table(), (1, 2)),
}


def builtin_table_spec(name: str) -> GroupSpec:
    try:
        table, gens = BUILTIN_TABLES[name]
    except KeyError:
        raise ValueError(f"unknown builtin table {name!r}; "
                         f"choose from {sorted(BUILTIN_TABLES)}") from None
    return GroupSpec.from_table(table, gens, name=name)
