"""Text serialization of every artifact, with line-numbered parse errors.

All formats are whitespace-separated and human-diffable, with a version
header on every file.  Readers tolerate a missing header on the bare
single-object formats (permutation, partial injection, labeling, row
function); writers always emit it.

Exact probabilities are written both as a decimal and as num/den so that
serialized statistics re-parse to equal values.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Tuple

from .approx import SoficApproximation
from .groups import GroupSpec, Word
from .linking import MatrixUnitSystem, RowFunction
from .localstats import LocalStats
from .perms import (DyadicLabeling, PartialInjection, Permutation,
                    pinj_compose)


class FormatError(ValueError):
    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class _Lines:
    """Line cursor tracking 1-based positions for error messages."""

    def __init__(self, text: str, path: str):
        self.raw = text.split("\n")
        self.path = path
        self.pos = 0

    def error(self, message: str) -> FormatError:
        return FormatError(self.path, min(self.pos, len(self.raw)), message)

    def peek(self) -> Optional[List[str]]:
        pos = self.pos
        while pos < len(self.raw):
            toks = self.raw[pos].split()
            if toks:
                return toks
            pos += 1
        return None

    def next(self) -> Optional[List[str]]:
        while self.pos < len(self.raw):
            toks = self.raw[self.pos].split()
            self.pos += 1
            if toks:
                return toks
        return None

    def expect(self, what: str) -> List[str]:
        toks = self.next()
        if toks is None:
            raise self.error(f"unexpected end of file, expected {what}")
        return toks

    def ints(self, what: str, count: Optional[int] = None) -> List[int]:
        toks = self.expect(what)
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise self.error(f"expected integers for {what}, got {toks}")
        if count is not None and len(vals) != count:
            raise self.error(f"expected {count} integers for {what}, "
                             f"got {len(vals)}")
        return vals


def _skip_magic(lines: _Lines, magic: str):
    toks = lines.peek()
    if toks and toks[0] == magic:
        lines.next()


# -- permutations, row functions, partial injections, labelings ---------------


def write_permutation(p: Permutation) -> str:
    return "soficperm 1\n" + " ".join(map(str, p.images)) + "\n"


def read_permutation(text: str, path: str = "<string>") -> Permutation:
    lines = _Lines(text, path)
    _skip_magic(lines, "soficperm")
    vals = lines.ints("permutation images")
    try:
        return Permutation(vals)
    except ValueError as exc:
        raise lines.error(str(exc))


def write_row_function(v: RowFunction) -> str:
    return "soficrow 1\n" + " ".join(map(str, v.values)) + "\n"


def read_row_function(text: str, path: str = "<string>") -> RowFunction:
    lines = _Lines(text, path)
    _skip_magic(lines, "soficrow")
    vals = lines.ints("row function values")
    try:
        return RowFunction(vals)
    except ValueError as exc:
        raise lines.error(str(exc))


def write_partial_injection(m: PartialInjection) -> str:
    out = ["soficpinj 1", str(m.n)]
    out += [f"{x} {y}" for x, y in m.pairs]
    return "\n".join(out) + "\n"


def read_partial_injection(text: str, path: str = "<string>") -> PartialInjection:
    lines = _Lines(text, path)
    _skip_magic(lines, "soficpinj")
    n = lines.ints("point count", 1)[0]
    pairs = {}
    while True:
        toks = lines.peek()
        if toks is None:
            break
        vals = lines.ints("pair x y", 2)
        pairs[vals[0]] = vals[1]
    try:
        return PartialInjection(n, pairs)
    except ValueError as exc:
        raise lines.error(str(exc))


def write_labeling(lab: DyadicLabeling) -> str:
    return (f"soficlabel 1\n{lab.n} {lab.depth}\n"
            + " ".join(map(str, lab.labels)) + "\n")


def read_labeling(text: str, path: str = "<string>") -> DyadicLabeling:
    lines = _Lines(text, path)
    _skip_magic(lines, "soficlabel")
    return _read_labeling_body(lines)


def _read_labeling_body(lines: _Lines) -> DyadicLabeling:
    n, depth = lines.ints("labeling header 'n depth'", 2)
    labels: List[int] = []
    while len(labels) < n:
        labels.extend(lines.ints("labels"))
    if len(labels) != n:
        raise lines.error(f"expected {n} labels, got {len(labels)}")
    try:
        return DyadicLabeling(n, depth, labels)
    except ValueError as exc:
        raise lines.error(str(exc))


# -- group specs (embedded section) -------------------------------------------


def _spec_lines(spec: GroupSpec) -> List[str]:
    out = [f"kind {spec.kind}"]
    if spec.name:
        out.append(f"name {spec.name}")
    if spec.kind == "cyclic":
        out.append(f"order {spec.order}")
    elif spec.kind == "free":
        out.append(f"rank {spec.k}")
    elif spec.kind == "presented":
        out.append(f"rank {spec.k}")
    elif spec.kind == "folner-box":
        out.append("box " + " ".join(map(str, spec.box)))
    elif spec.kind == "finite-from-table":
        out.append(f"elements {len(spec.table)}")
        out.append("table")
        for row in spec.table:
            out.append(" ".join(map(str, row)))
        out.append("generators " + " ".join(map(str, spec.generators)))
    if spec.kind == "presented":
        out.append(f"relators {len(spec.relators)}")
        for w in spec.relators:
            out.append(f"relator {w.to_text()}")
        nt = sorted(spec.nontrivial)
        out.append(f"nontrivial {len(nt)}")
        for letters in nt:
            out.append("word " + Word(letters, reduce=False).to_text())
        if spec.is_abelian():
            out.append("abelian")
    return out


def _read_spec_section(lines: _Lines) -> GroupSpec:
    toks = lines.expect("spec kind")
    if toks[0] != "kind" or len(toks) != 2:
        raise lines.error(f"expected 'kind <kind>', got {toks}")
    kind = toks[1]
    name = None
    if lines.peek() and lines.peek()[0] == "name":
        name = " ".join(lines.next()[1:])
    if kind == "integer":
        return GroupSpec.integer()
    if kind == "cyclic":
        toks = lines.expect("order")
        if toks[0] != "order":
            raise lines.error(f"expected 'order', got {toks[0]}")
        return GroupSpec.cyclic(int(toks[1]))
    if kind == "free":
        toks = lines.expect("rank")
        if toks[0] != "rank":
            raise lines.error(f"expected 'rank', got {toks[0]}")
        return GroupSpec.free(int(toks[1]))
    if kind == "folner-box":
        toks = lines.expect("box")
        if toks[0] != "box":
            raise lines.error(f"expected 'box', got {toks[0]}")
        return GroupSpec.folner_box([int(t) for t in toks[1:]])
    if kind == "finite-from-table":
        toks = lines.expect("elements")
        if toks[0] != "elements":
            raise lines.error(f"expected 'elements', got {toks[0]}")
        m = int(toks[1])
        toks = lines.expect("table")
        if toks[0] != "table":
            raise lines.error(f"expected 'table', got {toks[0]}")
        table = [lines.ints(f"table row {i}", m) for i in range(m)]
        toks = lines.expect("generators")
        if toks[0] != "generators":
            raise lines.error(f"expected 'generators', got {toks[0]}")
        gens = [int(t) for t in toks[1:]]
        try:
            return GroupSpec.from_table(table, gens, name=name)
        except ValueError as exc:
            raise lines.error(str(exc))
    if kind == "presented":
        toks = lines.expect("rank")
        if toks[0] != "rank":
            raise lines.error(f"expected 'rank', got {toks[0]}")
        k = int(toks[1])
        relators = []
        nontrivial = []
        abelian = False
        toks = lines.expect("relators")
        if toks[0] != "relators":
            raise lines.error(f"expected 'relators', got {toks[0]}")
        for _ in range(int(toks[1])):
            toks = lines.expect("relator")
            if toks[0] != "relator":
                raise lines.error(f"expected 'relator', got {toks[0]}")
            relators.append(Word.from_text(" ".join(toks[1:])))
        toks = lines.peek()
        if toks and toks[0] == "nontrivial":
            toks = lines.next()
            for _ in range(int(toks[1])):
                toks = lines.expect("word")
                if toks[0] != "word":
                    raise lines.error(f"expected 'word', got {toks[0]}")
                nontrivial.append(Word.from_text(" ".join(toks[1:])))
        toks = lines.peek()
        if toks and toks[0] == "abelian":
            lines.next()
            abelian = True
        return GroupSpec.presented(k, relators, nontrivial=nontrivial,
                                   abelian=abelian, name=name)
    raise lines.error(f"unknown spec kind {kind!r}")


# -- approximation files -------------------------------------------------------


def write_approximation(a: SoficApproximation,
                        labeling: Optional[DyadicLabeling] = None) -> str:
    out = ["soficapx 1", f"{a.n} {a.k}"]
    for g in a.gens:
        out.append(" ".join(map(str, g.images)))
    if labeling is not None:
        out.append("labels")
        out.append(f"{labeling.n} {labeling.depth}")
        out.append(" ".join(map(str, labeling.labels)))
    out.append("spec")
    out.extend(_spec_lines(a.spec))
    if a.seed is not None or a.gen_names or a.provenance:
        out.append("derived")
        if a.seed is not None:
            out.append(f"seed {a.seed}")
        if a.gen_names:
            out.append("gennames " + " ".join(a.gen_names))
        for line in a.provenance:
            out.append(f"via {line}")
    return "\n".join(out) + "\n"


def read_approximation(text: str, path: str = "<string>"
                       ) -> Tuple[SoficApproximation, Optional[DyadicLabeling]]:
    lines = _Lines(text, path)
    toks = lines.expect("header 'soficapx 1'")
    if toks[0] != "soficapx":
        raise lines.error(f"expected 'soficapx' header, got {toks[0]!r}")
    n, k = lines.ints("size header 'n k'", 2)
    gens = []
    for i in range(k):
        vals = lines.ints(f"generator {i + 1} images", n)
        try:
            gens.append(Permutation(vals))
        except ValueError as exc:
            raise lines.error(str(exc))
    labeling = None
    spec = None
    seed = None
    gen_names = None
    provenance: List[str] = []
    while True:
        toks = lines.next()
        if toks is None:
            break
        if toks[0] == "labels":
            labeling = _read_labeling_body(lines)
            if labeling.n != n:
                raise lines.error(f"labeling on {labeling.n} points, "
                                  f"approximation on {n}")
        elif toks[0] == "spec":
            spec = _read_spec_section(lines)
        elif toks[0] == "derived":
            while True:
                nxt = lines.peek()
                if nxt is None or nxt[0] not in ("seed", "gennames", "via"):
                    break
                nxt = lines.next()
                if nxt[0] == "seed":
                    seed = int(nxt[1])
                elif nxt[0] == "gennames":
                    gen_names = nxt[1:]
                else:
                    provenance.append(" ".join(nxt[1:]))
        else:
            raise lines.error(f"unexpected section {toks[0]!r}")
    if spec is None:
        spec = GroupSpec.free(k) if k else GroupSpec.presented(0, [])
    if spec.k != k:
        raise lines.error(f"spec has {spec.k} generators, file has {k}")
    approx = SoficApproximation(spec, n, gens, seed=seed, gen_names=gen_names,
                                provenance=provenance)
    return approx, labeling


# -- matrix unit systems -------------------------------------------------------


def write_matrix_unit_system(s: MatrixUnitSystem) -> str:
    """Header "n t", then per block its size and the superdiagonal units
    e[i][i+1] (a size-1 block stores its diagonal unit instead)."""
    out = ["soficmus 1", f"{s.n} {s.block_count}"]
    for v, (supports, rows) in enumerate(s.blocks):
        s_v = len(supports)
        out.append(str(s_v))
        if s_v == 1:
            out.append("unit 1 1")
            out += [f"{x} {y}" for x, y in rows[0].pairs]
        else:
            for i in range(s_v - 1):
                unit = s.unit(v, i, i + 1)  # D_{i+2} -> D_{i+1}, 1-based labels
                out.append(f"unit {i + 1} {i + 2}")
                out += [f"{x} {y}" for x, y in unit.pairs]
    return "\n".join(out) + "\n"


def read_matrix_unit_system(text: str, path: str = "<string>") -> MatrixUnitSystem:
    lines = _Lines(text, path)
    toks = lines.expect("header 'soficmus 1'")
    if toks[0] != "soficmus":
        raise lines.error(f"expected 'soficmus' header, got {toks[0]!r}")
    n, t = lines.ints("size header 'n t'", 2)
    blocks = []
    for _ in range(t):
        s_v = lines.ints("block size", 1)[0]
        if s_v < 1:
            raise lines.error("block size must be >= 1")
        chain = []
        for u in range(1 if s_v == 1 else s_v - 1):
            toks = lines.expect("'unit i j'")
            if toks[0] != "unit" or len(toks) != 3:
                raise lines.error(f"expected 'unit i j', got {toks}")
            pairs = {}
            while True:
                nxt = lines.peek()
                if nxt is None or len(nxt) != 2:
                    break
                x, y = lines.ints("pair", 2)
                pairs[x] = y
            try:
                chain.append(PartialInjection(n, pairs))
            except ValueError as exc:
                raise lines.error(str(exc))
        try:
            if s_v == 1:
                if not chain[0].is_identity_on_support():
                    raise ValueError("size-1 block unit must be a diagonal identity")
                supports = [chain[0].domain()]
                rows = [chain[0]]
            else:
                # chain[i] = e[i+1][i+2]: D_{i+2} -> D_{i+1} (1-based labels);
                # accumulate e[1][j] top-down and invert into the row maps
                supports = [chain[0].image()]
                rows = [PartialInjection.identity_on(n, supports[0])]
                down = PartialInjection.identity_on(n, supports[0])
                for unit in chain:
                    down = pinj_compose(down, unit)  # e[1][j+1]: D_{j+1} -> D_1
                    supports.append(down.domain())
                    rows.append(down.inverse())
            blocks.append((supports, rows))
        except ValueError as exc:
            raise lines.error(str(exc))
    try:
        return MatrixUnitSystem(n, blocks)
    except ValueError as exc:
        raise lines.error(str(exc))


# -- statistics ---------------------------------------------------------------


def _format_mass(value) -> str:
    if isinstance(value, Fraction):
        return f"{float(value):.17g} exact {value.numerator}/{value.denominator}"
    return f"{value:.17g}"


def write_stats(s: LocalStats) -> str:
    out = ["soficstats 1", f"radius {s.radius}", f"mode {s.mode}", f"n {s.n}",
           f"samples {s.samples}", f"seed {'-' if s.seed is None else s.seed}",
           f"classes {len(s.masses)}"]
    for enc in sorted(s.masses):
        line = f"class {enc} p {_format_mass(s.masses[enc])}"
        if enc in s.halfwidths:
            line += f" hw {s.halfwidths[enc]:.17g}"
        out.append(line)
    return "\n".join(out) + "\n"


def read_stats(text: str, path: str = "<string>") -> LocalStats:
    lines = _Lines(text, path)
    toks = lines.expect("header 'soficstats 1'")
    if toks[0] != "soficstats":
        raise lines.error(f"expected 'soficstats' header, got {toks[0]!r}")
    meta = {}
    for field in ("radius", "mode", "n", "samples", "seed", "classes"):
        toks = lines.expect(field)
        if toks[0] != field:
            raise lines.error(f"expected {field!r}, got {toks[0]!r}")
        meta[field] = toks[1]
    masses = {}
    halfwidths = {}
    for _ in range(int(meta["classes"])):
        toks = lines.expect("class line")
        if toks[0] != "class" or len(toks) < 4 or toks[2] != "p":
            raise lines.error(f"expected 'class <enc> p <mass>', got {toks}")
        enc = toks[1]
        rest = toks[3:]
        value = float(rest[0])
        i = 1
        while i < len(rest):
            if rest[i] == "exact":
                num, den = rest[i + 1].split("/")
                value = Fraction(int(num), int(den))
                i += 2
            elif rest[i] == "hw":
                halfwidths[enc] = float(rest[i + 1])
                i += 2
            else:
                raise lines.error(f"unexpected token {rest[i]!r} in class line")
        masses[enc] = value
    seed = None if meta["seed"] == "-" else int(meta["seed"])
    return LocalStats(int(meta["radius"]), masses, meta["mode"],
                      n=int(meta["n"]), samples=int(meta["samples"]),
                      seed=seed, halfwidths=halfwidths)
