"""Batch command line: build, transform, measure, verify and serialize.

Exit codes: 0 success (all gates pass), 1 gate/verification failure,
2 validation or format error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import fileio, report
from .approx import (ActionApproximation, SoficApproximation, defect_report,
                     make_base)
from .bernoulli import (BernoulliApproximation, CylinderSpec, bernoulli_extend,
                        descriptor_approximation)
from .constructions import (amalgam_glue, cell_swap, integer_action_approx,
                            odometer, product_action, treeing_restrict)
from .groups import GroupSpec, Word, builtin_table_spec
from .linking import link_matrix_units, round_to_permutation
from .localstats import bernoulli_oracle, el_verify, local_stats, stats_distance
from .perms import DyadicLabeling
from .pipeline import ConfigError, PRESETS, preset, run as run_pipeline
from .wreath import wreath_general, wreath_z2


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path, text: str, label: str):
    if path:
        Path(path).write_text(text)
        print(f"wrote {label} to {path}")
    else:
        sys.stdout.write(text)


def _group_spec_from_args(args) -> GroupSpec:
    g = args.group
    if g == "integer":
        return GroupSpec.integer()
    if g == "cyclic":
        return GroupSpec.cyclic(args.order if args.order else args.size)
    if g == "free":
        return GroupSpec.free(args.rank)
    if g == "folner":
        if not args.box:
            raise ConfigError("--box required for folner bases")
        return GroupSpec.folner_box([int(b) for b in args.box.split()])
    if g.startswith("table:"):
        return builtin_table_spec(g.split(":", 1)[1])
    raise ConfigError(f"unknown group {g!r}")


def _load_source(path: str):
    """An approximation file resolves to an action (labels present), a
    Bernoulli extension (provenance present) or a bare approximation."""
    approx, labeling = fileio.read_approximation(_read(path), path)
    for line in approx.provenance:
        toks = line.split()
        if toks and toks[0] == "bernoulli":
            kv = dict(t.split("=", 1) for t in toks[1:])
            seed = None if kv.get("seed") in (None, "None") else int(kv["seed"])
            return bernoulli_extend(
                SoficApproximation(approx.spec, approx.n, approx.gens,
                                   seed=approx.seed),
                int(kv["alphabet"]), kv["mode"],
                samples=int(kv.get("samples", 0)), seed=seed)
    if labeling is not None:
        return ActionApproximation(approx, labeling)
    return approx


def _parse_cylinder(text: str) -> CylinderSpec:
    elements, symbols = [], []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"cylinder entry {part!r} needs word=symbol")
        w, s = part.rsplit("=", 1)
        elements.append(Word.from_text(w.strip()))
        symbols.append(int(s))
    return CylinderSpec(elements, symbols)


def _target_stats(text: str, radius: int):
    if text.startswith("oracle:"):
        parts = text.split(":")
        group = parts[1]
        alphabet = int(parts[2]) if len(parts) > 2 else 2
        if group == "integer":
            spec = GroupSpec.integer()
        elif group == "free":
            spec = GroupSpec.free(int(parts[3]) if len(parts) > 3 else 2)
        elif group.startswith("table"):
            spec = builtin_table_spec(parts[2])
            alphabet = int(parts[3]) if len(parts) > 3 else 2
        else:
            raise ConfigError(f"unknown oracle group {group!r}")
        return bernoulli_oracle(spec, alphabet, radius)
    return fileio.read_stats(_read(text), text)


# -- subcommand implementations ------------------------------------------------


def cmd_gen(args) -> int:
    spec = _group_spec_from_args(args)
    approx = make_base(spec, args.size, seed=args.seed)
    labeling = None
    if args.labels_depth is not None:
        labeling = DyadicLabeling.balanced(args.size, args.labels_depth)
    _write(args.out, fileio.write_approximation(approx, labeling),
           "approximation")
    return 0


def cmd_round(args) -> int:
    v = fileio.read_row_function(_read(args.infile), args.infile)
    w, moved = round_to_permutation(v)
    _write(args.out, fileio.write_permutation(w), "permutation")
    print(f"moved: {moved}")
    print(f"two-norm-squared defect: {Fraction(2 * moved, v.n)} (= 2*{moved}/{v.n})")
    return 0


def cmd_link(args) -> int:
    s1 = fileio.read_matrix_unit_system(_read(args.a), args.a)
    s2 = fileio.read_matrix_unit_system(_read(args.b), args.b)
    p = link_matrix_units(s1, s2)
    _write(args.out, fileio.write_permutation(p), "linking permutation")
    return 0


def cmd_bernoulli(args) -> int:
    approx, _ = fileio.read_approximation(_read(args.infile), args.infile)
    b = bernoulli_extend(approx, args.alphabet, args.mode,
                         samples=args.samples, seed=args.seed,
                         exact_budget=args.exact_budget)
    _write(args.out, fileio.write_approximation(descriptor_approximation(b)),
           "extension descriptor")
    for text in args.cylinder or []:
        c = _parse_cylinder(text)
        t = b.cylinder_trace(c)
        print(f"cylinder [{c.key()}] trace {t.trace} "
              f"(ideal {t.ideal}, injectivity {t.injectivity_fraction})")
        if args.equivariance:
            g = Word.from_text(args.equivariance)
            d = b.equivariance_defect(g, c)
            print(f"equivariance defect under [{g.to_text()}]: {d}")
    return 0


def cmd_wreath(args) -> int:
    src = _load_source(args.infile)
    if not isinstance(src, BernoulliApproximation):
        raise ConfigError("wreath needs a Bernoulli extension descriptor "
                          "(build one with the bernoulli subcommand)")
    f_elements = [Word.from_text(t) for t in (args.f_elements or "e").split(",")]
    if args.lamps:
        lamp_spec = builtin_table_spec(args.lamps.split(":", 1)[1]) \
            if args.lamps.startswith("table:") else None
        if lamp_spec is None:
            raise ConfigError("--lamps must name a builtin table, e.g. table:z4")
        lamps = make_base(lamp_spec, args.lamps_size or len(lamp_spec.table))
        out = wreath_general(src, lamps, f_elements)
    else:
        out = wreath_z2(src, f_elements)
    _write(args.out, fileio.write_approximation(out), "wreath approximation")
    for i, name in enumerate(out.gen_names):
        from .perms import fixed_fraction
        print(f"trace {name}: {fixed_fraction(out.gens[i])}")
    return 0


def cmd_amalgam(args) -> int:
    left = _load_source(args.left)
    right = _load_source(args.right)
    if not isinstance(left, ActionApproximation) or \
            not isinstance(right, ActionApproximation):
        raise ConfigError("amalgam needs labeled actions on both sides "
                          "(generate with --labels-depth)")
    h_left = [Word.from_text(t) for t in args.h_left.split(",")] \
        if args.h_left else []
    h_right = [Word.from_text(t) for t in args.h_right.split(",")] \
        if args.h_right else []
    res = amalgam_glue(left, right, h_left, h_right)
    _write(args.out, fileio.write_approximation(res.action.approx,
                                                res.action.labeling),
           "glued approximation")
    for i, r in enumerate(res.h_residuals):
        print(f"h-residual {i + 1}: {r}")
    print(f"label residual: {res.label_residual}")
    return 0


def cmd_product(args) -> int:
    action = _load_source(args.action)
    if not isinstance(action, ActionApproximation):
        raise ConfigError("--action must carry a labeling")
    free_part, _ = fileio.read_approximation(_read(args.free), args.free)
    out = product_action(action, free_part)
    _write(args.out, fileio.write_approximation(out.approx, out.labeling),
           "product action")
    return 0


def cmd_zaction(args) -> int:
    if args.auto == "odometer":
        auto = odometer(args.depth)
    elif args.auto.startswith("swap:"):
        _, a, b = args.auto.split(":")
        auto = cell_swap(args.depth, int(a), int(b))
    else:
        raise ConfigError(f"unknown automorphism {args.auto!r}")
    act = integer_action_approx(auto, args.n, args.p)
    _write(args.out, fileio.write_approximation(act.approx, act.labeling),
           "integer action")
    return 0


def cmd_treeing(args) -> int:
    action = _load_source(args.infile)
    if not isinstance(action, ActionApproximation):
        raise ConfigError("treeing needs a labeled action file")
    supports = []
    for text in args.support or []:
        supports.append(tuple(int(t) for t in text.split()))
    fam = treeing_restrict(action, supports)
    if args.out_prefix:
        for j, m in enumerate(fam.maps):
            path = f"{args.out_prefix}{j}.soficpinj"
            Path(path).write_text(fileio.write_partial_injection(m))
            print(f"wrote partial injection to {path}")
    for text in args.word or []:
        # groupoid words are taken literally (no free reduction)
        letters = [(abs(int(t)) - 1, 1 if int(t) > 0 else -1)
                   for t in text.replace(",", " ").split()]
        ev = fam.evaluate(letters)
        print(f"word [{text}]: domain {fam.domain_fraction(letters)} "
              f"trace {fam.trace(letters)} pairs {len(ev)}")
    return 0


def cmd_stats(args) -> int:
    src = _load_source(args.infile)
    if isinstance(src, SoficApproximation):
        raise ConfigError("stats need a labeled action or Bernoulli "
                          "extension descriptor")
    s = local_stats(src, args.radius, mode=args.mode, samples=args.samples,
                    seed=args.seed, pad=args.pad)
    _write(args.out, fileio.write_stats(s), "statistics")
    if args.report_dir:
        outdir = Path(args.report_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        target = _target_stats(args.target, args.radius) if args.target else None
        (outdir / "classes.csv").write_text(report.stats_csv(s, target))
        report.render_stats_figure(s, str(outdir / "classes.png"), target=target)
        print(f"wrote report to {outdir}")
    return 0


def cmd_compare(args) -> int:
    s1 = fileio.read_stats(_read(args.a), args.a)
    s2 = fileio.read_stats(_read(args.b), args.b)
    sup, tv = stats_distance(s1, s2)
    print(f"sup {float(sup):.10g}")
    print(f"tv {float(tv):.10g}")
    return 0


def cmd_verify(args) -> int:
    target = _target_stats(args.target, args.radius)
    path = args.candidate
    if path.endswith(".soficstats"):
        candidate = fileio.read_stats(_read(path), path)
    else:
        try:
            candidate = fileio.read_stats(_read(path), path)
        except fileio.FormatError:
            candidate = _load_source(path)
    rep = el_verify(candidate, target, args.radius, args.epsilon,
                    mode=args.mode, samples=args.samples, seed=args.seed,
                    pad=args.pad)
    text = rep.to_text()
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0 if rep.passed else 1


def cmd_report(args) -> int:
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.stats:
        s = fileio.read_stats(_read(args.stats), args.stats)
        target = _target_stats(args.target, s.radius) if args.target else None
        (outdir / "classes.csv").write_text(report.stats_csv(s, target))
        report.render_stats_figure(s, str(outdir / "classes.png"), target=target)
        print(f"wrote classes.csv and classes.png to {outdir}")
    if args.defects:
        approx, _ = fileio.read_approximation(_read(args.defects), args.defects)
        rep = defect_report(approx, args.radius)
        (outdir / "defects.csv").write_text(report.defect_csv(rep))
        report.render_defect_figure(rep, str(outdir / "defects.png"))
        print(f"wrote defects.csv and defects.png to {outdir}")
    return 0


def cmd_run(args) -> int:
    if args.list_presets:
        for name in sorted(PRESETS):
            print(name)
        return 0
    if args.preset:
        cfg = preset(args.preset)
    elif args.config:
        import json
        try:
            cfg = json.loads(_read(args.config))
        except ValueError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
    else:
        raise ConfigError("run needs --config or --preset")
    result = run_pipeline(cfg, args.out)
    gates = result.manifest["gates"]
    for g in gates:
        print(f"gate {g['kind']}: {'PASS' if g['passed'] else 'FAIL'}")
    print(f"artifacts in {result.outdir}")
    return result.status


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="soficlab",
        description="Finite permutation models of group actions: build, "
                    "transform, measure, verify.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a base approximation")
    g.add_argument("--group", required=True,
                   help="integer | cyclic | free | folner | table:<name>")
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--order", type=int, help="cyclic order (default: size)")
    g.add_argument("--rank", type=int, default=2, help="free rank")
    g.add_argument("--box", help="folner box dims, e.g. '4 4'")
    g.add_argument("--seed", type=int)
    g.add_argument("--labels-depth", type=int,
                   help="attach a balanced dyadic labeling")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("round", help="round a row function to a permutation")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_round)

    l = sub.add_parser("link", help="link two compatible matrix unit systems")
    l.add_argument("--a", required=True)
    l.add_argument("--b", required=True)
    l.add_argument("--out")
    l.set_defaults(func=cmd_link)

    b = sub.add_parser("bernoulli", help="extend a base by a symbol space")
    b.add_argument("--in", dest="infile", required=True)
    b.add_argument("--alphabet", type=int, default=2)
    b.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    b.add_argument("--samples", type=int, default=0)
    b.add_argument("--seed", type=int)
    b.add_argument("--exact-budget", type=int, default=16 * 2 ** 16)
    b.add_argument("--cylinder", action="append",
                   help="cylinder query 'word=symbol;word=symbol'")
    b.add_argument("--equivariance", help="word g for the shifted-cylinder "
                                          "defect of each --cylinder")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bernoulli)

    w = sub.add_parser("wreath", help="wreath product over an exact extension")
    w.add_argument("--in", dest="infile", required=True)
    w.add_argument("--f-elements", help="comma-separated words, e.g. 'e,1'")
    w.add_argument("--lamps", help="lamp group, e.g. table:z4 (default: z2)")
    w.add_argument("--lamps-size", type=int)
    w.add_argument("--out")
    w.set_defaults(func=cmd_wreath)

    a = sub.add_parser("amalgam", help="glue two labeled actions")
    a.add_argument("--left", required=True)
    a.add_argument("--right", required=True)
    a.add_argument("--h-left", help="comma-separated subgroup words")
    a.add_argument("--h-right")
    a.add_argument("--out")
    a.set_defaults(func=cmd_amalgam)

    pr = sub.add_parser("product", help="diagonal product with a free part")
    pr.add_argument("--action", required=True)
    pr.add_argument("--free", required=True)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_product)

    z = sub.add_parser("zaction", help="integer action from a cell automorphism")
    z.add_argument("--auto", default="odometer", help="odometer | swap:i:j")
    z.add_argument("--depth", type=int, default=2)
    z.add_argument("--n", type=int, required=True)
    z.add_argument("--p", type=int, default=5)
    z.add_argument("--out")
    z.set_defaults(func=cmd_zaction)

    t = sub.add_parser("treeing", help="restrict generators to supports")
    t.add_argument("--in", dest="infile", required=True)
    t.add_argument("--support", action="append",
                   help="space-separated points (repeatable)")
    t.add_argument("--word", action="append",
                   help="groupoid word to evaluate (repeatable)")
    t.add_argument("--out-prefix")
    t.set_defaults(func=cmd_treeing)

    s = sub.add_parser("stats", help="neighborhood-class statistics")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    s.add_argument("--samples", type=int, default=0)
    s.add_argument("--seed", type=int)
    s.add_argument("--pad", action="store_true",
                   help="pad missing generators with identities")
    s.add_argument("--target", help="stats file or oracle:<group>:<alphabet> "
                                    "for the report")
    s.add_argument("--report-dir", help="write CSV and figure here")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    c = sub.add_parser("compare", help="sup and tv distance of two stats files")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("verify", help="verify candidate stats against a target")
    v.add_argument("--candidate", required=True,
                   help="stats file or approximation/extension file")
    v.add_argument("--target", required=True,
                   help="stats file or oracle:<group>:<alphabet>")
    v.add_argument("--radius", type=int, required=True)
    v.add_argument("--epsilon", type=float, required=True)
    v.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    v.add_argument("--samples", type=int, default=0)
    v.add_argument("--seed", type=int)
    v.add_argument("--pad", action="store_true")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    re = sub.add_parser("report", help="render CSV tables and figures")
    re.add_argument("--stats", help="stats file to render")
    re.add_argument("--target", help="stats file or oracle:<...> to compare")
    re.add_argument("--defects", help="approximation file for a defect report")
    re.add_argument("--radius", type=int, default=2,
                    help="defect report radius")
    re.add_argument("--out-dir", required=True)
    re.set_defaults(func=cmd_report)

    ru = sub.add_parser("run", help="run a pipeline config or preset")
    ru.add_argument("--config")
    ru.add_argument("--preset")
    ru.add_argument("--list-presets", action="store_true")
    ru.add_argument("--out", default="soficlab-out")
    ru.set_defaults(func=cmd_run)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, fileio.FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
