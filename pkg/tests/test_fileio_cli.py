"""Serialization round-trips, CLI subcommands, pipeline runs and reports."""

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from soficlab import (DyadicLabeling, GroupSpec, PartialInjection, Permutation,
                      RowFunction, Word, builtin_table_spec, local_stats,
                      make_base)
from soficlab import fileio
from soficlab.approx import ActionApproximation, SoficApproximation
from soficlab.bernoulli import bernoulli_extend
from soficlab.cli import main
from soficlab.linking import random_compatible_pair
from soficlab.perms import random_permutation
from soficlab.pipeline import ConfigError, preset, run, validate_config


# -- round-trips ---------------------------------------------------------------


def test_permutation_roundtrip():
    rng = random.Random(1)
    for _ in range(20):
        p = random_permutation(rng.randint(1, 50), rng)
        assert fileio.read_permutation(fileio.write_permutation(p)) == p
    # bare format (no header) also parses
    assert fileio.read_permutation("1 0 2").images == (1, 0, 2)


def test_row_function_roundtrip():
    v = RowFunction([0, 0, 2])
    assert fileio.read_row_function(fileio.write_row_function(v)) == v


def test_pinj_roundtrip():
    m = PartialInjection(5, {0: 3, 2: 1})
    assert fileio.read_partial_injection(fileio.write_partial_injection(m)) == m
    empty = PartialInjection.empty(4)
    assert fileio.read_partial_injection(
        fileio.write_partial_injection(empty)) == empty


def test_labeling_roundtrip():
    lab = DyadicLabeling.balanced(10, 2)
    assert fileio.read_labeling(fileio.write_labeling(lab)) == lab


def test_approximation_roundtrip_all_kinds():
    cases = [
        make_base(GroupSpec.integer(), 6),
        make_base(GroupSpec.cyclic(3), 6),
        make_base(builtin_table_spec("z2xz2"), 8),
        make_base(GroupSpec.free(2), 10, seed=4),
        make_base(GroupSpec.folner_box((2, 2)), 4),
    ]
    for approx in cases:
        text = fileio.write_approximation(approx)
        back, lab = fileio.read_approximation(text)
        assert back == approx and lab is None
        assert back.spec.kind == approx.spec.kind
        assert back.spec.relators == approx.spec.relators
    lab = DyadicLabeling.balanced(6, 1)
    text = fileio.write_approximation(cases[0], lab)
    back, lab2 = fileio.read_approximation(text)
    assert lab2 == lab


def test_approximation_roundtrip_presented():
    spec = GroupSpec.presented(2, [Word.from_text("1 1"),
                                   Word.from_text("1 2 -1 -2")],
                               nontrivial=[Word.gen(0)], abelian=True)
    approx = SoficApproximation(spec, 4,
                                [Permutation([1, 0, 3, 2]),
                                 Permutation([2, 3, 0, 1])],
                                gen_names=["a", "b"], provenance=["test run"])
    back, _ = fileio.read_approximation(fileio.write_approximation(approx))
    assert back.spec.relators == spec.relators
    assert back.spec.nontrivial == spec.nontrivial
    assert back.spec.is_abelian()
    assert back.gen_names == ("a", "b")
    assert back.provenance == ("test run",)


def test_mus_roundtrip():
    rng = random.Random(2)
    for _ in range(20):
        s, _ = random_compatible_pair(rng.randint(1, 40), rng)
        assert fileio.read_matrix_unit_system(
            fileio.write_matrix_unit_system(s)) == s


def test_stats_roundtrip_exact_and_sampled():
    act = ActionApproximation(make_base(GroupSpec.integer(), 8),
                              DyadicLabeling.balanced(8, 1))
    s = local_stats(act, 1)
    back = fileio.read_stats(fileio.write_stats(s))
    assert back.masses == s.masses          # exact fractions preserved
    assert back.radius == s.radius and back.mode == s.mode
    sampled = local_stats(act, 1, "sampled", samples=500, seed=3)
    back2 = fileio.read_stats(fileio.write_stats(sampled))
    assert back2.masses == sampled.masses
    assert back2.halfwidths == sampled.halfwidths
    assert back2.seed == 3


def test_format_errors_carry_line_numbers():
    with pytest.raises(fileio.FormatError) as err:
        fileio.read_approximation("soficapx 1\n3 1\n0 1\n", "bad.soficapx")
    assert "bad.soficapx:3" in str(err.value)
    with pytest.raises(fileio.FormatError) as err:
        fileio.read_stats("nope\n", "s.txt")
    assert "s.txt:1" in str(err.value)
    with pytest.raises(fileio.FormatError):
        fileio.read_matrix_unit_system("soficmus 1\n4 1\n2\nunit 9\n")


# -- CLI -----------------------------------------------------------------------


def test_cli_gen_and_round(tmp_path, capsys):
    out = tmp_path / "c8.soficapx"
    assert main(["gen", "--group", "cyclic", "--size", "8",
                 "--out", str(out)]) == 0
    approx, _ = fileio.read_approximation(out.read_text(), str(out))
    assert approx.gens[0].images == (1, 2, 3, 4, 5, 6, 7, 0)

    rowfn = tmp_path / "rowfn.txt"
    rowfn.write_text("0 1 0\n")
    perm_out = tmp_path / "perm.txt"
    assert main(["round", "--in", str(rowfn), "--out", str(perm_out)]) == 0
    captured = capsys.readouterr().out
    assert "moved: 1" in captured
    assert "2*1/3" in captured
    assert fileio.read_permutation(perm_out.read_text()).images == (0, 1, 2)


def test_cli_link(tmp_path):
    rng = random.Random(8)
    s1, s2 = random_compatible_pair(12, rng)
    a = tmp_path / "a.soficmus"
    b = tmp_path / "b.soficmus"
    a.write_text(fileio.write_matrix_unit_system(s1))
    b.write_text(fileio.write_matrix_unit_system(s2))
    out = tmp_path / "p.soficperm"
    assert main(["link", "--a", str(a), "--b", str(b), "--out", str(out)]) == 0
    from soficlab import link_matrix_units
    assert fileio.read_permutation(out.read_text()) == link_matrix_units(s1, s2)


def test_cli_bernoulli_and_wreath(tmp_path, capsys):
    base = tmp_path / "z4.soficapx"
    assert main(["gen", "--group", "table:z4", "--size", "4",
                 "--out", str(base)]) == 0
    desc = tmp_path / "ext.soficapx"
    assert main(["bernoulli", "--in", str(base), "--out", str(desc),
                 "--cylinder", "e=1", "--cylinder", "e=1;1=0"]) == 0
    out = capsys.readouterr().out
    assert "trace 1/2" in out and "trace 1/4" in out
    wr = tmp_path / "wreath.soficapx"
    assert main(["wreath", "--in", str(desc), "--f-elements", "e,1",
                 "--out", str(wr)]) == 0
    out = capsys.readouterr().out
    assert "trace u1: 0" in out
    assert "trace f[e]: 1/2" in out


def test_cli_zaction_product_treeing(tmp_path, capsys):
    act = tmp_path / "act.soficapx"
    assert main(["zaction", "--auto", "odometer", "--depth", "2",
                 "--n", "8", "--p", "5", "--out", str(act)]) == 0
    free = tmp_path / "free.soficapx"
    assert main(["gen", "--group", "integer", "--size", "7",
                 "--out", str(free)]) == 0
    prod = tmp_path / "prod.soficapx"
    assert main(["product", "--action", str(act), "--free", str(free),
                 "--out", str(prod)]) == 0
    approx, lab = fileio.read_approximation(prod.read_text())
    assert approx.n == 280 and lab is not None

    assert main(["treeing", "--in", str(act), "--support", "0 1 2",
                 "--word", "1 -1",
                 "--out-prefix", str(tmp_path / "tf")]) == 0
    out = capsys.readouterr().out
    assert "domain" in out
    assert (tmp_path / "tf0.soficpinj").exists()


def test_cli_amalgam(tmp_path, capsys):
    left = tmp_path / "l.soficapx"
    right = tmp_path / "r.soficapx"
    assert main(["gen", "--group", "integer", "--size", "8",
                 "--labels-depth", "1", "--out", str(left)]) == 0
    assert main(["gen", "--group", "integer", "--size", "8",
                 "--labels-depth", "1", "--out", str(right)]) == 0
    glued = tmp_path / "glued.soficapx"
    assert main(["amalgam", "--left", str(left), "--right", str(right),
                 "--h-left", "1", "--h-right", "1", "--out", str(glued)]) == 0
    out = capsys.readouterr().out
    assert "h-residual 1: 0" in out
    approx, lab = fileio.read_approximation(glued.read_text())
    assert approx.k == 2 and lab is not None


def test_cli_stats_compare_verify(tmp_path, capsys):
    base = tmp_path / "base.soficapx"
    assert main(["gen", "--group", "integer", "--size", "16",
                 "--out", str(base)]) == 0
    desc = tmp_path / "ext.soficapx"
    assert main(["bernoulli", "--in", str(base), "--out", str(desc)]) == 0
    s1 = tmp_path / "s1.soficstats"
    assert main(["stats", "--in", str(desc), "--radius", "1",
                 "--out", str(s1)]) == 0
    s2 = tmp_path / "s2.soficstats"
    assert main(["stats", "--in", str(desc), "--radius", "1",
                 "--out", str(s2), "--report-dir", str(tmp_path / "rd"),
                 "--target", "oracle:integer:2"]) == 0
    assert s1.read_text() == s2.read_text()  # deterministic pipeline
    assert (tmp_path / "rd" / "classes.png").exists()
    assert main(["compare", "--a", str(s1), "--b", str(s2)]) == 0
    out = capsys.readouterr().out
    assert "sup 0" in out and "tv 0" in out

    assert main(["verify", "--candidate", str(s1),
                 "--target", "oracle:integer:2", "--radius", "1",
                 "--epsilon", "0.05"]) == 0
    # failing verification exits 1
    act = tmp_path / "act.soficapx"
    assert main(["gen", "--group", "integer", "--size", "16",
                 "--labels-depth", "1", "--out", str(act)]) == 0
    assert main(["verify", "--candidate", str(act),
                 "--target", "oracle:integer:2", "--radius", "1",
                 "--epsilon", "0.0001"]) == 1


def test_cli_report_renders_figures(tmp_path):
    base = tmp_path / "base.soficapx"
    main(["gen", "--group", "integer", "--size", "8", "--out", str(base)])
    desc = tmp_path / "ext.soficapx"
    main(["bernoulli", "--in", str(desc.with_name('base.soficapx')),
          "--out", str(desc)])
    stats_file = tmp_path / "s.soficstats"
    main(["stats", "--in", str(desc), "--radius", "1", "--out", str(stats_file)])
    outdir = tmp_path / "rep"
    assert main(["report", "--stats", str(stats_file),
                 "--target", "oracle:integer:2",
                 "--defects", str(base), "--radius", "2",
                 "--out-dir", str(outdir)]) == 0
    assert (outdir / "classes.png").stat().st_size > 0
    assert (outdir / "classes.csv").read_text().startswith("encoding,")
    assert (outdir / "defects.png").exists()
    assert (outdir / "defects.csv").exists()


def test_cli_validation_exit_codes(tmp_path, capsys):
    assert main(["gen", "--group", "nope", "--size", "4"]) == 2
    bad = tmp_path / "bad.soficapx"
    bad.write_text("soficapx 1\n4 1\n0 0 1 2\n")
    assert main(["stats", "--in", str(bad), "--radius", "1"]) == 2
    missing = tmp_path / "missing.soficapx"
    assert main(["stats", "--in", str(missing), "--radius", "1"]) == 3
    capsys.readouterr()


def test_cli_run_preset(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", "--preset", "wreath-z2-smoke", "--out", str(out)]) == 0
    captured = capsys.readouterr().out
    assert "gate defect: PASS" in captured
    assert (out / "manifest.json").exists()
    assert (out / "defects.png").exists()
    text = (out / "defects.txt").read_text()
    assert "trace 1/2" in text and "defect 0" in text


def test_cli_run_config_file(tmp_path, capsys):
    cfg = {
        "name": "from-file",
        "base": {"group": "integer", "size": 16},
        "chain": [{"op": "bernoulli", "mode": "exact"}],
        "stats": {"radius": 1, "mode": "exact"},
        "gates": [{"kind": "verify",
                   "target": {"group": "integer", "alphabet": 2, "radius": 1},
                   "epsilon": 0.01}],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "run"
    assert main(["run", "--config", str(path), "--out", str(out)]) == 0
    assert "gate verify: PASS" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--out", str(out)]) == 2
    assert main(["run", "--out", str(out)]) == 2  # neither config nor preset


# -- pipeline -------------------------------------------------------------------


def test_pipeline_validation():
    with pytest.raises(ConfigError):
        validate_config({"chain": []})
    with pytest.raises(ConfigError):
        validate_config({"base": {"group": "integer", "size": 4},
                         "chain": [{"op": "wreath-z2"}]})  # needs bernoulli
    with pytest.raises(ConfigError):
        validate_config({"base": {"group": "integer", "size": 4},
                         "chain": [{"op": "bogus"}]})
    with pytest.raises(ConfigError):
        validate_config({"base": {"group": "integer", "size": 4},
                         "chain": [{"op": "bernoulli", "mode": "sampled",
                                    "samples": 10}]})  # no seed
    validate_config(preset("bernoulli-z-r1"))
    validate_config(preset("wreath-z2-smoke"))
    validate_config(preset("amalgam-z23"))


def test_pipeline_rerun_reproduces_stats_bytes(tmp_path):
    cfg = {
        "name": "repro",
        "seed": 13,
        "base": {"group": "integer", "size": 64},
        "chain": [{"op": "bernoulli", "mode": "sampled", "samples": 2000}],
        "stats": {"radius": 1, "mode": "sampled", "samples": 2000},
    }
    r1 = run(cfg, tmp_path / "a")
    r2 = run(json.loads(json.dumps(r1.manifest["config"])), tmp_path / "b")
    assert (tmp_path / "a" / "stats.soficstats").read_bytes() \
        == (tmp_path / "b" / "stats.soficstats").read_bytes()
    assert r1.status == 0 and r2.status == 0


def test_pipeline_gate_failure_exit_one(tmp_path):
    # a two-element base extension genuinely mismatches the integer oracle
    cfg = {
        "name": "mismatch",
        "base": {"group": "table:z2", "size": 2},
        "chain": [{"op": "bernoulli", "mode": "exact"}],
        "stats": {"radius": 1, "mode": "exact"},
        "gates": [{"kind": "verify",
                   "target": {"group": "integer", "alphabet": 2, "radius": 1},
                   "epsilon": 0.1}],
    }
    result = run(cfg, tmp_path / "fail")
    assert result.status == 1
    assert result.manifest["gates"][0]["passed"] is False


def test_pipeline_amalgam_preset(tmp_path):
    result = run(preset("amalgam-z23"), tmp_path / "am")
    assert result.status == 0
    residuals = (tmp_path / "am" / "amalgam-residuals.txt").read_text()
    assert "h1 0" in residuals
    assert (tmp_path / "am" / "stats.png").exists()
    assert (tmp_path / "am" / "stats.csv").exists()


def test_pipeline_zaction_product_treeing_stages(tmp_path):
    cfg = {
        "name": "zaction-chain",
        "chain": [{"op": "zaction", "auto": "odometer", "depth": 1,
                   "n": 4, "p": 3},
                  {"op": "product", "free": {"group": "integer", "size": 5}},
                  {"op": "treeing", "supports": [[0, 1, 2]]}],
    }
    result = run(cfg, tmp_path / "zc")
    assert result.status == 0
    assert (tmp_path / "zc" / "02-treeing-0.soficpinj").exists()
    cfg2 = {
        "name": "label-chain",
        "base": {"group": "integer", "size": 8},
        "chain": [{"op": "label", "depth": 1}],
        "stats": {"radius": 1, "mode": "exact"},
    }
    result2 = run(cfg2, tmp_path / "lb")
    assert result2.status == 0
    stats = fileio.read_stats((tmp_path / "lb" / "stats.soficstats").read_text())
    assert stats.total() == 1


def test_extension_descriptor_roundtrip(tmp_path):
    base = make_base(GroupSpec.integer(), 16)
    b = bernoulli_extend(base, 2, "exact")
    from soficlab.cli import _load_source
    tagged = SoficApproximation(
        base.spec, base.n, base.gens,
        provenance=(f"bernoulli alphabet=2 mode=exact samples=0 seed=None",))
    path = tmp_path / "ext.soficapx"
    path.write_text(fileio.write_approximation(tagged))
    loaded = _load_source(str(path))
    assert loaded.alphabet == 2 and loaded.mode == "exact"
    assert loaded.base == base
