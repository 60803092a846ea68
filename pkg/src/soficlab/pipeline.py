"""Deterministic construction pipelines: config validation, execution,
artifact serialization, gates and run manifests.

A pipeline config is a JSON document naming a base approximation, a chain of
construction stages, optional statistics and defect reports, and gates.
Every randomized stage names a seed, so re-running a manifest reproduces
byte-identical artifacts.  Stage outputs are typed (approx, action,
bernoulli, treeing) and the chain is type-checked before execution.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import fileio, report
from .approx import (ActionApproximation, SoficApproximation, defect_report,
                     make_base)
from .bernoulli import (BernoulliApproximation, bernoulli_extend,
                        descriptor_approximation)
from .constructions import (cell_swap, integer_action_approx, odometer,
                            product_action, treeing_restrict,
                            z_amalgam_23_preset)
from .groups import GroupSpec, Word, builtin_table_spec
from .localstats import bernoulli_oracle, el_verify, local_stats
from .perms import DyadicLabeling
from .wreath import wreath_general, wreath_z2


class ConfigError(ValueError):
    """Raised when a pipeline config fails validation (CLI exit code 2)."""


def _base_spec(desc: dict) -> GroupSpec:
    group = desc.get("group")
    if group is None:
        raise ConfigError("base descriptor needs a 'group' field")
    if group == "integer":
        return GroupSpec.integer()
    if group == "cyclic":
        if "order" not in desc:
            raise ConfigError("cyclic base needs 'order'")
        return GroupSpec.cyclic(int(desc["order"]))
    if group == "free":
        return GroupSpec.free(int(desc.get("rank", 2)))
    if group == "folner":
        if "box" not in desc:
            raise ConfigError("folner base needs 'box'")
        return GroupSpec.folner_box([int(b) for b in desc["box"]])
    if group.startswith("table:"):
        return builtin_table_spec(group.split(":", 1)[1])
    raise ConfigError(f"unknown base group {group!r}")


def build_base(desc: dict) -> SoficApproximation:
    spec = _base_spec(desc)
    if "size" not in desc:
        raise ConfigError("base descriptor needs 'size'")
    try:
        return make_base(spec, int(desc["size"]), seed=desc.get("seed"))
    except ValueError as exc:
        raise ConfigError(str(exc))


_STAGE_TYPES = {
    "label": ("approx", "action"),
    "bernoulli": ("approx", "bernoulli"),
    "wreath-z2": ("bernoulli", "approx"),
    "wreath": ("bernoulli", "approx"),
    "product": ("action", "action"),
    "treeing": ("action", "treeing"),
}
_SOURCE_STAGES = {"zaction": "action", "amalgam-z23": "action"}


def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    chain = cfg.get("chain", [])
    if not isinstance(chain, list):
        raise ConfigError("'chain' must be a list of stages")
    kind = None
    start = 0
    if chain and chain[0].get("op") in _SOURCE_STAGES:
        if "base" in cfg:
            raise ConfigError("source stages take no base")
        kind = _SOURCE_STAGES[chain[0]["op"]]
        start = 1
    elif "base" in cfg:
        _base_spec(cfg["base"])
        if "size" not in cfg["base"]:
            raise ConfigError("base descriptor needs 'size'")
        kind = "approx"
    else:
        raise ConfigError("config needs a 'base' or a source stage")
    for stage in chain[start:]:
        op = stage.get("op")
        if op not in _STAGE_TYPES:
            raise ConfigError(f"unknown stage op {op!r}")
        want, out = _STAGE_TYPES[op]
        if kind != want:
            raise ConfigError(
                f"stage {op!r} expects a {want} input, chain carries {kind}")
        kind = out
    for st in cfg.get("chain", []):
        if st.get("op") == "bernoulli" and st.get("mode") == "sampled":
            if "seed" not in st and "seed" not in cfg:
                raise ConfigError("sampled bernoulli stage needs a seed")
    stats = cfg.get("stats")
    if stats is not None:
        if kind not in ("action", "bernoulli"):
            raise ConfigError(f"stats need an action or bernoulli result, "
                              f"chain carries {kind}")
        if stats.get("mode", "exact") == "sampled" and (
                "seed" not in stats and "seed" not in cfg):
            raise ConfigError("sampled stats need a seed")
    for gate in cfg.get("gates", []):
        if gate.get("kind") not in ("verify", "defect", "amalgam-residual"):
            raise ConfigError(f"unknown gate kind {gate.get('kind')!r}")
        if gate.get("kind") == "verify" and stats is None:
            raise ConfigError("verify gate needs a stats section")


def _words(texts) -> List[Word]:
    return [Word.from_text(t) for t in texts]


@dataclass
class RunResult:
    status: int
    manifest: dict
    outdir: Path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(cfg: dict, outdir) -> RunResult:
    """Execute a validated pipeline config, writing artifacts and a manifest.

    Exit status: 0 if all gates pass, 1 if a gate fails.  Validation errors
    raise ConfigError before anything is written.
    """
    validate_config(cfg)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    default_seed = cfg.get("seed")
    manifest: dict = {
        "name": cfg.get("name", "run"),
        "config": cfg,
        "version": _package_version(),
        "stages": [],
        "gates": [],
        "artifacts": {},
    }
    t_run = time.perf_counter()

    def emit(name: str, text: str):
        path = outdir / name
        path.write_text(text)
        manifest["artifacts"][name] = _sha256(path)
        return path

    state_kind: Optional[str] = None
    value = None
    labeling: Optional[DyadicLabeling] = None
    amalgam_residuals: Optional[Tuple[Fraction, ...]] = None

    chain = list(cfg.get("chain", []))
    if "base" in cfg:
        t0 = time.perf_counter()
        desc = dict(cfg["base"])
        desc.setdefault("seed", default_seed)
        value = build_base(desc)
        state_kind = "approx"
        emit("base.soficapx", fileio.write_approximation(value))
        manifest["stages"].append({"op": "base", "seconds": time.perf_counter() - t0})

    for i, stage in enumerate(chain):
        t0 = time.perf_counter()
        op = stage["op"]
        seed = stage.get("seed", default_seed)
        if op == "zaction":
            depth = int(stage.get("depth", 2))
            auto = stage.get("auto", "odometer")
            if auto == "odometer":
                cell_auto = odometer(depth)
            elif auto.startswith("swap:"):
                _, a, b = auto.split(":")
                cell_auto = cell_swap(depth, int(a), int(b))
            else:
                raise ConfigError(f"unknown automorphism {auto!r}")
            value = integer_action_approx(cell_auto, int(stage["n"]),
                                          int(stage.get("p", 5)))
            state_kind = "action"
        elif op == "amalgam-z23":
            if seed is None:
                raise ConfigError("amalgam-z23 needs a seed")
            res = z_amalgam_23_preset(int(stage.get("n", 256)), seed=int(seed),
                                      m=int(stage.get("m", 16)),
                                      depth=int(stage.get("depth", 2)))
            value = res.action
            amalgam_residuals = res.h_residuals
            state_kind = "action"
            emit("amalgam-residuals.txt",
                 "".join(f"h{i + 1} {r}\n" for i, r in enumerate(res.h_residuals))
                 + f"label {res.label_residual}\n")
        elif op == "label":
            labeling = DyadicLabeling.balanced(value.n, int(stage.get("depth", 2)))
            value = ActionApproximation(value, labeling)
            state_kind = "action"
        elif op == "bernoulli":
            value = bernoulli_extend(
                value, int(stage.get("alphabet", 2)),
                stage.get("mode", "exact"),
                samples=int(stage.get("samples", 0)),
                seed=seed if stage.get("mode") == "sampled" else None,
                exact_budget=int(stage.get("exact_budget", 16 * 2 ** 16)))
            state_kind = "bernoulli"
            emit(f"{i:02d}-bernoulli.soficapx",
                 fileio.write_approximation(descriptor_approximation(value)))
        elif op == "wreath-z2":
            value = wreath_z2(value, _words(stage.get("f_elements", ["e"])))
            state_kind = "approx"
            emit(f"{i:02d}-wreath.soficapx", fileio.write_approximation(value))
        elif op == "wreath":
            lamps = build_base(stage["lamps"])
            value = wreath_general(value, lamps,
                                   _words(stage.get("f_elements", ["e"])))
            state_kind = "approx"
            emit(f"{i:02d}-wreath.soficapx", fileio.write_approximation(value))
        elif op == "product":
            free_part = build_base(stage["free"])
            value = product_action(value, free_part)
            state_kind = "action"
        elif op == "treeing":
            supports = [tuple(s) for s in stage["supports"]]
            value = treeing_restrict(value, supports)
            state_kind = "treeing"
            for j, m in enumerate(value.maps):
                emit(f"{i:02d}-treeing-{j}.soficpinj",
                     fileio.write_partial_injection(m))
        else:
            raise ConfigError(f"unknown stage op {op!r}")
        manifest["stages"].append({"op": op, "seconds": time.perf_counter() - t0})

    if state_kind == "action":
        emit("result.soficapx",
             fileio.write_approximation(value.approx, value.labeling))
    elif state_kind == "approx":
        emit("result.soficapx", fileio.write_approximation(value))

    stats_obj = None
    if cfg.get("stats") is not None:
        st = cfg["stats"]
        t0 = time.perf_counter()
        stats_obj = local_stats(value, int(st["radius"]),
                                mode=st.get("mode", "exact"),
                                samples=int(st.get("samples", 0)),
                                seed=st.get("seed", default_seed),
                                pad=bool(st.get("pad", False)))
        emit("stats.soficstats", fileio.write_stats(stats_obj))
        manifest["stages"].append({"op": "stats",
                                   "seconds": time.perf_counter() - t0})

    defects_obj = None
    if cfg.get("defects") is not None:
        t0 = time.perf_counter()
        approx = value.approx if isinstance(value, ActionApproximation) else value
        if isinstance(approx, BernoulliApproximation):
            approx = approx.base
        defects_obj = defect_report(approx, int(cfg["defects"].get("radius", 1)))
        emit("defects.txt", defects_obj.to_text())
        emit("defects.csv", report.defect_csv(defects_obj))
        report.render_defect_figure(defects_obj, str(outdir / "defects.png"))
        manifest["artifacts"]["defects.png"] = _sha256(outdir / "defects.png")
        manifest["stages"].append({"op": "defects",
                                   "seconds": time.perf_counter() - t0})

    status = 0
    target_stats = None
    for gate in cfg.get("gates", []):
        kind = gate["kind"]
        if kind == "verify":
            tgt = gate["target"]
            target_stats = bernoulli_oracle(_base_spec(tgt),
                                            int(tgt.get("alphabet", 2)),
                                            int(tgt["radius"]))
            rep = el_verify(stats_obj, target_stats, int(tgt["radius"]),
                            float(gate["epsilon"]))
            emit("verify.txt", rep.to_text())
            manifest["gates"].append({"kind": "verify", "passed": rep.passed,
                                      "sup": rep.sup_distance})
            status = status or (0 if rep.passed else 1)
        elif kind == "defect":
            if defects_obj is None:
                raise ConfigError("defect gate needs a 'defects' section")
            ok = True
            if "max_relator_defect" in gate:
                ok &= (defects_obj.max_relator_defect
                       <= Fraction(str(gate["max_relator_defect"])))
            if "max_word_trace" in gate:
                ok &= (defects_obj.max_word_trace
                       <= Fraction(str(gate["max_word_trace"])))
            manifest["gates"].append({"kind": "defect", "passed": bool(ok)})
            status = status or (0 if ok else 1)
        elif kind == "amalgam-residual":
            if amalgam_residuals is None:
                raise ConfigError("amalgam-residual gate needs an amalgam stage")
            ok = max(amalgam_residuals, default=Fraction(0)) <= \
                Fraction(str(gate.get("max", 0)))
            manifest["gates"].append({"kind": "amalgam-residual",
                                      "passed": bool(ok)})
            status = status or (0 if ok else 1)

    if stats_obj is not None:
        emit("stats.csv", report.stats_csv(stats_obj, target_stats))
        report.render_stats_figure(stats_obj, str(outdir / "stats.png"),
                                   target=target_stats)
        manifest["artifacts"]["stats.png"] = _sha256(outdir / "stats.png")

    manifest["seconds_total"] = time.perf_counter() - t_run
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                     default=str) + "\n")
    return RunResult(status, manifest, outdir)


def _package_version() -> str:
    from . import __version__
    return __version__


PRESETS: Dict[str, dict] = {
    "bernoulli-z-r1": {
        "name": "bernoulli-z-r1",
        "seed": 7,
        "base": {"group": "integer", "size": 1024},
        "chain": [{"op": "bernoulli", "alphabet": 2, "mode": "sampled",
                   "samples": 100000}],
        "stats": {"radius": 1, "mode": "sampled", "samples": 100000},
        "gates": [{"kind": "verify",
                   "target": {"group": "integer", "alphabet": 2, "radius": 1},
                   "epsilon": 0.02}],
    },
    "wreath-z2-smoke": {
        "name": "wreath-z2-smoke",
        "base": {"group": "table:z4", "size": 4},
        "chain": [{"op": "bernoulli", "alphabet": 2, "mode": "exact"},
                  {"op": "wreath-z2", "f_elements": ["e", "1"]}],
        "defects": {"radius": 1},
        "gates": [{"kind": "defect", "max_relator_defect": 0,
                   "max_word_trace": "1/2"}],
    },
    "amalgam-z23": {
        "name": "amalgam-z23",
        "seed": 1,
        "chain": [{"op": "amalgam-z23", "n": 256, "m": 16, "depth": 2}],
        "stats": {"radius": 1, "mode": "exact"},
        "defects": {"radius": 2},
        "gates": [{"kind": "amalgam-residual", "max": 0},
                  {"kind": "defect", "max_relator_defect": 0}],
    },
}


def preset(name: str) -> dict:
    try:
        return json.loads(json.dumps(PRESETS[name]))
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; "
                          f"choose from {sorted(PRESETS)}") from None
