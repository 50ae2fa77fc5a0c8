"""Command line: verify, core, probe, thick, project, density.

A run is described by a JSON config (or a built-in fixture) and emits a JSON
report that embeds the resolved config.  Exit codes: 0 pass, 1 negative
verdict, 2 config error, 3 computation error.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .bttree import vertex_literal
from .errors import ConfigError, NoValidLabeling, PadicCirclesError
from .literals import parse_matrix, parse_scalar, scalar_literal
from .orbits import (EVIDENCE_LABEL, Circle, circle_limit_census, classify_orbit, project_subtree,
                     thickness_sample)
from .padic import DEFAULT_PRECISION, ExtContext, density_check
from .pgl2 import identity
from .schottky import (SchottkyGroup, core_graph, dumps, group_summary, high_branched_check,
                       quadruple_matrix, verify_schottky)

EXIT_PASS, EXIT_NEGATIVE, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3

FIXTURES = ("example-2.5", "nonexample-2.5")

_TOP_KEYS = {"prime", "c", "precision", "group", "budgets", "probe", "thick", "density", "output"}
_GROUP_KEYS = {"quadruples", "matrices", "names", "offsets"}
_BUDGET_KEYS = {"depth", "wordlen", "radius", "window", "cap"}
_PROBE_KEYS = {"circle"}
_THICK_KEYS = {"frames", "K", "shells"}
_DENSITY_KEYS = {"units"}
_OUTPUT_KEYS = {"out", "dot"}

DEFAULT_BUDGETS = {"depth": 10, "wordlen": 3, "radius": 6, "window": 4, "cap": 400_000}


@dataclass
class RunConfig:
    prime: int
    c: int
    precision: int
    group: dict
    budgets: dict = field(default_factory=lambda: dict(DEFAULT_BUDGETS))
    probe: dict = field(default_factory=dict)
    thick: dict = field(default_factory=dict)
    density: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        return {
            "prime": self.prime, "c": self.c, "precision": self.precision, "group": self.group,
            "budgets": self.budgets, "probe": self.probe, "thick": self.thick, "density": self.density,
        }


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _int(obj, key, where, lo=None):
    val = obj[key]
    if not isinstance(val, int) or isinstance(val, bool):
        raise ConfigError(f"{where}.{key} must be an integer")
    if lo is not None and val < lo:
        raise ConfigError(f"{where}.{key} must be >= {lo}")
    return val


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a raw config document; nothing is computed here."""
    _check_keys(raw, _TOP_KEYS, "config")
    for key in ("prime", "c", "group"):
        if key not in raw:
            raise ConfigError(f"config is missing '{key}'")
    prime = _int(raw, "prime", "config", 3)
    c = _int(raw, "c", "config")
    precision = _int(raw, "precision", "config", 8) if "precision" in raw else DEFAULT_PRECISION
    group = raw["group"]
    _check_keys(group, _GROUP_KEYS, "group")
    quads = group.get("quadruples", [])
    mats = group.get("matrices", [])
    if not isinstance(quads, list) or not isinstance(mats, list) or not quads + mats:
        raise ConfigError("group needs a non-empty list of quadruples and/or matrices")
    for q in quads:
        if not (isinstance(q, list) and len(q) == 4 and isinstance(q[2], int)):
            raise ConfigError(f"quadruple must be [a, b, k, u] with integer k: {q!r}")
    n = len(quads) + len(mats)
    if "names" in group and (not isinstance(group["names"], list) or len(group["names"]) != n):
        raise ConfigError("group.names must list one name per generator")
    if "offsets" in group and (not isinstance(group["offsets"], list) or len(group["offsets"]) != n):
        raise ConfigError("group.offsets must list one offset per generator")
    budgets = dict(DEFAULT_BUDGETS)
    if "budgets" in raw:
        _check_keys(raw["budgets"], _BUDGET_KEYS, "budgets")
        for key in raw["budgets"]:
            budgets[key] = _int(raw["budgets"], key, "budgets", 0)
    sections = {}
    for name, keys in (("probe", _PROBE_KEYS), ("thick", _THICK_KEYS), ("density", _DENSITY_KEYS),
                       ("output", _OUTPUT_KEYS)):
        sec = raw.get(name, {})
        _check_keys(sec, keys, name)
        sections[name] = copy.deepcopy(sec)
    return RunConfig(prime, c, precision, copy.deepcopy(group), budgets, **sections)


def load_fixture(name: str) -> dict:
    if name not in FIXTURES:
        raise ConfigError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    text = resources.files("padic_circles").joinpath("fixtures", f"{name}.json").read_text()
    return json.loads(text)


def load_config(path: str | None = None, fixture: str | None = None) -> RunConfig:
    if (path is None) == (fixture is None):
        raise ConfigError("give exactly one of --config or --fixture")
    if fixture is not None:
        return config_from_dict(load_fixture(fixture))
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return config_from_dict(raw)


def context(cfg: RunConfig) -> ExtContext:
    try:
        return ExtContext(cfg.prime, cfg.c, cfg.precision)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def generators(cfg: RunConfig, ctx: ExtContext) -> list:
    gens = []
    for a, b, k, u in cfg.group.get("quadruples", []):
        gens.append(quadruple_matrix(ctx, parse_scalar(a, ctx), parse_scalar(b, ctx), k, parse_scalar(u, ctx)))
    for m in cfg.group.get("matrices", []):
        gens.append(parse_matrix(m, ctx))
    return gens


def build_group(cfg: RunConfig, ctx: ExtContext | None = None, skip_verify: bool = False) -> SchottkyGroup:
    """Schottky group of the config.  ``skip_verify`` trusts the configured
    offsets (default -1 each) instead of searching the window."""
    ctx = ctx or context(cfg)
    gens = generators(cfg, ctx)
    offsets = cfg.group.get("offsets")
    if skip_verify and offsets is None:
        offsets = [-1] * len(gens)
    return verify_schottky(ctx, gens, cfg.budgets["window"], offsets=offsets, names=cfg.group.get("names"))


# --------------------------------------------------------------------------
# commands; each returns (exit code, report, {filename: dot text})
# --------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, skip_verify: bool = False):
    ctx = context(cfg)
    try:
        group = build_group(cfg, ctx, skip_verify)
    except NoValidLabeling as exc:
        report = {"command": "verify", "schottky": False, "reason": str(exc), "violation": exc.violation}
        return EXIT_NEGATIVE, report, {}
    core = core_graph(group, cfg.budgets["wordlen"])
    hb = high_branched_check(group, core)
    p = group.p
    report = {
        "command": "verify",
        "schottky": True,
        "group": group_summary(group),
        "core": core.to_json(),
        "highly_branched": {
            "verdict": hb.verdict,
            "condition1": hb.condition1,
            "condition2": hb.condition2,
            "min_degree": hb.min_degree,
            "degree_bound": hb.degree_bound,
            "witness_bound": hb.witness_bound,
            "low_degree": [vertex_literal(v, p) for v in hb.low_degree],
            "f_prime": [vertex_literal(v, p) for v in hb.f_prime],
            "pair_witnesses": [[vertex_literal(a, p), vertex_literal(b, p), vertex_literal(w, p) if w else None]
                               for a, b, w in hb.pair_witnesses],
            "density_witness": hb.density_witness,
        },
    }
    return (EXIT_PASS if hb.verdict else EXIT_NEGATIVE), report, {"core.dot": core.to_dot()}


def cmd_core(cfg: RunConfig, skip_verify: bool = False):
    group = build_group(cfg, skip_verify=skip_verify)
    core = core_graph(group, cfg.budgets["wordlen"])
    report = {"command": "core", "group": group_summary(group), "core": core.to_json()}
    return EXIT_PASS, report, {"core.dot": core.to_dot()}


def _circle(cfg: RunConfig, ctx: ExtContext) -> Circle:
    rows = cfg.probe.get("circle")
    return Circle(parse_matrix(rows, ctx) if rows is not None else identity(ctx))


def cmd_probe(cfg: RunConfig, skip_verify: bool = False):
    ctx = context(cfg)
    group = build_group(cfg, ctx, skip_verify)
    core = core_graph(group, cfg.budgets["wordlen"])
    circle = _circle(cfg, ctx)
    b = cfg.budgets
    rep = classify_orbit(circle, group, core, b["depth"], b["wordlen"] + 1, b["cap"])
    census = circle_limit_census(circle, group, core, b["depth"], b["cap"])
    report = {"command": "probe", "orbit": rep.to_json(), "rays_by_depth": census.tally}
    code = EXIT_NEGATIVE if rep.verdict == "Empty" else EXIT_PASS
    return code, report, {}


def cmd_thick(cfg: RunConfig, skip_verify: bool = False):
    ctx = context(cfg)
    group = build_group(cfg, ctx, skip_verify)
    core = core_graph(group, cfg.budgets["wordlen"])
    K = cfg.thick.get("K", 2)
    lo, hi = cfg.thick.get("shells", [-8, 8])
    frames = cfg.thick.get("frames")
    if frames is None:
        mats = [(group.names[i], group.data[i].conjugator) for i in range(min(3, group.rank))]
    else:
        mats = [(f"frame{i + 1}", parse_matrix(m, ctx)) for i, m in enumerate(frames)]
    out = []
    for name, g in mats:
        w = thickness_sample(g, group, core, K, range(lo, hi + 1), cfg.budgets["depth"])
        out.append({
            "frame": name,
            "shells": {str(k): str(v) for k, v in sorted(w.shells.items())},
            "misses": w.misses,
        })
    ok = all(not f["misses"] for f in out)
    report = {"command": "thick", "K": K, "depth": cfg.budgets["depth"], "frames": out, "label": EVIDENCE_LABEL}
    return (EXIT_PASS if ok else EXIT_NEGATIVE), report, {}


def cmd_project(cfg: RunConfig, skip_verify: bool = False):
    ctx = context(cfg)
    group = build_group(cfg, ctx, skip_verify)
    core = core_graph(group, cfg.budgets["wordlen"])
    circle = _circle(cfg, ctx)
    b = cfg.budgets
    proj = project_subtree(circle.rep, group, core, b["radius"], b["wordlen"] + 1, b["cap"])
    report = {"command": "project", "projection": proj.to_json(group.p)}
    return EXIT_PASS, report, {"projection.dot": proj.to_dot(group.p)}


def cmd_density(cfg: RunConfig, skip_verify: bool = False):
    ctx = context(cfg)
    units = cfg.density.get("units")
    items = []
    if units is not None:
        items = [(text, parse_scalar(text, ctx)) for text in units]
    else:
        group = build_group(cfg, ctx, skip_verify)
        items = [(group.names[i], d.unit) for i, d in enumerate(group.data)]
    out = []
    for name, u in items:
        w = density_check(u)
        out.append({"unit": name, "value": scalar_literal(u), "dense": w.dense, "zeta_order": w.zeta_order,
                    "theta_valuation": w.theta_valuation, "generator_ok": w.generator_ok,
                    "rotation_ok": w.rotation_ok})
    ok = all(e["dense"] for e in out) if units is not None else any(e["dense"] for e in out)
    return (EXIT_PASS if ok else EXIT_NEGATIVE), {"command": "density", "units": out}, {}


COMMANDS = {
    "verify": cmd_verify,
    "core": cmd_core,
    "probe": cmd_probe,
    "thick": cmd_thick,
    "project": cmd_project,
    "density": cmd_density,
}


def _summary(report: dict) -> str:
    cmd = report["command"]
    if cmd == "verify" and not report["schottky"]:
        return f"schottky: no ({report['reason']})"
    if cmd == "verify":
        hb = report["highly_branched"]
        return (f"schottky: yes; core vertices: {len(report['core']['vertices'])}; "
                f"highly branched: {'yes' if hb['verdict'] else 'no'}")
    if cmd == "core":
        core = report["core"]
        return f"core vertices: {len(core['vertices'])}; diameter: {core['diameter']}"
    if cmd == "probe":
        o = report["orbit"]
        return f"verdict: {o['verdict']}; rays: {o['ray_count']}; case: {o['case_tag']} ({o['label']})"
    if cmd == "thick":
        misses = sum(len(f["misses"]) for f in report["frames"])
        return f"frames: {len(report['frames'])}; shell misses: {misses}"
    if cmd == "project":
        pr = report["projection"]
        return f"case: {pr['case_tag']} ({pr['description']}); projected vertices: {len(pr['vertices'])}"
    return "; ".join(f"{e['unit']}: {'dense' if e['dense'] else 'not dense'}" for e in report["units"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padic-circles", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="JSON run config")
        src.add_argument("--fixture", choices=FIXTURES, help="built-in fixture")
        sp.add_argument("--depth", type=int)
        sp.add_argument("--wordlen", type=int)
        sp.add_argument("--radius", type=int)
        sp.add_argument("--precision", type=int)
        sp.add_argument("--out", help="directory for the JSON report and DOT files")
        sp.add_argument("--dot", action="store_true", help="write DOT files (needs --out)")
        sp.add_argument("--skip-verify", action="store_true", help="trust configured offsets")
        sp.add_argument("--json", action="store_true", help="print the full JSON report")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.fixture)
        for key in ("depth", "wordlen", "radius"):
            val = getattr(args, key)
            if val is not None:
                if val < 0:
                    raise ConfigError(f"--{key} must be non-negative")
                cfg.budgets[key] = val
        if args.precision is not None:
            cfg.precision = args.precision
        ctx = context(cfg)
        generators(cfg, ctx)  # surfaces literal errors as config errors
        for m in [cfg.probe["circle"]] if "circle" in cfg.probe else []:
            parse_matrix(m, ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PadicCirclesError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, report, dots = COMMANDS[args.command](cfg, args.skip_verify)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PadicCirclesError as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    report["config"] = cfg.resolved()
    text = dumps(report)
    out = args.out or cfg.output.get("out")
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / f"{args.command}.json").write_text(text)
        if args.dot or cfg.output.get("dot"):
            for name, body in dots.items():
                (path / name).write_text(body)
    stdout.write(text if args.json else _summary(report) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
