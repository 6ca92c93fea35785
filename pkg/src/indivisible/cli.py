"""Command-line driver: run a construction from a JSON config, verify stored traces, export DOT.

A trace file is JSON-lines: a ``{"header": ...}`` line holding the resolved
config, one line per stage record, and for some constructions a closing
``{"final": ...}`` line.  ``verify`` rebuilds everything it checks from those
lines (plus edge queries against the oracle named in the header); it never
re-runs the construction.

Exit status: 0 when every check passes, 1 on an invariant violation, 2 on a
config, trace or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import cameron, gadget, kforest, normalizer, random_graph, recpart
from .dsl import ExpressionError
from .graphs import ExtensionPair, has_extension_witness, stage_prefix
from .machines import AdversaryRegistry, RegistryError, registry_from_json
from .oracles import OracleSpecError, canonical_random, oracle_from_spec, unpair1

CONSTRUCTIONS = ("normalize", "kforest", "recpart", "gadget", "cameron", "random-checks")


class ConfigError(ValueError):
    """Bad config, trace or suite name; maps to exit status 2."""


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# -- configs -----------------------------------------------------------------

@dataclass
class RunConfig:
    construction: str
    horizon: int
    oracle: dict | None = None
    registry: list | None = None
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "construction": self.construction,
            "horizon": self.horizon,
            "oracle": self.oracle,
            "registry": self.registry,
            "params": self.params,
        }

    def build_oracle(self):
        if self.oracle is None:
            raise ConfigError(f"{self.construction} needs an 'oracle'")
        try:
            return oracle_from_spec(self.oracle)
        except (OracleSpecError, ExpressionError) as exc:
            raise ConfigError(str(exc)) from None

    def build_registry(self) -> AdversaryRegistry:
        try:
            return registry_from_json(self.registry or [])
        except RegistryError as exc:
            raise ConfigError(str(exc)) from None


def config_from_json(data: dict, base_dir: Path | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    construction = data.get("construction")
    if construction not in CONSTRUCTIONS:
        raise ConfigError(f"unknown construction {construction!r}; expected one of {', '.join(CONSTRUCTIONS)}")
    horizon = data.get("horizon")
    if not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1:
        raise ConfigError(f"horizon must be an integer >= 1, got {horizon!r}")
    registry = data.get("registry")
    if isinstance(registry, str):
        path = Path(registry) if base_dir is None else base_dir / registry
        try:
            registry = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"registry file {registry}: {exc}") from None
    if registry is not None and not isinstance(registry, list):
        raise ConfigError("registry must be a list of adversary specs")
    params = data.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    cfg = RunConfig(construction, horizon, data.get("oracle"), registry, dict(params))
    # Resolve eagerly so that malformed specs fail before anything runs.
    if cfg.oracle is not None:
        cfg.build_oracle()
    if cfg.registry is not None:
        cfg.build_registry()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_json(data, path.parent)


# -- stored traces -------------------------------------------------------------

@dataclass
class StoredTrace:
    config: RunConfig
    records: list[dict]
    final: dict | None = None

    def lines(self) -> list[str]:
        out = [dumps({"header": self.config.to_json()})]
        out.extend(dumps(r) for r in self.records)
        if self.final is not None:
            out.append(dumps({"final": self.final}))
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def parse_trace(text: str) -> StoredTrace:
    rows = []
    for i, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"trace line {i}: {exc}") from None
    if not rows or not isinstance(rows[0], dict) or "header" not in rows[0]:
        raise ConfigError("trace has no header line")
    cfg = config_from_json(rows[0]["header"])
    final = None
    if len(rows) > 1 and isinstance(rows[-1], dict) and set(rows[-1]) == {"final"}:
        final = rows.pop()["final"]
    return StoredTrace(cfg, rows[1:], final)


def load_trace(path: str | Path) -> StoredTrace:
    try:
        return parse_trace(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


# -- checks and suites ---------------------------------------------------------

@dataclass
class Check:
    name: str
    violations: list[dict]
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"name": self.name, "status": "pass" if self.passed else "fail",
                "violations": self.violations, "notes": self.notes}


def _grouped(names: dict[str, set[str]], violations: list) -> list[Check]:
    out = []
    for suite, invariants in names.items():
        out.append(Check(suite, [v.to_json() for v in violations if v.invariant in invariants]))
    return out


# normalize ---------------------------------------------------------------------

def _normalizer_state(tr: StoredTrace) -> normalizer.NormalizerState:
    oracle = tr.config.build_oracle()
    horizon = tr.records[-1]["s"]
    f: dict[int, int] = {}
    history, records, h_edges = [], [], set()
    for rec in tr.records:
        for k, v in rec["f_delta"].items():
            f[int(k)] = v
        history.append(dict(f))
        edges = [tuple(e) for e in rec["new_edges"]]
        h_edges.update(edges)
        records.append(normalizer.StageRecord(rec["s"], rec["case"], {int(k): v for k, v in rec["f_delta"].items()},
                                              rec["dropped"], edges))
    adj = [0] * (horizon + 1)
    for v in range(horizon + 1):
        for u in range(v):
            if oracle.edge(u, v):
                adj[u] |= 1 << v
                adj[v] |= 1 << u
    return normalizer.NormalizerState(horizon, f, h_edges, history, records, adj)


def _normalize_stages(tr: StoredTrace) -> list[Check]:
    st = _normalizer_state(tr)
    out = []
    # Recorded H-edges must be the images of G-edges present at that stage.
    for rec, f in zip(st.records, st.history):
        want = sorted(tuple(sorted((f[rec.s], f[y]))) for y in range(rec.s) if st.g_edge(y, rec.s))
        if sorted(rec.new_edges) != want:
            out.append({"invariant": "recorded-edges", "stage": rec.s, "detail": "new_edges differ from G"})
    viol = normalizer.check_stages(st)
    return [Check("stages", [v.to_json() for v in viol] + out)]


def _normalize_limits(tr: StoredTrace) -> list[Check]:
    st = _normalizer_state(tr)
    min_each = int(tr.config.params.get("min_each", 1))
    viol, warnings = normalizer.check_limits(st, min_each)
    return [Check("limits", [v.to_json() for v in viol], warnings)]


# kforest -----------------------------------------------------------------------

def _kforest_replay(tr: StoredTrace) -> list[Check]:
    viol = kforest.check_records(tr.records)
    groups = {
        "cliques": {"clique", "c-clique", "frozen-forever", "fresh-endpoint"},
        "resets": {"reset-soundness", "progress"},
        "bounds": {"c-bound", "base-size"},
    }
    return _grouped(groups, viol)


def _kforest_counts(tr: StoredTrace) -> list[Check]:
    horizon = tr.records[-1]["s"]
    have: dict[int, int] = {}
    for rec in tr.records:
        n = len(rec["base_clique"])
        have[n] = have.get(n, 0) + 1
    want: dict[int, int] = {}
    for s in range(horizon + 1):
        want[unpair1(s) + 1] = want.get(unpair1(s) + 1, 0) + 1
    bad = [{"invariant": "base-counts", "stage": None, "detail": f"K_{n}: {have.get(n, 0)} != {want[n]}"}
           for n in sorted(want) if have.get(n, 0) != want[n]]
    return [Check("base-counts", bad)]


# recpart -----------------------------------------------------------------------

def _rec_trace(tr: StoredTrace) -> recpart.RecTrace:
    if tr.final is None:
        raise ConfigError("recpart trace lacks its final line")
    assignment = {0: tr.records[0]["assign"]}
    inits = []
    for rec in tr.records[1:]:
        assignment[rec["s"]] = rec["assign"]
        inits.extend((rec["s"], e, "higher priority claim") for e in rec["initialized"])
    final = [recpart.RecRequirementState.from_json(d) for d in tr.final["states"]]
    return recpart.RecTrace(tr.records[-1]["s"], assignment, tr.records, inits, final,
                            tr.final.get("registry_names", []))


def _recpart_invariants(tr: StoredTrace) -> list[Check]:
    trace = _rec_trace(tr)
    viol = recpart.check_trace(trace, tr.config.build_oracle())
    groups = {
        "priority": {"priority", "vertex-0", "assignment"},
        "commitment": {"commitment", "d-enrollment"},
        "sigma": {"sigma-length", "sigma-soundness"},
    }
    return _grouped(groups, viol)


def _recpart_diagonalization(tr: StoredTrace) -> list[Check]:
    trace = _rec_trace(tr)
    oracle = tr.config.build_oracle()
    registry = tr.config.build_registry()
    bad, notes = [], []
    for st in trace.records[-1]["states"]:
        if st["satisfied_via"] not in ("S4", "S5"):
            notes.append(f"R_{st['e']}: {st['satisfied_via'] or 'unsatisfied'}")
            continue
        res = recpart.verify_diagonalization(trace, oracle, st["e"], registry)
        notes.append(f"R_{st['e']}: {st['satisfied_via']} {res.verdict}")
        if res.verdict == recpart.VIOLATED:
            bad.append({"invariant": "diagonalization", "stage": trace.horizon,
                        "detail": f"R_{st['e']}: " + "; ".join(res.reasons)})
    return [Check("diagonalization", bad, notes)]


# gadget ------------------------------------------------------------------------

def _gadget_replay(tr: StoredTrace) -> list[Check]:
    viol = gadget.check_records(tr.records)
    groups = {
        "arithmetic": {"stage-arithmetic", "m-increasing"},
        "protection": {"protection"},
        "witnesses": {"witness-fidelity", "fresh-order", "fresh-endpoint"},
        "parameters": {"x-monotone", "x-below-F", "F-size"},
    }
    return _grouped(groups, viol)


# cameron -----------------------------------------------------------------------

def _cameron_case3(tr: StoredTrace) -> list[Check]:
    rec = tr.records[0]
    if rec.get("n") is None:
        return [Check("case3", [], ["no certified failing pair; Case 3 not applicable"])]
    oracle = tr.config.build_oracle()
    p = ExtensionPair.from_json(rec["pair"])
    split = cameron.CutSplit(frozenset(rec["split"]["U0"]), frozenset(rec["split"]["U1"]))
    bound = int(tr.config.params.get("vertex_bound", 8))
    bad, notes = [], []
    for sf in cameron.verify_case3(oracle, p, split, max(bound, tr.config.horizon)):
        notes.append(f"X_{sf.side} fails {sf.pair!r}: {sf.status}")
        if sf.status == "violated":
            bad.append({"invariant": "case3", "stage": None, "detail": sf.detail})
        if sf.pair.size() >= p.size():
            bad.append({"invariant": "case3", "stage": None, "detail": f"inherited pair {sf.pair!r} is not smaller"})
    return [Check("case3", bad, notes)]


# random-checks ---------------------------------------------------------------

def _random_witnesses(tr: StoredTrace) -> list[Check]:
    bad = []
    size = 1 << int(tr.config.params.get("prefix_log", 9))
    prefix = stage_prefix(random_graph.canonical_edge, size - 1)
    count = 0
    for rec in tr.records:
        if "pair" not in rec:
            continue
        count += 1
        p = ExtensionPair.from_json(rec["pair"])
        w = rec["w"]
        if w != random_graph.witness_formula(p) or not random_graph.gab_membership(p, w, random_graph.canonical_edge):
            bad.append({"invariant": "witness-formula", "stage": None, "detail": f"{p!r} -> {w}"})
        if has_extension_witness(prefix, p) is None:
            bad.append({"invariant": "prefix-witness", "stage": None, "detail": f"{p!r} unwitnessed below {size}"})
    return [Check("witnesses", bad, [f"{count} pairs"])]


def _random_isomorphism(tr: StoredTrace) -> list[Check]:
    rec = next((r for r in tr.records if "iso" in r), None)
    if rec is None:
        raise ConfigError("trace holds no partial isomorphism")
    oracle = tr.config.build_oracle()
    iso = random_graph.PartialIso({int(k): v for k, v in rec["iso"].items()})
    k = int(tr.config.params.get("iso_k", 16))
    bad = [{"invariant": "partial-iso", "stage": None, "detail": f"pair {u},{v} not preserved"}
           for u, v in iso.violations(random_graph.canonical_edge, oracle.edge)]
    if not (set(range(k)) <= iso.domain and set(range(k)) <= iso.range):
        bad.append({"invariant": "partial-iso", "stage": None, "detail": f"0..{k - 1} not covered on both sides"})
    return [Check("isomorphism", bad)]


Suite = Callable[[StoredTrace], list[Check]]

SUITES: dict[str, dict[str, Suite]] = {
    "normalize": {"stages": _normalize_stages, "limits": _normalize_limits},
    "kforest": {"replay": _kforest_replay, "counts": _kforest_counts},
    "recpart": {"invariants": _recpart_invariants, "diagonalization": _recpart_diagonalization},
    "gadget": {"replay": _gadget_replay},
    "cameron": {"case3": _cameron_case3},
    "random-checks": {"witnesses": _random_witnesses, "isomorphism": _random_isomorphism},
}


def suite_names() -> set[str]:
    """Top-level suites plus the check names inside them, all accepted by ``verify --suite``."""
    names = {"all"}
    for table in SUITES.values():
        names.update(table)
    names.update({"cliques", "resets", "bounds", "base-counts", "priority", "commitment", "sigma",
                  "arithmetic", "protection", "witnesses", "parameters"})
    return names


def run_suite(tr: StoredTrace, suite: str = "all") -> list[Check]:
    if suite not in suite_names():
        raise ConfigError(f"unknown suite {suite!r}")
    table = SUITES[tr.config.construction]
    if suite == "all" or suite in table:
        chosen = table.values() if suite == "all" else [table[suite]]
        out: list[Check] = []
        for fn in chosen:
            out.extend(fn(tr))
        return out
    # A check name inside one of this construction's suites.
    for fn in table.values():
        checks = fn(tr)
        hit = [c for c in checks if c.name == suite]
        if hit:
            return hit
    raise ConfigError(f"suite {suite!r} does not apply to a {tr.config.construction} trace")


def report(tr: StoredTrace, checks: list[Check], extra: dict | None = None) -> dict:
    return {
        "construction": tr.config.construction,
        "horizon": tr.config.horizon,
        "status": "pass" if all(c.passed for c in checks) else "fail",
        "checks": [c.to_json() for c in checks],
        **({"summary": extra} if extra else {}),
    }


# -- running constructions -------------------------------------------------------

@dataclass
class RunResult:
    trace: StoredTrace
    graph: dict  # {"size", "edges", optional "labels", extra keys}
    summary: dict
    extra_files: dict[str, str] = field(default_factory=dict)


def _budget(cfg: RunConfig, key: str, default: int) -> int:
    return int(cfg.params.get(key, default))


def _run_normalize(cfg: RunConfig) -> RunResult:
    st = normalizer.normalize_run(cfg.build_oracle(), cfg.horizon)
    records = [r.to_json() for r in st.records]
    labels = {v: str(x) for x, v in st.f_map.items()}
    graph = {"size": max(st.f_map.values()) + 1, "edges": sorted(list(e) for e in st.h_edges),
             "f": {str(k): v for k, v in sorted(st.f_map.items())}, "labels": labels,
             "vertices": sorted(st.f_map.values())}
    return RunResult(StoredTrace(cfg, records), graph, {"h_edges": len(st.h_edges)})


def _run_kforest(cfg: RunConfig) -> RunResult:
    registry = cfg.build_registry()
    tr = kforest.diag_run(registry, cfg.horizon)
    edges = sorted(list(e) for e in tr.edges())
    summary = {"vertices": tr.size, "resets": len(tr.finished_log), "counts": {}}
    for e, name in enumerate(tr.registry_names):
        per = {}
        for side in (0, 1):
            per[str(side)] = [kforest.count_finished(tr, e, side, n, registry).count for n in range(1, 6)]
        summary["counts"][name] = per
    finished = dumps([fz.to_json() for fz in tr.finished_log]) + "\n"
    return RunResult(StoredTrace(cfg, tr.records), {"size": tr.size, "edges": edges}, summary,
                     {"finished_log.json": finished})


def _run_recpart(cfg: RunConfig) -> RunResult:
    oracle = cfg.build_oracle()
    registry = cfg.build_registry()
    lookahead = cfg.params.get("lookahead")
    tr = recpart.rec_run(oracle, registry, cfg.horizon, _budget(cfg, "dovetail_budget", 256),
                         None if lookahead is None else int(lookahead))
    final = {"states": [st.to_json() for st in tr.final], "registry_names": tr.registry_names}
    g = stage_prefix(oracle, cfg.horizon)
    tail = int(cfg.params.get("stable_tail", 10))
    summary = {
        "endings": {name: tr.final[e].satisfied_via for e, name in enumerate(tr.registry_names)},
        "stable_tail": {name: v for name, v in zip(tr.registry_names, recpart.stable_tail(tr, tail).values())},
        "injuries": {str(e): d for e, d in recpart.injury_summary(tr).items()},
    }
    graph = {"size": g.size, "edges": [list(e) for e in g.edge_list()],
             "labels": {v: f"{v}:X{tr.assignment[v]}" for v in range(g.size)}}
    return RunResult(StoredTrace(cfg, tr.records, final), graph, summary)


def _gadget_phi(cfg: RunConfig) -> gadget.PhiPredicate:
    spec = cfg.params.get("phi")
    if not isinstance(spec, dict) or "expr" not in spec:
        raise ConfigError("gadget needs params.phi = {expr, y_bound}")
    try:
        phi = gadget.PhiPredicate.from_json(spec)
    except ExpressionError as exc:
        raise ConfigError(str(exc)) from None
    for _ in range(int(cfg.params.get("preprocess", 0))):
        phi = gadget.preprocess(phi)
    return phi


def _run_gadget(cfg: RunConfig) -> RunResult:
    phi = _gadget_phi(cfg)
    n_cap = _budget(cfg, "n_cap", 4)
    try:
        st = gadget.gadget_run(phi, cfg.horizon, n_cap, _budget(cfg, "pair_budget", 10000))
    except gadget.PreconditionError as exc:
        raise ConfigError(str(exc)) from None
    summary: dict = {"m_s": st.m_s, "x": {str(n): st.x_params[n] for n in range(1, n_cap + 1) if n in st.x_params},
                     "stabilized": {}}
    for n in range(1, n_cap + 1):
        summary["stabilized"][str(n)] = gadget.stabilization(st.records, n)
    if phi.y_bound is not None:
        top = int(cfg.params.get("pair_top", 60))
        xb = int(cfg.params.get("x_search_bound", 50))
        summary["correspondence"] = [gadget.correspondence(st, n, top, xb) for n in range(1, n_cap + 1)]
    graph = {"size": st.m_s + 1, "edges": [list(e) for e in st.edges()]}
    return RunResult(StoredTrace(cfg, st.records), graph, summary)


def _run_cameron(cfg: RunConfig) -> RunResult:
    oracle = cfg.build_oracle()
    n_max = _budget(cfg, "n_max", 3)
    bound = _budget(cfg, "vertex_bound", 8)
    rep = cameron.least_failing_pair(oracle, n_max, bound, search_bound=_budget(cfg, "search_bound", 1024))
    rec = rep.to_json()
    labels = {}
    if rep:
        split = cameron.CutSplit.canonical(rep.pair)
        rec["split"] = {"U0": sorted(split.u0), "U1": sorted(split.u1)}
        sides = {v: cameron.case3_membership(oracle, rep.pair, split, v) for v in range(cfg.horizon + 1)}
        rec["X1"] = sorted(v for v, i in sides.items() if i == 1)
        labels = {v: f"{v}:X{i}" for v, i in sides.items()}
    g = stage_prefix(oracle, cfg.horizon)
    graph = {"size": g.size, "edges": [list(e) for e in g.edge_list()], "labels": labels}
    return RunResult(StoredTrace(cfg, [rec]), graph, {"n": rec.get("n")})


def _run_random(cfg: RunConfig) -> RunResult:
    top = _budget(cfg, "pair_vertices", 7)
    records = []
    for n in range(top + 2):
        for p in cameron.pairs_of_size(n, top):
            records.append({"pair": p.to_json(), "w": random_graph.witness_formula(p)})
    k = _budget(cfg, "iso_k", 16)
    iso = random_graph.back_and_forth(canonical_random(),
                                      cfg.build_oracle(), k, _budget(cfg, "bound", 2 * k))
    records.append({"iso": {str(v): w for v, w in sorted(iso.pairs.items())}})
    g = stage_prefix(random_graph.canonical_edge, k - 1)
    return RunResult(StoredTrace(cfg, records), {"size": g.size, "edges": [list(e) for e in g.edge_list()]},
                     {"pairs": len(records) - 1, "iso_size": len(iso.pairs)})


RUNNERS: dict[str, Callable[[RunConfig], RunResult]] = {
    "normalize": _run_normalize,
    "kforest": _run_kforest,
    "recpart": _run_recpart,
    "gadget": _run_gadget,
    "cameron": _run_cameron,
    "random-checks": _run_random,
}


def execute(cfg: RunConfig) -> tuple[RunResult, dict]:
    """Run ``cfg``, then check the resulting trace exactly as ``verify`` would."""
    result = RUNNERS[cfg.construction](cfg)
    stored = parse_trace(result.trace.text())
    checks = run_suite(stored, "all")
    return result, report(stored, checks, result.summary)


# -- DOT -------------------------------------------------------------------------

def to_dot(graph: dict, name: str = "G") -> str:
    labels = {int(k): v for k, v in graph.get("labels", {}).items()}
    vertices = graph.get("vertices", range(graph["size"]))
    lines = [f"graph {name} {{"]
    for v in vertices:
        lines.append(f'  {v} [label="{labels[v]}"];' if v in labels else f"  {v};")
    for u, v in graph["edges"]:
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_from_trace(tr: StoredTrace) -> dict:
    c = tr.config.construction
    if c == "normalize":
        st = _normalizer_state(tr)
        return {"size": max(st.f_map.values()) + 1, "vertices": sorted(st.f_map.values()),
                "edges": sorted(list(e) for e in st.h_edges),
                "labels": {v: str(x) for x, v in st.f_map.items()}}
    if c == "kforest":
        edges = []
        comps = kforest.components_from_records(tr.records)
        for comp in comps:
            edges.extend([u, v] for i, u in enumerate(comp) for v in comp[i + 1:])
        return {"size": max(max(comp) for comp in comps) + 1, "edges": sorted(edges)}
    if c == "gadget":
        edges = sorted([a, w["v"]] for rec in tr.records for w in rec["witnesses"] for a in w["A"])
        return {"size": tr.records[-1]["m_s"] + 1, "edges": edges}
    if c == "recpart":
        g = stage_prefix(tr.config.build_oracle(), tr.records[-1]["s"])
        labels = {r["s"]: f"{r['s']}:X{r['assign']}" for r in tr.records}
        return {"size": g.size, "edges": [list(e) for e in g.edge_list()], "labels": labels}
    if c == "cameron":
        g = stage_prefix(tr.config.build_oracle(), tr.config.horizon)
        rec = tr.records[0]
        x1 = set(rec.get("X1", []))
        labels = {v: f"{v}:X{int(v in x1)}" for v in range(g.size)} if rec.get("n") else {}
        return {"size": g.size, "edges": [list(e) for e in g.edge_list()], "labels": labels}
    k = int(tr.config.params.get("iso_k", 16))
    g = stage_prefix(random_graph.canonical_edge, k - 1)
    return {"size": g.size, "edges": [list(e) for e in g.edge_list()]}


# -- entry points ----------------------------------------------------------------

def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.horizon is not None:
        if args.horizon < 1:
            raise ConfigError("--horizon must be >= 1")
        cfg.horizon = args.horizon
    if args.budget is not None:
        key = {"recpart": "dovetail_budget", "gadget": "pair_budget", "cameron": "search_bound",
               "random-checks": "bound"}.get(cfg.construction)
        if key is None:
            raise ConfigError(f"--budget has no meaning for {cfg.construction}")
        cfg.params[key] = args.budget
    if args.n_cap is not None:
        if cfg.construction != "gadget":
            raise ConfigError("--n-cap only applies to the gadget")
        cfg.params["n_cap"] = args.n_cap
    return cfg


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    result, rep = execute(cfg)
    out = Path(args.out) if args.out else Path("out") / Path(args.config).stem
    _write(out / "trace.jsonl", result.trace.text())
    _write(out / "graph.json", dumps(result.graph) + "\n")
    _write(out / "graph.dot", to_dot(result.graph))
    _write(out / "report.json", dumps(rep) + "\n")
    for name, text in result.extra_files.items():
        _write(out / name, text)
    print(f"{cfg.construction}: {rep['status']} ({out})")
    for c in rep["checks"]:
        print(f"  {c['name']}: {c['status']}")
    return 0 if rep["status"] == "pass" else 1


def cmd_verify(args: argparse.Namespace) -> int:
    tr = load_trace(args.trace)
    checks = run_suite(tr, args.suite)
    rep = report(tr, checks)
    text = dumps(rep) + "\n"
    if args.out:
        _write(Path(args.out), text)
    sys.stdout.write(text)
    return 0 if rep["status"] == "pass" else 1


def cmd_dump_dot(args: argparse.Namespace) -> int:
    tr = load_trace(args.trace)
    text = to_dot(graph_from_trace(tr))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indivisible", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a construction from a JSON config")
    p.add_argument("config")
    p.add_argument("--horizon", type=int)
    p.add_argument("--budget", type=int, help="dovetail / pair / search budget, depending on the construction")
    p.add_argument("--n-cap", type=int, dest="n_cap", help="largest gadget strategy that acts")
    p.add_argument("--out", help="output directory (default out/<config stem>)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check a stored trace without re-running it")
    p.add_argument("trace")
    p.add_argument("--suite", default="all")
    p.add_argument("--out", help="also write the report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dump-dot", help="write the final graph of a stored trace as DOT")
    p.add_argument("trace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, RegistryError, OracleSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
