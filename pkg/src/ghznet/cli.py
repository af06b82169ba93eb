"""Command-line experiment runner.

Experiments are described by an INI-style file::

    [experiment]
    kind = rate-vs-p
    seed = 7
    output = rate.csv

    [topology]
    width = 100
    height = 100

    [protocol]
    n = 4
    trials = 500

    [sweep]
    p_grid = 0.3:1.0:0.05
    distances = 10, 40

Every key is validated before anything runs. Output CSVs start with one
comment line holding the resolved configuration and seed, floats are
written with 9 significant digits, and results do not depend on
``--threads``.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytics, bounds, oracles, percolation, qkd
from .protocol import VARIANTS, ProtocolConfig, count_shared_ghz, estimate_rate, run_cycle, trial_rng
from .topology import (DegreeDistribution, TopologyError, apply_brickwork_coloring,
                       build_configuration_graph, build_square_grid, color_bounded_black,
                       divide_network)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


# --- value parsers ---------------------------------------------------------

def _int(lo=None):
    def parse(text):
        value = int(text.strip())
        if lo is not None and value < lo:
            raise ValueError(f"must be >= {lo}")
        return value
    parse.fmt = str
    return parse


def _float(lo=None, hi=None, open_hi=False):
    def parse(text):
        value = float(text.strip())
        if not math.isfinite(value):
            raise ValueError("must be finite")
        if lo is not None and value < lo:
            raise ValueError(f"must be >= {lo}")
        if hi is not None and (value > hi or (open_hi and value == hi)):
            raise ValueError(f"must be {'<' if open_hi else '<='} {hi}")
        return value
    parse.fmt = lambda v: f"{v:.9g}"
    return parse


def _optional(inner):
    def parse(text):
        return None if text.strip().lower() in ("", "none") else inner(text)
    parse.fmt = lambda v: "none" if v is None else inner.fmt(v)
    return parse


def _choice(*options):
    def parse(text):
        value = text.strip()
        if value not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return value
    parse.fmt = str
    return parse


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be true or false")


_bool.fmt = lambda v: "true" if v else "false"


def _pair(text):
    parts = [int(x) for x in text.replace(" ", "").split(",")]
    if len(parts) != 2:
        raise ValueError("must be 'x, y'")
    return tuple(parts)


_pair.fmt = lambda v: f"{v[0]},{v[1]}"


def _list(item):
    def parse(text):
        values = [item(x) for x in text.split(",") if x.strip()]
        if not values:
            raise ValueError("must list at least one value")
        return values
    parse.fmt = lambda v: ",".join(item.fmt(x) for x in v)
    return parse


def _grid(lo=0.0, hi=1.0):
    """``a, b, c`` or ``start:stop:step`` (stop included); values in ``[lo, hi]``."""
    def parse(text):
        text = text.strip()
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("range needs step > 0 and stop >= start")
            count = int(round((stop - start) / step)) + 1
            values = [round(start + i * step, 12) for i in range(count)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
        if not values:
            raise ValueError("empty grid")
        if any(not math.isfinite(v) or v < lo or v > hi for v in values):
            raise ValueError(f"values must lie in [{lo}, {hi}]")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("values must be strictly increasing")
        return values
    parse.fmt = lambda v: ",".join(f"{x:.9g}" for x in v)
    return parse


def _degree(text):
    name, _, arg = text.strip().partition(":")
    try:
        if name == "constant":
            return ("constant", int(arg))
        if name == "poisson":
            return ("poisson", float(arg))
    except ValueError:
        pass
    raise ValueError("must be 'constant:<d>' or 'poisson:<mean>'")


_degree.fmt = lambda v: f"{v[0]}:{v[1]:g}"


def make_distribution(spec) -> DegreeDistribution:
    name, arg = spec
    return DegreeDistribution.constant(arg) if name == "constant" else DegreeDistribution.poisson(arg)


@dataclass(frozen=True)
class Key:
    parse: object
    default: object
    doc: str


PROB = _float(0.0, 1.0)

TOPOLOGY_KEYS = {
    "topology.type": Key(_choice("grid", "configuration"), "grid", "grid or configuration"),
    "topology.width": Key(_int(1), 100, "grid width"),
    "topology.height": Key(_int(1), 100, "grid height"),
    "topology.consumer_a": Key(_optional(_pair), None, "Alice at 'x, y' (default: left of centre)"),
    "topology.consumer_b": Key(_optional(_pair), None, "Bob at 'x, y' (default: right of centre)"),
    "topology.coloring": Key(_choice("none", "brickwork", "bounded"), "none",
                             "edge colouring: brickwork grid or greedy bounded-black"),
    "topology.divide": Key(_bool, False, "split into four sub-networks"),
    "topology.degree": Key(_degree, ("constant", 4), "configuration degrees, constant:<d> or poisson:<mean>"),
    "topology.nodes": Key(_int(2), 10000, "configuration graph size"),
}

PROTOCOL_KEYS = {
    "protocol.variant": Key(_choice(*VARIANTS), "nGHZ-random", "fusion rule"),
    "protocol.n": Key(_int(1), 4, "fusion size cap"),
    "protocol.p": Key(PROB, 1.0, "link success probability"),
    "protocol.q": Key(PROB, 1.0, "fusion success probability"),
    "protocol.p_star": Key(_optional(_float(0.0, 1.0)), None, "thinning threshold (none = off)"),
    "protocol.trials": Key(_int(1), 1000, "cycles per estimate"),
}

COMMON = {
    "experiment.kind": Key(str, None, "experiment kind"),
    "experiment.seed": Key(_int(0), 0, "master seed"),
    "experiment.output": Key(str, None, "output CSV path (default <kind>.csv)"),
}


def _pick(table, *names):
    return {k: v for k, v in table.items() if k.split(".")[1] in names}


KINDS = {
    "rate-vs-p": (
        "Shared GHZ states per cycle against p on a grid. Columns p, distance, rate, stderr, q, n, variant, trials, seed.",
        {**_pick(TOPOLOGY_KEYS, "width", "height", "consumer_a", "consumer_b", "coloring", "divide"),
         **_pick(PROTOCOL_KEYS, "variant", "n", "q", "p_star", "trials"),
         "sweep.p_grid": Key(_grid(), [0.5, 0.6, 0.7, 0.8, 0.9, 1.0], "link probabilities"),
         "sweep.distances": Key(_optional(_list(_int(1))), None,
                                "consumer separations on the middle row (default: use consumer_a/b)")},
    ),
    "rate-vs-distance": (
        "Rate against consumer separation at fixed p. Same columns as rate-vs-p.",
        {**_pick(TOPOLOGY_KEYS, "width", "height", "coloring", "divide"),
         **_pick(PROTOCOL_KEYS, "variant", "n", "p", "q", "p_star", "trials"),
         "sweep.distances": Key(_list(_int(1)), [10, 20, 40, 80], "consumer separations")},
    ),
    "site-bond-sim": (
        "Monte Carlo site-bond critical curve q_c(p). Columns p, q_c, uncertainty, size, variant, criterion, source.",
        {**_pick(TOPOLOGY_KEYS, "type", "width", "height", "coloring", "degree", "nodes"),
         **_pick(PROTOCOL_KEYS, "variant", "n", "p_star", "trials"),
         "sweep.p_grid": Key(_grid(), [0.5, 0.6, 0.7, 0.8, 0.9, 1.0], "link probabilities"),
         "sweep.tol": Key(_float(1e-4, 0.25), 0.005, "bisection half-width target in q"),
         "sweep.criterion": Key(_choice(*percolation.CRITERIA), None,
                                "spanning (grid default), consumer, or giant (configuration default)"),
         "sweep.thinned": Key(_bool, False, "also apply the running-minimum thinning transform")},
    ),
    "site-bond-analytic": (
        "Generating-function critical curve for a degree distribution. Same columns as site-bond-sim.",
        {**_pick(TOPOLOGY_KEYS, "degree"),
         "protocol.variant": Key(_choice("nGHZ-random", "brickwork"), "nGHZ-random", "fusion rule"),
         **_pick(PROTOCOL_KEYS, "n"),
         "sweep.p_grid": Key(_grid(), [0.1 * i for i in range(1, 11)], "link probabilities"),
         "sweep.thinned": Key(_bool, False, "apply the running-minimum thinning transform")},
    ),
    "bounds-comparison": (
        "Capacity, max-flow and giant-component bounds against simulated 4- and 3-GHZ rates, "
        "with p = eta. Columns eta, capacity, maxflow, gcc_bound, rate_4ghz, rate_3ghz, F, "
        "stderr_4ghz, stderr_3ghz. Consumers default to one hop in from opposite corners.",
        {**_pick(TOPOLOGY_KEYS, "width", "height", "consumer_a", "consumer_b"),
         **_pick(PROTOCOL_KEYS, "q", "trials"),
         "sweep.p_grid": Key(_grid(0.0, 0.999999), [0.1 * i for i in range(1, 10)],
                             "link probabilities (below 1)")},
    ),
    "qkd-sift": (
        "Key sifting on GHZ shares, either simulated on a grid or of a fixed size. Writes the "
        "per-round CSV (m, l, basis_a, basis_b, sifted, key_bit) and a .key hex file beside it.",
        {**_pick(TOPOLOGY_KEYS, "width", "height", "consumer_a", "consumer_b", "divide"),
         **_pick(PROTOCOL_KEYS, "variant", "n", "p", "q", "trials"),
         "qkd.source": Key(_choice("simulation", "fixed"), "simulation",
                           "simulation: shares from protocol cycles; fixed: qkd.shares copies of (m, l)"),
         "qkd.shares": Key(_int(0), 1000, "number of fixed shares"),
         "qkd.m": Key(_int(1), 1, "Alice's qubits per fixed share"),
         "qkd.l": Key(_int(1), 1, "Bob's qubits per fixed share")},
    ),
    "oracle-check": (
        "Exhaustive expected shared-GHZ count against Monte Carlo on a tiny grid. "
        "Columns n, p, q, exact, mc, stderr, z.",
        {"topology.width": Key(_int(1), 2, "grid width"),
         "topology.height": Key(_int(1), 3, "grid height"),
         **_pick(TOPOLOGY_KEYS, "consumer_a", "consumer_b"),
         **_pick(PROTOCOL_KEYS, "trials"),
         "sweep.n_values": Key(_list(_int(1)), [2, 3, 4], "fusion caps"),
         "sweep.p_values": Key(_list(PROB), [0.3, 0.7], "link probabilities"),
         "sweep.q_values": Key(_list(PROB), [0.5, 1.0], "fusion probabilities")},
    ),
}

ORACLE_MAX_EDGES = 12


# --- config loading --------------------------------------------------------

def load_config(text: str, seed: int | None = None) -> dict:
    """Parse and validate a config; returns ``{'section.key': value}`` with defaults filled."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from None
    raw = {f"{s}.{k}": v for s in parser.sections() for k, v in parser.items(s)}
    kind = raw.get("experiment.kind", "").strip()
    if not kind:
        raise ConfigError("experiment.kind", f"missing; valid kinds: {', '.join(KINDS)}")
    if kind not in KINDS:
        raise ConfigError("experiment.kind", f"unknown kind {kind!r}; valid kinds: {', '.join(KINDS)}")
    schema = {**COMMON, **KINDS[kind][1]}
    for key in raw:
        if key not in schema:
            raise ConfigError(key, f"unknown key for {kind}")
    cfg = {"experiment.kind": kind}
    for key, spec in schema.items():
        if key == "experiment.kind":
            continue
        if key in raw:
            try:
                cfg[key] = spec.parse(raw[key])
            except ValueError as exc:
                raise ConfigError(key, f"invalid value {raw[key]!r} ({exc})") from None
        else:
            cfg[key] = spec.default
    if seed is not None:
        if seed < 0:
            raise ConfigError("experiment.seed", "must be >= 0")
        cfg["experiment.seed"] = seed
    if cfg["experiment.output"] is None:
        cfg["experiment.output"] = f"{kind}.csv"
    _cross_check(cfg)
    return cfg


def _cross_check(cfg):
    kind = cfg["experiment.kind"]
    width, height = cfg.get("topology.width"), cfg.get("topology.height")
    if cfg.get("protocol.variant") == "brickwork" and cfg.get("topology.coloring", "brickwork") == "none":
        raise ConfigError("topology.coloring", "brickwork variant needs coloring = brickwork or bounded")
    if cfg.get("topology.divide") and cfg.get("protocol.variant") not in (None, "divided-nGHZ"):
        raise ConfigError("protocol.variant", "divide = true needs variant = divided-nGHZ")
    if cfg.get("protocol.variant") == "divided-nGHZ" and not cfg.get("topology.divide"):
        raise ConfigError("topology.divide", "divided-nGHZ variant needs divide = true")
    for key in ("topology.consumer_a", "topology.consumer_b"):
        xy = cfg.get(key)
        if xy is not None and not (0 <= xy[0] < width and 0 <= xy[1] < height):
            raise ConfigError(key, f"{xy} lies outside the {width}x{height} grid")
    if cfg.get("sweep.distances"):
        for d in cfg["sweep.distances"]:
            if d >= width:
                raise ConfigError("sweep.distances", f"separation {d} does not fit in width {width}")
    if kind == "site-bond-sim" and cfg["topology.type"] == "configuration":
        if cfg["sweep.criterion"] == "spanning":
            raise ConfigError("sweep.criterion", "spanning needs a grid topology")
        if cfg["topology.coloring"] == "brickwork":
            raise ConfigError("topology.coloring", "brickwork colouring needs a grid topology")
    if kind == "oracle-check" and 2 * width * height - width - height > ORACLE_MAX_EDGES:
        raise ConfigError("topology.width", f"oracle grids are limited to {ORACLE_MAX_EDGES} edges")
    if kind == "site-bond-analytic" and cfg["topology.degree"][0] == "constant" and cfg["topology.degree"][1] < 1:
        raise ConfigError("topology.degree", "constant degree must be >= 1")


def header_line(cfg: dict) -> str:
    kind = cfg["experiment.kind"]
    schema = {**COMMON, **KINDS[kind][1]}
    parts = []
    for key in sorted(cfg):
        value = cfg[key]
        fmt = getattr(schema[key].parse, "fmt", str)
        parts.append(f"{key}={'none' if value is None else fmt(value)}")
    return "ghznet " + " ".join(parts)


# --- CSV output ------------------------------------------------------------

def fmt_float(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{float(x):.9g}"


def write_csv(path, header: str, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([v if isinstance(v, (int, str)) and not isinstance(v, bool) else fmt_float(v)
                             for v in row])


RATE_COLUMNS = ["p", "distance", "rate", "stderr", "q", "n", "variant", "trials", "seed"]
CURVE_COLUMNS = ["p", "q_c", "uncertainty", "size", "variant", "criterion", "source"]
BOUNDS_COLUMNS = ["eta", "capacity", "maxflow", "gcc_bound", "rate_4ghz", "rate_3ghz",
                  "F", "stderr_4ghz", "stderr_3ghz"]


def write_rate_csv(path, header, rows):
    write_csv(path, header, RATE_COLUMNS, rows)


def write_curve_csv(path, header, curve: percolation.CriticalCurve):
    m = curve.meta
    rows = ((p, q, u, str(m.get("size", "")), m.get("variant", ""), m.get("criterion", ""),
             m.get("source", "")) for p, q, u in curve.rows())
    write_csv(path, header, CURVE_COLUMNS, rows)


def write_bounds_csv(path, header, rows):
    write_csv(path, header, BOUNDS_COLUMNS, rows)


# --- experiments -----------------------------------------------------------

def _protocol(cfg, **overrides) -> ProtocolConfig:
    fields = {k.split(".")[1]: v for k, v in cfg.items() if k.startswith("protocol.")}
    fields.update(overrides)
    return ProtocolConfig(seed=cfg["experiment.seed"], **fields)


def _default_consumers(width, height, distance=None):
    y = height // 2 if height > 1 else 0
    if distance is None:
        distance = max(1, width // 2)
    ax = (width - distance) // 2
    return (ax, y), (ax + distance, y)


def _grid_topology(cfg, consumers=None):
    w, h = cfg["topology.width"], cfg["topology.height"]
    if consumers is None:
        a, b = _default_consumers(w, h)
        a = cfg.get("topology.consumer_a") or a
        b = cfg.get("topology.consumer_b") or b
    else:
        a, b = consumers
    topo = build_square_grid(w, h, a, b)
    coloring = cfg.get("topology.coloring", "none")
    if coloring == "brickwork":
        topo = apply_brickwork_coloring(topo)
    elif coloring == "bounded":
        topo = color_bounded_black(topo, cfg["protocol.n"], _aux_rng(cfg, 1))
    if cfg.get("topology.divide"):
        topo = divide_network(topo)
    return topo


def _aux_rng(cfg, tag):
    # graph construction and colouring draw from streams disjoint from the trial streams
    return np.random.default_rng(np.random.SeedSequence(cfg["experiment.seed"], spawn_key=(2**32 + tag,)))


def _rate_rows(cfg, workers, p_values, distances):
    rows = []
    w, h = cfg["topology.width"], cfg["topology.height"]
    for p in p_values:
        for d in distances:
            consumers = None if d is None else _default_consumers(w, h, d)
            topo = _grid_topology(cfg, consumers)
            config = _protocol(cfg, p=p)
            est = estimate_rate(topo, config, workers)
            rows.append((p, topo.distance, est.mean, est.stderr, config.q, config.n,
                         config.variant, config.trials, config.seed))
    return rows


def run_rate_vs_p(cfg, out, workers):
    distances = cfg["sweep.distances"] or [None]
    write_rate_csv(out, header_line(cfg), _rate_rows(cfg, workers, cfg["sweep.p_grid"], distances))


def run_rate_vs_distance(cfg, out, workers):
    rows = _rate_rows(cfg, workers, [cfg["protocol.p"]], cfg["sweep.distances"])
    write_rate_csv(out, header_line(cfg), rows)


def run_site_bond_sim(cfg, out, workers):
    if cfg["topology.type"] == "grid":
        topo = _grid_topology(cfg)
        criterion = cfg["sweep.criterion"] or "spanning"
    else:
        dist = make_distribution(cfg["topology.degree"])
        topo = build_configuration_graph(dist, cfg["topology.nodes"], _aux_rng(cfg, 0))
        if cfg["topology.coloring"] == "bounded":
            topo = color_bounded_black(topo, cfg["protocol.n"], _aux_rng(cfg, 1))
        criterion = cfg["sweep.criterion"] or "giant"
    curve = percolation.site_bond_curve_sim(topo, _protocol(cfg), cfg["sweep.p_grid"],
                                            tol=cfg["sweep.tol"], criterion=criterion,
                                            workers=workers)
    if cfg["sweep.thinned"]:
        curve = analytics.thinned_curve(curve)
    write_curve_csv(out, header_line(cfg), curve)


def run_site_bond_analytic(cfg, out, workers):
    ctx = analytics.excess_distribution(make_distribution(cfg["topology.degree"]))
    curve = analytics.analytic_curve(ctx, cfg["protocol.n"], cfg["sweep.p_grid"],
                                     brickwork=cfg["protocol.variant"] == "brickwork")
    if cfg["sweep.thinned"]:
        curve = analytics.thinned_curve(curve)
    write_curve_csv(out, header_line(cfg), curve)


def run_bounds(cfg, out, workers):
    w, h = cfg["topology.width"], cfg["topology.height"]
    # consumers one hop in from opposite corners unless given
    a = cfg["topology.consumer_a"] or (1, 1)
    b = cfg["topology.consumer_b"] or (w - 2, h - 2)
    topo = _grid_topology(cfg, (a, b))
    p_grid = np.array(cfg["sweep.p_grid"])
    sweep = percolation.newman_ziff_bond_sweep(topo, cfg["protocol.trials"], cfg["experiment.seed"], p_grid)
    F = sweep.mean("largest")
    rows = []
    for i, p in enumerate(p_grid):
        r4 = estimate_rate(topo, _protocol(cfg, p=float(p), n=4), workers)
        r3 = estimate_rate(topo, _protocol(cfg, p=float(p), n=3), workers)
        rows.append((p, bounds.ultimate_capacity(p), bounds.max_flow_bound(p), bounds.gcc_bound(F[i]),
                     r4.mean, r3.mean, F[i], r4.stderr, r3.stderr))
    write_bounds_csv(out, header_line(cfg), rows)


def simulated_shares(topo, config: ProtocolConfig, workers=1):
    """GHZ shares ``(m_A, m_B)`` from ``config.trials`` cycles, in trial order."""
    def one(t):
        _, _, comps = run_cycle(topo, config, trial_rng(config.seed, t))
        return count_shared_ghz(comps, topo)[1]

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            per_trial = list(pool.map(one, range(config.trials)))
    else:
        per_trial = [one(t) for t in range(config.trials)]
    return [qkd.GhzShare(m, l) for split in per_trial for m, l in split]


def run_qkd_sift(cfg, out, workers):
    if cfg["qkd.source"] == "fixed":
        shares = [qkd.GhzShare(cfg["qkd.m"], cfg["qkd.l"])] * cfg["qkd.shares"]
    else:
        shares = simulated_shares(_grid_topology(cfg), _protocol(cfg), workers)
    result = qkd.run_qkd(shares, cfg["experiment.seed"])
    qkd.write_key(result, Path(out).with_suffix(".key"), out, header=header_line(cfg))
    print(f"shares={len(shares)} sifted={len(result.key_a)} sift_rate={fmt_float(result.sift_rate)} "
          f"mismatches={result.mismatches}")


def run_oracle_check(cfg, out, workers):
    topo = _grid_topology(cfg)
    rows = []
    for n in cfg["sweep.n_values"]:
        for p in cfg["sweep.p_values"]:
            for q in cfg["sweep.q_values"]:
                exact = oracles.exact_expected_shared(topo, n, p, q)
                est = estimate_rate(topo, _protocol(cfg, n=n, p=p, q=q), workers)
                z = (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0
                rows.append((n, p, q, exact, est.mean, est.stderr, z))
    write_csv(out, header_line(cfg), ["n", "p", "q", "exact", "mc", "stderr", "z"], rows)


RUNNERS = {
    "rate-vs-p": run_rate_vs_p,
    "rate-vs-distance": run_rate_vs_distance,
    "site-bond-sim": run_site_bond_sim,
    "site-bond-analytic": run_site_bond_analytic,
    "bounds-comparison": run_bounds,
    "qkd-sift": run_qkd_sift,
    "oracle-check": run_oracle_check,
}


def run_experiment(cfg: dict, out_dir=None, workers: int = 1) -> Path:
    out = Path(cfg["experiment.output"])
    if out_dir is not None:
        out = Path(out_dir) / out
    out.parent.mkdir(parents=True, exist_ok=True)
    RUNNERS[cfg["experiment.kind"]](cfg, out, workers)
    return out


def list_experiments(kind: str | None = None) -> str:
    if kind is None:
        width = max(map(len, KINDS))
        return "\n".join(f"{name:<{width}}  {KINDS[name][0].split('.')[0]}" for name in KINDS)
    if kind not in KINDS:
        raise ConfigError("kind", f"unknown kind {kind!r}; valid kinds: {', '.join(KINDS)}")
    doc, schema = KINDS[kind]
    lines = [kind, "", doc, "", "keys:"]
    for key, spec in {**COMMON, **schema}.items():
        if key == "experiment.kind":
            continue
        default = spec.default
        fmt = getattr(spec.parse, "fmt", str)
        shown = "none" if default is None else fmt(default)
        lines.append(f"  {key:<22} {spec.doc} [default: {shown}]")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghznet", description="GHZ-fusion network experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int, default=None, help="override experiment.seed")
    run.add_argument("--threads", type=int, default=1, help="worker threads (results do not change)")
    run.add_argument("--out-dir", type=Path, default=None, help="directory for output files")
    lst = sub.add_parser("list", help="list experiment kinds, or document one")
    lst.add_argument("kind", nargs="?")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        try:
            print(list_experiments(args.kind))
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    try:
        if args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        text = args.config.read_text()
        cfg = load_config(text, args.seed)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = run_experiment(cfg, args.out_dir, args.threads)
    except (OSError, ValueError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
