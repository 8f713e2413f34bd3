"""Command-line front door for the package.

Subcommands: solve (exact optimum by enumeration), relax (LP relaxation and
recovery check), certify (dual certificate search at the exact optimum),
clusterability (dip diagnostics over one or more instances), generate
(synthetic instance files), experiment (the batch harness). Data goes to
stdout or the -o file; everything human-oriented goes to stderr. Exit codes:
0 success, 1 domain failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .bench_io import floyd_warshall, generate_ball, generate_uniform, \
    parse_pmed, prefix_subsample, profile_series, resolve_weights, \
    rows_to_csv, run_experiment
from .certificates import search_certificate
from .clusterability import classify_collection, clusterability_sample, \
    dip_pvalue, dip_statistic
from .errors import OrdmedError
from .exact import recovery_status, solve_enumeration
from .formulations import build_bep, build_ot
from .instance import Instance, PointSet, read_instance, write_instance

_WEIGHT_GRAMMAR = "median | center | ksum:K | centdian:G | file:PATH"


@dataclass(frozen=True)
class CliConfig:
    """One validated invocation: the subcommand plus every tunable flag."""

    subcommand: str
    instances: tuple[str, ...] = ()
    pmed: tuple[str, ...] = ()
    weights: tuple[str, ...] = ()
    p: tuple[int, ...] = ()
    seed: int = 0
    bootstrap: int = 1000
    output: str | None = None
    closest_assignment: bool = False
    subsample: int | None = None
    eps: float | None = None
    strict: bool = False
    sample_mode: str = "auto"
    formulation: str = "bep"
    json_lines: bool = False
    jobs: int = 1
    include_times: bool = False
    profile_dir: str | None = None
    generator: str | None = None
    m: int | None = None
    clusters: int | None = None
    radius: float = 0.1
    separation: float = 1.0
    dim: int = 2


def _weight_spec(text: str) -> str:
    """Grammar check only; range checks against m happen at build time."""
    name, _, arg = text.partition(":")
    ok = (name in ("median", "center") and not arg)
    if name == "ksum":
        ok = arg == "auto" or arg.lstrip("+-").isdigit()
    if name == "centdian":
        try:
            float(arg)
            ok = True
        except ValueError:
            ok = False
    if name == "file":
        ok = bool(arg)
    if not ok:
        raise argparse.ArgumentTypeError(
            f"bad weight spec {text!r}; grammar: {_WEIGHT_GRAMMAR}")
    return text


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordmed",
        description="Ordered median location: exact solving, LP relaxations, "
                    "recovery certificates, and clusterability diagnostics.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, multi_instance=False):
        if multi_instance:
            sp.add_argument("--instance", action="append", default=[],
                            metavar="PATH",
                            help="instance file (repeatable); matrix format "
                                 "`m p` or coordinate format `m n p`")
        else:
            sp.add_argument("--instance", required=True, metavar="PATH",
                            help="instance file: matrix format `m p` or "
                                 "coordinate format `m n p`")
        sp.add_argument("--weights", type=_weight_spec, metavar="SPEC",
                        action="append" if multi_instance else "store",
                        default=[] if multi_instance else None,
                        help=f"weight family spec: {_WEIGHT_GRAMMAR} "
                             "(default: weights stored in the file, else median)")
        sp.add_argument("--subsample", type=_positive_int, metavar="M",
                        help="keep only the first M points (deterministic prefix)")
        sp.add_argument("-o", "--output", metavar="PATH",
                        help="write data here instead of stdout")
        sp.add_argument("--json", action="store_true", dest="json_lines",
                        help="emit JSON instead of plain text")

    sp = sub.add_parser("solve", help="exact optimum by subset enumeration")
    common(sp)
    sp.add_argument("--p", type=_positive_int, help="number of centers "
                    "(default: the file's declared p)")

    sp = sub.add_parser("relax", help="LP relaxation value and recovery check")
    common(sp)
    sp.add_argument("--p", type=_positive_int, help="number of centers "
                    "(default: the file's declared p)")
    sp.add_argument("--formulation", choices=("bep", "ot"), default="bep",
                    help="LP shape: sorting rows (bep) or tail sums (ot)")
    sp.add_argument("--closest-assignment", action="store_true",
                    help="attach the optional closest-assignment rows")

    sp = sub.add_parser("certify", help="search a dual certificate at the optimum")
    common(sp)
    sp.add_argument("--p", type=_positive_int, help="number of centers "
                    "(default: the file's declared p)")
    sp.add_argument("--strict", action="store_true",
                    help="demand strict inequalities by a positive margin")
    sp.add_argument("--eps", type=float,
                    help="strictness margin (default: 1e-6 * (1 + max distance))")

    sp = sub.add_parser("clusterability",
                        help="dip statistic, p-value, and collection labels")
    common(sp, multi_instance=True)
    sp.add_argument("--bootstrap", type=_positive_int, default=1000,
                    metavar="B", help="uniform resamples for the p-value")
    sp.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    sp.add_argument("--sample-mode", choices=("auto", "distances", "mds"),
                    default="auto", help="1-D sample: raw distances, 1-D "
                    "projection, or size-based auto choice")

    sp = sub.add_parser("generate", help="write a synthetic instance file")
    sp.add_argument("generator", choices=("ball", "uniform"),
                    help="clustered balls or a uniform cube")
    sp.add_argument("--m", type=_positive_int, required=True,
                    help="number of points")
    sp.add_argument("--clusters", type=_positive_int, default=2,
                    help="ball generator: number of clusters")
    sp.add_argument("--radius", type=float, default=0.1,
                    help="ball generator: ball radius")
    sp.add_argument("--sep", type=float, default=1.0, dest="separation",
                    help="ball generator: minimum distance between cluster centers")
    sp.add_argument("--dim", type=_positive_int, default=2,
                    help="coordinate dimension")
    sp.add_argument("--seed", type=int, default=0, help="generator seed")
    sp.add_argument("--p", type=_positive_int,
                    help="declared center count (default: clusters for ball, 1 "
                         "for uniform)")
    sp.add_argument("-o", "--output", metavar="PATH",
                    help="write the instance here instead of stdout")

    sp = sub.add_parser("experiment", help="batch harness over instance files")
    sp.add_argument("--instance", action="append", default=[], metavar="PATH",
                    help="instance file (repeatable)")
    sp.add_argument("--pmed", action="append", default=[], metavar="PATH",
                    help="benchmark edge-list file (repeatable), completed by "
                         "all-pairs shortest paths")
    sp.add_argument("--weights", type=_weight_spec, action="append",
                    default=[], metavar="SPEC",
                    help=f"weight family spec, repeatable: {_WEIGHT_GRAMMAR} "
                         "(default: median)")
    sp.add_argument("--p", type=_positive_int, action="append", default=[],
                    help="center count, repeatable (default: 2)")
    sp.add_argument("--subsample", type=_positive_int, metavar="M",
                    help="keep only the first M points of every instance")
    sp.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    sp.add_argument("--bootstrap", type=_positive_int, default=1000,
                    metavar="B", help="uniform resamples for the p-value")
    sp.add_argument("--jobs", type=_positive_int, default=1,
                    help="worker threads for the row pool")
    sp.add_argument("--include-times", action="store_true",
                    help="fill the cpu-time columns (breaks byte-identity "
                         "of reruns)")
    sp.add_argument("--profile-dir", metavar="DIR",
                    help="also write per-family performance profiles here")
    sp.add_argument("-o", "--output", metavar="PATH",
                    help="write the table here instead of stdout")
    sp.add_argument("--json", action="store_true", dest="json_lines",
                    help="one JSON object per row instead of CSV")
    return parser


def _to_config(ns: argparse.Namespace) -> CliConfig:
    known = {f.name for f in fields(CliConfig)}
    values = {}
    for key, val in vars(ns).items():
        if key not in known or val is None:
            continue
        if key in ("instances", "pmed", "weights", "p") or key == "instance":
            continue
        values[key] = val
    raw_inst = getattr(ns, "instance", ())
    values["instances"] = tuple([raw_inst] if isinstance(raw_inst, str)
                                else raw_inst or ())
    values["pmed"] = tuple(getattr(ns, "pmed", ()) or ())
    raw_w = getattr(ns, "weights", ())
    values["weights"] = tuple([raw_w] if isinstance(raw_w, str) else raw_w or ())
    raw_p = getattr(ns, "p", ())
    values["p"] = tuple([raw_p] if isinstance(raw_p, int) else raw_p or ())
    return CliConfig(**values)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.9g" % float(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def _jsonable(value):
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    return str(value)


def _emit(text: str, cfg: CliConfig) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {cfg.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _emit_pairs(pairs, cfg: CliConfig) -> None:
    if cfg.json_lines:
        obj = {key: _jsonable(val) for key, val in pairs}
        _emit(json.dumps(obj) + "\n", cfg)
    else:
        _emit("".join(f"{key} {_fmt(val)}\n" for key, val in pairs), cfg)


def _load_instance(cfg: CliConfig, path: str) -> Instance:
    dist, points, file_p, file_weights = read_instance(path)
    if cfg.subsample is not None:
        dist = prefix_subsample(dist, cfg.subsample)
        if points is not None:
            points = PointSet(points.coords[:cfg.subsample])
    spec = cfg.weights[0] if cfg.weights else None
    if spec is not None:
        weights = resolve_weights(spec, dist.m)
    elif file_weights is not None and file_weights.m == dist.m:
        weights = file_weights
    else:
        weights = resolve_weights("median", dist.m)
    p = cfg.p[0] if cfg.p else file_p
    return Instance(dist, weights, p, points)


def _cmd_solve(cfg: CliConfig) -> int:
    inst = _load_instance(cfg, cfg.instances[0])
    sol = solve_enumeration(inst)
    _emit_pairs([("v_ip", sol.value),
                 ("centers", list(sol.centers)),
                 ("assignment", list(sol.assignment))], cfg)
    return 0


def _cmd_relax(cfg: CliConfig) -> int:
    inst = _load_instance(cfg, cfg.instances[0])
    if cfg.formulation == "bep":
        model = build_bep(inst, relaxed=True,
                          closest_assignment=cfg.closest_assignment)
    else:
        model = build_ot(inst, closest_assignment=cfg.closest_assignment)
    report = recovery_status(inst, model=model)
    _emit_pairs([("v_ip", report.v_ip), ("v_lp", report.v_lp),
                 ("gap_lp", report.gap_lp), ("recovered", report.recovered),
                 ("vertex_integral", report.vertex_integral)], cfg)
    print(f"relaxation {'matches' if report.recovered else 'is below'} "
          f"the exact optimum on {cfg.instances[0]}", file=sys.stderr)
    return 0


def _cmd_certify(cfg: CliConfig) -> int:
    inst = _load_instance(cfg, cfg.instances[0])
    sol = solve_enumeration(inst)
    cert, verdict = search_certificate(inst, sol, strict=cfg.strict,
                                       eps=cfg.eps)
    pairs = [("v_ip", sol.value), ("centers", list(sol.centers)),
             ("found", cert is not None)]
    if cert is not None:
        pairs += [("omega", cert.omega), ("alpha", list(cert.alpha)),
                  ("holds", verdict.holds), ("strict", verdict.strict)]
    else:
        print("no certificate: the search program is infeasible",
              file=sys.stderr)
    _emit_pairs(pairs, cfg)
    return 0


def _cmd_clusterability(cfg: CliConfig) -> int:
    if not cfg.instances:
        raise OrdmedError("clusterability needs at least one --instance")
    entries = []
    for path in cfg.instances:
        dist = read_instance(path)[0]
        if cfg.subsample is not None:
            dist = prefix_subsample(dist, cfg.subsample)
        sample = clusterability_sample(dist, mode=cfg.sample_mode)
        dip = dip_statistic(sample).dip
        pval = dip_pvalue(sample, bootstrap=cfg.bootstrap, seed=cfg.seed)
        entries.append((path, dip, pval))
    if len(entries) >= 2:
        stat_labels = [lab.label for lab in classify_collection(entries)]
        pval_labels = [lab.label
                       for lab in classify_collection(entries, basis="dip-pvalue")]
    else:
        stat_labels = pval_labels = [""] * len(entries)
    if cfg.json_lines:
        lines = [json.dumps({"instance": path, "dip": dip, "dip_pvalue": pval,
                             "label_dip": sl, "label_pvalue": pl})
                 for (path, dip, pval), sl, pl
                 in zip(entries, stat_labels, pval_labels)]
        _emit("\n".join(lines) + "\n", cfg)
    else:
        lines = ["instance,dip,dip_pvalue,label_dip,label_pvalue"]
        lines += ["%s,%.9g,%.9g,%s,%s" % (path, dip, pval, sl, pl)
                  for (path, dip, pval), sl, pl
                  in zip(entries, stat_labels, pval_labels)]
        _emit("\n".join(lines) + "\n", cfg)
    return 0


def _cmd_generate(cfg: CliConfig) -> int:
    if cfg.generator == "ball":
        points, _ = generate_ball(cfg.m, cfg.clusters, cfg.radius,
                                  cfg.separation, dim=cfg.dim, seed=cfg.seed)
        p = cfg.p[0] if cfg.p else cfg.clusters
    else:
        points, _ = generate_uniform(cfg.m, dim=cfg.dim, seed=cfg.seed)
        p = cfg.p[0] if cfg.p else 1
    if cfg.output:
        write_instance(cfg.output, points=points, p=p)
        print(f"wrote {cfg.output}", file=sys.stderr)
    else:
        write_instance(sys.stdout, points=points, p=p)
    return 0


def _cmd_experiment(cfg: CliConfig) -> int:
    if not cfg.instances and not cfg.pmed:
        raise OrdmedError("experiment needs --instance or --pmed inputs")
    loaded = []
    for path in cfg.instances:
        dist, points, _, _ = read_instance(path)
        if cfg.subsample is not None:
            dist = prefix_subsample(dist, cfg.subsample)
            points = None if points is None else PointSet(
                points.coords[:cfg.subsample])
        loaded.append((os.path.basename(path), dist, points))
    for path in cfg.pmed:
        dist = floyd_warshall(parse_pmed(path))
        name = os.path.basename(path)
        if cfg.subsample is not None:
            dist = prefix_subsample(dist, cfg.subsample)
            name = f"{name}@{cfg.subsample}"
        loaded.append((name, dist, None))
    families = list(cfg.weights) or ["median"]
    p_values = list(cfg.p) or [2]
    rows = run_experiment(loaded, families, p_values, seed=cfg.seed,
                          bootstrap=cfg.bootstrap, jobs=cfg.jobs)
    if cfg.json_lines:
        out_lines = []
        for row in rows:
            record = {key: _jsonable(val) for key, val in asdict(row).items()}
            if not cfg.include_times:
                record["time_enumeration"] = None
                record["time_lp"] = None
            out_lines.append(json.dumps(record))
        _emit("\n".join(out_lines) + "\n", cfg)
    else:
        _emit(rows_to_csv(rows, include_times=cfg.include_times), cfg)
    failures = sum(1 for row in rows if row.error)
    print(f"{len(rows)} rows, {failures} failed", file=sys.stderr)
    if cfg.profile_dir:
        os.makedirs(cfg.profile_dir, exist_ok=True)
        for key, table in profile_series(rows).items():
            name = os.path.join(cfg.profile_dir,
                                "profile_%s.csv" % key.replace(":", "_"))
            with open(name, "w", encoding="utf-8") as fh:
                fh.write(table)
            print(f"wrote {name}", file=sys.stderr)
    return 0


_HANDLERS = {
    "solve": _cmd_solve,
    "relax": _cmd_relax,
    "certify": _cmd_certify,
    "clusterability": _cmd_clusterability,
    "generate": _cmd_generate,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, int):
            return exc.code
        return 0 if exc.code is None else 2
    cfg = _to_config(ns)
    try:
        return _HANDLERS[cfg.subcommand](cfg)
    except OrdmedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
