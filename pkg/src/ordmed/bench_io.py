"""Benchmark ingestion, synthetic generators, and the experiment harness.

Covers the full loop around the core solvers: read the classic p-median
benchmark files and complete them to all-pairs distance matrices, generate
clustered (stochastic-ball) and uniform control instances, run a batch of
(instance, weight family, p) cells with per-row fault isolation, and emit
the results as a fixed-schema CSV table plus performance-profile series.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from importlib import resources

import numpy as np

from .clusterability import clusterability_sample, dip_pvalue, dip_statistic, \
    classify_collection
from .errors import OrdmedError, ParameterError, ParseError
from .exact import recovery_status
from .instance import DistanceMatrix, Instance, PointSet, WeightVector, \
    classify_weights, is_free_of_equidistance, make_weights

PLACEMENT_CAP = 10**5
PROFILE_POINTS = 50
PROFILE_FLOOR = 1e-4


@dataclass(frozen=True)
class EdgeGraph:
    """Undirected weighted graph in benchmark form.

    Vertices are 1-indexed in the file format and 0-indexed here; edges is
    deduplicated (minimum cost kept) and sorted by endpoint pair. p is the
    center count the file declares.
    """

    n: int
    p: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        for i, j, cost in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ParameterError(f"edge ({i}, {j}) out of range for n={self.n}")
            if cost <= 0:
                raise ParameterError(f"edge cost must be positive, got {cost}")


def parse_pmed(path) -> EdgeGraph:
    """Parse a p-median benchmark file: header `n edges p`, then cost triples.

    Tokens are whitespace-separated integers; line breaks carry no meaning
    beyond error reporting. Vertices are 1-indexed in the file. Duplicate
    edges keep the minimum cost, so the stored edge list may be shorter than
    the declared count; the declared count is checked against the number of
    triples present.
    """
    tokens: list[tuple[int, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            tokens.extend((no, tok) for tok in line.split())

    pos = 0

    def take(what: str) -> tuple[int, int]:
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1][0] if tokens else 1
            raise ParseError(f"unexpected end of file: missing {what}", last)
        no, tok = tokens[pos]
        pos += 1
        try:
            return int(tok), no
        except ValueError:
            raise ParseError(f"{what} must be an integer, got {tok!r}", no) from None

    n, no = take("vertex count")
    if n < 1:
        raise ParseError(f"vertex count must be positive, got {n}", no)
    declared, no = take("edge count")
    if declared < 0:
        raise ParseError(f"edge count must be nonnegative, got {declared}", no)
    p, no = take("center count")
    if not (1 <= p <= n):
        raise ParseError(f"center count must be in [1, {n}], got {p}", no)
    best: dict[tuple[int, int], int] = {}
    for _ in range(declared):
        i, no_i = take("edge endpoint")
        j, no_j = take("edge endpoint")
        cost, no_c = take("edge cost")
        if not (1 <= i <= n):
            raise ParseError(f"vertex {i} out of range [1, {n}]", no_i)
        if not (1 <= j <= n):
            raise ParseError(f"vertex {j} out of range [1, {n}]", no_j)
        if cost <= 0:
            raise ParseError(f"edge cost must be positive, got {cost}", no_c)
        key = (min(i, j) - 1, max(i, j) - 1)
        if key not in best or cost < best[key]:
            best[key] = cost
    if pos != len(tokens):
        raise ParseError(f"trailing data after {declared} declared edges",
                         tokens[pos][0])
    edges = tuple((i, j, best[(i, j)]) for i, j in sorted(best))
    return EdgeGraph(n=n, p=p, edges=edges)


def floyd_warshall(g: EdgeGraph) -> DistanceMatrix:
    """All-pairs shortest paths of an EdgeGraph; requires connectivity.

    The output is symmetric with a zero diagonal and satisfies the triangle
    inequality by construction, so it passes validate_metric.
    """
    n = g.n
    adj: list[list[int]] = [[] for _ in range(n)]
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for i, j, cost in g.edges:
        if cost < d[i, j]:
            d[i, j] = d[j, i] = float(cost)
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        at = queue.popleft()
        for nxt in adj[at]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    if len(seen) != n:
        missing = min(set(range(n)) - seen)
        raise ParameterError(
            f"graph is disconnected: vertex {missing + 1} is unreachable "
            "from vertex 1; all-pairs distances are undefined")
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return DistanceMatrix(d)


def generate_ball(m: int, p_clusters: int, radius: float, separation: float,
                  dim: int = 2, seed: int = 0) -> tuple[PointSet, DistanceMatrix]:
    """Points drawn uniformly in balls around well-separated random centers.

    Centers are rejection-sampled in a cube until pairwise distances reach
    `separation` (at most 10^5 draws); the m points split across clusters as
    evenly as possible. Deterministic per seed. separation > 4 * radius makes
    every within-cluster distance smaller than every between-cluster one.
    """
    if not (1 <= p_clusters <= m):
        raise ParameterError(f"need 1 <= clusters <= m, got {p_clusters}, {m}")
    if radius < 0 or separation < 0:
        raise ParameterError("radius and separation must be nonnegative")
    if dim < 1:
        raise ParameterError(f"dim must be positive, got {dim}")
    rng = np.random.default_rng(seed)
    side = max(1.0, separation * p_clusters)
    centers: list[np.ndarray] = []
    tries = 0
    while len(centers) < p_clusters:
        tries += 1
        if tries > PLACEMENT_CAP:
            raise ParameterError(
                f"could not place {p_clusters} centers at separation "
                f"{separation} in {tries - 1} draws; reduce the separation "
                "or raise the dimension")
        cand = rng.uniform(0.0, side, size=dim)
        if all(float(np.linalg.norm(cand - c)) >= separation for c in centers):
            centers.append(cand)
    counts = [m // p_clusters + (1 if c < m % p_clusters else 0)
              for c in range(p_clusters)]
    rows = []
    for center, count in zip(centers, counts):
        for _ in range(count):
            direction = rng.normal(size=dim)
            norm = float(np.linalg.norm(direction))
            while norm == 0.0:
                direction = rng.normal(size=dim)
                norm = float(np.linalg.norm(direction))
            dist_from_center = radius * float(rng.uniform()) ** (1.0 / dim)
            rows.append(center + direction * (dist_from_center / norm))
    points = PointSet(np.array(rows))
    return points, points.distance_matrix()


def generate_uniform(m: int, dim: int = 2, seed: int = 0) -> tuple[PointSet, DistanceMatrix]:
    """i.i.d. uniform points in the unit cube; deterministic per seed."""
    if m < 2:
        raise ParameterError(f"need m >= 2, got {m}")
    if dim < 1:
        raise ParameterError(f"dim must be positive, got {dim}")
    rng = np.random.default_rng(seed)
    points = PointSet(rng.uniform(0.0, 1.0, size=(m, dim)))
    return points, points.distance_matrix()


def prefix_subsample(dist: DistanceMatrix, m_prime: int) -> DistanceMatrix:
    """Restrict to the first m' vertices in index order.

    This is the deterministic shrink rule for benchmark graphs whose full
    size exceeds the enumeration guard; a principal submatrix of a metric
    stays a metric.
    """
    if not (2 <= m_prime <= dist.m):
        raise ParameterError(f"need 2 <= m' <= {dist.m}, got {m_prime}")
    return DistanceMatrix(dist.d[:m_prime, :m_prime].copy())


def data_path(name: str):
    """Path of a vendored data file shipped inside the package."""
    return resources.files("ordmed").joinpath("data", name)


def resolve_weights(spec: str, m: int) -> WeightVector:
    """Build the weight vector a spec string names, at length m.

    Grammar: `median` | `center` | `ksum:K` | `centdian:G` | `file:PATH`.
    `ksum:auto` picks k = ceil(m / 4), scaling the head length with the
    effective instance size.
    """
    name, _, arg = spec.partition(":")
    name = name.strip()
    arg = arg.strip()
    if name == "median" or name == "center":
        if arg:
            raise ParameterError(f"{name} takes no parameter, got {spec!r}")
        return make_weights(name, m)
    if name == "ksum":
        if arg == "auto":
            k = max(1, math.ceil(m / 4))
        else:
            try:
                k = int(arg)
            except ValueError:
                raise ParameterError(
                    f"ksum parameter must be an integer or 'auto', got {spec!r}"
                ) from None
        return make_weights("ksum", m, k=k)
    if name == "centdian":
        try:
            gamma = float(arg)
        except ValueError:
            raise ParameterError(
                f"centdian parameter must be a number, got {spec!r}") from None
        return make_weights("centdian", m, gamma=gamma)
    if name == "file":
        if not arg:
            raise ParameterError("file spec needs a path, e.g. file:weights.txt")
        with open(arg, "r", encoding="utf-8") as fh:
            values = [float(tok) for tok in fh.read().split()]
        return make_weights("explicit", m, values=values)
    raise ParameterError(
        f"unknown weight spec {spec!r}; use median | center | ksum:K | "
        "centdian:G | file:PATH")


@dataclass(frozen=True)
class ExperimentRow:
    """One harness cell: an instance solved under one weight family and p.

    gap_lp_root duplicates gap_lp: there is no tree search here whose root
    bound could differ, and the column keeps report schemas aligned with
    branch-and-bound tooling. Failed cells carry their message in `error`
    and leave the numeric fields empty.
    """

    instance: str
    m: int
    p: int
    family: str
    param: float | None
    v_ip: float | None
    v_lp: float | None
    gap_lp: float | None
    gap_lp_root: float | None
    recovered: bool | None
    vertex_integral: bool | None
    time_enumeration: float | None
    time_lp: float | None
    dip: float | None
    dip_pvalue: float | None
    label_dip: str
    label_pvalue: str
    free_of_equidistance: bool | None
    error: str


def _instance_profile(dist: DistanceMatrix, bootstrap: int, seed: int):
    """Per-instance clusterability numbers; None on any domain failure."""
    try:
        sample = clusterability_sample(dist)
        dip = dip_statistic(sample).dip
        pval = dip_pvalue(sample, bootstrap=bootstrap, seed=seed)
        return dip, pval
    except OrdmedError:
        return None, None


def _run_cell(dist, points, spec, p):
    """Solve one cell and return the fields it fills in."""
    weights = resolve_weights(spec, dist.m)
    detected = classify_weights(weights)
    inst = Instance(dist, weights, p, points)
    report = recovery_status(inst)
    return {
        "family": detected.family,
        "param": detected.param,
        "v_ip": report.v_ip,
        "v_lp": report.v_lp,
        "gap_lp": report.gap_lp,
        "gap_lp_root": report.gap_lp,
        "recovered": report.recovered,
        "vertex_integral": report.vertex_integral,
        "time_enumeration": report.time_enumeration,
        "time_lp": report.time_lp,
    }


def run_experiment(instances, families, p_values, *, seed: int = 0,
                   bootstrap: int = 1000, jobs: int = 1) -> list[ExperimentRow]:
    """Solve every (instance, family, p) cell and tabulate the outcomes.

    instances: sequence of (name, DistanceMatrix | Instance-like) pairs; a
    pair may also carry (name, dist, points) to keep coordinates. families:
    weight spec strings for resolve_weights. Cell failures are caught and
    recorded in-row; the batch always completes. Rows come back in input
    order (instance, then family, then p). Clusterability labels are
    computed across the instance collection and repeated on each of an
    instance's rows; with fewer than two instances they stay empty.
    """
    if jobs < 1:
        raise ParameterError(f"jobs must be positive, got {jobs}")
    norm: list[tuple[str, DistanceMatrix, PointSet | None]] = []
    for entry in instances:
        if len(entry) == 2:
            name, dist = entry
            points = None
        else:
            name, dist, points = entry
        norm.append((str(name), dist, points))

    profiles = [_instance_profile(dist, bootstrap, seed + idx)
                for idx, (_, dist, _) in enumerate(norm)]
    scored = [(idx, dip, pval) for idx, (dip, pval) in enumerate(profiles)
              if dip is not None]
    label_dip = {}
    label_pval = {}
    if len(scored) >= 2:
        for (idx, _, _), lab in zip(
                scored, classify_collection(scored, basis="dip-stat")):
            label_dip[idx] = lab.label
        for (idx, _, _), lab in zip(
                scored, classify_collection(scored, basis="dip-pvalue")):
            label_pval[idx] = lab.label

    cells = [(idx, name, dist, points, spec, p)
             for idx, (name, dist, points) in enumerate(norm)
             for spec in families
             for p in p_values]

    def solve(cell):
        idx, name, dist, points, spec, p = cell
        base = {
            "instance": name, "m": dist.m, "p": p,
            "family": spec.partition(":")[0], "param": None,
            "v_ip": None, "v_lp": None, "gap_lp": None, "gap_lp_root": None,
            "recovered": None, "vertex_integral": None,
            "time_enumeration": None, "time_lp": None,
            "dip": profiles[idx][0], "dip_pvalue": profiles[idx][1],
            "label_dip": label_dip.get(idx, ""),
            "label_pvalue": label_pval.get(idx, ""),
            "free_of_equidistance": is_free_of_equidistance(dist),
            "error": "",
        }
        try:
            base.update(_run_cell(dist, points, spec, p))
        except Exception as exc:  # per-row fault isolation, batch never dies
            base["error"] = f"{type(exc).__name__}: {exc}".splitlines()[0]
        return ExperimentRow(**base)

    if jobs == 1:
        rows = [solve(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(solve, cells))
    return rows


def _format_cell(value, *, blank: bool = False) -> str:
    if blank or value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.9g" % float(value)
    return str(value)


def rows_to_csv(rows, *, include_times: bool = False) -> str:
    """Render rows as a UTF-8 CSV with the fixed field order as header.

    Floats print with 9 significant digits. The two cpu-time columns stay in
    the header but print empty unless include_times is set, so that default
    output is byte-identical across reruns with equal seeds and flags.
    """
    names = [f.name for f in fields(ExperimentRow)]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([
            _format_cell(getattr(row, name),
                         blank=(not include_times) and name.startswith("time_"))
            for name in names
        ])
    return out.getvalue()


def profile_series(rows, *, points: int = PROFILE_POINTS) -> dict[str, str]:
    """Performance-profile tables, one per weight family spec in the rows.

    Each table has two columns (time threshold in seconds, fraction of the
    family's cells whose relaxation solved within it); thresholds form one
    shared geometric grid over [1e-4, max observed time] so the curves are
    comparable. Errored cells count as never solved. Unlike the row table,
    these depend on measured times and are not byte-stable across reruns.
    """
    if points < 2:
        raise ParameterError(f"need at least 2 grid points, got {points}")
    groups: dict[str, list[ExperimentRow]] = {}
    for row in rows:
        key = row.family if row.param is None else f"{row.family}:{row.param:g}"
        groups.setdefault(key, []).append(row)
    times = [row.time_lp for row in rows
             if not row.error and row.time_lp is not None]
    top = max([PROFILE_FLOOR * 10.0] + times)
    grid = np.geomspace(PROFILE_FLOOR, max(top, PROFILE_FLOOR * 10.0), points)
    tables = {}
    for key, members in sorted(groups.items()):
        lines = ["threshold_seconds,fraction_solved"]
        for t in grid:
            solved = sum(1 for row in members
                         if not row.error and row.time_lp is not None
                         and row.time_lp <= t)
            lines.append("%.9g,%.9g" % (t, solved / len(members)))
        tables[key] = "\n".join(lines) + "\n"
    return tables
