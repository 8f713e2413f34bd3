"""Input data model: distance matrices, weight vectors, instances, solutions.

Everything here is immutable after construction and safe to share across
threads. Metric validity (symmetry, zero diagonal, triangle inequality) is
checked explicitly through :func:`validate_metric`, never assumed silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ParseError


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DistanceMatrix:
    """Square matrix of pairwise costs d[i][j].

    Construction only enforces shape and finiteness so that
    :func:`validate_metric` can report on arbitrary square inputs.
    """

    d: np.ndarray

    def __post_init__(self):
        d = _frozen_array(self.d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ParameterError(f"distance matrix must be square, got shape {d.shape}")
        if d.shape[0] < 1:
            raise ParameterError("distance matrix must have at least one point")
        if not np.all(np.isfinite(d)):
            raise ParameterError("distance matrix entries must be finite")
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.d.shape[0]

    def upper_triangle(self) -> np.ndarray:
        """Strict upper-triangle entries in row-major order (length m(m-1)/2)."""
        iu = np.triu_indices(self.m, k=1)
        return self.d[iu]


@dataclass(frozen=True)
class PointSet:
    """Points in n-dimensional real space; rows of coords are points."""

    coords: np.ndarray

    def __post_init__(self):
        c = _frozen_array(self.coords)
        if c.ndim != 2:
            raise ParameterError(f"coords must be a 2-d array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ParameterError("coordinates must be finite")
        object.__setattr__(self, "coords", c)

    @property
    def m(self) -> int:
        return self.coords.shape[0]

    @property
    def n(self) -> int:
        return self.coords.shape[1]

    def distance_matrix(self) -> DistanceMatrix:
        """Euclidean distances between all point pairs, exactly symmetric."""
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=2))
        d = 0.5 * (d + d.T)
        np.fill_diagonal(d, 0.0)
        return DistanceMatrix(d)


@dataclass(frozen=True)
class WeightVector:
    """Sorting weights applied to the non-increasingly sorted cost vector."""

    lam: np.ndarray

    def __post_init__(self):
        lam = _frozen_array(self.lam)
        if lam.ndim != 1 or lam.size < 1:
            raise ParameterError("weights must be a nonempty 1-d vector")
        if not np.all(np.isfinite(lam)):
            raise ParameterError("weights must be finite")
        if lam[-1] < 0:
            raise ParameterError("weights must be nonnegative (last entry is negative)")
        if np.any(lam[:-1] < lam[1:]):
            r = int(np.argmax(lam[:-1] < lam[1:]))
            raise ParameterError(
                f"weights must be non-increasing (positions {r + 1}, {r + 2})"
            )
        object.__setattr__(self, "lam", lam)

    @property
    def m(self) -> int:
        return self.lam.size

    def deltas(self) -> np.ndarray:
        """Successive differences: delta_r = lam_r - lam_{r+1}, delta_m = lam_m."""
        out = np.empty(self.m)
        out[:-1] = self.lam[:-1] - self.lam[1:]
        out[-1] = self.lam[-1]
        return out


@dataclass(frozen=True)
class Instance:
    """A full problem input: distances, weights, and the number of centers p."""

    dist: DistanceMatrix
    weights: WeightVector
    p: int
    points: PointSet | None = None

    def __post_init__(self):
        if self.weights.m != self.dist.m:
            raise ParameterError(
                f"weight length {self.weights.m} != point count {self.dist.m}"
            )
        if not (1 <= self.p <= self.dist.m):
            raise ParameterError(f"p must be in [1, {self.dist.m}], got {self.p}")
        if self.points is not None:
            if self.points.m != self.dist.m:
                raise ParameterError("coordinate count != distance matrix size")
            induced = self.points.distance_matrix().d
            if np.max(np.abs(induced - self.dist.d)) > 1e-9:
                raise ParameterError(
                    "coordinates do not reproduce the distance matrix within 1e-9"
                )

    @property
    def m(self) -> int:
        return self.dist.m


@dataclass(frozen=True)
class CenterSolution:
    """p centers, nearest-center assignment, per-point costs, objective value."""

    centers: tuple[int, ...]
    assignment: tuple[int, ...]
    distances: np.ndarray
    value: float

    def __post_init__(self):
        object.__setattr__(self, "distances", _frozen_array(self.distances))

    def group(self, j: int) -> tuple[int, ...]:
        """Points assigned to center j, in ascending index order."""
        return tuple(i for i, a in enumerate(self.assignment) if a == j)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the metric checks, one witness per violated class."""

    symmetry_ok: bool
    diagonal_ok: bool
    triangle_ok: bool
    # (i, j, |d_ij - d_ji|) for the worst asymmetric pair
    symmetry_witness: tuple[int, int, float] | None = None
    # (i, d_ii) for the worst nonzero diagonal entry
    diagonal_witness: tuple[int, float] | None = None
    # (i, k, j, d_ij - (d_ik + d_kj)) for the worst triangle violation
    triangle_witness: tuple[int, int, int, float] | None = None

    @property
    def ok(self) -> bool:
        return self.symmetry_ok and self.diagonal_ok and self.triangle_ok

    def violations(self) -> list[str]:
        out = []
        if not self.symmetry_ok:
            i, j, mag = self.symmetry_witness
            out.append(f"symmetry violated at ({i},{j}), magnitude {mag:.6g}")
        if not self.diagonal_ok:
            i, val = self.diagonal_witness
            out.append(f"diagonal violated at {i}, value {val:.6g}")
        if not self.triangle_ok:
            i, k, j, mag = self.triangle_witness
            out.append(f"triangle violated at ({i},{k},{j}), magnitude {mag:.6g}")
        return out


def validate_metric(dist: DistanceMatrix | np.ndarray, tol: float = 1e-9) -> ValidationReport:
    """Check symmetry, zero diagonal, and the triangle inequality.

    Tolerances scale with the largest entry so float-built metrics
    (Euclidean coordinates, shortest-path completion) pass exactly when
    they should. An empty violation list is equivalent to a valid metric.
    """
    d = dist.d if isinstance(dist, DistanceMatrix) else np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ParameterError(f"validate_metric needs a square matrix, got shape {d.shape}")
    m = d.shape[0]
    scale = tol * (1.0 + float(np.max(np.abs(d))) if d.size else 1.0)

    asym = np.abs(d - d.T)
    symmetry_ok = bool(np.max(asym) <= scale)
    symmetry_witness = None
    if not symmetry_ok:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        symmetry_witness = (int(i), int(j), float(asym[i, j]))

    diag = np.abs(np.diag(d))
    diagonal_ok = bool(np.max(diag) <= scale)
    diagonal_witness = None
    if not diagonal_ok:
        i = int(np.argmax(diag))
        diagonal_witness = (i, float(d[i, i]))

    # worst over (i,j) of d_ij - min_k (d_ik + d_kj); k=i makes this >= 0
    through = d[:, :, None] + d.T[None, :, :]  # [i, k, j] = d_ik + d_kj
    best = np.min(through, axis=1)
    viol = d - best
    triangle_ok = bool(np.max(viol) <= scale)
    triangle_witness = None
    if not triangle_ok:
        i, j = np.unravel_index(int(np.argmax(viol)), viol.shape)
        k = int(np.argmin(through[i, :, j]))
        triangle_witness = (int(i), int(k), int(j), float(viol[i, j]))

    return ValidationReport(
        symmetry_ok, diagonal_ok, triangle_ok,
        symmetry_witness, diagonal_witness, triangle_witness,
    )


def is_free_of_equidistance(dist: DistanceMatrix, tol: float | None = None) -> bool:
    """True iff all strict upper-triangle entries are pairwise distinct.

    Exact comparison by default (the property is combinatorial); pass a
    tolerance to treat entries closer than tol as tied, which matters for
    integer-cost benchmark matrices.
    """
    entries = dist.upper_triangle()
    if entries.size <= 1:
        return True
    if tol is None:
        return len(set(entries.tolist())) == entries.size
    s = np.sort(entries)
    return bool(np.min(np.diff(s)) > tol)


_FAMILIES = ("median", "center", "ksum", "centdian", "explicit")


def make_weights(kind: str, m: int, *, k: int | None = None,
                 gamma: float | None = None, values=None) -> WeightVector:
    """Build one of the named weight families of length m.

    median -> (1,...,1); center -> (1,0,...,0); ksum -> k ones then zeros;
    centdian -> (1, gamma, ..., gamma); explicit -> validated copy of values.
    """
    if m < 1:
        raise ParameterError(f"m must be positive, got {m}")
    if kind == "median":
        return WeightVector(np.ones(m))
    if kind == "center":
        lam = np.zeros(m)
        lam[0] = 1.0
        return WeightVector(lam)
    if kind == "ksum":
        if k is None or not (1 <= k <= m):
            raise ParameterError(f"ksum needs 1 <= k <= {m}, got {k}")
        lam = np.zeros(m)
        lam[:k] = 1.0
        return WeightVector(lam)
    if kind == "centdian":
        if gamma is None or not (0.0 <= gamma <= 1.0):
            raise ParameterError(f"centdian needs 0 <= gamma <= 1, got {gamma}")
        lam = np.full(m, float(gamma))
        lam[0] = 1.0
        return WeightVector(lam)
    if kind == "explicit":
        if values is None:
            raise ParameterError("explicit weights need a vector")
        lam = np.asarray(values, dtype=float)
        if lam.size != m:
            raise ParameterError(f"explicit weights have length {lam.size}, expected {m}")
        return WeightVector(lam)
    raise ParameterError(f"unknown weight family {kind!r}; choose from {_FAMILIES}")


@dataclass(frozen=True)
class WeightClass:
    """Detected weight family, up to positive scaling."""

    family: str  # median | center | ksum | centdian | general
    param: float | None = None  # k for ksum, gamma for centdian
    scale: float = 1.0


def classify_weights(weights: WeightVector) -> WeightClass:
    """Detect the weight family after normalizing by the first entry.

    Scaling by c > 0 never changes the class; the all-zero vector counts
    as a median of scale 0. Families are tried in a fixed order (median,
    center, ksum, centdian) and the first match wins.
    """
    lam = weights.lam
    scale = float(lam[0])
    if scale == 0.0:
        return WeightClass("median", None, 0.0)
    v = lam / scale
    m = v.size
    ones = np.ones(m)
    if np.array_equal(v, ones):
        return WeightClass("median", None, scale)
    center = np.zeros(m)
    center[0] = 1.0
    if np.array_equal(v, center):
        return WeightClass("center", None, scale)
    k = int(np.sum(v == 1.0))
    if np.array_equal(v, np.concatenate([np.ones(k), np.zeros(m - k)])):
        return WeightClass("ksum", float(k), scale)
    if m >= 2 and v[0] == 1.0:
        gamma = float(v[1])
        if 0.0 < gamma < 1.0 and np.all(v[1:] == gamma):
            return WeightClass("centdian", gamma, scale)
    return WeightClass("general", None, scale)


def restrict_instance(inst: Instance, sol: CenterSolution, j: int) -> Instance:
    """Single-center sub-instance on the points served by center j.

    The sub-weights are the weight entries at the sorted positions that the
    members of j's group occupy in the full solution's cost ordering; they
    inherit non-increasing order because positions are taken ascending.
    Sub-points keep ascending original index order.
    """
    if j not in sol.centers:
        raise ParameterError(f"{j} is not a center of the given solution")
    group = sol.group(j)
    # descending stable sort of the full cost vector, ties by ascending index
    order = np.argsort(-sol.distances, kind="stable")
    in_group = np.isin(order, group)
    lam_sub = inst.weights.lam[np.nonzero(in_group)[0]]
    idx = np.array(group)
    sub_d = inst.dist.d[np.ix_(idx, idx)]
    sub_points = None
    if inst.points is not None:
        sub_points = PointSet(inst.points.coords[idx])
    return Instance(DistanceMatrix(sub_d), WeightVector(lam_sub), 1, sub_points)


def fixture_t1() -> PointSet:
    """Line points {0, 1, 3, 7, 12}: all ten pairwise distances distinct."""
    return PointSet(np.array([[0.0], [1.0], [3.0], [7.0], [12.0]]))


def read_instance(path) -> tuple[DistanceMatrix, PointSet | None, int, WeightVector | None]:
    """Read an instance file; returns (dist, points, declared p, weights or None).

    Matrix format: line 1 `m p`; line 2 the m weights; then m matrix rows.
    Coordinate format: line 1 `m n p`; then m rows of n coordinates (the
    matrix is derived as Euclidean and no weight line is present).
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = [ln.strip() for ln in fh]
    lines = [(no + 1, ln) for no, ln in enumerate(raw) if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty instance file")
    no, header = lines[0]
    parts = header.split()
    if len(parts) == 2:
        m, p = _parse_ints(parts, no)
        if len(lines) < 2 + m:
            raise ParseError(f"expected weight line plus {m} matrix rows", no)
        wno, wline = lines[1]
        lam = _parse_floats(wline.split(), wno)
        if len(lam) != m:
            raise ParseError(f"expected {m} weights, got {len(lam)}", wno)
        rows = []
        for rno, rline in lines[2:2 + m]:
            row = _parse_floats(rline.split(), rno)
            if len(row) != m:
                raise ParseError(f"expected {m} entries, got {len(row)}", rno)
            rows.append(row)
        dist = DistanceMatrix(np.array(rows))
        return dist, None, p, WeightVector(np.array(lam))
    if len(parts) == 3:
        m, n, p = _parse_ints(parts, no)
        if len(lines) < 1 + m:
            raise ParseError(f"expected {m} coordinate rows", no)
        coords = []
        for rno, rline in lines[1:1 + m]:
            row = _parse_floats(rline.split(), rno)
            if len(row) != n:
                raise ParseError(f"expected {n} coordinates, got {len(row)}", rno)
            coords.append(row)
        points = PointSet(np.array(coords))
        return points.distance_matrix(), points, p, None
    raise ParseError("header must be `m p` or `m n p`", no)


def write_instance(path, dist: DistanceMatrix | None = None,
                   points: PointSet | None = None, p: int = 1,
                   weights: WeightVector | None = None) -> None:
    """Write an instance file (coordinate or matrix format) to a path or stream."""
    if hasattr(path, "write"):
        _write_instance(path, dist, points, p, weights)
        return
    with open(path, "w", encoding="utf-8") as fh:
        _write_instance(fh, dist, points, p, weights)


def _write_instance(fh, dist, points, p, weights) -> None:
    if points is not None:
        fh.write(f"{points.m} {points.n} {p}\n")
        for row in points.coords:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
        return
    if dist is None:
        raise ParameterError("write_instance needs a matrix or points")
    if weights is None:
        weights = make_weights("median", dist.m)
    fh.write(f"{dist.m} {p}\n")
    fh.write(" ".join(repr(float(x)) for x in weights.lam) + "\n")
    for row in dist.d:
        fh.write(" ".join(repr(float(x)) for x in row) + "\n")


def _parse_ints(tokens, line_no: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(f"expected integers, got {tokens!r}", line_no) from exc


def _parse_floats(tokens, line_no: int) -> list[float]:
    try:
        out = [float(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(f"expected numbers, got {tokens!r}", line_no) from exc
    if not all(math.isfinite(x) for x in out):
        raise ParseError("non-finite number", line_no)
    return out
