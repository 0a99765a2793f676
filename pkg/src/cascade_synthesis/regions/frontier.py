"""Corner enumeration, dominance reduction and up-set hulls of rate regions."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from ..errors import ArgumentError
from .coupling import RatePoint, task_rates

HULL_TOL = 1e-9


@dataclass(frozen=True)
class Corner:
    point: RatePoint
    generator: str

    @property
    def vector(self) -> np.ndarray:
        return self.point.as_vector()


@dataclass
class RegionFrontier:
    """Generator-tagged corners of a region and the facets of its up-set hull.

    ``corners`` keeps every enumerated corner in enumeration order; ``vertices``
    indexes the non-dominated corners that are vertices of the hull.  Each facet is
    ``(normal, offset)`` with the region on the side ``normal . r + offset <= 0``.
    """

    corners: list[Corner]
    kind: str = ""
    params: dict = field(default_factory=dict)
    vertices: list[int] = field(default_factory=list)
    facets: list[tuple[np.ndarray, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.corners:
            raise ArgumentError("a frontier needs at least one corner")
        dims = {len(c.vector) for c in self.corners}
        if len(dims) != 1:
            raise ArgumentError("corners of mixed dimension")
        self._matrix = np.array([c.vector for c in self.corners])
        if not self.vertices:
            self.vertices, self.facets = _upset_hull(self._matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def columns(self) -> list[str]:
        return ["R0"] + [f"R{i}" for i in range(1, self.dim)]

    def vertex_corners(self) -> list[Corner]:
        return [self.corners[i] for i in self.vertices]

    def nondominated(self) -> list[int]:
        return _nondominated(self.matrix)

    def argmin(self, coordinate: int) -> Corner:
        """First corner, in enumeration order, minimizing one coordinate (0 is R0)."""
        col = self.matrix[:, coordinate]
        return self.corners[int(np.flatnonzero(col <= col.min() + HULL_TOL)[0])]

    def find(self, generator: str) -> Corner:
        for c in self.corners:
            if c.generator == generator:
                return c
        raise KeyError(generator)

    # -- export ------------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["generator"] + self.columns)
        for c in self.corners:
            w.writerow([c.generator] + [fmt(v) for v in c.vector])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "columns": self.columns,
            "corners": [{"generator": c.generator, **dict(zip(self.columns, map(fmt_num, c.vector)))} for c in self.corners],
            "vertices": list(self.vertices),
            "facets": [{"normal": [fmt_num(v) for v in n], "offset": fmt_num(o)} for n, o in self.facets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def fmt(x: float) -> str:
    """Twelve significant digits; negative zero prints as zero."""
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def fmt_num(x: float) -> float:
    return float(fmt(x))


def _nondominated(pts: np.ndarray, tol: float = HULL_TOL) -> list[int]:
    """Indices of points not weakly dominated by another point; among exact ties the first survives."""
    keep = []
    for i, p in enumerate(pts):
        dom = np.all(pts <= p + tol, axis=1)
        dom[i] = False
        # a tie (mutual weak domination) only removes the later copy
        ties = dom & np.all(pts >= p - tol, axis=1)
        dom &= ~ties | (np.arange(len(pts)) < i)
        if not dom.any():
            keep.append(i)
    return keep


def _upset_hull(pts: np.ndarray) -> tuple[list[int], list[tuple[np.ndarray, float]]]:
    """Vertices and lower facets of conv(pts) + nonnegative orthant.

    The orthant is truncated by appending each point shifted far along every
    axis; with shifts of ten times the point spread, the extreme input points of
    the truncated hull are exactly the vertices of the up-set.
    """
    cand = _nondominated(pts)
    base = pts[cand]
    n, d = base.shape
    if n == 1:
        facets = [(-np.eye(d)[i], float(base[0, i])) for i in range(d)]
        return cand, facets
    span = float(np.ptp(base, axis=0).max()) + 1.0
    aug = np.concatenate([base] + [base + 10.0 * span * np.eye(d)[i] for i in range(d)])
    try:
        hull = ConvexHull(aug)
    except QhullError:
        hull = ConvexHull(aug, qhull_options="QJ")
    facets = [(eq[:-1].copy(), float(eq[-1])) for eq in hull.equations if np.all(eq[:-1] <= HULL_TOL)]
    vertices = sorted(cand[i] for i in hull.vertices if i < n)
    return vertices, _dedupe(facets)


def _dedupe(facets):
    """Merge coplanar simplices (Qhull triangulates every facet)."""
    out, seen = [], set()
    for n, o in facets:
        key = tuple(np.round(np.append(n, o), 8))
        if key not in seen:
            seen.add(key)
            out.append((n, o))
    return out


def _in_upset(p: np.ndarray, pts: np.ndarray) -> bool:
    """Is ``p`` >= some convex combination of the rows of ``pts``?"""
    k, d = pts.shape
    res = linprog(
        np.zeros(k),
        A_ub=pts.T,
        b_ub=p,
        A_eq=np.ones((1, k)),
        b_eq=[1.0],
        bounds=(0, None),
        method="highs",
    )
    return res.status == 0


def point_in_region(p: RatePoint, f: RegionFrontier, tol: float = 1e-12) -> bool:
    """True iff ``p`` coordinatewise dominates a convex combination of the corners."""
    v = p.as_vector()
    if len(v) != f.dim:
        raise ArgumentError(f"point has {len(v)} coordinates, frontier has {f.dim}")
    pts = f.matrix[f.vertices] if f.vertices else f.matrix
    if not _in_upset(v + tol, pts):
        return False
    return all(p.component_sum(k) >= b - tol for c in f.corners for k, b in c.point.sums.items()) if any(
        c.point.sums for c in f.corners
    ) else True


def task_region(m: int) -> RegionFrontier:
    """Corners of the task-assignment region over every valid (a, b)."""
    if m < 3:
        raise ArgumentError(f"task assignment needs m >= 3, got {m}")
    corners = [
        Corner(task_rates(m, a, b), f"a={a};b={b}") for a in range(2, m) for b in range(1, a)
    ]
    return RegionFrontier(corners, kind="task", params={"m": m})


def scatter_relay_region(m: int) -> RegionFrontier:
    """Corners (R1, R2) = (log m/a, log m/(m-a)) of the relay region for the scatter target."""
    if m < 2:
        raise ArgumentError(f"scatter relay needs m >= 2, got {m}")
    corners = [
        Corner(RatePoint(0.0, (math.log2(m / a), math.log2(m / (m - a)))), f"a={a}") for a in range(1, m)
    ]
    return RegionFrontier(corners, kind="scatter-relay", params={"m": m})


def scatter_empirical_rate(m: int) -> float:
    """Per-link rate log(m/(m-1)) needed for empirical coordination of the scatter target."""
    return math.log2(m / (m - 1))


def scatter_summary(m: int) -> dict:
    f = scatter_relay_region(m)
    sums = f.matrix[:, 1] + f.matrix[:, 2]
    emp = scatter_empirical_rate(m)
    top = f.find(f"a={m - 1}")
    return {
        "m": m,
        "min_sum_rate": float(sums.min()),
        "argmin": f.corners[int(np.argmin(sums))].generator,
        "empirical_rate": emp,
        "gap_at_a_m_minus_1": top.point.r[1] - emp,
    }
