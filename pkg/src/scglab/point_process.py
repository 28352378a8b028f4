"""Poisson point sampling and a uniform-grid index for disk queries.

All disk memberships are strict (< radius): boundary points are measure zero
and excluding them consistently keeps every predicate in the package aligned.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from scglab.model import Window


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    id: int


class PointSet:
    """An ordered set of labelled points inside a window.

    Coordinates live in flat numpy arrays; ids are dense 0..n-1 in array
    order, which every tie-break in the package relies on.
    """

    __slots__ = ("xs", "ys", "window")

    def __init__(self, xs: np.ndarray, ys: np.ndarray, window: Window):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.window = window

    def __len__(self) -> int:
        return self.xs.size

    def point(self, i: int) -> Point:
        return Point(float(self.xs[i]), float(self.ys[i]), int(i))

    @property
    def points(self) -> list[Point]:
        return [self.point(i) for i in range(len(self))]

    def distances_to(self, x: float, y: float) -> np.ndarray:
        return np.hypot(self.xs - x, self.ys - y)

    def in_rect(self, x_lo: float, x_hi: float, y_lo: float, y_hi: float) -> np.ndarray:
        """Boolean mask of points inside the closed rectangle."""
        return ((self.xs >= x_lo) & (self.xs <= x_hi)
                & (self.ys >= y_lo) & (self.ys <= y_hi))


def sample_ppp(density: float, window: Window, rng: np.random.Generator) -> PointSet:
    """Sample a homogeneous Poisson point process on the window.

    Count ~ Poisson(density * area), positions i.i.d. uniform. Draw order is
    fixed (count, xs, ys) so a shared generator stays reproducible.
    """
    if density < 0:
        raise ValueError("density must be >= 0")
    n = int(rng.poisson(density * window.area)) if density > 0 else 0
    xs = rng.uniform(window.x_min, window.x_max, n)
    ys = rng.uniform(window.y_min, window.y_max, n)
    return PointSet(xs, ys, window)


def with_forced_point(ps: PointSet, x: float, y: float) -> PointSet:
    """Prepend a deterministic point as id 0 (Palm conditioning of a PPP)."""
    return PointSet(np.concatenate(([x], ps.xs)), np.concatenate(([y], ps.ys)),
                    ps.window)


class SpatialIndex:
    """Uniform-grid bucket index over a PointSet.

    The default pitch is the largest protocol query radius, so those queries
    touch at most nine buckets; arbitrary radii widen the scan accordingly.
    """

    __slots__ = ("points", "cell_size", "buckets")

    def __init__(self, points: PointSet, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell_size must be > 0")
        self.points = points
        self.cell_size = float(cell_size)
        self.buckets: dict[tuple[int, int], np.ndarray] = {}
        if len(points):
            cx = np.floor(points.xs / self.cell_size).astype(np.int64)
            cy = np.floor(points.ys / self.cell_size).astype(np.int64)
            order = np.lexsort((cy, cx))
            cx, cy = cx[order], cy[order]
            breaks = np.flatnonzero((np.diff(cx) != 0) | (np.diff(cy) != 0)) + 1
            starts = np.concatenate(([0], breaks))
            ends = np.concatenate((breaks, [order.size]))
            for s, e in zip(starts, ends):
                self.buckets[(int(cx[s]), int(cy[s]))] = np.sort(order[s:e])

    def ids_near(self, x: float, y: float, radius: float) -> np.ndarray:
        """Ids of all points in buckets overlapping the disk (superset of hits)."""
        if radius < 0 or not self.buckets:
            return np.empty(0, dtype=np.int64)
        c = self.cell_size
        ix_lo = int(np.floor((x - radius) / c))
        ix_hi = int(np.floor((x + radius) / c))
        iy_lo = int(np.floor((y - radius) / c))
        iy_hi = int(np.floor((y + radius) / c))
        chunks = [self.buckets[key]
                  for ix in range(ix_lo, ix_hi + 1)
                  for iy in range(iy_lo, iy_hi + 1)
                  if (key := (ix, iy)) in self.buckets]
        if not chunks:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(chunks) if len(chunks) > 1 else chunks[0]


def neighbor_ids(index: SpatialIndex, x: float, y: float, radius: float) -> np.ndarray:
    """Ids of indexed points strictly within `radius` of (x, y), ascending."""
    cand = index.ids_near(x, y, radius)
    if cand.size == 0:
        return cand
    ps = index.points
    d = np.hypot(ps.xs[cand] - x, ps.ys[cand] - y)
    return np.sort(cand[d < radius])


def neighbors_within(index: SpatialIndex, center: Point | tuple[float, float],
                     radius: float) -> list[Point]:
    """Points strictly inside the disk, sorted by id. Includes the center point
    itself when it is indexed; callers filter."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    x, y = (center.x, center.y) if isinstance(center, Point) else center
    return [index.points.point(i) for i in neighbor_ids(index, x, y, radius)]


def is_disk_empty(index: SpatialIndex, center: Point | tuple[float, float],
                  radius: float, exclude: frozenset[int] | set[int] = frozenset()
                  ) -> bool:
    """True iff no indexed point outside `exclude` lies strictly inside the disk."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    x, y = (center.x, center.y) if isinstance(center, Point) else center
    ids = neighbor_ids(index, x, y, radius)
    if ids.size == 0:
        return True
    if not exclude:
        return False
    return all(int(i) in exclude for i in ids)


def min_distance_to(ps: PointSet, x: float, y: float) -> float:
    """Distance from (x, y) to the nearest point of the set; inf when empty."""
    if len(ps) == 0:
        return float("inf")
    return float(ps.distances_to(x, y).min())


def dump_csv(ps: PointSet, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y"])
        for i in range(len(ps)):
            writer.writerow([i, repr(float(ps.xs[i])), repr(float(ps.ys[i]))])


def load_csv(path: str, window: Window) -> PointSet:
    xs: list[float] = []
    ys: list[float] = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = sorted(reader, key=lambda r: int(r["id"]))
        for expect, row in enumerate(rows):
            if int(row["id"]) != expect:
                raise ValueError(f"ids must be dense 0..n-1, got {row['id']}")
            xs.append(float(row["x"]))
            ys.append(float(row["y"]))
    return PointSet(np.array(xs), np.array(ys), window)
