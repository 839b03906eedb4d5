"""Crowd analytics: heat maps, proximity clusters, zones, and virtual queues.

All operations are deterministic: grid indexing uses the floor convention,
cluster output is ordered by size (largest first, ties by smallest member
id), and queues are strictly FIFO.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import OutOfBounds
from .positioning import Position


# -- heat map -----------------------------------------------------------------


@dataclass
class HeatMap:
    origin: tuple[float, float]
    cell_size_m: float
    width: int  # cells along x
    height: int  # cells along y
    counts: list[list[int]] = field(default_factory=list)  # counts[y][x]

    def __post_init__(self) -> None:
        if not self.counts:
            self.counts = [[0] * self.width for _ in range(self.height)]

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


def heatmap_ingest(heatmap: HeatMap, position: Position) -> HeatMap:
    """Count one sample into its cell; floor((coord - origin) / cell_size)."""
    cx = math.floor((position.x - heatmap.origin[0]) / heatmap.cell_size_m)
    cy = math.floor((position.y - heatmap.origin[1]) / heatmap.cell_size_m)
    if not (0 <= cx < heatmap.width and 0 <= cy < heatmap.height):
        raise OutOfBounds(f"sample ({position.x}, {position.y}) outside the grid")
    heatmap.counts[cy][cx] += 1
    return heatmap


def heatmap_csv_text(heatmap: HeatMap) -> str:
    """Grid as CSV, one row per grid row from y index 0 upward."""
    lines = [",".join(str(v) for v in row) for row in heatmap.counts]
    return "\n".join(lines) + "\n"


def heatmap_pgm_text(heatmap: HeatMap) -> str:
    """Plain PGM (P2) rendering, counts scaled to 0..255 for quick viewing."""
    peak = max((max(row) for row in heatmap.counts), default=0)
    lines = ["P2", f"{heatmap.width} {heatmap.height}", "255"]
    for row in heatmap.counts:
        if peak == 0:
            lines.append(" ".join("0" for _ in row))
        else:
            lines.append(" ".join(str(v * 255 // peak) for v in row))
    return "\n".join(lines) + "\n"


# -- proximity clusters --------------------------------------------------------


@dataclass(frozen=True)
class Cluster:
    members: tuple  # sorted member ids
    centroid: Position
    size: int


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def detect_clusters(positions: list[tuple], eps_m: float, min_size: int) -> list[Cluster]:
    """Single-linkage clusters: pairs within eps_m merge transitively.

    positions is a list of (member_id, Position). Components smaller than
    min_size are dropped. Output is sorted by size descending, ties by the
    smallest member id; members within a cluster are sorted ascending.
    """
    n = len(positions)
    uf = _UnionFind(n)
    for i in range(n):
        xi, yi = positions[i][1].x, positions[i][1].y
        for j in range(i + 1, n):
            dx = xi - positions[j][1].x
            dy = yi - positions[j][1].y
            if dx * dx + dy * dy <= eps_m * eps_m:
                uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    clusters: list[Cluster] = []
    for idxs in groups.values():
        if len(idxs) < min_size:
            continue
        members = sorted(positions[i][0] for i in idxs)
        cx = sum(positions[i][1].x for i in idxs) / len(idxs)
        cy = sum(positions[i][1].y for i in idxs) / len(idxs)
        clusters.append(Cluster(members=tuple(members), centroid=Position(cx, cy), size=len(idxs)))
    clusters.sort(key=lambda c: (-c.size, c.members[0]))
    return clusters


# -- zones, occupancy, advice ---------------------------------------------------


@dataclass(frozen=True)
class Zone:
    """Circular or polygonal region tied to a point of interest."""

    poi_id: str
    capacity: int
    center: Position | None = None
    radius_m: float = 0.0
    polygon: tuple = ()  # tuple of (x, y) vertices when polygonal

    @classmethod
    def circle(cls, poi_id: str, capacity: int, center: Position, radius_m: float) -> "Zone":
        return cls(poi_id=poi_id, capacity=capacity, center=center, radius_m=radius_m)

    @classmethod
    def from_polygon(cls, poi_id: str, capacity: int, vertices: list[tuple]) -> "Zone":
        return cls(poi_id=poi_id, capacity=capacity, polygon=tuple(tuple(v) for v in vertices))


def _on_segment(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    if cross != 0.0:
        return False
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def zone_contains(zone: Zone, position: Position) -> bool:
    """Membership test; the boundary counts as inside."""
    if zone.center is not None:
        dx = position.x - zone.center.x
        dy = position.y - zone.center.y
        return dx * dx + dy * dy <= zone.radius_m * zone.radius_m
    verts = zone.polygon
    inside = False
    for i in range(len(verts)):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % len(verts)]
        if _on_segment(position.x, position.y, ax, ay, bx, by):
            return True
        if (ay > position.y) != (by > position.y):
            x_cross = ax + (position.y - ay) * (bx - ax) / (by - ay)
            if position.x < x_cross:
                inside = not inside
    return inside


def occupancy(zone: Zone, positions: list[Position]) -> int:
    """Number of positions inside the zone, boundary inclusive."""
    return sum(1 for p in positions if zone_contains(zone, p))


class AdviceKind(Enum):
    ADMIT = "admit"
    REDIRECT = "redirect"
    QUEUE_ONLY = "queue_only"


@dataclass(frozen=True)
class Advice:
    kind: AdviceKind
    redirect_to: str | None = None
    queue_offer: bool = False


def advise(zone: Zone, occupancy_count: int, alternatives: list[tuple[Zone, int]]) -> Advice:
    """Admission advice for a zone given its current occupancy.

    Below capacity: admit. At or over capacity: redirect to the alternative
    with the lowest occupancy/capacity ratio (ties by poi_id) plus an offer
    to join the virtual queue, or queue-only when no alternatives exist.
    """
    if occupancy_count < zone.capacity:
        return Advice(kind=AdviceKind.ADMIT)
    if not alternatives:
        return Advice(kind=AdviceKind.QUEUE_ONLY, queue_offer=True)
    best_id: str | None = None
    best_ratio = 0.0
    for alt, occ in sorted(alternatives, key=lambda pair: pair[0].poi_id):
        ratio = occ / alt.capacity if alt.capacity > 0 else math.inf
        if best_id is None or ratio < best_ratio:
            best_id = alt.poi_id
            best_ratio = ratio
    return Advice(kind=AdviceKind.REDIRECT, redirect_to=best_id, queue_offer=True)


# -- virtual queues --------------------------------------------------------------


class VirtualQueue:
    """FIFO waiting list for a zone; one entry per user id."""

    def __init__(self, poi_id: str):
        self.poi_id = poi_id
        self._fifo: deque = deque()
        self._members: set = set()

    def __len__(self) -> int:
        return len(self._fifo)

    def __contains__(self, user_id) -> bool:
        return user_id in self._members

    def join(self, user_id) -> bool:
        """Append a user; a user already queued is left in place."""
        if user_id in self._members:
            return False
        self._fifo.append(user_id)
        self._members.add(user_id)
        return True

    def snapshot(self) -> list:
        return list(self._fifo)


def queue_pop_on_space(queue: VirtualQueue, zone: Zone, occupancy_count: int):
    """Pop and return the head of the queue when the zone has space, else None."""
    if occupancy_count >= zone.capacity or not queue._fifo:
        return None
    user_id = queue._fifo.popleft()
    queue._members.discard(user_id)
    return user_id
