"""Indoor position estimation from wifi signal strength.

Distances come from the log-distance path loss model; the position fix
solves the linearised circle-difference system with least squares. Both
steps are closed-form (a 2x2 normal system), so results are bit-stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateGeometry, InsufficientObservations, NoObservations


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class AccessPoint:
    id: int
    x: float
    y: float
    attached_node: int  # topology node this access point hangs off


@dataclass(frozen=True)
class PathLossParams:
    """rssi(d) = p0 - 10 * exponent * log10(d / d0)"""

    p0_dbm: float = -40.0
    d0_m: float = 1.0
    exponent: float = 2.0


@dataclass(frozen=True)
class RssiObservation:
    ap_id: int
    rssi_dbm: float
    at: int = 0  # microseconds of sim time


DEFAULT_STALENESS_US = 2_000_000  # observations older than 2 s are ignored


def rssi_to_distance(rssi_dbm: float, params: PathLossParams) -> float:
    """Invert the path loss model to a distance in metres."""
    return params.d0_m * 10.0 ** ((params.p0_dbm - rssi_dbm) / (10.0 * params.exponent))


def distance_to_rssi(distance_m: float, params: PathLossParams) -> float:
    """Forward path loss model; the noiseless rssi at a given distance."""
    d = max(distance_m, 1e-9)
    return params.p0_dbm - 10.0 * params.exponent * math.log10(d / params.d0_m)


def _fresh_by_ap(
    observations: list[RssiObservation],
    now: int | None,
    staleness_us: int,
) -> list[RssiObservation]:
    """Latest observation per access point, stale ones dropped."""
    best: dict[int, RssiObservation] = {}
    for obs in observations:
        if now is not None and now - obs.at > staleness_us:
            continue
        prev = best.get(obs.ap_id)
        if prev is None or obs.at >= prev.at:
            best[obs.ap_id] = obs
    return [best[k] for k in sorted(best)]


def serving_ap(observations: list[RssiObservation]) -> int:
    """Access point with the strongest signal; ties go to the lowest id."""
    if not observations:
        raise NoObservations("no observations to pick a serving access point from")
    best = observations[0]
    for obs in observations[1:]:
        if obs.rssi_dbm > best.rssi_dbm or (obs.rssi_dbm == best.rssi_dbm and obs.ap_id < best.ap_id):
            best = obs
    return best.ap_id


def trilaterate(
    observations: list[RssiObservation],
    aps: dict[int, AccessPoint],
    params: PathLossParams,
    now: int | None = None,
    staleness_us: int = DEFAULT_STALENESS_US,
) -> Position:
    """Least-squares position fix from at least three distinct access points.

    Subtracting the first circle equation from the rest yields a linear
    system A z = b; it is solved through the 2x2 normal equations. A normal
    matrix determinant below 1e-9 means the access points are collinear.
    """
    if not isinstance(aps, dict):
        aps = {ap.id: ap for ap in aps}
    fresh = _fresh_by_ap(observations, now, staleness_us)
    if len(fresh) < 3:
        raise InsufficientObservations(
            f"need observations from 3 distinct access points, have {len(fresh)}"
        )
    points: list[tuple[float, float, float]] = []
    for obs in fresh:
        ap = aps[obs.ap_id]
        points.append((ap.x, ap.y, rssi_to_distance(obs.rssi_dbm, params)))

    x1, y1, d1 = points[0]
    rows_a: list[tuple[float, float]] = []
    rows_b: list[float] = []
    for xi, yi, di in points[1:]:
        rows_a.append((2.0 * (xi - x1), 2.0 * (yi - y1)))
        rows_b.append(d1 * d1 - di * di + xi * xi - x1 * x1 + yi * yi - y1 * y1)

    # normal equations: (A^T A) z = A^T b
    s_aa = sum(a * a for a, _ in rows_a)
    s_ab = sum(a * b for a, b in rows_a)
    s_bb = sum(b * b for _, b in rows_a)
    t_a = sum(a * v for (a, _), v in zip(rows_a, rows_b))
    t_b = sum(b * v for (_, b), v in zip(rows_a, rows_b))
    det = s_aa * s_bb - s_ab * s_ab
    if det < 1e-9:
        raise DegenerateGeometry("access points are collinear; cannot solve a 2D fix")
    x = (t_a * s_bb - t_b * s_ab) / det
    y = (t_b * s_aa - t_a * s_ab) / det
    return Position(x, y)
