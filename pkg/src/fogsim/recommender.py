"""Point-of-interest recommendations and proximity notifications.

Scores blend three signals: topic overlap with the user's selected topics,
user-user collaborative filtering (cosine similarity over rating vectors),
and a recency decay over the user's last visit to the same category. The
blend weights are fixed configuration and are reported with any results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .positioning import Position

WEIGHT_TOPIC = 0.4
WEIGHT_COLLAB = 0.4
WEIGHT_RECENCY = 0.2
DEFAULT_WEIGHTS = (WEIGHT_TOPIC, WEIGHT_COLLAB, WEIGHT_RECENCY)
RECENCY_TAU_US = 24 * 3600 * 1_000_000  # 24 h of sim time
NEARBY_RADIUS_M = 20.0
RATING_MIN, RATING_MAX = 1, 5


@dataclass
class Poi:
    id: str
    name: str
    category: str
    topics: frozenset
    position: Position
    ratings: list[tuple] = field(default_factory=list)  # (user_uuid, score 1..5)

    def rating_count(self) -> int:
        return len(self.ratings)

    def rating_mean(self) -> float:
        if not self.ratings:
            return 0.0
        return sum(score for _, score in self.ratings) / len(self.ratings)


@dataclass
class UserProfile:
    uuid: object  # uuid.UUID; kept opaque so synthetic ids work in tests
    selected_topics: frozenset = frozenset()
    visits: list[tuple] = field(default_factory=list)  # (poi_id, at_us)
    ratings: dict = field(default_factory=dict)  # poi_id -> score 1..5
    flight_id: str | None = None
    notified_pois: set = field(default_factory=set)


@dataclass(frozen=True)
class Recommendation:
    poi_id: str
    score: float
    topic_score: float
    collab_score: float
    recency_score: float


@dataclass(frozen=True)
class Alert:
    kind: str  # "flight" or "nearby_poi"
    ref: str  # flight id or poi id
    detail: str
    at: int
    unread: bool = True


def _normalised(score: int) -> float:
    return (score - RATING_MIN) / (RATING_MAX - RATING_MIN)


def similarity(a: UserProfile, b: UserProfile) -> float:
    """Cosine similarity of two users' rating vectors, clamped to [0, 1].

    Vectors range over the union of rated pois with missing entries as zero;
    a user with no ratings has an all-zero vector and similarity 0.
    """
    norm_a = math.sqrt(sum(v * v for v in a.ratings.values()))
    norm_b = math.sqrt(sum(v * v for v in b.ratings.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    dot = sum(v * b.ratings[k] for k, v in a.ratings.items() if k in b.ratings)
    return min(1.0, max(0.0, dot / (norm_a * norm_b)))


def favorites(pois: list[Poi], min_ratings: int) -> list[Poi]:
    """Pois with enough ratings, best mean first, ties by count then id."""
    kept = [p for p in pois if p.rating_count() >= min_ratings]
    kept.sort(key=lambda p: (-p.rating_mean(), -p.rating_count(), p.id))
    return kept


def _topic_score(user: UserProfile, poi: Poi) -> float:
    if not user.selected_topics:
        return 0.0
    overlap = len(poi.topics & user.selected_topics)
    return overlap / max(1, len(user.selected_topics))


def _collab_score(user: UserProfile, others: list[UserProfile], poi: Poi) -> float:
    weight_sum = 0.0
    value_sum = 0.0
    for other in others:
        if other.uuid == user.uuid:
            continue
        score = other.ratings.get(poi.id)
        if score is None:
            continue
        sim = similarity(user, other)
        weight_sum += sim
        value_sum += sim * _normalised(score)
    if weight_sum == 0.0:
        return 0.0
    return value_sum / weight_sum


def _recency_score(user: UserProfile, poi: Poi, pois_by_id: dict, now: int, tau_us: int) -> float:
    last: int | None = None
    for poi_id, at in user.visits:
        seen = pois_by_id.get(poi_id)
        if seen is None or seen.category != poi.category or at > now:
            continue
        if last is None or at > last:
            last = at
    if last is None:
        return 0.0
    return math.exp(-(now - last) / tau_us)


def recommend(
    user: UserProfile,
    all_users: list[UserProfile],
    pois: list[Poi],
    now: int,
    k: int,
    weights: tuple = DEFAULT_WEIGHTS,
    tau_us: int = RECENCY_TAU_US,
) -> list[Recommendation]:
    """Top-k pois for a user at a given sim time.

    Pois the user visited within the last tau are excluded. When every
    candidate scores zero (a cold-start user with no topics, visits, or
    peers) the ordering falls back to the favorites ranking, with remaining
    unrated pois appended in id order.
    """
    w_topic, w_collab, w_recency = weights
    pois_by_id = {p.id: p for p in pois}
    recently_visited = {
        poi_id for poi_id, at in user.visits if at <= now and now - at <= tau_us
    }
    candidates = [p for p in sorted(pois, key=lambda p: p.id) if p.id not in recently_visited]

    scored: list[Recommendation] = []
    for poi in candidates:
        t = _topic_score(user, poi)
        c = _collab_score(user, all_users, poi)
        r = _recency_score(user, poi, pois_by_id, now, tau_us)
        scored.append(
            Recommendation(
                poi_id=poi.id,
                score=w_topic * t + w_collab * c + w_recency * r,
                topic_score=t,
                collab_score=c,
                recency_score=r,
            )
        )

    if scored and all(rec.score == 0.0 for rec in scored):
        ranked_ids = [p.id for p in favorites(candidates, 1)]
        ranked_ids += [p.id for p in candidates if p.id not in set(ranked_ids)]
        by_id = {rec.poi_id: rec for rec in scored}
        return [by_id[poi_id] for poi_id in ranked_ids][:k]

    scored.sort(key=lambda rec: (-rec.score, rec.poi_id))
    return scored[:k]


def notifications(
    user: UserProfile,
    position: Position,
    pois: list[Poi],
    flight_events: list,
    now: int = 0,
    radius_m: float = NEARBY_RADIUS_M,
) -> list[Alert]:
    """Alerts for flight changes and nearby topic-matching pois.

    Flight alerts fire for every event of the user's flight in the supplied
    batch. A nearby poi alerts at most once per visit session; the dedup set
    lives on the profile, so a reinstall (fresh profile) starts clean.
    """
    alerts: list[Alert] = []
    for event in flight_events:
        if user.flight_id is not None and event.flight_id == user.flight_id:
            alerts.append(
                Alert(
                    kind="flight",
                    ref=event.flight_id,
                    detail=f"{event.status.value} gate {event.gate}",
                    at=event.at,
                )
            )
    for poi in sorted(pois, key=lambda p: p.id):
        if poi.id in user.notified_pois:
            continue
        if not (poi.topics & user.selected_topics):
            continue
        if position.distance_to(poi.position) <= radius_m:
            alerts.append(Alert(kind="nearby_poi", ref=poi.id, detail=poi.name, at=now))
            user.notified_pois.add(poi.id)
    return alerts


class ProfileStore:
    """Profiles keyed by installation uuid; one identity per install."""

    def __init__(self) -> None:
        self.profiles: dict = {}

    def get_or_create(self, uuid_key, **defaults) -> UserProfile:
        profile = self.profiles.get(uuid_key)
        if profile is None:
            profile = UserProfile(uuid=uuid_key, **defaults)
            self.profiles[uuid_key] = profile
        return profile

    def record_visit(self, uuid_key, poi_id: str, at: int) -> None:
        self.get_or_create(uuid_key).visits.append((poi_id, at))
