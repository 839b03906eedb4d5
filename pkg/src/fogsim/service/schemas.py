"""Request and response bodies for the HTTP service."""
from __future__ import annotations

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    preset: str | None = None  # None keeps a loaded scenario's own routing
    rates: list[float] | None = None  # default: the calibrated sweep
    seed: int = 42
    duration_s: float = 20.0
    traveler_count: int = 60
    scenario_json: str | None = None  # overrides workload generation when set
    export_heatmap: bool = False
    clusters: bool = False
    clusters_eps_m: float = 2.0
    include_scenarios: bool = False


class RunResponse(BaseModel):
    summary: dict
    requests_csv: str
    heatmap_csv: str | None = None
    heatmap_pgm: str | None = None
    clusters_jsonl: str | None = None
    scenarios_json: list[str] | None = None


class CompareRequest(BaseModel):
    preset_a: str
    preset_b: str
    rates: list[float] | None = None
    seed: int = 42
    duration_s: float = 20.0
    traveler_count: int = 60


class CompareResponse(BaseModel):
    improvement: float
    summary: dict
    requests_csv: str


class ObservationIn(BaseModel):
    ap_id: int
    rssi_dbm: float
    at: int = 0


class AccessPointIn(BaseModel):
    id: int
    x: float
    y: float
    attached_node: int = -1


class PathLossIn(BaseModel):
    p0_dbm: float = -40.0
    d0_m: float = 1.0
    exponent: float = 2.0


class TrilaterateRequest(BaseModel):
    observations: list[ObservationIn]
    aps: list[AccessPointIn]
    path_loss: PathLossIn = Field(default_factory=PathLossIn)
    now: int | None = None
    staleness_us: int = 2_000_000


class PositionOut(BaseModel):
    x: float
    y: float


class ClustersRequest(BaseModel):
    positions: list[tuple[int, float, float]]  # (member id, x, y)
    eps_m: float = 2.0
    min_size: int = 2


class ClusterOut(BaseModel):
    members: list[int]
    centroid: PositionOut
    size: int


class ZoneIn(BaseModel):
    poi_id: str
    capacity: int
    center: tuple[float, float]
    radius_m: float


class AdviseRequest(BaseModel):
    zone: ZoneIn
    occupancy: int
    alternatives: list[tuple[ZoneIn, int]] = Field(default_factory=list)


class AdviceOut(BaseModel):
    kind: str
    redirect_to: str | None
    queue_offer: bool


class PoiIn(BaseModel):
    id: str
    name: str = ""
    category: str = ""
    topics: list[str] = Field(default_factory=list)
    x: float = 0.0
    y: float = 0.0
    ratings: list[tuple[str, int]] = Field(default_factory=list)  # (user uuid, 1..5)


class UserIn(BaseModel):
    uuid: str
    selected_topics: list[str] = Field(default_factory=list)
    visits: list[tuple[str, int]] = Field(default_factory=list)  # (poi id, at_us)
    ratings: dict[str, int] = Field(default_factory=dict)


class RecommendRequest(BaseModel):
    user: UserIn
    others: list[UserIn] = Field(default_factory=list)
    pois: list[PoiIn]
    now: int = 0
    k: int = 3


class RecommendationOut(BaseModel):
    poi_id: str
    score: float
    topic_score: float
    collab_score: float
    recency_score: float


class FavoritesRequest(BaseModel):
    pois: list[PoiIn]
    min_ratings: int = 1
    k: int = 10


class PresetOut(BaseModel):
    name: str
    cli_alias: str
    description: str
