"""HTTP facade over the library; the CLI is a thin client of these routes.

Everything here translates wire payloads to library calls and back. No
simulation logic lives in this layer, so in-process and over-the-wire use
produce identical artifacts.
"""
from __future__ import annotations

import dataclasses

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import analytics, harness, positioning, recommender
from ..errors import FogsimError
from ..presets import PRESETS, SWEEP_RATES, build_preset_topology, preset_params, resolve_preset
from ..rng import Stream
from ..simnet import run
from ..workload import SamplingSpec, Scenario, generate_scenario
from . import schemas

app = FastAPI(title="fogsim", version="0.1.0")


@app.exception_handler(FogsimError)
async def fogsim_error_handler(request: Request, exc: FogsimError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/presets", response_model=list[schemas.PresetOut])
def list_presets() -> list[schemas.PresetOut]:
    return [
        schemas.PresetOut(name=p.name, cli_alias=p.cli_alias, description=p.description)
        for p in PRESETS.values()
    ]


def _sampling(req: schemas.RunRequest) -> SamplingSpec:
    return SamplingSpec(
        heatmap=req.export_heatmap,
        clusters=req.clusters,
        clusters_eps_m=req.clusters_eps_m,
    )


def _run_one_scenario(req: schemas.RunRequest) -> schemas.RunResponse:
    scenario = Scenario.from_json(req.scenario_json)
    preset = resolve_preset(req.preset) if req.preset else None
    if preset is not None:
        # replay the same workload under a different routing configuration
        scenario.params = dataclasses.replace(scenario.params, routing=preset.routing)
    else:
        preset = resolve_preset(scenario.params.routing.config_name)
    topology = build_preset_topology(preset)
    report = run(scenario, topology, req.seed)
    result = harness.ExperimentResult(
        preset=preset,
        seed=req.seed,
        rates=(scenario.params.request_rate_per_s,),
        reports=[report],
    )
    return _result_response(req, [result])


def _result_response(req: schemas.RunRequest, results: list) -> schemas.RunResponse:
    payload = harness.summary_payload(results)
    resp = schemas.RunResponse(
        summary=payload,
        requests_csv=harness.requests_csv_text(results),
    )
    if req.export_heatmap:
        merged = harness.merge_heatmaps(
            [rep.heatmap for res in results for rep in res.reports]
        )
        if merged is not None:
            resp.heatmap_csv = analytics.heatmap_csv_text(merged)
            resp.heatmap_pgm = analytics.heatmap_pgm_text(merged)
    if req.clusters:
        resp.clusters_jsonl = harness.clusters_jsonl_text(results)
    return resp


@app.post("/experiments/run", response_model=schemas.RunResponse)
def run_experiment_route(req: schemas.RunRequest) -> schemas.RunResponse:
    if req.scenario_json is not None:
        return _run_one_scenario(req)
    preset_name = req.preset if req.preset else "Mf2c2Fog"
    rates = tuple(req.rates) if req.rates else SWEEP_RATES
    result = harness.run_experiment(
        preset_name,
        rates,
        seed=req.seed,
        duration_s=req.duration_s,
        traveler_count=req.traveler_count,
        sampling=_sampling(req),
    )
    resp = _result_response(req, [result])
    if req.include_scenarios:
        preset = resolve_preset(preset_name)
        root = Stream(req.seed)
        scenarios = []
        for index, rate in enumerate(rates):
            params = preset_params(
                preset,
                rate,
                duration_s=req.duration_s,
                traveler_count=req.traveler_count,
                sampling=_sampling(req),
            )
            scenarios.append(
                generate_scenario(params, root.derive("scenario", index).seed).to_json()
            )
        resp.scenarios_json = scenarios
    return resp


@app.post("/experiments/compare", response_model=schemas.CompareResponse)
def compare_route(req: schemas.CompareRequest) -> schemas.CompareResponse:
    rates = tuple(req.rates) if req.rates else SWEEP_RATES
    results = [
        harness.run_experiment(
            name,
            rates,
            seed=req.seed,
            duration_s=req.duration_s,
            traveler_count=req.traveler_count,
        )
        for name in (req.preset_a, req.preset_b)
    ]
    improvement = harness.compare(results[0], results[1])
    key = f"{results[0].preset.name}_vs_{results[1].preset.name}"
    payload = harness.summary_payload(results, comparisons={key: improvement})
    return schemas.CompareResponse(
        improvement=improvement,
        summary=payload,
        requests_csv=harness.requests_csv_text(results),
    )


@app.post("/positioning/trilaterate", response_model=schemas.PositionOut)
def trilaterate_route(req: schemas.TrilaterateRequest) -> schemas.PositionOut:
    obs = [
        positioning.RssiObservation(o.ap_id, o.rssi_dbm, o.at) for o in req.observations
    ]
    aps = {
        a.id: positioning.AccessPoint(a.id, a.x, a.y, a.attached_node) for a in req.aps
    }
    params = positioning.PathLossParams(
        p0_dbm=req.path_loss.p0_dbm,
        d0_m=req.path_loss.d0_m,
        exponent=req.path_loss.exponent,
    )
    pos = positioning.trilaterate(
        obs, aps, params, now=req.now, staleness_us=req.staleness_us
    )
    return schemas.PositionOut(x=pos.x, y=pos.y)


@app.post("/analytics/clusters", response_model=list[schemas.ClusterOut])
def clusters_route(req: schemas.ClustersRequest) -> list[schemas.ClusterOut]:
    labelled = [
        (member, positioning.Position(x, y)) for member, x, y in req.positions
    ]
    clusters = analytics.detect_clusters(labelled, req.eps_m, req.min_size)
    return [
        schemas.ClusterOut(
            members=list(c.members),
            centroid=schemas.PositionOut(x=c.centroid.x, y=c.centroid.y),
            size=c.size,
        )
        for c in clusters
    ]


def _zone(z: schemas.ZoneIn) -> analytics.Zone:
    return analytics.Zone.circle(
        z.poi_id, z.capacity, positioning.Position(z.center[0], z.center[1]), z.radius_m
    )


@app.post("/analytics/advise", response_model=schemas.AdviceOut)
def advise_route(req: schemas.AdviseRequest) -> schemas.AdviceOut:
    advice = analytics.advise(
        _zone(req.zone),
        req.occupancy,
        [(_zone(z), occ) for z, occ in req.alternatives],
    )
    return schemas.AdviceOut(
        kind=advice.kind.value,
        redirect_to=advice.redirect_to,
        queue_offer=advice.queue_offer,
    )


def _poi(p: schemas.PoiIn) -> recommender.Poi:
    return recommender.Poi(
        id=p.id,
        name=p.name,
        category=p.category,
        topics=frozenset(p.topics),
        position=positioning.Position(p.x, p.y),
        ratings=[(uuid, score) for uuid, score in p.ratings],
    )


def _user(u: schemas.UserIn) -> recommender.UserProfile:
    return recommender.UserProfile(
        uuid=u.uuid,
        selected_topics=frozenset(u.selected_topics),
        visits=[(poi, at) for poi, at in u.visits],
        ratings=dict(u.ratings),
    )


@app.post("/recommender/recommend", response_model=list[schemas.RecommendationOut])
def recommend_route(req: schemas.RecommendRequest) -> list[schemas.RecommendationOut]:
    recs = recommender.recommend(
        _user(req.user),
        [_user(u) for u in req.others],
        [_poi(p) for p in req.pois],
        now=req.now,
        k=req.k,
    )
    return [
        schemas.RecommendationOut(
            poi_id=r.poi_id,
            score=r.score,
            topic_score=r.topic_score,
            collab_score=r.collab_score,
            recency_score=r.recency_score,
        )
        for r in recs
    ]


@app.post("/recommender/favorites", response_model=list[str])
def favorites_route(req: schemas.FavoritesRequest) -> list[str]:
    ranked = recommender.favorites([_poi(p) for p in req.pois], req.min_ratings)
    return [p.id for p in ranked[: req.k]]
