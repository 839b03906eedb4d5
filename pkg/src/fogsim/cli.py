"""Command-line interface; a thin client of the HTTP service.

Commands build a JSON request, post it to the service (in process by
default, over the wire with --server), and write the returned artifacts to
disk. Keeping the simulation behind the service boundary means a CLI run and
an HTTP run cannot drift apart: both produce the same bytes.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .presets import DEFAULT_SEED, PRESETS, SWEEP_RATES


def _post(args, path: str, payload: dict) -> dict:
    if getattr(args, "server", None):
        import httpx

        resp = httpx.post(args.server.rstrip("/") + path, json=payload, timeout=600.0)
        body = resp.json()
        status = resp.status_code
    else:
        from fastapi.testclient import TestClient

        from .service.app import app

        with TestClient(app, raise_server_exceptions=True) as client:
            resp = client.post(path, json=payload)
            body = resp.json()
            status = resp.status_code
    if status != 200:
        raise SystemExit(f"service error {status}: {json.dumps(body)}")
    return body


def _parse_rates(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        rates = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise SystemExit(f"bad --rates value {text!r}; expected e.g. 40,50,125")
    if not rates:
        raise SystemExit("--rates needs at least one rate")
    return rates


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _run_payload(args) -> dict:
    payload = {
        "preset": args.preset,
        "seed": args.seed,
        "duration_s": args.duration,
        "export_heatmap": args.export_heatmap,
        "clusters": args.clusters_eps is not None,
    }
    rates = _parse_rates(args.rates)
    if rates is not None:
        payload["rates"] = rates
    if args.clusters_eps is not None:
        payload["clusters_eps_m"] = args.clusters_eps
    if args.scenario is not None:
        payload["scenario_json"] = Path(args.scenario).read_text()
    return payload


def cmd_run(args) -> int:
    body = _post(args, "/experiments/run", _run_payload(args))
    out = Path(args.out)
    _write(out / "requests.csv", body["requests_csv"])
    _write(out / "summary.json", json.dumps(body["summary"], sort_keys=True, indent=2) + "\n")
    if body.get("heatmap_csv"):
        _write(out / "heatmap.csv", body["heatmap_csv"])
    if body.get("heatmap_pgm"):
        _write(out / "heatmap.pgm", body["heatmap_pgm"])
    if body.get("clusters_jsonl") is not None:
        _write(out / "clusters.jsonl", body["clusters_jsonl"])
    return 0


def cmd_compare(args) -> int:
    payload = {
        "preset_a": args.preset,
        "preset_b": args.baseline,
        "seed": args.seed,
        "duration_s": args.duration,
    }
    rates = _parse_rates(args.rates)
    if rates is not None:
        payload["rates"] = rates
    body = _post(args, "/experiments/compare", payload)
    out = Path(args.out)
    _write(out / "requests.csv", body["requests_csv"])
    _write(out / "summary.json", json.dumps(body["summary"], sort_keys=True, indent=2) + "\n")
    print(f"improvement of {args.preset} over {args.baseline}: {body['improvement']:.4f}")
    return 0


def cmd_presets(args) -> int:
    for preset in PRESETS.values():
        print(f"{preset.name:10s} ({preset.cli_alias}): {preset.description}")
    print(f"default sweep: {','.join(f'{r:g}' for r in SWEEP_RATES)}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("fogsim.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fogsim",
        description="hierarchical fog/cloud placement simulator with an airport workload",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one preset across a rate sweep")
    run_p.add_argument("--preset", default=None, help="configuration name or alias")
    run_p.add_argument("--scenario", default=None, metavar="FILE", help="replay a scenario JSON file")
    run_p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run_p.add_argument("--rates", default=None, help="comma-separated arrivals per second")
    run_p.add_argument("--duration", type=float, default=20.0, help="seconds per rate point")
    run_p.add_argument("--out", default="out", help="artifact directory")
    run_p.add_argument("--export-heatmap", action="store_true")
    run_p.add_argument("--clusters-eps", type=float, default=None, metavar="M",
                       help="also export clusters.jsonl with this linkage distance")
    run_p.add_argument("--server", default=None, help="post to a running service instead")
    run_p.set_defaults(func=cmd_run)

    cmp_p = sub.add_parser("compare", help="improvement of one preset over a baseline")
    cmp_p.add_argument("--preset", required=True)
    cmp_p.add_argument("--baseline", required=True)
    cmp_p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    cmp_p.add_argument("--rates", default=None)
    cmp_p.add_argument("--duration", type=float, default=20.0)
    cmp_p.add_argument("--out", default="out")
    cmp_p.add_argument("--server", default=None)
    cmp_p.set_defaults(func=cmd_compare)

    presets_p = sub.add_parser("presets", help="list configurations and the default sweep")
    presets_p.set_defaults(func=cmd_presets)

    serve_p = sub.add_parser("serve", help="run the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
