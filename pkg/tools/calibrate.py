"""Calibration check for the frozen comparison profile.

Runs the four presets over the default sweep and prints per-point means,
the improvement ratios, and the trilateration noise statistics that the
acceptance tests pin. Run it after touching the engine, the presets, or the
positioning code; if a number drifts out of its band, fix the cause or
re-freeze deliberately.

Usage: python3 tools/calibrate.py
"""
from __future__ import annotations

import statistics
import sys
import time

from fogsim.harness import compare, run_experiment
from fogsim.positioning import PathLossParams, trilaterate
from fogsim.presets import DEFAULT_SEED, SWEEP_RATES
from fogsim.rng import Stream
from fogsim.workload import default_terminal_map, emit_rssi, position_at


def sweep_table() -> None:
    t0 = time.time()
    results = {}
    for name in ("Fog1", "CloudOnly", "Mf2c1Fog", "Mf2c2Fog"):
        results[name] = run_experiment(name, SWEEP_RATES, seed=DEFAULT_SEED)
    elapsed = time.time() - t0

    header = "rate      " + "".join(f"{name:>12s}" for name in results)
    print(header)
    for i, rate in enumerate(SWEEP_RATES):
        row = f"{rate:7.0f}   "
        for name in results:
            row += f"{results[name].reports[i].response_mean_ms:12.2f}"
        print(row)
    print()
    print("fog share per point (Mf2c1Fog):",
          [round(r.target_counts.get(1, 0) / max(1, r.completions), 3)
           for r in results["Mf2c1Fog"].reports])
    print("CloudOnly p95 per point:",
          [round(r.response_p95_ms, 2) for r in results["CloudOnly"].reports])
    print("Fog1 p95 per point:",
          [round(r.response_p95_ms, 2) for r in results["Fog1"].reports])

    cloud_means = [r.response_mean_ms for r in results["CloudOnly"].reports]
    spread = (max(cloud_means) - min(cloud_means)) / min(cloud_means)
    print(f"CloudOnly mean spread: {spread:.4f} (need < 0.15), min {min(cloud_means):.2f} (need >= 60)")

    one_fog = compare(results["Mf2c1Fog"], results["CloudOnly"])
    two_fog = compare(results["Mf2c2Fog"], results["CloudOnly"])
    print(f"compare(Mf2c1Fog, CloudOnly) = {one_fog:.4f}  (band [0.10, 0.30])")
    print(f"compare(Mf2c2Fog, CloudOnly) = {two_fog:.4f}  (band [0.25, 0.45])")
    strict = [
        (a.response_mean_ms, b.response_mean_ms)
        for a, b in zip(results["Mf2c2Fog"].reports, results["Mf2c1Fog"].reports)
    ]
    print("Mf2c2Fog < Mf2c1Fog per point:", [f"{a:.2f}<{b:.2f}:{a < b}" for a, b in strict])
    print(f"sweep wall time: {elapsed:.1f} s")
    ok = 0.10 <= one_fog <= 0.30 and 0.25 <= two_fog <= 0.45 and all(a < b for a, b in strict)
    print("sweep calibration:", "OK" if ok else "OUT OF BAND")
    return ok


def trilateration_noise() -> None:
    """Median position error under 2 dB noise; the frozen bound trails it."""
    terminal = default_terminal_map()
    params = PathLossParams()
    aps = {ap.id: ap for ap in terminal.aps}
    rng = Stream(2026)
    errors = []
    from fogsim.positioning import Position

    for trial in range(1000):
        x = rng.uniform(0.0, terminal.width_m)
        y = rng.uniform(0.0, terminal.height_m)
        truth = Position(x, y)
        obs = emit_rssi(truth, terminal.aps, params, 2.0, rng.derive("noise", trial),
                        range_m=terminal.radio_range_m)
        if len(obs) < 3:
            continue
        est = trilaterate(obs, aps, params)
        errors.append(((est.x - x) ** 2 + (est.y - y) ** 2) ** 0.5)
    errors.sort()
    med = statistics.median(errors)
    p90 = errors[int(0.9 * len(errors))]
    print(f"trilateration with 2 dB noise: n={len(errors)} median={med:.3f} m p90={p90:.3f} m")
    return med


if __name__ == "__main__":
    ok = sweep_table()
    print()
    trilateration_noise()
    sys.exit(0 if ok else 1)
