"""Named routing configurations and the calibrated comparison profile.

Four configurations share one airport workload: everything pinned to the
local fog node, everything shipped to the cloud, predicted-response dispatch
over {fog, cloud}, and the same with a second fog node added. Node ids are
stable across presets so a scenario resolves identical request origins no
matter which configuration replays it.

The sweep rates straddle the on-site fog node's saturation knee: at the low
points it carries the load alone with moderate queueing, at the high points
its response estimate crosses the cloud's and dispatch falls back to the
cloud for the rest of the run. The second fog node is a faster regional site
behind a metro link: its response barely moves with load, so adding it
yields a further, nearly rate-independent improvement.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InvalidParams
from .positioning import AccessPoint
from .topology import AgentKind, NodeSpec, Topology, TopologySpec, build_topology
from .workload import (
    DEFAULT_AP_NODE_IDS,
    RoutingPolicy,
    RoutingSpec,
    SamplingSpec,
    ScenarioParams,
    TerminalMap,
    default_terminal_map,
)

CLOUD_ID = 0
FOG1_ID = 1
FOG2_ID = 2

CLOUD_RATE = 800.0
CLOUD_CAPACITY = 8192
FOG_RATE = 30.0  # constrained on-site box, ~33 ms per request
FOG2_RATE = 500.0  # regional edge site, 2 ms per request behind a metro link
FOG_CAPACITY = 64
ACCESS_RATE = 50.0
ACCESS_CAPACITY = 16

CLOUD_LINK_MS = 29.2  # fog aggregation to cloud; 30.0 ms end to end from an access node
FOG2_LINK_MS = 16.0  # regional edge site reached through the fog aggregation point
ACCESS_LINK_MS = 0.8

SWEEP_RATES = (5.0, 6.0, 11.0, 120.0, 240.0)
DEFAULT_DURATION_S = 20.0
DEFAULT_TRAVELERS = 60
DEFAULT_SEED = 42


@dataclass(frozen=True)
class ConfigPreset:
    name: str
    cli_alias: str
    description: str
    routing: RoutingSpec
    two_fogs: bool


PRESETS = {
    "Fog1": ConfigPreset(
        name="Fog1",
        cli_alias="fog1",
        description="every request runs on the single fog node",
        routing=RoutingSpec("Fog1", RoutingPolicy.FIXED, fixed_target=FOG1_ID),
        two_fogs=False,
    ),
    "CloudOnly": ConfigPreset(
        name="CloudOnly",
        cli_alias="cloud-only",
        description="every request runs in the cloud",
        routing=RoutingSpec("CloudOnly", RoutingPolicy.FIXED, fixed_target=CLOUD_ID),
        two_fogs=False,
    ),
    "Mf2c1Fog": ConfigPreset(
        name="Mf2c1Fog",
        cli_alias="mf2c-1fog",
        description="predicted-response dispatch between one fog node and the cloud",
        routing=RoutingSpec("Mf2c1Fog", RoutingPolicy.QOS, candidates=(CLOUD_ID, FOG1_ID)),
        two_fogs=False,
    ),
    "Mf2c2Fog": ConfigPreset(
        name="Mf2c2Fog",
        cli_alias="mf2c-2fog",
        description="predicted-response dispatch between two fog nodes and the cloud",
        routing=RoutingSpec(
            "Mf2c2Fog", RoutingPolicy.QOS, candidates=(CLOUD_ID, FOG1_ID, FOG2_ID)
        ),
        two_fogs=True,
    ),
}


def resolve_preset(name: str) -> ConfigPreset:
    """Look a preset up by canonical name or kebab-case alias."""
    if name in PRESETS:
        return PRESETS[name]
    for preset in PRESETS.values():
        if preset.cli_alias == name.lower():
            return preset
    known = ", ".join(sorted(set(PRESETS) | {p.cli_alias for p in PRESETS.values()}))
    raise InvalidParams(f"unknown preset {name!r}; known: {known}")


def comparison_topology_spec(two_fogs: bool) -> TopologySpec:
    """Cloud over one fog aggregation point over eight access leaves."""
    nodes = [
        NodeSpec(CLOUD_ID, AgentKind.CLOUD_AGENT, None, CLOUD_RATE, CLOUD_CAPACITY, 0.0),
        NodeSpec(FOG1_ID, AgentKind.AGENT, CLOUD_ID, FOG_RATE, FOG_CAPACITY, CLOUD_LINK_MS),
    ]
    if two_fogs:
        nodes.append(NodeSpec(FOG2_ID, AgentKind.AGENT, FOG1_ID, FOG2_RATE, FOG_CAPACITY, FOG2_LINK_MS))
    for node_id in DEFAULT_AP_NODE_IDS:
        nodes.append(
            NodeSpec(node_id, AgentKind.MICROAGENT, FOG1_ID, ACCESS_RATE, ACCESS_CAPACITY, ACCESS_LINK_MS)
        )
    return TopologySpec(nodes)


def build_preset_topology(preset: ConfigPreset) -> Topology:
    return build_topology(comparison_topology_spec(preset.two_fogs))


def preset_params(
    preset: ConfigPreset,
    rate_per_s: float,
    duration_s: float = DEFAULT_DURATION_S,
    traveler_count: int = DEFAULT_TRAVELERS,
    sampling: SamplingSpec | None = None,
    terminal: TerminalMap | None = None,
) -> ScenarioParams:
    return ScenarioParams(
        terminal=terminal if terminal is not None else default_terminal_map(),
        routing=preset.routing,
        traveler_count=traveler_count,
        request_rate_per_s=rate_per_s,
        duration_s=duration_s,
        sampling=sampling if sampling is not None else SamplingSpec(),
    )


# -- two-area fixture ----------------------------------------------------------------

AREA_WEST_NODE_IDS = (10, 11, 12, 13)
AREA_EAST_NODE_IDS = (14, 15, 16, 17)
FOG_WEST_ID = 1
FOG_EAST_ID = 2


def two_area_terminal_map() -> TerminalMap:
    """Default hall with west access points on one fog area, east on another."""
    base = default_terminal_map()
    aps = []
    west = iter(AREA_WEST_NODE_IDS)
    east = iter(AREA_EAST_NODE_IDS)
    for ap in base.aps:
        node = next(west) if ap.x < base.width_m / 2 else next(east)
        aps.append(AccessPoint(id=ap.id, x=ap.x, y=ap.y, attached_node=node))
    return replace(base, aps=tuple(aps))


def two_area_topology() -> Topology:
    """Two sibling fog areas under the cloud, four access leaves each."""
    nodes = [
        NodeSpec(CLOUD_ID, AgentKind.CLOUD_AGENT, None, CLOUD_RATE, CLOUD_CAPACITY, 0.0),
        NodeSpec(FOG_WEST_ID, AgentKind.AGENT, CLOUD_ID, FOG_RATE, FOG_CAPACITY, CLOUD_LINK_MS),
        NodeSpec(FOG_EAST_ID, AgentKind.AGENT, CLOUD_ID, FOG_RATE, FOG_CAPACITY, CLOUD_LINK_MS),
    ]
    for node_id in AREA_WEST_NODE_IDS:
        nodes.append(
            NodeSpec(node_id, AgentKind.MICROAGENT, FOG_WEST_ID, ACCESS_RATE, ACCESS_CAPACITY, ACCESS_LINK_MS)
        )
    for node_id in AREA_EAST_NODE_IDS:
        nodes.append(
            NodeSpec(node_id, AgentKind.MICROAGENT, FOG_EAST_ID, ACCESS_RATE, ACCESS_CAPACITY, ACCESS_LINK_MS)
        )
    return build_topology(TopologySpec(nodes))
