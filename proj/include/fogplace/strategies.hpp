#pragma once

#include "fogplace/placement.hpp"

namespace fogplace {

/// Delay-aware baseline: each demand, in order, walks tiers bottom-up from
/// its base station, filling the node on its own path first and then tier
/// siblings by latency; what a tier cannot hold spills to the next.
PlacementSolution strategy_da(const PlacementInstance& inst, const Topology& topo);

/// Centralized single-pass greedy: admissible arcs are taken in descending
/// order of free_capacity / max_capacity - latency / latency_cap, each
/// assigning as much as demand and capacity allow.
PlacementSolution strategy_qoeap(const PlacementInstance& inst, const Topology& topo);

}  // namespace fogplace
