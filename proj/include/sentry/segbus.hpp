#ifndef SENTRY_SEGBUS_HPP
#define SENTRY_SEGBUS_HPP

#include <vector>

#include <json.hpp>

#include "sentry/compiler.hpp"
#include "sentry/core_model.hpp"
#include "sentry/schedule.hpp"

namespace sentry
{

// Single row of core slots; segment boundary b sits between positions
// b and b+1.
struct Placement
{
    std::vector<int> position_of; // by subnet index
};

// Cores ordered along the bus by topological order of their subnets,
// ties by subnet id.
Placement place_cores(const DataflowGraph &dfg);

struct ActivityWindow
{
    double start{};
    double end{};
};

// A channel is active during its producer subnet's firing phase; windows
// come from the single-image schedule.
std::vector<ActivityWindow> channel_activity(const DataflowGraph &dfg,
        const Schedule &schedule);

struct LaneAssignment
{
    int num_lanes{};
    std::vector<int> lane_of; // by channel index
};

// Fewest parallel lanes covering all temporally and spatially
// overlapping channels. Exact (branch-and-bound coloring) up to
// exact_limit channels, greedy interval coloring above it.
LaneAssignment min_lanes(const DataflowGraph &dfg, const Placement &placement,
        const std::vector<ActivityWindow> &activity, int exact_limit = 16);

// Largest set of pairwise-conflicting channels: a lower bound on lanes.
int conflict_clique_bound(const DataflowGraph &dfg,
        const Placement &placement,
        const std::vector<ActivityWindow> &activity);

struct BusChannelRoute
{
    int lane{};
    int lo{}; // min(src, dst) position
    int hi{}; // max(src, dst) position
    ActivityWindow window;
};

struct BusProgram
{
    int num_lanes{};
    int num_positions{};
    std::vector<int> placement;          // by subnet index
    std::vector<BusChannelRoute> routes; // by channel index
    // Closed boundary switches per lane (union over assigned windows).
    std::vector<std::vector<int>> closed_boundaries;
};

// Static switch programming: every channel gets (lane, segment interval);
// switches interior to the interval close on that lane.
BusProgram program_switches(const DataflowGraph &dfg,
        const Placement &placement, const LaneAssignment &lanes,
        const std::vector<ActivityWindow> &activity);

// Throws validation_error if two overlapping windows share a segment on
// one lane.
void check_conflict_freedom(const BusProgram &program);

struct InterconnectCost
{
    double energy_pj{};
    double latency{}; // spike-weighted total, time units
};

// Segmented bus: spikes pay per traversed segment; no run-time routing.
InterconnectCost interconnect_cost(const BusProgram &program,
        const std::vector<long long> &traffic, const SegBusConfig &cfg);

// Mesh NoC baseline: row-major placement on a near-square mesh, XY
// routing, per-hop wire plus router costs.
InterconnectCost interconnect_cost_noc(const DataflowGraph &dfg,
        const Placement &placement, const std::vector<long long> &traffic,
        const NocConfig &cfg);

nlohmann::json bus_program_to_json(const BusProgram &p);
BusProgram bus_program_from_json(const nlohmann::json &j);

}

#endif
