#ifndef SENTRY_COMPILER_HPP
#define SENTRY_COMPILER_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sentry/core_model.hpp"
#include "sentry/graph.hpp"

namespace sentry
{

// Sentinel for neurons with no path to the current output neuron; keeps
// them out of the sub-network being formed.
constexpr int kUnreachable = 1 << 28;

// Three-layer neuron cluster mapped onto one core. Layer index 0 is the
// output layer l0; two-layer backends leave l2 empty.
struct SubNetwork
{
    int id{};
    std::vector<int> l0; // sorted neuron ids
    std::vector<int> l1;
    std::vector<int> l2;
    std::vector<Synapse> internal_synapses;
    std::vector<int> relay_neurons; // subset of the layer sets
    int config_index{-1};           // into the palette
    std::string config_name;

    long long neuron_count() const
    {
        return static_cast<long long>(l0.size() + l1.size() + l2.size());
    }
    SubnetSize size() const
    {
        return SubnetSize{static_cast<long long>(l2.size()),
                static_cast<long long>(l1.size()),
                static_cast<long long>(l0.size()),
                static_cast<long long>(internal_synapses.size())};
    }
    int layer_of(int neuron_id) const;
};

struct ChannelSynapse
{
    int src{};
    int dst{};
    int weight{};
};

struct Channel
{
    int src_subnet{};
    int dst_subnet{};
    std::vector<ChannelSynapse> synapses;
    long long profiled_spikes{0};
};

struct DataflowGraph
{
    std::string graph_name;
    Backend backend{Backend::mubrain};
    std::vector<SubNetwork> subnets;
    std::vector<Channel> channels;
    std::vector<double> exec_times; // t_i per subnet, time units
    // Ids >= first_relay_id are compiler-created relays. relay_origin maps
    // a relay to the original neuron whose spikes it forwards.
    int first_relay_id{0};
    std::unordered_map<int, int> relay_origin;

    std::vector<int> subnet_of; // by neuron id (original + relays), -1 if none
    int subnet_of_neuron(int neuron_id) const;
};

struct CompileOptions
{
    // Insert a relay for every layer-skipping internal synapse. When
    // false, l2->l0 skips ride the programmable inter-layer block.
    bool relay_skips{true};
    // Neuron / synapse caps for the two-layer backends; 0 = take them
    // from the largest palette config.
    long long neuron_cap{0};
    long long synapse_cap{0};
};

// Longest path (in edges) from every live neuron to the sink, over the
// residual graph induced by `live`. Unconnected neurons get kUnreachable.
// Returned vector is indexed like g.neurons.
std::vector<int> longest_path_distances(const SdcnnGraph &g,
        const Adjacency &adj, int sink, const std::vector<char> &live);

// Neuron ids ordered by (distance ascending, id ascending): the linear
// search path along which sub-networks take contiguous ranges.
std::vector<int> index_neurons(const SdcnnGraph &g,
        const std::vector<int> &distances, const std::vector<char> &live);

// Neurons at distance <= 2 (or <= 1 for two-layer geometries) from the
// sink, layered by distance. Does not insert relays.
SubNetwork create_subnet(const SdcnnGraph &g, const Adjacency &adj,
        const std::vector<int> &distances, const std::vector<char> &live,
        int max_distance);

// Replaces every layer-skipping internal synapse (l2->l0) with a relay in
// l1: src->relay carries unit weight, relay->dst carries the original
// weight, so the end-to-end contribution per spike is unchanged.
// next_relay_id supplies fresh neuron ids and is advanced.
SubNetwork insert_relays(const SubNetwork &s, int &next_relay_id,
        std::unordered_map<int, int> *relay_origin = nullptr);

struct MergeResult
{
    double cost{};
    bool feasible{};
    SubnetSize merged_size;
};

// Area/power merge rule: feasible iff the layer-wise union fits a palette
// config and both Area and Power strict inequalities hold. Cost is the
// normalized area/power combination of the merged sub-network.
MergeResult merge_cost(const SubNetwork &si, const SubNetwork &sj,
        const std::vector<CoreConfig> &palette, const CostModel &m);

// The SentryC compiler: distance-indexed partitioning, minimum-cost
// merging, relay insertion and channel extraction.
DataflowGraph compile(const SdcnnGraph &g,
        const std::vector<CoreConfig> &palette, const CostModel &m,
        Backend backend = Backend::mubrain, const CompileOptions &opts = {});

// Structural invariant checks on a compiled DFG (partition coverage,
// layer legality, config fit, channel endpoints). Throws on violation.
void check_dataflow_invariants(const DataflowGraph &dfg, const SdcnnGraph &g,
        const std::vector<CoreConfig> &palette, const CostModel &m);

struct Stimulus
{
    // (time_ps, input neuron id), sorted by time.
    std::vector<std::pair<std::int64_t, int>> events;
};

Stimulus random_stimulus(const SdcnnGraph &g, std::uint64_t seed,
        int spikes_per_input, std::int64_t window_ps = 100000);

// Runs the spike-level simulator on the uncompiled graph and fills the
// per-channel spike counts and per-subnet execution times
// (t_i = alpha * spikes processed + beta).
void profile_channels(DataflowGraph &dfg, const SdcnnGraph &g,
        const Stimulus &stimulus, const TimingConfig &timing,
        std::int64_t synapse_delay_ps = 1000);

nlohmann::json dfg_to_json(const DataflowGraph &dfg);
DataflowGraph dfg_from_json(const nlohmann::json &j);
DataflowGraph load_dfg(const std::string &path);
void save_dfg(const DataflowGraph &dfg, const std::string &path);

}

#endif
