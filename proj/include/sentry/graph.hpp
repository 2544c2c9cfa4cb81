#ifndef SENTRY_GRAPH_HPP
#define SENTRY_GRAPH_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sentry/error.hpp"

namespace sentry
{

enum class NeuronKind
{
    input,
    hidden,
    output,
    relay,
};

std::string to_string(NeuronKind kind);
NeuronKind neuron_kind_from_string(const std::string &s);

struct Neuron
{
    int id{};
    NeuronKind kind{NeuronKind::hidden};
    int threshold{1};
};

struct Synapse
{
    int src{};
    int dst{};
    int weight{};
};

// Feed-forward spiking inference graph. Immutable once validated.
struct SdcnnGraph
{
    std::string name;
    int weight_bits{2};
    std::vector<Neuron> neurons;   // sorted by id
    std::vector<Synapse> synapses; // sorted by (src, dst)

    int min_weight() const { return -(1 << (weight_bits - 1)); }
    int max_weight() const { return (1 << (weight_bits - 1)) - 1; }
};

// Neuron-index adjacency built once and shared by the algorithms.
struct Adjacency
{
    std::unordered_map<int, int> index_of; // neuron id -> index
    std::vector<std::vector<int>> out;     // synapse indices by src
    std::vector<std::vector<int>> in;      // synapse indices by dst

    explicit Adjacency(const SdcnnGraph &g);
};

// Checks every SdcnnGraph invariant; throws validation_error naming the
// offending element. allow_relay permits compiler-created relay neurons.
void validate(const SdcnnGraph &g, bool allow_relay = false);

// Indices into g.neurons in topological order (Kahn, smallest id first).
std::vector<int> topological_order(const SdcnnGraph &g, const Adjacency &adj);

SdcnnGraph graph_from_json(const nlohmann::json &j);
nlohmann::json graph_to_json(const SdcnnGraph &g);
SdcnnGraph load_graph(const std::string &path);
void save_graph(const SdcnnGraph &g, const std::string &path);

struct NeighborStats
{
    std::vector<int> l1; // per neuron, aligned with g.neurons
    std::vector<int> l2;
    int l1_min{}, l1_max{};
    double l1_avg{};
    int l2_min{}, l2_max{};
    double l2_avg{};
};

// L1(n) = pre-synaptic neighbor count, L2(n) = distinct pre-synaptic
// neighbors of the L1 neighbors (set semantics).
NeighborStats neighbor_stats(const SdcnnGraph &g);

struct GeneratorOptions
{
    std::string name{"generated"};
    int weight_bits{2};
    int default_threshold{64};
};

// Builds a synthetic SDCNN from a JSON list of layer objects
// ({"type": "input"|"conv"|"pool"|"dense"|"concat"|"add", ...dims}),
// then prunes the given fraction of smallest-magnitude weights
// (ties broken by synapse creation order). Pure function of its inputs.
SdcnnGraph generate_network(const nlohmann::json &layers, double prune_fraction,
        std::uint64_t seed, const GeneratorOptions &opts = {});

}

#endif
