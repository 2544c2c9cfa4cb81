#include "sentry/graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

namespace sentry
{

std::string to_string(NeuronKind kind)
{
    switch (kind)
    {
    case NeuronKind::input:
        return "input";
    case NeuronKind::hidden:
        return "hidden";
    case NeuronKind::output:
        return "output";
    case NeuronKind::relay:
        return "relay";
    }
    return "hidden";
}

NeuronKind neuron_kind_from_string(const std::string &s)
{
    if (s == "input")
        return NeuronKind::input;
    if (s == "hidden")
        return NeuronKind::hidden;
    if (s == "output")
        return NeuronKind::output;
    if (s == "relay")
        return NeuronKind::relay;
    throw parse_error("unknown neuron kind: " + s);
}

Adjacency::Adjacency(const SdcnnGraph &g)
{
    index_of.reserve(g.neurons.size());
    for (size_t i = 0; i < g.neurons.size(); i++)
        index_of.emplace(g.neurons[i].id, static_cast<int>(i));
    out.resize(g.neurons.size());
    in.resize(g.neurons.size());
    for (size_t s = 0; s < g.synapses.size(); s++)
    {
        out[index_of.at(g.synapses[s].src)].push_back(static_cast<int>(s));
        in[index_of.at(g.synapses[s].dst)].push_back(static_cast<int>(s));
    }
}

std::vector<int> topological_order(const SdcnnGraph &g, const Adjacency &adj)
{
    const size_t n = g.neurons.size();
    std::vector<int> in_deg(n, 0);
    for (const auto &s : g.synapses)
        in_deg[adj.index_of.at(s.dst)]++;

    // Min-id ready set keeps the order canonical.
    std::set<std::pair<int, int>> ready; // (id, index)
    for (size_t i = 0; i < n; i++)
        if (in_deg[i] == 0)
            ready.emplace(g.neurons[i].id, static_cast<int>(i));

    std::vector<int> order;
    order.reserve(n);
    while (!ready.empty())
    {
        const int idx = ready.begin()->second;
        ready.erase(ready.begin());
        order.push_back(idx);
        for (const int s : adj.out[idx])
        {
            const int d = adj.index_of.at(g.synapses[s].dst);
            if (--in_deg[d] == 0)
                ready.emplace(g.neurons[d].id, d);
        }
    }
    if (order.size() != n)
        throw validation_error("graph '" + g.name + "' contains a cycle");
    return order;
}

void validate(const SdcnnGraph &g, bool allow_relay)
{
    std::unordered_set<int> ids;
    for (const auto &n : g.neurons)
    {
        if (n.id < 0)
            throw validation_error(
                    "negative neuron id " + std::to_string(n.id));
        if (!ids.insert(n.id).second)
            throw validation_error(
                    "duplicate neuron id " + std::to_string(n.id));
        if (n.threshold < 1)
            throw validation_error("neuron " + std::to_string(n.id) +
                    " has threshold < 1");
        if (n.kind == NeuronKind::relay && !allow_relay)
            throw validation_error("neuron " + std::to_string(n.id) +
                    " has kind 'relay', which only the compiler may create");
    }
    if (g.weight_bits < 1 || g.weight_bits > 31)
        throw validation_error("weight_bits out of range");

    std::set<std::pair<int, int>> pairs;
    std::unordered_map<int, int> out_deg;
    std::unordered_map<int, int> in_deg;
    for (const auto &s : g.synapses)
    {
        if (s.src == s.dst)
            throw validation_error(
                    "self-loop on neuron " + std::to_string(s.src));
        if (ids.count(s.src) == 0)
            throw validation_error("synapse source " + std::to_string(s.src) +
                    " is not a neuron");
        if (ids.count(s.dst) == 0)
            throw validation_error("synapse destination " +
                    std::to_string(s.dst) + " is not a neuron");
        if (!pairs.emplace(s.src, s.dst).second)
            throw validation_error("duplicate synapse " +
                    std::to_string(s.src) + "->" + std::to_string(s.dst));
        if (s.weight < g.min_weight() || s.weight > g.max_weight())
            throw validation_error("synapse " + std::to_string(s.src) + "->" +
                    std::to_string(s.dst) + " weight " +
                    std::to_string(s.weight) + " not representable in " +
                    std::to_string(g.weight_bits) + " bits");
        out_deg[s.src]++;
        in_deg[s.dst]++;
    }
    if (!g.neurons.empty())
    {
        bool has_source = false;
        bool has_sink = false;
        for (const auto &n : g.neurons)
        {
            has_source |= in_deg.count(n.id) == 0;
            has_sink |= out_deg.count(n.id) == 0;
        }
        if (!has_source)
            throw validation_error("graph has no input (in-degree 0) neuron");
        if (!has_sink)
            throw validation_error("graph has no output (out-degree 0) neuron");
    }
    const Adjacency adj(g);
    topological_order(g, adj); // throws on cycle
}

SdcnnGraph graph_from_json(const nlohmann::json &j)
{
    SdcnnGraph g;
    try
    {
        g.name = j.at("name").get<std::string>();
        g.weight_bits = j.value("weight_bits", 2);
        for (const auto &jn : j.at("neurons"))
        {
            Neuron n;
            n.id = jn.at("id").get<int>();
            n.kind = neuron_kind_from_string(
                    jn.value("kind", std::string("hidden")));
            n.threshold = jn.at("threshold").get<int>();
            g.neurons.push_back(n);
        }
        for (const auto &js : j.at("synapses"))
        {
            Synapse s;
            s.src = js.at("src").get<int>();
            s.dst = js.at("dst").get<int>();
            s.weight = js.at("weight").get<int>();
            g.synapses.push_back(s);
        }
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error(std::string("malformed graph file: ") + e.what());
    }
    std::sort(g.neurons.begin(), g.neurons.end(),
            [](const Neuron &a, const Neuron &b) { return a.id < b.id; });
    std::sort(g.synapses.begin(), g.synapses.end(),
            [](const Synapse &a, const Synapse &b) {
                return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
            });
    validate(g);
    return g;
}

nlohmann::json graph_to_json(const SdcnnGraph &g)
{
    nlohmann::json j;
    j["name"] = g.name;
    j["weight_bits"] = g.weight_bits;
    j["neurons"] = nlohmann::json::array();
    for (const auto &n : g.neurons)
        j["neurons"].push_back({{"id", n.id}, {"kind", to_string(n.kind)},
                {"threshold", n.threshold}});
    j["synapses"] = nlohmann::json::array();
    for (const auto &s : g.synapses)
        j["synapses"].push_back(
                {{"src", s.src}, {"dst", s.dst}, {"weight", s.weight}});
    return j;
}

SdcnnGraph load_graph(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open graph file: " + path);
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error("cannot parse " + path + ": " + e.what());
    }
    return graph_from_json(j);
}

void save_graph(const SdcnnGraph &g, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw error("cannot write graph file: " + path);
    out << graph_to_json(g).dump(2) << "\n";
}

NeighborStats neighbor_stats(const SdcnnGraph &g)
{
    const Adjacency adj(g);
    NeighborStats stats;
    stats.l1.resize(g.neurons.size());
    stats.l2.resize(g.neurons.size());
    for (size_t i = 0; i < g.neurons.size(); i++)
    {
        stats.l1[i] = static_cast<int>(adj.in[i].size());
        std::unordered_set<int> two_hop;
        for (const int s : adj.in[i])
        {
            const int pre = adj.index_of.at(g.synapses[s].src);
            for (const int s2 : adj.in[pre])
                two_hop.insert(g.synapses[s2].src);
        }
        stats.l2[i] = static_cast<int>(two_hop.size());
    }
    auto summarize = [](const std::vector<int> &v, int &mn, int &mx,
                             double &avg) {
        mn = v.empty() ? 0 : *std::min_element(v.begin(), v.end());
        mx = v.empty() ? 0 : *std::max_element(v.begin(), v.end());
        avg = v.empty() ? 0.0
                        : std::accumulate(v.begin(), v.end(), 0.0) /
                        static_cast<double>(v.size());
    };
    summarize(stats.l1, stats.l1_min, stats.l1_max, stats.l1_avg);
    summarize(stats.l2, stats.l2_min, stats.l2_max, stats.l2_avg);
    return stats;
}

}
