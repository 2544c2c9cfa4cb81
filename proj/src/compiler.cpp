#include "sentry/compiler.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace sentry
{

int SubNetwork::layer_of(int neuron_id) const
{
    if (std::binary_search(l0.begin(), l0.end(), neuron_id))
        return 0;
    if (std::binary_search(l1.begin(), l1.end(), neuron_id))
        return 1;
    if (std::binary_search(l2.begin(), l2.end(), neuron_id))
        return 2;
    return -1;
}

int DataflowGraph::subnet_of_neuron(int neuron_id) const
{
    if (neuron_id < 0 || neuron_id >= static_cast<int>(subnet_of.size()))
        return -1;
    return subnet_of[neuron_id];
}

std::vector<int> longest_path_distances(const SdcnnGraph &g,
        const Adjacency &adj, int sink, const std::vector<char> &live)
{
    const auto it = adj.index_of.find(sink);
    if (it == adj.index_of.end() || !live[it->second])
        throw validation_error(
                "distance sink " + std::to_string(sink) + " is not live");
    const int sink_idx = it->second;

    std::vector<int> dist(g.neurons.size(), kUnreachable);
    dist[sink_idx] = 0;
    // Reverse topological order of the full graph also orders every
    // residual subgraph; DP over it yields longest paths in one sweep.
    const std::vector<int> topo = topological_order(g, adj);
    for (auto rit = topo.rbegin(); rit != topo.rend(); ++rit)
    {
        const int u = *rit;
        if (!live[u] || u == sink_idx)
            continue;
        int best = kUnreachable;
        for (const int s : adj.out[u])
        {
            const int v = adj.index_of.at(g.synapses[s].dst);
            if (live[v] && dist[v] != kUnreachable)
                best = best == kUnreachable ? dist[v] + 1
                                            : std::max(best, dist[v] + 1);
        }
        dist[u] = best;
    }
    return dist;
}

std::vector<int> index_neurons(const SdcnnGraph &g,
        const std::vector<int> &distances, const std::vector<char> &live)
{
    std::vector<int> ids;
    for (size_t i = 0; i < g.neurons.size(); i++)
        if (live[i])
            ids.push_back(g.neurons[i].id);
    const Adjacency adj(g);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        const int da = distances[adj.index_of.at(a)];
        const int db = distances[adj.index_of.at(b)];
        return std::tie(da, a) < std::tie(db, b);
    });
    return ids;
}

SubNetwork create_subnet(const SdcnnGraph &g, const Adjacency &adj,
        const std::vector<int> &distances, const std::vector<char> &live,
        int max_distance)
{
    SubNetwork s;
    for (size_t i = 0; i < g.neurons.size(); i++)
    {
        if (!live[i] || distances[i] > max_distance)
            continue;
        const int id = g.neurons[i].id;
        if (distances[i] == 0)
            s.l0.push_back(id);
        else if (distances[i] == 1)
            s.l1.push_back(id);
        else
            s.l2.push_back(id);
    }
    (void)adj;
    return s;
}

SubNetwork insert_relays(const SubNetwork &s, int &next_relay_id,
        std::unordered_map<int, int> *relay_origin)
{
    SubNetwork out = s;
    std::vector<Synapse> rewritten;
    for (const auto &syn : s.internal_synapses)
    {
        const int lu = s.layer_of(syn.src);
        const int lv = s.layer_of(syn.dst);
        if (lu - lv <= 1)
        {
            rewritten.push_back(syn);
            continue;
        }
        const int r = next_relay_id++;
        out.l1.push_back(r);
        out.relay_neurons.push_back(r);
        if (relay_origin != nullptr)
            relay_origin->emplace(r, syn.src);
        rewritten.push_back(Synapse{syn.src, r, 1});
        rewritten.push_back(Synapse{r, syn.dst, syn.weight});
    }
    out.internal_synapses = std::move(rewritten);
    std::sort(out.l1.begin(), out.l1.end());
    std::sort(out.relay_neurons.begin(), out.relay_neurons.end());
    return out;
}

namespace
{

double subnet_area(const SubnetSize &size,
        const std::vector<CoreConfig> &palette, const CostModel &m)
{
    if (size.total() == 0)
        return 0.0;
    return area_um2(palette[fit_config(size, palette, m)], m);
}

double subnet_power(const SubnetSize &size,
        const std::vector<CoreConfig> &palette, const CostModel &m)
{
    if (size.total() == 0)
        return 0.0;
    return static_power_uw(palette[fit_config(size, palette, m)], m);
}

MergeResult merge_cost_sizes(const SubnetSize &a, const SubnetSize &b,
        const std::vector<CoreConfig> &palette, const CostModel &m)
{
    MergeResult r;
    r.merged_size = SubnetSize{a.l2 + b.l2, a.l1 + b.l1, a.l0 + b.l0,
            a.synapses + b.synapses};

    double area_max = 0.0;
    double power_max = 0.0;
    for (const auto &c : palette)
    {
        area_max = std::max(area_max, area_um2(c, m));
        power_max = std::max(power_max, static_power_uw(c, m));
    }

    double merged_area = 0.0;
    double merged_power = 0.0;
    try
    {
        merged_area = subnet_area(r.merged_size, palette, m);
        merged_power = subnet_power(r.merged_size, palette, m);
    }
    catch (const no_fit_error &)
    {
        r.feasible = false;
        r.cost = std::numeric_limits<double>::infinity();
        return r;
    }
    r.cost = 0.5 * merged_area / area_max + 0.5 * merged_power / power_max;

    double area_i = 0.0, power_i = 0.0, area_j = 0.0, power_j = 0.0;
    try
    {
        area_i = subnet_area(a, palette, m);
        power_i = subnet_power(a, palette, m);
        area_j = subnet_area(b, palette, m);
        power_j = subnet_power(b, palette, m);
    }
    catch (const no_fit_error &)
    {
        r.feasible = false;
        return r;
    }
    r.feasible = merged_area < area_i + area_j && //
            merged_power < power_i + power_j;
    return r;
}

}

MergeResult merge_cost(const SubNetwork &si, const SubNetwork &sj,
        const std::vector<CoreConfig> &palette, const CostModel &m)
{
    return merge_cost_sizes(si.size(), sj.size(), palette, m);
}

namespace
{

// Working state of the partitioning loop.
struct PartitionState
{
    const SdcnnGraph &g;
    const Adjacency &adj;
    std::vector<char> live;
    int live_count;
    std::vector<int> assigned; // neuron index -> subnet index
    std::vector<SubNetwork> subnets;
    std::vector<long long> internal_synapse_count;
    // Channel-level DAG maintained incrementally for merge legality.
    std::vector<std::set<int>> sub_out;
    std::vector<std::set<int>> sub_in;

    explicit PartitionState(const SdcnnGraph &graph, const Adjacency &a)
            : g(graph)
            , adj(a)
            , live(graph.neurons.size(), 1)
            , live_count(static_cast<int>(graph.neurons.size()))
            , assigned(graph.neurons.size(), -1)
    {
    }

    void assign_member(int neuron_idx, int subnet)
    {
        assigned[neuron_idx] = subnet;
        live[neuron_idx] = 0;
        live_count--;
        for (const int s : adj.out[neuron_idx])
        {
            const int t = assigned[adj.index_of.at(g.synapses[s].dst)];
            if (t >= 0 && t != subnet)
            {
                sub_out[subnet].insert(t);
                sub_in[t].insert(subnet);
            }
        }
        for (const int s : adj.in[neuron_idx])
        {
            const int t = assigned[adj.index_of.at(g.synapses[s].src)];
            if (t >= 0 && t != subnet)
            {
                sub_out[t].insert(subnet);
                sub_in[subnet].insert(t);
            }
        }
    }

    bool reaches(const std::set<int> &from, const std::set<int> &targets) const
    {
        std::deque<int> queue(from.begin(), from.end());
        std::set<int> seen(from.begin(), from.end());
        while (!queue.empty())
        {
            const int u = queue.front();
            queue.pop_front();
            if (targets.count(u))
                return true;
            for (const int v : sub_out[u])
                if (seen.insert(v).second)
                    queue.push_back(v);
        }
        return false;
    }

    // Merging must keep the sub-network graph acyclic. A direct edge
    // between the partners is fine (it becomes internal); only a path
    // through a third subnet creates a cycle.
    bool merge_keeps_dag(int k, const std::set<int> &out_i,
            const std::set<int> &in_i) const
    {
        std::set<int> from = out_i;
        from.insert(sub_out[k].begin(), sub_out[k].end());
        from.erase(k);
        std::set<int> targets = in_i;
        targets.insert(sub_in[k].begin(), sub_in[k].end());
        targets.insert(k);
        return !reaches(from, targets);
    }

    // Synapses between the merge partners become internal, so they must
    // descend strictly in layer (a skip is fixed later by a relay; an
    // upward or same-layer edge cannot be hosted). Counts them so the
    // merged synapse load is priced correctly.
    bool merge_layer_legal(int k, const SubNetwork &s,
            long long &cross_synapses) const
    {
        cross_synapses = 0;
        const SubNetwork &other = subnets[k];
        std::vector<int> members;
        members.insert(members.end(), s.l0.begin(), s.l0.end());
        members.insert(members.end(), s.l1.begin(), s.l1.end());
        members.insert(members.end(), s.l2.begin(), s.l2.end());
        for (const int id : members)
        {
            const int idx = adj.index_of.at(id);
            for (const int e : adj.out[idx])
            {
                const Synapse &syn = g.synapses[e];
                if (assigned[adj.index_of.at(syn.dst)] != k)
                    continue;
                if (s.layer_of(syn.src) <= other.layer_of(syn.dst))
                    return false;
                cross_synapses++;
            }
            for (const int e : adj.in[idx])
            {
                const Synapse &syn = g.synapses[e];
                if (assigned[adj.index_of.at(syn.src)] != k)
                    continue;
                if (other.layer_of(syn.src) <= s.layer_of(syn.dst))
                    return false;
                cross_synapses++;
            }
        }
        return true;
    }
};

void merge_layers(SubNetwork &dst, const SubNetwork &src)
{
    auto merge_sorted = [](std::vector<int> &a, const std::vector<int> &b) {
        a.insert(a.end(), b.begin(), b.end());
        std::sort(a.begin(), a.end());
    };
    merge_sorted(dst.l0, src.l0);
    merge_sorted(dst.l1, src.l1);
    merge_sorted(dst.l2, src.l2);
}

// Caps a two-layer subnet along the index order (distance, then id).
void truncate_to_caps(SubNetwork &s, const PartitionState &st,
        long long neuron_cap, long long synapse_cap, long long &synapses_kept)
{
    std::vector<int> order;
    order.insert(order.end(), s.l0.begin(), s.l0.end());
    std::sort(order.begin(), order.end());
    std::vector<int> l1 = s.l1;
    std::sort(l1.begin(), l1.end());
    order.insert(order.end(), l1.begin(), l1.end());

    std::set<int> kept;
    long long syn = 0;
    for (const int id : order)
    {
        if (static_cast<long long>(kept.size()) >= neuron_cap)
            break;
        const int idx = st.adj.index_of.at(id);
        long long delta = 0;
        for (const int e : st.adj.out[idx])
            if (kept.count(st.g.synapses[e].dst))
                delta++;
        for (const int e : st.adj.in[idx])
            if (kept.count(st.g.synapses[e].src))
                delta++;
        if (syn + delta > synapse_cap && !kept.empty())
            continue;
        kept.insert(id);
        syn += delta;
    }
    synapses_kept = syn;
    auto filter = [&](std::vector<int> &layer) {
        std::vector<int> out;
        for (const int id : layer)
            if (kept.count(id))
                out.push_back(id);
        layer = std::move(out);
    };
    filter(s.l0);
    filter(s.l1);
    filter(s.l2);
}

long long count_internal_synapses(const SubNetwork &s,
        const PartitionState &st)
{
    std::set<int> members;
    members.insert(s.l0.begin(), s.l0.end());
    members.insert(s.l1.begin(), s.l1.end());
    members.insert(s.l2.begin(), s.l2.end());
    long long count = 0;
    for (const int id : members)
        for (const int e : st.adj.out[st.adj.index_of.at(id)])
            if (members.count(st.g.synapses[e].dst))
                count++;
    return count;
}

// Places one subnet: merge into the existing DFG if the area/power rule
// allows it, otherwise append. Returns the owning subnet index.
int place_subnet(PartitionState &st, SubNetwork &&subnet, long long syn_count,
        const std::vector<CoreConfig> &palette, const CostModel &m)
{
    std::vector<int> members;
    members.insert(members.end(), subnet.l0.begin(), subnet.l0.end());
    members.insert(members.end(), subnet.l1.begin(), subnet.l1.end());
    members.insert(members.end(), subnet.l2.begin(), subnet.l2.end());

    // Channel neighbors the new subnet would carry.
    std::set<int> out_i;
    std::set<int> in_i;
    for (const int id : members)
    {
        const int idx = st.adj.index_of.at(id);
        for (const int e : st.adj.out[idx])
        {
            const int t = st.assigned[st.adj.index_of.at(st.g.synapses[e].dst)];
            if (t >= 0)
                out_i.insert(t);
        }
        for (const int e : st.adj.in[idx])
        {
            const int t = st.assigned[st.adj.index_of.at(st.g.synapses[e].src)];
            if (t >= 0)
                in_i.insert(t);
        }
    }

    SubnetSize new_size = subnet.size();
    new_size.synapses = syn_count;
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    long long best_cross = 0;
    for (size_t k = 0; k < st.subnets.size(); k++)
    {
        if (!st.merge_keeps_dag(static_cast<int>(k), out_i, in_i))
            continue;
        long long cross = 0;
        if (!st.merge_layer_legal(static_cast<int>(k), subnet, cross))
            continue;
        SubnetSize existing = st.subnets[k].size();
        existing.synapses = st.internal_synapse_count[k];
        SubnetSize incoming = new_size;
        incoming.synapses += cross;
        const MergeResult mr =
                merge_cost_sizes(incoming, existing, palette, m);
        if (mr.feasible && mr.cost < best_cost)
        {
            best_cost = mr.cost;
            best = static_cast<int>(k);
            best_cross = cross;
        }
    }

    int owner;
    if (best >= 0)
    {
        merge_layers(st.subnets[best], subnet);
        st.internal_synapse_count[best] += syn_count + best_cross;
        owner = best;
    }
    else
    {
        fit_config(new_size, palette, m); // no-fit check
        subnet.id = static_cast<int>(st.subnets.size());
        st.subnets.push_back(std::move(subnet));
        st.internal_synapse_count.push_back(syn_count);
        st.sub_out.emplace_back();
        st.sub_in.emplace_back();
        owner = static_cast<int>(st.subnets.size()) - 1;
    }
    for (const int id : members)
        st.assign_member(st.adj.index_of.at(id), owner);
    return owner;
}

}

}

namespace sentry
{

namespace
{

// Relay/channel realization shared by all backends. Rewrites every
// original synapse into layer-legal internal hops and l0 -> input-layer
// channel hops; the final hop carries the original weight.
void realize_synapses(DataflowGraph &dfg, const SdcnnGraph &g,
        Backend backend, bool relay_skips)
{
    int max_id = -1;
    for (const auto &n : g.neurons)
        max_id = std::max(max_id, n.id);
    int next_relay = max_id + 1;
    dfg.first_relay_id = next_relay;

    std::map<std::pair<int, int>, std::vector<ChannelSynapse>> channel_map;

    auto add_relay = [&](int subnet, int layer, int origin) {
        const int r = next_relay++;
        SubNetwork &s = dfg.subnets[subnet];
        if (layer == 0)
            s.l0.push_back(r);
        else if (layer == 1)
            s.l1.push_back(r);
        else
            s.l2.push_back(r);
        s.relay_neurons.push_back(r);
        dfg.relay_origin.emplace(r, origin);
        dfg.subnet_of.resize(static_cast<size_t>(next_relay), -1);
        dfg.subnet_of[r] = subnet;
        return r;
    };

    // Internal layer skips get one relay per synapse. Cross-subnet
    // synapses leave the source neuron directly and, when the target sits
    // below the consumer's input layer, enter through a relay chain shared
    // per (source, consumer) pair. Only the final hop of any rewritten
    // path carries the original weight.
    std::map<std::pair<int, int>, int> entry_relay;    // (src, sv) -> l2 entry
    std::map<std::pair<int, int>, int> entry_l1_relay; // (src, sv) -> l1 hop

    for (const auto &syn : g.synapses)
    {
        const int su = dfg.subnet_of[syn.src];
        const int sv = dfg.subnet_of[syn.dst];
        const int lu = dfg.subnets[su].layer_of(syn.src);
        const int lv = dfg.subnets[sv].layer_of(syn.dst);

        if (su == sv)
        {
            if (lu - lv <= 1 || !relay_skips)
            {
                dfg.subnets[su].internal_synapses.push_back(syn);
            }
            else
            {
                const int r = add_relay(su, 1, syn.src);
                SubNetwork &s = dfg.subnets[su];
                s.internal_synapses.push_back(Synapse{syn.src, r, 1});
                s.internal_synapses.push_back(Synapse{r, syn.dst, syn.weight});
            }
            continue;
        }

        if (backend == Backend::mubrain && lv < 2)
        {
            // Enter through l2 and relay down to the target layer.
            const std::pair<int, int> key{syn.src, sv};
            int entry;
            const auto it = entry_relay.find(key);
            if (it != entry_relay.end())
            {
                entry = it->second;
            }
            else
            {
                entry = add_relay(sv, 2, syn.src);
                channel_map[{su, sv}].push_back(
                        ChannelSynapse{syn.src, entry, 1});
                entry_relay.emplace(key, entry);
            }
            if (lv == 1)
            {
                dfg.subnets[sv].internal_synapses.push_back(
                        Synapse{entry, syn.dst, syn.weight});
            }
            else
            {
                const auto hit = entry_l1_relay.find(key);
                int hop;
                if (hit != entry_l1_relay.end())
                {
                    hop = hit->second;
                }
                else
                {
                    hop = add_relay(sv, 1, syn.src);
                    dfg.subnets[sv].internal_synapses.push_back(
                            Synapse{entry, hop, 1});
                    entry_l1_relay.emplace(key, hop);
                }
                dfg.subnets[sv].internal_synapses.push_back(
                        Synapse{hop, syn.dst, syn.weight});
            }
        }
        else
        {
            // l2 targets (three-layer) and crossbar ports (two-layer)
            // take the channel synapse directly.
            channel_map[{su, sv}].push_back(
                    ChannelSynapse{syn.src, syn.dst, syn.weight});
        }
    }

    for (auto &[key, synapses] : channel_map)
    {
        Channel c;
        c.src_subnet = key.first;
        c.dst_subnet = key.second;
        std::sort(synapses.begin(), synapses.end(),
                [](const ChannelSynapse &a, const ChannelSynapse &b) {
                    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
                });
        c.synapses = std::move(synapses);
        dfg.channels.push_back(std::move(c));
    }

    for (auto &s : dfg.subnets)
    {
        std::sort(s.l0.begin(), s.l0.end());
        std::sort(s.l1.begin(), s.l1.end());
        std::sort(s.l2.begin(), s.l2.end());
        std::sort(s.relay_neurons.begin(), s.relay_neurons.end());
        std::sort(s.internal_synapses.begin(), s.internal_synapses.end(),
                [](const Synapse &a, const Synapse &b) {
                    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
                });
    }
}

}

DataflowGraph compile(const SdcnnGraph &g,
        const std::vector<CoreConfig> &palette, const CostModel &m,
        Backend backend, const CompileOptions &opts)
{
    if (palette.empty())
        throw no_fit_error("empty core palette");
    const Adjacency adj(g);
    PartitionState st(g, adj);

    const int max_distance = backend == Backend::mubrain ? 2 : 1;
    long long neuron_cap = opts.neuron_cap;
    long long synapse_cap = opts.synapse_cap;
    if (backend != Backend::mubrain)
    {
        for (const auto &c : palette)
        {
            neuron_cap = std::max(neuron_cap, c.neuron_capacity());
            synapse_cap = std::max(synapse_cap, c.synapse_capacity());
        }
        if (opts.neuron_cap > 0)
            neuron_cap = opts.neuron_cap;
        if (opts.synapse_cap > 0)
            synapse_cap = opts.synapse_cap;
    }

    // Line 2 of the partitioning loop: start from the output neurons.
    std::vector<int> frontier;
    for (size_t i = 0; i < g.neurons.size(); i++)
        if (adj.out[i].empty())
            frontier.push_back(g.neurons[i].id);
    std::sort(frontier.begin(), frontier.end());

    while (st.live_count > 0)
    {
        if (frontier.empty())
        {
            // Disconnected residual: seed with its output neurons.
            std::vector<int> seeds;
            for (size_t i = 0; i < g.neurons.size(); i++)
            {
                if (!st.live[i])
                    continue;
                bool is_sink = true;
                for (const int e : adj.out[i])
                    if (st.live[adj.index_of.at(g.synapses[e].dst)])
                        is_sink = false;
                if (is_sink)
                    seeds.push_back(g.neurons[i].id);
            }
            std::sort(seeds.begin(), seeds.end());
            if (backend != Backend::mubrain && neuron_cap > 0)
            {
                // Crossbar backends batch disconnected outputs into
                // capacity-sized chunks instead of singleton subnets.
                for (size_t pos = 0; pos < seeds.size();
                        pos += static_cast<size_t>(neuron_cap))
                {
                    SubNetwork s;
                    const size_t end = std::min(seeds.size(),
                            pos + static_cast<size_t>(neuron_cap));
                    s.l0.assign(seeds.begin() + pos, seeds.begin() + end);
                    place_subnet(st, std::move(s), 0, palette, m);
                }
                continue;
            }
            frontier = std::move(seeds);
        }

        std::vector<int> next_frontier;
        for (const int sink : frontier)
        {
            const int sink_idx = adj.index_of.at(sink);
            if (!st.live[sink_idx])
                continue;
            const std::vector<int> dist =
                    longest_path_distances(g, adj, sink, st.live);
            SubNetwork s =
                    create_subnet(g, adj, dist, st.live, max_distance);
            long long syn_count;
            if (backend != Backend::mubrain)
                truncate_to_caps(s, st, neuron_cap, synapse_cap, syn_count);
            else
                syn_count = count_internal_synapses(s, st);
            place_subnet(st, std::move(s), syn_count, palette, m);
            for (size_t i = 0; i < g.neurons.size(); i++)
                if (st.live[i] && dist[i] == max_distance + 1)
                    next_frontier.push_back(g.neurons[i].id);
        }
        std::sort(next_frontier.begin(), next_frontier.end());
        next_frontier.erase(
                std::unique(next_frontier.begin(), next_frontier.end()),
                next_frontier.end());
        frontier = std::move(next_frontier);
    }

    DataflowGraph dfg;
    dfg.graph_name = g.name;
    dfg.backend = backend;
    dfg.subnets = std::move(st.subnets);
    int max_id = -1;
    for (const auto &n : g.neurons)
        max_id = std::max(max_id, n.id);
    dfg.subnet_of.assign(static_cast<size_t>(max_id) + 1, -1);
    for (size_t i = 0; i < g.neurons.size(); i++)
        dfg.subnet_of[g.neurons[i].id] = st.assigned[i];

    realize_synapses(dfg, g, backend, opts.relay_skips);

    // Re-fit every subnet with its relays included.
    for (auto &s : dfg.subnets)
    {
        s.config_index = fit_config(s.size(), palette, m);
        s.config_name = palette[s.config_index].name;
    }
    dfg.exec_times.assign(dfg.subnets.size(), 0.0);
    return dfg;
}

void check_dataflow_invariants(const DataflowGraph &dfg, const SdcnnGraph &g,
        const std::vector<CoreConfig> &palette, const CostModel &m)
{
    // Partition: non-relay neurons of subnets cover g exactly once.
    std::set<int> covered;
    for (const auto &s : dfg.subnets)
    {
        std::set<int> relays(s.relay_neurons.begin(), s.relay_neurons.end());
        for (const auto *layer : {&s.l0, &s.l1, &s.l2})
            for (const int id : *layer)
            {
                if (relays.count(id))
                    continue;
                if (!covered.insert(id).second)
                    throw validation_error("neuron " + std::to_string(id) +
                            " appears in two sub-networks");
            }
    }
    if (covered.size() != g.neurons.size())
        throw validation_error("sub-networks do not cover the input graph");
    for (const auto &n : g.neurons)
        if (!covered.count(n.id))
            throw validation_error(
                    "neuron " + std::to_string(n.id) + " was lost");

    for (const auto &s : dfg.subnets)
    {
        // Layer legality: internal synapses step down exactly one layer
        // (or ride the programmable l2->l0 block when relays are off).
        for (const auto &syn : s.internal_synapses)
        {
            const int lu = s.layer_of(syn.src);
            const int lv = s.layer_of(syn.dst);
            if (lu < 0 || lv < 0)
                throw validation_error("internal synapse " +
                        std::to_string(syn.src) + "->" +
                        std::to_string(syn.dst) + " leaves subnet " +
                        std::to_string(s.id));
            if (lu <= lv)
                throw validation_error("internal synapse " +
                        std::to_string(syn.src) + "->" +
                        std::to_string(syn.dst) + " does not descend");
        }
        // Capacity fit.
        if (s.config_index < 0 ||
                s.config_index >= static_cast<int>(palette.size()) ||
                !config_fits(palette[s.config_index], s.size()))
            throw validation_error("subnet " + std::to_string(s.id) +
                    " does not fit its assigned config");
        (void)m;
    }

    for (const auto &c : dfg.channels)
    {
        if (c.src_subnet == c.dst_subnet)
            throw validation_error("channel with equal endpoints");
        const SubNetwork &src = dfg.subnets[c.src_subnet];
        const SubNetwork &dst = dfg.subnets[c.dst_subnet];
        for (const auto &syn : c.synapses)
        {
            if (src.layer_of(syn.src) < 0)
                throw validation_error("channel source " +
                        std::to_string(syn.src) + " is outside subnet");
            if (dfg.backend == Backend::mubrain &&
                    dst.layer_of(syn.dst) != 2)
                throw validation_error("channel target " +
                        std::to_string(syn.dst) + " is not in l2");
            if (dst.layer_of(syn.dst) < 0)
                throw validation_error("channel target " +
                        std::to_string(syn.dst) + " is outside subnet");
        }
    }

    // Channel graph must be a DAG for the scheduler.
    const size_t n = dfg.subnets.size();
    std::vector<std::vector<int>> out(n);
    std::vector<int> indeg(n, 0);
    for (const auto &c : dfg.channels)
    {
        out[c.src_subnet].push_back(c.dst_subnet);
        indeg[c.dst_subnet]++;
    }
    std::deque<int> q;
    for (size_t i = 0; i < n; i++)
        if (indeg[i] == 0)
            q.push_back(static_cast<int>(i));
    size_t seen = 0;
    while (!q.empty())
    {
        const int u = q.front();
        q.pop_front();
        seen++;
        for (const int v : out[u])
            if (--indeg[v] == 0)
                q.push_back(v);
    }
    if (seen != n)
        throw validation_error("sub-network graph contains a cycle");
}

nlohmann::json dfg_to_json(const DataflowGraph &dfg)
{
    nlohmann::json j;
    j["graph_name"] = dfg.graph_name;
    j["backend"] = to_string(dfg.backend);
    j["first_relay_id"] = dfg.first_relay_id;
    j["subnets"] = nlohmann::json::array();
    for (const auto &s : dfg.subnets)
    {
        nlohmann::json js;
        js["id"] = s.id;
        js["l0"] = s.l0;
        js["l1"] = s.l1;
        js["l2"] = s.l2;
        js["relays"] = s.relay_neurons;
        js["config"] = s.config_name;
        js["config_index"] = s.config_index;
        js["internal_synapses"] = nlohmann::json::array();
        for (const auto &syn : s.internal_synapses)
            js["internal_synapses"].push_back(
                    {{"src", syn.src}, {"dst", syn.dst}, {"weight", syn.weight}});
        j["subnets"].push_back(std::move(js));
    }
    j["channels"] = nlohmann::json::array();
    for (const auto &c : dfg.channels)
    {
        nlohmann::json jc;
        jc["src_subnet"] = c.src_subnet;
        jc["dst_subnet"] = c.dst_subnet;
        jc["profiled_spikes"] = c.profiled_spikes;
        jc["synapses"] = nlohmann::json::array();
        for (const auto &syn : c.synapses)
            jc["synapses"].push_back(
                    {{"src", syn.src}, {"dst", syn.dst}, {"weight", syn.weight}});
        j["channels"].push_back(std::move(jc));
    }
    j["exec_times"] = dfg.exec_times;
    std::vector<std::pair<int, int>> origins(
            dfg.relay_origin.begin(), dfg.relay_origin.end());
    std::sort(origins.begin(), origins.end());
    j["relay_origin"] = nlohmann::json::array();
    for (const auto &[relay, origin] : origins)
        j["relay_origin"].push_back({relay, origin});
    return j;
}

DataflowGraph dfg_from_json(const nlohmann::json &j)
{
    DataflowGraph dfg;
    try
    {
        dfg.graph_name = j.at("graph_name").get<std::string>();
        dfg.backend = backend_from_string(j.at("backend").get<std::string>());
        dfg.first_relay_id = j.at("first_relay_id").get<int>();
        for (const auto &js : j.at("subnets"))
        {
            SubNetwork s;
            s.id = js.at("id").get<int>();
            s.l0 = js.at("l0").get<std::vector<int>>();
            s.l1 = js.at("l1").get<std::vector<int>>();
            s.l2 = js.at("l2").get<std::vector<int>>();
            s.relay_neurons = js.at("relays").get<std::vector<int>>();
            s.config_name = js.at("config").get<std::string>();
            s.config_index = js.at("config_index").get<int>();
            for (const auto &jsyn : js.at("internal_synapses"))
                s.internal_synapses.push_back(
                        Synapse{jsyn.at("src").get<int>(),
                                jsyn.at("dst").get<int>(),
                                jsyn.at("weight").get<int>()});
            dfg.subnets.push_back(std::move(s));
        }
        for (const auto &jc : j.at("channels"))
        {
            Channel c;
            c.src_subnet = jc.at("src_subnet").get<int>();
            c.dst_subnet = jc.at("dst_subnet").get<int>();
            c.profiled_spikes = jc.at("profiled_spikes").get<long long>();
            for (const auto &jsyn : jc.at("synapses"))
                c.synapses.push_back(
                        ChannelSynapse{jsyn.at("src").get<int>(),
                                jsyn.at("dst").get<int>(),
                                jsyn.at("weight").get<int>()});
            dfg.channels.push_back(std::move(c));
        }
        dfg.exec_times = j.at("exec_times").get<std::vector<double>>();
        for (const auto &pair : j.at("relay_origin"))
            dfg.relay_origin.emplace(
                    pair.at(0).get<int>(), pair.at(1).get<int>());
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error(std::string("malformed DFG file: ") + e.what());
    }

    int max_id = -1;
    for (const auto &s : dfg.subnets)
        for (const auto *layer : {&s.l0, &s.l1, &s.l2})
            for (const int id : *layer)
                max_id = std::max(max_id, id);
    dfg.subnet_of.assign(static_cast<size_t>(max_id) + 1, -1);
    for (const auto &s : dfg.subnets)
        for (const auto *layer : {&s.l0, &s.l1, &s.l2})
            for (const int id : *layer)
                dfg.subnet_of[id] = s.id;
    return dfg;
}

DataflowGraph load_dfg(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open DFG file: " + path);
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error("cannot parse " + path + ": " + e.what());
    }
    return dfg_from_json(j);
}

void save_dfg(const DataflowGraph &dfg, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw error("cannot write DFG file: " + path);
    out << dfg_to_json(dfg).dump(2) << "\n";
}

}
