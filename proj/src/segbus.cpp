#include "sentry/segbus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sentry
{

namespace
{

std::vector<int> dfg_topological_order(const DataflowGraph &dfg)
{
    const size_t n = dfg.subnets.size();
    std::vector<std::vector<int>> out(n);
    std::vector<int> indeg(n, 0);
    for (const auto &c : dfg.channels)
    {
        out[c.src_subnet].push_back(c.dst_subnet);
        indeg[c.dst_subnet]++;
    }
    std::set<int> ready;
    for (size_t i = 0; i < n; i++)
        if (indeg[i] == 0)
            ready.insert(static_cast<int>(i));
    std::vector<int> order;
    while (!ready.empty())
    {
        const int u = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(u);
        for (const int v : out[u])
            if (--indeg[v] == 0)
                ready.insert(v);
    }
    if (order.size() != n)
        throw validation_error("sub-network graph contains a cycle");
    return order;
}

bool windows_overlap(const ActivityWindow &a, const ActivityWindow &b)
{
    return a.start < b.end && b.start < a.end;
}

// Segment intervals conflict only when they share a segment, not just a
// boundary position.
bool spans_share_segment(int lo1, int hi1, int lo2, int hi2)
{
    return std::min(hi1, hi2) > std::max(lo1, lo2);
}

struct ChannelSpan
{
    int lo{};
    int hi{};
};

std::vector<ChannelSpan> channel_spans(const DataflowGraph &dfg,
        const Placement &placement)
{
    std::vector<ChannelSpan> spans;
    spans.reserve(dfg.channels.size());
    for (const auto &c : dfg.channels)
    {
        const int a = placement.position_of[c.src_subnet];
        const int b = placement.position_of[c.dst_subnet];
        spans.push_back(ChannelSpan{std::min(a, b), std::max(a, b)});
    }
    return spans;
}

std::vector<std::vector<char>> conflict_graph(const DataflowGraph &dfg,
        const Placement &placement,
        const std::vector<ActivityWindow> &activity)
{
    const auto spans = channel_spans(dfg, placement);
    const size_t n = dfg.channels.size();
    std::vector<std::vector<char>> conflict(n, std::vector<char>(n, 0));
    for (size_t i = 0; i < n; i++)
        for (size_t j = i + 1; j < n; j++)
        {
            if (windows_overlap(activity[i], activity[j]) &&
                    spans_share_segment(spans[i].lo, spans[i].hi,
                            spans[j].lo, spans[j].hi))
            {
                conflict[i][j] = 1;
                conflict[j][i] = 1;
            }
        }
    return conflict;
}

// Exact chromatic number by iterative-deepening backtracking; fine for
// the small conflict graphs a profiled DFG produces.
bool color_with(const std::vector<std::vector<char>> &conflict,
        const std::vector<int> &order, size_t pos, int k,
        std::vector<int> &colors)
{
    if (pos == order.size())
        return true;
    const int v = order[pos];
    int used_max = 0;
    for (size_t i = 0; i < pos; i++)
        used_max = std::max(used_max, colors[order[i]] + 1);
    const int limit = std::min(k, used_max + 1); // symmetry break
    for (int c = 0; c < limit; c++)
    {
        bool ok = true;
        for (size_t i = 0; i < pos && ok; i++)
            if (conflict[v][order[i]] && colors[order[i]] == c)
                ok = false;
        if (!ok)
            continue;
        colors[v] = c;
        if (color_with(conflict, order, pos + 1, k, colors))
            return true;
        colors[v] = -1;
    }
    return false;
}

}

Placement place_cores(const DataflowGraph &dfg)
{
    const auto order = dfg_topological_order(dfg);
    Placement p;
    p.position_of.assign(dfg.subnets.size(), 0);
    for (size_t pos = 0; pos < order.size(); pos++)
        p.position_of[order[pos]] = static_cast<int>(pos);
    return p;
}

std::vector<ActivityWindow> channel_activity(const DataflowGraph &dfg,
        const Schedule &schedule)
{
    std::vector<ActivityWindow> windows;
    windows.reserve(dfg.channels.size());
    const size_t n = dfg.subnets.size();
    // Producer window for image 0 of each sub-network.
    std::vector<ActivityWindow> producer(n, ActivityWindow{-1.0, -1.0});
    for (const auto &e : schedule.entries)
        if (e.image == 0)
            producer[static_cast<size_t>(e.subnet)] =
                    ActivityWindow{e.start, e.end};
    for (const auto &c : dfg.channels)
    {
        const auto &w = producer[static_cast<size_t>(c.src_subnet)];
        if (w.end < 0.0)
            throw validation_error("schedule does not cover the DFG");
        windows.push_back(w);
    }
    return windows;
}

int conflict_clique_bound(const DataflowGraph &dfg,
        const Placement &placement,
        const std::vector<ActivityWindow> &activity)
{
    const auto conflict = conflict_graph(dfg, placement, activity);
    const int n = static_cast<int>(conflict.size());
    // Greedy max clique from every seed vertex; a valid lower bound.
    int best = n > 0 ? 1 : 0;
    for (int seed = 0; seed < n; seed++)
    {
        std::vector<int> clique{seed};
        for (int v = 0; v < n; v++)
        {
            if (v == seed)
                continue;
            bool all = true;
            for (const int u : clique)
                if (!conflict[v][u])
                    all = false;
            if (all)
                clique.push_back(v);
        }
        best = std::max(best, static_cast<int>(clique.size()));
    }
    return best;
}

LaneAssignment min_lanes(const DataflowGraph &dfg, const Placement &placement,
        const std::vector<ActivityWindow> &activity, int exact_limit)
{
    const auto conflict = conflict_graph(dfg, placement, activity);
    const auto spans = channel_spans(dfg, placement);
    const int n = static_cast<int>(dfg.channels.size());

    LaneAssignment la;
    la.lane_of.assign(static_cast<size_t>(n), 0);
    if (n == 0)
    {
        la.num_lanes = 0;
        return la;
    }

    // Channels sorted by segment-interval start: greedy first-fit.
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; i++)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::tie(spans[a].lo, spans[a].hi, a) <
                std::tie(spans[b].lo, spans[b].hi, b);
    });

    std::vector<int> colors(static_cast<size_t>(n), -1);
    int greedy_lanes = 0;
    for (const int v : order)
    {
        int c = 0;
        while (true)
        {
            bool ok = true;
            for (int u = 0; u < n && ok; u++)
                if (colors[u] == c && conflict[v][u])
                    ok = false;
            if (ok)
                break;
            c++;
        }
        colors[v] = c;
        greedy_lanes = std::max(greedy_lanes, c + 1);
    }

    if (n <= exact_limit)
    {
        for (int k = conflict_clique_bound(dfg, placement, activity);
                k < greedy_lanes; k++)
        {
            std::vector<int> exact(static_cast<size_t>(n), -1);
            if (color_with(conflict, order, 0, k, exact))
            {
                la.num_lanes = k;
                la.lane_of = std::move(exact);
                return la;
            }
        }
    }
    la.num_lanes = greedy_lanes;
    la.lane_of = std::move(colors);
    return la;
}

BusProgram program_switches(const DataflowGraph &dfg,
        const Placement &placement, const LaneAssignment &lanes,
        const std::vector<ActivityWindow> &activity)
{
    BusProgram p;
    p.num_lanes = lanes.num_lanes;
    p.placement = placement.position_of;
    p.num_positions = static_cast<int>(dfg.subnets.size());
    const auto spans = channel_spans(dfg, placement);
    std::vector<std::set<int>> closed(
            static_cast<size_t>(std::max(lanes.num_lanes, 0)));
    for (size_t i = 0; i < dfg.channels.size(); i++)
    {
        BusChannelRoute r;
        r.lane = lanes.lane_of[i];
        r.lo = spans[i].lo;
        r.hi = spans[i].hi;
        r.window = activity[i];
        for (int b = r.lo; b < r.hi; b++)
            closed[static_cast<size_t>(r.lane)].insert(b);
        p.routes.push_back(r);
    }
    p.closed_boundaries.reserve(closed.size());
    for (const auto &s : closed)
        p.closed_boundaries.emplace_back(s.begin(), s.end());
    check_conflict_freedom(p);
    return p;
}

void check_conflict_freedom(const BusProgram &p)
{
    for (size_t i = 0; i < p.routes.size(); i++)
        for (size_t j = i + 1; j < p.routes.size(); j++)
        {
            const auto &a = p.routes[i];
            const auto &b = p.routes[j];
            if (a.lane == b.lane && windows_overlap(a.window, b.window) &&
                    spans_share_segment(a.lo, a.hi, b.lo, b.hi))
                throw validation_error("bus program conflict: channels " +
                        std::to_string(i) + " and " + std::to_string(j) +
                        " overlap on lane " + std::to_string(a.lane));
        }
}

InterconnectCost interconnect_cost(const BusProgram &program,
        const std::vector<long long> &traffic, const SegBusConfig &cfg)
{
    InterconnectCost cost;
    for (size_t i = 0; i < program.routes.size(); i++)
    {
        const auto &r = program.routes[i];
        const int segments = std::max(r.hi - r.lo, 1);
        const double spikes = static_cast<double>(traffic[i]);
        cost.energy_pj += spikes * cfg.segment_energy_pj * segments;
        cost.latency += spikes * cfg.segment_delay * segments;
    }
    return cost;
}

InterconnectCost interconnect_cost_noc(const DataflowGraph &dfg,
        const Placement &placement, const std::vector<long long> &traffic,
        const NocConfig &cfg)
{
    const int n = static_cast<int>(dfg.subnets.size());
    const int width =
            std::max(1, static_cast<int>(std::ceil(std::sqrt(double(n)))));
    InterconnectCost cost;
    for (size_t i = 0; i < dfg.channels.size(); i++)
    {
        const auto &c = dfg.channels[i];
        const int pa = placement.position_of[c.src_subnet];
        const int pb = placement.position_of[c.dst_subnet];
        const int hops = std::max(std::abs(pa % width - pb % width) +
                        std::abs(pa / width - pb / width),
                1);
        const double spikes = static_cast<double>(traffic[i]);
        cost.energy_pj +=
                spikes * (cfg.hop_wire_energy_pj + cfg.router_energy_pj) * hops;
        cost.latency += spikes * (cfg.hop_delay + cfg.router_delay) * hops;
    }
    return cost;
}

nlohmann::json bus_program_to_json(const BusProgram &p)
{
    nlohmann::json j;
    j["num_lanes"] = p.num_lanes;
    j["num_positions"] = p.num_positions;
    j["placement"] = p.placement;
    j["routes"] = nlohmann::json::array();
    for (const auto &r : p.routes)
        j["routes"].push_back({{"lane", r.lane}, {"lo", r.lo}, {"hi", r.hi},
                {"window_start", r.window.start},
                {"window_end", r.window.end}});
    j["closed_boundaries"] = p.closed_boundaries;
    return j;
}

BusProgram bus_program_from_json(const nlohmann::json &j)
{
    BusProgram p;
    try
    {
        p.num_lanes = j.at("num_lanes").get<int>();
        p.num_positions = j.at("num_positions").get<int>();
        p.placement = j.at("placement").get<std::vector<int>>();
        for (const auto &jr : j.at("routes"))
            p.routes.push_back(BusChannelRoute{jr.at("lane").get<int>(),
                    jr.at("lo").get<int>(), jr.at("hi").get<int>(),
                    ActivityWindow{jr.at("window_start").get<double>(),
                            jr.at("window_end").get<double>()}});
        p.closed_boundaries =
                j.at("closed_boundaries").get<std::vector<std::vector<int>>>();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error(
                std::string("malformed bus program: ") + e.what());
    }
    return p;
}

}
