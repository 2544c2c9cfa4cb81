#include "sentry/simulator.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <set>
#include <tuple>

namespace sentry
{

namespace
{

struct SimSynapse
{
    int dst{};
    int weight{};
    std::int64_t delay_ps{};
};

struct SimNetwork
{
    // Dense storage keyed by external neuron id via index_of.
    std::vector<int> id_of;
    std::unordered_map<int, int> index_of;
    std::vector<int> threshold;
    std::vector<std::vector<SimSynapse>> out;
    std::vector<char> is_relay;

    int add_neuron(int id, int thr, bool relay)
    {
        const int idx = static_cast<int>(id_of.size());
        id_of.push_back(id);
        index_of.emplace(id, idx);
        threshold.push_back(thr);
        out.emplace_back();
        is_relay.push_back(relay ? 1 : 0);
        return idx;
    }
};

struct Event
{
    std::int64_t time{};
    int dst{};    // external neuron id: ties broken identically in both sims
    int origin{}; // originating real neuron, -1 for stimulus
    long long seq{};
    int dst_index{};
    int weight{};

    bool operator>(const Event &o) const
    {
        return std::tie(time, dst, origin, seq) >
                std::tie(o.time, o.dst, o.origin, o.seq);
    }
};

SimResult run(const SimNetwork &net, const Stimulus &stimulus,
        const std::unordered_map<int, int> &relay_origin)
{
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
    long long seq = 0;
    for (const auto &[time_ps, neuron] : stimulus.events)
    {
        const auto it = net.index_of.find(neuron);
        if (it == net.index_of.end())
            throw validation_error("stimulus targets unknown neuron " +
                    std::to_string(neuron));
        queue.push(Event{time_ps, neuron, -1, seq++, it->second,
                net.threshold[it->second]});
    }

    SimResult result;
    std::vector<long long> acc(net.id_of.size(), 0);
    std::vector<long long> fire_count(net.id_of.size(), 0);
    while (!queue.empty())
    {
        const Event e = queue.top();
        queue.pop();
        result.last_event_ps = std::max(result.last_event_ps, e.time);
        const int v = e.dst_index;
        acc[v] += e.weight;
        if (acc[v] < 0)
            acc[v] = 0;
        if (acc[v] < net.threshold[v])
            continue;
        acc[v] = 0;
        fire_count[v]++;
        result.total_fires++;
        if (net.is_relay[v])
            result.relay_fires++;
        // Relays forward spikes on behalf of the neuron they mirror; order
        // deliveries by that origin so mapped and direct runs agree.
        int origin = e.dst;
        const auto ro = relay_origin.find(e.dst);
        if (ro != relay_origin.end())
            origin = ro->second;
        for (const auto &s : net.out[v])
            queue.push(Event{e.time + s.delay_ps, net.id_of[s.dst], origin,
                    seq++, s.dst, s.weight});
    }
    for (size_t i = 0; i < net.id_of.size(); i++)
        result.fires.emplace(net.id_of[i], fire_count[i]);
    return result;
}

const std::unordered_map<int, int> kNoRelays;

}

SimResult simulate_direct(const SdcnnGraph &g, const Stimulus &stimulus,
        std::int64_t synapse_delay_ps)
{
    SimNetwork net;
    for (const auto &n : g.neurons)
        net.add_neuron(n.id, n.threshold, false);
    for (const auto &s : g.synapses)
        net.out[net.index_of.at(s.src)].push_back(
                SimSynapse{net.index_of.at(s.dst), s.weight, synapse_delay_ps});
    return run(net, stimulus, kNoRelays);
}

SimResult simulate_mapped(const DataflowGraph &dfg, const SdcnnGraph &g,
        const Stimulus &stimulus, std::int64_t synapse_delay_ps)
{
    std::unordered_map<int, int> threshold_of;
    for (const auto &n : g.neurons)
        threshold_of.emplace(n.id, n.threshold);

    SimNetwork net;
    const auto ensure = [&](int id) {
        const auto it = net.index_of.find(id);
        if (it != net.index_of.end())
            return it->second;
        const bool relay = id >= dfg.first_relay_id;
        const int thr = relay ? 1 : threshold_of.at(id);
        return net.add_neuron(id, thr, relay);
    };
    const auto add_syn = [&](int src, int dst, int weight) {
        const int si = ensure(src);
        const int di = ensure(dst);
        const std::int64_t delay =
                dst >= dfg.first_relay_id ? 0 : synapse_delay_ps;
        net.out[si].push_back(SimSynapse{di, weight, delay});
    };
    for (const auto &sub : dfg.subnets)
    {
        for (const int id : sub.l2)
            ensure(id);
        for (const int id : sub.l1)
            ensure(id);
        for (const int id : sub.l0)
            ensure(id);
        for (const auto &s : sub.internal_synapses)
            add_syn(s.src, s.dst, s.weight);
    }
    for (const auto &c : dfg.channels)
        for (const auto &s : c.synapses)
            add_syn(s.src, s.dst, s.weight);

    SimResult result = run(net, stimulus, dfg.relay_origin);
    result.channel_spikes.assign(dfg.channels.size(), 0);
    for (size_t i = 0; i < dfg.channels.size(); i++)
    {
        std::set<int> srcs;
        for (const auto &s : dfg.channels[i].synapses)
            srcs.insert(s.src);
        for (const int s : srcs)
            result.channel_spikes[i] += result.fires_of(s);
    }
    return result;
}

Stimulus random_stimulus(const SdcnnGraph &g, std::uint64_t seed,
        int spikes_per_input, std::int64_t window_ps)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> when(0, window_ps - 1);
    Stimulus st;
    for (const auto &n : g.neurons)
    {
        if (n.kind != NeuronKind::input)
            continue;
        for (int k = 0; k < spikes_per_input; k++)
            st.events.emplace_back(when(rng), n.id);
    }
    std::sort(st.events.begin(), st.events.end());
    return st;
}

void profile_channels(DataflowGraph &dfg, const SdcnnGraph &g,
        const Stimulus &stimulus, const TimingConfig &timing,
        std::int64_t synapse_delay_ps)
{
    const SimResult direct = simulate_direct(g, stimulus, synapse_delay_ps);
    const auto origin_fires = [&](int id) {
        const auto it = dfg.relay_origin.find(id);
        return direct.fires_of(it == dfg.relay_origin.end() ? id : it->second);
    };
    for (auto &c : dfg.channels)
    {
        std::set<int> srcs;
        for (const auto &s : c.synapses)
            srcs.insert(s.src);
        c.profiled_spikes = 0;
        for (const int s : srcs)
            c.profiled_spikes += origin_fires(s);
    }
    dfg.exec_times.assign(dfg.subnets.size(), 0.0);
    for (size_t i = 0; i < dfg.subnets.size(); i++)
    {
        long long spikes = 0;
        for (const int id : dfg.subnets[i].l2)
            spikes += origin_fires(id);
        for (const int id : dfg.subnets[i].l1)
            spikes += origin_fires(id);
        for (const int id : dfg.subnets[i].l0)
            spikes += origin_fires(id);
        dfg.exec_times[i] = timing.alpha * static_cast<double>(spikes) +
                timing.beta;
    }
}

EnergyReport energy_report(const DataflowGraph &dfg, const SimResult &mapped,
        const Schedule &schedule, const BusProgram &program,
        const HardwareConfig &hw)
{
    EnergyReport r;
    for (const auto &sub : dfg.subnets)
        r.static_power_uw += static_power_uw(
                hw.palette.at(static_cast<size_t>(sub.config_index)),
                hw.cost_model);
    const double wall_ps =
            schedule.makespan * static_cast<double>(hw.timing.time_unit_ps);
    // 1 uW over 1 ps is 1e-6 pJ.
    r.static_energy_pj = r.static_power_uw * wall_ps * 1e-6;

    for (const auto &[id, count] : mapped.fires)
    {
        const int sub = dfg.subnet_of_neuron(id);
        if (sub < 0)
            continue;
        const auto &cfg = hw.palette.at(static_cast<size_t>(
                dfg.subnets[static_cast<size_t>(sub)].config_index));
        r.dynamic_energy_pj +=
                dynamic_energy_pj(count, hw.cost_model, cfg.memory_model);
    }

    const InterconnectCost bus =
            interconnect_cost(program, mapped.channel_spikes, hw.segbus);
    r.interconnect_energy_pj = bus.energy_pj;
    r.interconnect_latency = bus.latency;
    r.total_energy_pj =
            r.static_energy_pj + r.dynamic_energy_pj + r.interconnect_energy_pj;
    return r;
}

}
