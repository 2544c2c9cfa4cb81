#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sentry/compiler.hpp"
#include "sentry/schedule.hpp"
#include "sentry/segbus.hpp"

namespace sentry
{

struct SimResult
{
    std::unordered_map<int, long long> fires; // every simulated neuron
    long long total_fires{0};
    long long relay_fires{0};
    std::int64_t last_event_ps{0};
    std::vector<long long> channel_spikes; // per DFG channel (mapped runs)

    long long fires_of(int neuron_id) const
    {
        const auto it = fires.find(neuron_id);
        return it == fires.end() ? 0 : it->second;
    }
};

// Discrete-event simulation of integrate-and-fire neurons with reset-to-zero
// and a floor at zero. Every synapse carries synapse_delay_ps. Stimulus
// events inject the target's threshold, so each event fires the input once.
SimResult simulate_direct(const SdcnnGraph &g, const Stimulus &stimulus,
        std::int64_t synapse_delay_ps = 1000);

// Simulates the compiled network including relays. Hops into relays are
// instantaneous and the final hop into a real neuron carries the full
// synapse delay, so end-to-end delays, arrival order, and therefore spike
// counts at every original neuron match simulate_direct exactly.
SimResult simulate_mapped(const DataflowGraph &dfg, const SdcnnGraph &g,
        const Stimulus &stimulus, std::int64_t synapse_delay_ps = 1000);

struct EnergyReport
{
    double static_power_uw{};
    double static_energy_pj{};
    double dynamic_energy_pj{};
    double interconnect_energy_pj{};
    double interconnect_latency{};
    double total_energy_pj{};
};

EnergyReport energy_report(const DataflowGraph &dfg, const SimResult &mapped,
        const Schedule &schedule, const BusProgram &program,
        const HardwareConfig &hw);

}
