#pragma once

#include <string>
#include <vector>

#include "sentry/simulator.hpp"

namespace sentry
{

struct WorkloadResult
{
    std::string workload;
    int palette_size{};
    int num_subnets{};
    int num_channels{};
    int num_lanes{};
    double static_power_uw{};
    double static_energy_pj{};
    double dynamic_energy_pj{};
    double total_energy_pj{};
    double bus_energy_pj{};
    double bus_latency{};
    double noc_energy_pj{};
    double noc_latency{};
    double throughput_pipelined{};
    double throughput_sequential{};
    double steady_interval{};
    double max_exec_time{};
};

// Full single-workload experiment: compile, profile, schedule, plan the bus,
// and price both interconnects.
WorkloadResult run_workload(const SdcnnGraph &g, const HardwareConfig &hw,
        std::uint64_t stimulus_seed, int batch_size = 64,
        int spikes_per_input = 4);

// Same hardware but the palette replaced by make_palette(palette_size).
HardwareConfig hardware_with_palette(const HardwareConfig &base,
        int palette_size);

std::string results_csv(const std::vector<WorkloadResult> &rows);

}
