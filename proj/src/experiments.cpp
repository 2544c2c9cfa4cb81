#include "sentry/experiments.hpp"

#include <algorithm>
#include <sstream>

namespace sentry
{

HardwareConfig hardware_with_palette(const HardwareConfig &base,
        int palette_size)
{
    HardwareConfig hw = base;
    hw.palette = make_palette(palette_size);
    return hw;
}

WorkloadResult run_workload(const SdcnnGraph &g, const HardwareConfig &hw,
        std::uint64_t stimulus_seed, int batch_size, int spikes_per_input)
{
    WorkloadResult row;
    row.workload = g.name;
    row.palette_size = static_cast<int>(hw.palette.size());

    DataflowGraph dfg = compile(g, hw.palette, hw.cost_model);
    const Stimulus stimulus = random_stimulus(g, stimulus_seed,
            spikes_per_input);
    profile_channels(dfg, g, stimulus, hw.timing,
            hw.timing.synapse_delay_ps);

    row.num_subnets = static_cast<int>(dfg.subnets.size());
    row.num_channels = static_cast<int>(dfg.channels.size());
    row.max_exec_time =
            dfg.exec_times.empty() ? 0.0 : *std::max_element(
                    dfg.exec_times.begin(), dfg.exec_times.end());

    const PipelineAssignment pipelines =
            allocate_pipelines(dfg, static_cast<int>(dfg.subnets.size()));
    const Schedule single = schedule_batch(dfg, pipelines, 1, true);
    const Schedule pipelined = schedule_batch(dfg, pipelines, batch_size,
            true);
    const Schedule sequential = schedule_batch(dfg, pipelines, batch_size,
            false);
    row.throughput_pipelined = pipelined.throughput;
    row.throughput_sequential = sequential.throughput;
    row.steady_interval = pipelined.steady_interval;

    const Placement placement = place_cores(dfg);
    const auto activity = channel_activity(dfg, single);
    const LaneAssignment lanes = min_lanes(dfg, placement, activity);
    const BusProgram program =
            program_switches(dfg, placement, lanes, activity);
    row.num_lanes = lanes.num_lanes;

    const SimResult mapped = simulate_mapped(dfg, g, stimulus,
            hw.timing.synapse_delay_ps);
    const EnergyReport energy =
            energy_report(dfg, mapped, single, program, hw);
    row.static_power_uw = energy.static_power_uw;
    row.static_energy_pj = energy.static_energy_pj;
    row.dynamic_energy_pj = energy.dynamic_energy_pj;
    row.total_energy_pj = energy.total_energy_pj;
    row.bus_energy_pj = energy.interconnect_energy_pj;
    row.bus_latency = energy.interconnect_latency;

    const InterconnectCost noc = interconnect_cost_noc(dfg, placement,
            mapped.channel_spikes, hw.noc);
    row.noc_energy_pj = noc.energy_pj;
    row.noc_latency = noc.latency;
    return row;
}

std::string results_csv(const std::vector<WorkloadResult> &rows)
{
    std::ostringstream out;
    out << "workload,palette_size,num_subnets,num_channels,num_lanes,"
           "static_power_uw,static_energy_pj,dynamic_energy_pj,"
           "total_energy_pj,bus_energy_pj,bus_latency,noc_energy_pj,"
           "noc_latency,throughput_pipelined,throughput_sequential,"
           "steady_interval,max_exec_time\n";
    out.precision(12);
    for (const auto &r : rows)
        out << r.workload << ',' << r.palette_size << ',' << r.num_subnets
            << ',' << r.num_channels << ',' << r.num_lanes << ','
            << r.static_power_uw << ',' << r.static_energy_pj << ','
            << r.dynamic_energy_pj << ',' << r.total_energy_pj << ','
            << r.bus_energy_pj << ',' << r.bus_latency << ','
            << r.noc_energy_pj << ',' << r.noc_latency << ','
            << r.throughput_pipelined << ',' << r.throughput_sequential
            << ',' << r.steady_interval << ',' << r.max_exec_time << '\n';
    return out.str();
}

}
