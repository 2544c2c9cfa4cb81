#include "sentry/core_model.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace sentry
{

std::string to_string(Backend b)
{
    switch (b)
    {
    case Backend::mubrain:
        return "mubrain";
    case Backend::dynaps:
        return "dynaps";
    case Backend::loihi:
        return "loihi";
    }
    return "mubrain";
}

Backend backend_from_string(const std::string &s)
{
    if (s == "mubrain")
        return Backend::mubrain;
    if (s == "dynaps")
        return Backend::dynaps;
    if (s == "loihi")
        return Backend::loihi;
    throw parse_error("unknown backend: " + s);
}

long long CoreConfig::synapse_capacity() const
{
    if (explicit_synapse_capacity > 0)
        return explicit_synapse_capacity;
    const double pairs =
            static_cast<double>(l2_capacity) * static_cast<double>(l1_capacity) +
            static_cast<double>(l1_capacity) * static_cast<double>(l0_capacity) +
            static_cast<double>(l2_capacity) * static_cast<double>(l0_capacity);
    return std::llround(synapse_multiplicity * pairs);
}

CostModel CostModel::calibrated(double total_static_uw, double synapse_share,
        long long synapse_count, long long neuron_count)
{
    CostModel m;
    m.static_power_per_synapse_uw = total_static_uw * synapse_share /
            static_cast<double>(synapse_count);
    m.static_power_per_neuron_uw = total_static_uw * (1.0 - synapse_share) /
            static_cast<double>(neuron_count);
    return m;
}

double static_power_uw(const CoreConfig &c, const CostModel &m)
{
    return m.static_power_per_synapse_uw *
            static_cast<double>(c.synapse_capacity()) +
            m.static_power_per_neuron_uw *
            static_cast<double>(c.neuron_capacity());
}

double area_um2(const CoreConfig &c, const CostModel &m)
{
    return m.area_per_synapse_um2 * static_cast<double>(c.synapse_capacity()) +
            m.area_per_neuron_um2 * static_cast<double>(c.neuron_capacity());
}

double dynamic_energy_pj(long long spike_count, const CostModel &m,
        MemoryModel memory)
{
    double per_spike = m.dynamic_energy_per_spike_pj;
    if (memory == MemoryModel::offchip)
        per_spike += m.offchip_access_energy_pj;
    return per_spike * static_cast<double>(spike_count);
}

bool config_fits(const CoreConfig &c, const SubnetSize &s)
{
    if (s.l2 > c.l2_capacity || s.l1 > c.l1_capacity || s.l0 > c.l0_capacity)
        return false;
    if (s.total() > c.neuron_capacity())
        return false;
    if (c.explicit_synapse_capacity > 0 && s.synapses > c.synapse_capacity())
        return false;
    return true;
}

int fit_config(const SubnetSize &s, const std::vector<CoreConfig> &palette,
        const CostModel &m)
{
    if (palette.empty())
        throw no_fit_error("empty core palette");
    int best = -1;
    double best_power = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < palette.size(); i++)
    {
        if (!config_fits(palette[i], s))
            continue;
        const double p = static_power_uw(palette[i], m);
        if (p < best_power)
        {
            best_power = p;
            best = static_cast<int>(i);
        }
    }
    if (best < 0)
        throw no_fit_error("sub-network (" + std::to_string(s.l2) + "," +
                std::to_string(s.l1) + "," + std::to_string(s.l0) + "; " +
                std::to_string(s.synapses) +
                " synapses) exceeds every core configuration");
    return best;
}

namespace
{

CoreConfig three_layer(const std::string &name, long long l2, long long l1,
        long long l0)
{
    CoreConfig c;
    c.name = name;
    c.l2_capacity = l2;
    c.l1_capacity = l1;
    c.l0_capacity = l0;
    return c;
}

}

CoreConfig make_core_profile(Backend kind)
{
    switch (kind)
    {
    case Backend::mubrain:
        return three_layer("mubrain", 256, 64, 16);
    case Backend::dynaps:
    {
        // Two-layer crossbar: 256 neurons, 16K synapses per core.
        CoreConfig c;
        c.name = "dynaps";
        c.l2_capacity = 0;
        c.l1_capacity = 256;
        c.l0_capacity = 256;
        c.total_neuron_capacity = 256;
        c.explicit_synapse_capacity = 16 * 1024;
        return c;
    }
    case Backend::loihi:
    {
        CoreConfig c;
        c.name = "loihi";
        c.l2_capacity = 0;
        c.l1_capacity = 130000;
        c.l0_capacity = 130000;
        c.total_neuron_capacity = 130000;
        c.explicit_synapse_capacity = 130000000;
        c.memory_model = MemoryModel::offchip;
        return c;
    }
    }
    throw error("unknown core profile");
}

std::vector<CoreConfig> preset_palette()
{
    return {
            three_layer("little-1", 256, 64, 16),
            three_layer("little-2", 1024, 256, 16),
            three_layer("big-1", 4096, 1024, 16),
            three_layer("big-2", 16384, 4096, 16),
    };
}

std::vector<CoreConfig> make_palette(int num_configs)
{
    const std::vector<CoreConfig> presets = preset_palette();
    switch (num_configs)
    {
    case 1:
        // Worst-case sizing across the target networks.
        return {presets[3]};
    case 2:
        return {presets[0], presets[3]};
    case 4:
        return presets;
    case 8:
    {
        std::vector<CoreConfig> p = presets;
        p.push_back(three_layer("big-1l", 4096, 2048, 16));
        p.push_back(three_layer("big-1x", 6144, 1536, 16));
        p.push_back(three_layer("big-2l", 8192, 2048, 16));
        p.push_back(three_layer("big-3", 24576, 8192, 32));
        return p;
    }
    default:
        throw error("palette size must be 1, 2, 4 or 8");
    }
}

HardwareConfig default_hardware()
{
    HardwareConfig hw;
    hw.palette = preset_palette();
    // Baseline device: 336 neurons, 38K synapses, 40.3 uW static.
    hw.cost_model = CostModel::calibrated(40.3, 0.8, 38000, 336);
    return hw;
}

namespace
{

CoreConfig core_config_from_json(const nlohmann::json &j)
{
    CoreConfig c;
    c.name = j.at("name").get<std::string>();
    c.l2_capacity = j.at("l2").get<long long>();
    c.l1_capacity = j.at("l1").get<long long>();
    c.l0_capacity = j.at("l0").get<long long>();
    c.total_neuron_capacity = j.value("total_neurons", 0LL);
    c.explicit_synapse_capacity = j.value("synapses", 0LL);
    c.synapse_multiplicity =
            j.value("synapse_multiplicity", kDefaultSynapseMultiplicity);
    c.memory_model = j.value("memory", std::string("integrated")) == "offchip"
            ? MemoryModel::offchip
            : MemoryModel::integrated;
    return c;
}

nlohmann::json core_config_to_json(const CoreConfig &c)
{
    return {
            {"name", c.name},
            {"l2", c.l2_capacity},
            {"l1", c.l1_capacity},
            {"l0", c.l0_capacity},
            {"total_neurons", c.total_neuron_capacity},
            {"synapses", c.explicit_synapse_capacity},
            {"synapse_multiplicity", c.synapse_multiplicity},
            {"memory",
                    c.memory_model == MemoryModel::offchip ? "offchip"
                                                           : "integrated"},
    };
}

}

HardwareConfig hardware_from_json(const nlohmann::json &j)
{
    HardwareConfig hw = default_hardware();
    try
    {
        if (j.contains("palette"))
        {
            hw.palette.clear();
            for (const auto &jc : j.at("palette"))
                hw.palette.push_back(core_config_from_json(jc));
        }
        if (j.contains("cost_model"))
        {
            const auto &jm = j.at("cost_model");
            CostModel &m = hw.cost_model;
            m.static_power_per_synapse_uw = jm.value(
                    "static_power_per_synapse_uw",
                    m.static_power_per_synapse_uw);
            m.static_power_per_neuron_uw = jm.value(
                    "static_power_per_neuron_uw", m.static_power_per_neuron_uw);
            m.area_per_synapse_um2 =
                    jm.value("area_per_synapse_um2", m.area_per_synapse_um2);
            m.area_per_neuron_um2 =
                    jm.value("area_per_neuron_um2", m.area_per_neuron_um2);
            m.dynamic_energy_per_spike_pj = jm.value(
                    "dynamic_energy_per_spike_pj",
                    m.dynamic_energy_per_spike_pj);
            m.offchip_access_energy_pj = jm.value(
                    "offchip_access_energy_pj", m.offchip_access_energy_pj);
        }
        if (j.contains("interconnect"))
        {
            const auto &ji = j.at("interconnect");
            if (ji.contains("segbus"))
            {
                hw.segbus.segment_energy_pj = ji["segbus"].value(
                        "segment_energy_pj", hw.segbus.segment_energy_pj);
                hw.segbus.segment_delay = ji["segbus"].value(
                        "segment_delay", hw.segbus.segment_delay);
            }
            if (ji.contains("noc"))
            {
                const auto &jn = ji["noc"];
                hw.noc.hop_wire_energy_pj = jn.value(
                        "hop_wire_energy_pj", hw.noc.hop_wire_energy_pj);
                hw.noc.router_energy_pj =
                        jn.value("router_energy_pj", hw.noc.router_energy_pj);
                hw.noc.hop_delay = jn.value("hop_delay", hw.noc.hop_delay);
                hw.noc.router_delay =
                        jn.value("router_delay", hw.noc.router_delay);
            }
        }
        if (j.contains("timing"))
        {
            const auto &jt = j.at("timing");
            hw.timing.alpha = jt.value("alpha", hw.timing.alpha);
            hw.timing.beta = jt.value("beta", hw.timing.beta);
            hw.timing.synapse_delay_ps = jt.value(
                    "synapse_delay_ps", hw.timing.synapse_delay_ps);
            hw.timing.time_unit_ps =
                    jt.value("time_unit_ps", hw.timing.time_unit_ps);
        }
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error(std::string("malformed hardware config: ") +
                e.what());
    }
    return hw;
}

nlohmann::json hardware_to_json(const HardwareConfig &hw)
{
    nlohmann::json j;
    j["palette"] = nlohmann::json::array();
    for (const auto &c : hw.palette)
        j["palette"].push_back(core_config_to_json(c));
    j["cost_model"] = {
            {"static_power_per_synapse_uw",
                    hw.cost_model.static_power_per_synapse_uw},
            {"static_power_per_neuron_uw",
                    hw.cost_model.static_power_per_neuron_uw},
            {"area_per_synapse_um2", hw.cost_model.area_per_synapse_um2},
            {"area_per_neuron_um2", hw.cost_model.area_per_neuron_um2},
            {"dynamic_energy_per_spike_pj",
                    hw.cost_model.dynamic_energy_per_spike_pj},
            {"offchip_access_energy_pj",
                    hw.cost_model.offchip_access_energy_pj},
    };
    j["interconnect"] = {
            {"segbus",
                    {{"segment_energy_pj", hw.segbus.segment_energy_pj},
                            {"segment_delay", hw.segbus.segment_delay}}},
            {"noc",
                    {{"hop_wire_energy_pj", hw.noc.hop_wire_energy_pj},
                            {"router_energy_pj", hw.noc.router_energy_pj},
                            {"hop_delay", hw.noc.hop_delay},
                            {"router_delay", hw.noc.router_delay}}},
    };
    j["timing"] = {
            {"alpha", hw.timing.alpha},
            {"beta", hw.timing.beta},
            {"synapse_delay_ps", hw.timing.synapse_delay_ps},
            {"time_unit_ps", hw.timing.time_unit_ps},
    };
    return j;
}

HardwareConfig load_hardware(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open hardware config: " + path);
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error("cannot parse " + path + ": " + e.what());
    }
    return hardware_from_json(j);
}

}
