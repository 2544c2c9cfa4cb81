#ifndef SENTRY_CORE_MODEL_HPP
#define SENTRY_CORE_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentry/error.hpp"

namespace sentry
{

enum class MemoryModel
{
    integrated,
    offchip,
};

enum class Backend
{
    mubrain,
    dynaps,
    loihi,
};

std::string to_string(Backend b);
Backend backend_from_string(const std::string &s);

// The provisioned synapse count is not derivable from the layer sizes
// alone: the baseline 256x64x16 device provides 38K synapses against
// 21504 inter-layer pairs. The gap is exposed as a multiplicity factor.
constexpr double kDefaultSynapseMultiplicity = 38000.0 / 21504.0;

// Parameterized three-layer core geometry. Two-layer crossbar profiles
// set l2_capacity = 0 and carry explicit neuron/synapse caps.
struct CoreConfig
{
    std::string name;
    long long l2_capacity{};
    long long l1_capacity{};
    long long l0_capacity{};
    // 0 means "sum of the layer capacities".
    long long total_neuron_capacity{0};
    // 0 means "derive from the layer geometry".
    long long explicit_synapse_capacity{0};
    double synapse_multiplicity{kDefaultSynapseMultiplicity};
    MemoryModel memory_model{MemoryModel::integrated};

    long long neuron_capacity() const
    {
        return total_neuron_capacity > 0
                ? total_neuron_capacity
                : l2_capacity + l1_capacity + l0_capacity;
    }
    // Full l2->l1, l1->l0 and programmable l2->l0 blocks, scaled by the
    // calibration multiplicity.
    long long synapse_capacity() const;
};

// Linear-in-capacity static power and area, calibrated so the baseline
// 336-neuron / 38K-synapse device evaluates to 40.3 uW.
struct CostModel
{
    double static_power_per_synapse_uw{};
    double static_power_per_neuron_uw{};
    double area_per_synapse_um2{0.6};
    double area_per_neuron_um2{12.0};
    double dynamic_energy_per_spike_pj{26.0};
    // Per-spike adder for off-chip synaptic memory (Loihi-style cores).
    double offchip_access_energy_pj{52.0};

    // Splits a measured total between the synapse and neuron terms.
    static CostModel calibrated(double total_static_uw, double synapse_share,
            long long synapse_count, long long neuron_count);
};

double static_power_uw(const CoreConfig &c, const CostModel &m);
double area_um2(const CoreConfig &c, const CostModel &m);
double dynamic_energy_pj(long long spike_count, const CostModel &m,
        MemoryModel memory = MemoryModel::integrated);

// Sizes of a sub-network, as seen by the capacity predicates.
struct SubnetSize
{
    long long l2{};
    long long l1{};
    long long l0{};
    long long synapses{};

    long long total() const { return l2 + l1 + l0; }
};

bool config_fits(const CoreConfig &c, const SubnetSize &s);

// Cheapest (static power) palette config that satisfies every capacity
// predicate; ties broken by palette order. Throws no_fit_error.
int fit_config(const SubnetSize &s, const std::vector<CoreConfig> &palette,
        const CostModel &m);

CoreConfig make_core_profile(Backend kind);

// The four presets: little-1, little-2, big-1, big-2 (= conservative).
std::vector<CoreConfig> preset_palette();
// Palettes of size 1 (conservative), 2, 4 and 8.
std::vector<CoreConfig> make_palette(int num_configs);

struct SegBusConfig
{
    double segment_energy_pj{1.0}; // per spike per segment
    double segment_delay{1.0};     // per segment, time units
};

struct NocConfig
{
    double hop_wire_energy_pj{1.0};
    double router_energy_pj{4.0}; // per hop, switching + buffering
    double hop_delay{1.0};
    double router_delay{4.0}; // per-hop route decision
};

struct TimingConfig
{
    // Sub-network execution time t_i = alpha * spikes + beta.
    double alpha{1.0};
    double beta{10.0};
    std::int64_t synapse_delay_ps{1000};
    std::int64_t time_unit_ps{1000}; // one schedule time unit
};

// The single source of all calibration constants.
struct HardwareConfig
{
    std::vector<CoreConfig> palette;
    CostModel cost_model;
    SegBusConfig segbus;
    NocConfig noc;
    TimingConfig timing;
};

HardwareConfig default_hardware();
HardwareConfig hardware_from_json(const nlohmann::json &j);
nlohmann::json hardware_to_json(const HardwareConfig &hw);
HardwareConfig load_hardware(const std::string &path);

}

#endif
