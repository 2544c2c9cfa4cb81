// Command-line front end: generate networks, inspect neighbor statistics,
// compile to a dataflow graph, schedule batches, plan the segmented bus,
// simulate, and run the palette/interconnect comparison sweep.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sentry/experiments.hpp"

namespace
{

using nlohmann::json;

std::string fnv64_hex(const std::string &bytes)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes)
    {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
            static_cast<unsigned long long>(h));
    return buf;
}

std::string payload_hash(const json &payload)
{
    return fnv64_hex(payload.dump());
}

json read_json(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw sentry::parse_error("cannot open " + path);
    json j;
    try
    {
        in >> j;
    }
    catch (const json::exception &e)
    {
        throw sentry::parse_error(path + ": " + e.what());
    }
    return j;
}

// Artifacts are {"kind", "inputs": {name: hash}, "payload"}. Plain JSON
// files (hand-written specs, hardware descriptions) are accepted as bare
// payloads.
struct Artifact
{
    std::string kind;
    std::map<std::string, std::string> inputs;
    json payload;
    std::string hash; // of the payload
};

Artifact load_artifact(const std::string &path, const std::string &expect_kind)
{
    const json j = read_json(path);
    Artifact a;
    if (j.is_object() && j.contains("payload") && j.contains("kind"))
    {
        a.kind = j.at("kind").get<std::string>();
        if (j.contains("inputs"))
            a.inputs = j.at("inputs")
                               .get<std::map<std::string, std::string>>();
        a.payload = j.at("payload");
        if (!expect_kind.empty() && a.kind != expect_kind)
            throw sentry::validation_error(path + ": expected a " +
                    expect_kind + " artifact, found " + a.kind);
    }
    else
    {
        a.kind = expect_kind;
        a.payload = j;
    }
    a.hash = payload_hash(a.payload);
    return a;
}

void write_artifact(const std::string &path, const std::string &kind,
        const std::map<std::string, std::string> &inputs, const json &payload)
{
    json j;
    j["kind"] = kind;
    j["inputs"] = inputs;
    j["payload"] = payload;
    std::ofstream out(path);
    if (!out)
        throw sentry::parse_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void require_input(const Artifact &consumer, const std::string &name,
        const Artifact &producer)
{
    const auto it = consumer.inputs.find(name);
    if (it != consumer.inputs.end() && it->second != producer.hash)
        throw sentry::validation_error("inconsistent artifact versions: " +
                consumer.kind + " was built against a different " + name);
}

sentry::SdcnnGraph graph_from_spec(const json &spec)
{
    sentry::GeneratorOptions opts;
    opts.name = spec.value("name", std::string("network"));
    opts.weight_bits = spec.value("weight_bits", 2);
    opts.default_threshold = spec.value("threshold", 64);
    return sentry::generate_network(spec.at("layers"),
            spec.value("prune_fraction", 0.0),
            spec.value("seed", std::uint64_t{1}), opts);
}

sentry::Backend backend_from_name(const std::string &name)
{
    if (name == "mubrain")
        return sentry::Backend::mubrain;
    if (name == "dynaps")
        return sentry::Backend::dynaps;
    if (name == "loihi")
        return sentry::Backend::loihi;
    throw sentry::validation_error("unknown backend: " + name);
}

int run(int argc, char **argv)
{
    CLI::App app{"SentryOS compile/schedule/simulate toolchain"};
    app.require_subcommand(1);

    // generate
    auto *gen = app.add_subcommand("generate",
            "Generate a quantized spiking network from a layer spec");
    std::string gen_spec, gen_out;
    gen->add_option("--spec", gen_spec, "layer spec JSON")->required();
    gen->add_option("--out", gen_out, "output graph artifact")->required();
    gen->callback([&] {
        const Artifact spec = load_artifact(gen_spec, "spec");
        const sentry::SdcnnGraph g = graph_from_spec(spec.payload);
        write_artifact(gen_out, "graph", {{"spec", spec.hash}},
                sentry::graph_to_json(g));
    });

    // hardware
    auto *hwc = app.add_subcommand("hardware",
            "Write the default hardware description");
    std::string hw_out;
    int hw_palette = 4;
    hwc->add_option("--out", hw_out)->required();
    hwc->add_option("--palette", hw_palette, "palette size (1|2|4|8)");
    hwc->callback([&] {
        sentry::HardwareConfig hw = sentry::default_hardware();
        hw.palette = sentry::make_palette(hw_palette);
        std::ofstream out(hw_out);
        if (!out)
            throw sentry::parse_error("cannot write " + hw_out);
        out << sentry::hardware_to_json(hw).dump(2) << "\n";
    });

    // stats
    auto *stats = app.add_subcommand("stats",
            "Per-neuron L1/L2 neighbor statistics");
    std::string stats_graph;
    int stats_neuron = -1;
    stats->add_option("--graph", stats_graph, "graph artifact")->required();
    stats->add_option("--neuron", stats_neuron, "restrict to one neuron");
    stats->callback([&] {
        const Artifact ga = load_artifact(stats_graph, "graph");
        const sentry::SdcnnGraph g = sentry::graph_from_json(ga.payload);
        const sentry::NeighborStats s = sentry::neighbor_stats(g);
        json out;
        out["l1_min"] = s.l1_min;
        out["l1_max"] = s.l1_max;
        out["l1_avg"] = s.l1_avg;
        out["l2_min"] = s.l2_min;
        out["l2_max"] = s.l2_max;
        out["l2_avg"] = s.l2_avg;
        if (stats_neuron >= 0)
        {
            for (size_t i = 0; i < g.neurons.size(); i++)
                if (g.neurons[i].id == stats_neuron)
                {
                    out["neuron"] = stats_neuron;
                    out["l1"] = s.l1[i];
                    out["l2"] = s.l2[i];
                }
        }
        std::cout << out.dump(2) << "\n";
    });

    // compile
    auto *comp = app.add_subcommand("compile",
            "Partition a network into core-sized sub-networks");
    std::string comp_graph, comp_hw, comp_backend = "mubrain", comp_out;
    std::uint64_t comp_seed = 7;
    int comp_spikes = 4;
    comp->add_option("--graph", comp_graph)->required();
    comp->add_option("--hardware", comp_hw)->required();
    comp->add_option("--backend", comp_backend);
    comp->add_option("--profile-seed", comp_seed);
    comp->add_option("--spikes-per-input", comp_spikes);
    comp->add_option("--out", comp_out)->required();
    comp->callback([&] {
        const Artifact ga = load_artifact(comp_graph, "graph");
        const Artifact ha = load_artifact(comp_hw, "hardware");
        const sentry::SdcnnGraph g = sentry::graph_from_json(ga.payload);
        const sentry::HardwareConfig hw =
                sentry::hardware_from_json(ha.payload);
        sentry::DataflowGraph dfg = sentry::compile(g, hw.palette,
                hw.cost_model, backend_from_name(comp_backend));
        const sentry::Stimulus st =
                sentry::random_stimulus(g, comp_seed, comp_spikes);
        sentry::profile_channels(dfg, g, st, hw.timing,
                hw.timing.synapse_delay_ps);
        write_artifact(comp_out, "dfg",
                {{"graph", ga.hash}, {"hardware", ha.hash}},
                sentry::dfg_to_json(dfg));
    });

    // schedule
    auto *sch = app.add_subcommand("schedule", "Batch schedule a DFG");
    std::string sch_dfg, sch_out, sch_csv;
    int sch_batch = 16;
    bool sch_seq = false;
    sch->add_option("--dfg", sch_dfg)->required();
    sch->add_option("--batch", sch_batch);
    sch->add_flag("--no-pipeline", sch_seq);
    sch->add_option("--out", sch_out)->required();
    sch->add_option("--csv", sch_csv, "also write a CSV trace");
    sch->callback([&] {
        const Artifact da = load_artifact(sch_dfg, "dfg");
        const sentry::DataflowGraph dfg = sentry::dfg_from_json(da.payload);
        const auto pipes = sentry::allocate_pipelines(dfg,
                static_cast<int>(dfg.subnets.size()));
        const sentry::Schedule s =
                sentry::schedule_batch(dfg, pipes, sch_batch, !sch_seq);
        write_artifact(sch_out, "schedule", {{"dfg", da.hash}},
                sentry::schedule_to_json(s));
        if (!sch_csv.empty())
        {
            std::ofstream out(sch_csv);
            out << sentry::schedule_to_csv(s);
        }
    });

    // plan-bus
    auto *bus = app.add_subcommand("plan-bus",
            "Assign channels to bus lanes and program the switches");
    std::string bus_dfg, bus_sched, bus_out;
    bus->add_option("--dfg", bus_dfg)->required();
    bus->add_option("--schedule", bus_sched)->required();
    bus->add_option("--out", bus_out)->required();
    bus->callback([&] {
        const Artifact da = load_artifact(bus_dfg, "dfg");
        const Artifact sa = load_artifact(bus_sched, "schedule");
        require_input(sa, "dfg", da);
        const sentry::DataflowGraph dfg = sentry::dfg_from_json(da.payload);
        const sentry::Schedule s = sentry::schedule_from_json(sa.payload);
        const sentry::Placement placement = sentry::place_cores(dfg);
        const auto activity = sentry::channel_activity(dfg, s);
        const auto lanes = sentry::min_lanes(dfg, placement, activity);
        const sentry::BusProgram program =
                sentry::program_switches(dfg, placement, lanes, activity);
        write_artifact(bus_out, "bus",
                {{"dfg", da.hash}, {"schedule", sa.hash}},
                sentry::bus_program_to_json(program));
    });

    // simulate
    auto *sim = app.add_subcommand("simulate",
            "Spike-level simulation of the source and mapped networks");
    std::string sim_graph, sim_dfg, sim_out;
    std::uint64_t sim_seed = 7;
    int sim_spikes = 4;
    sim->add_option("--graph", sim_graph)->required();
    sim->add_option("--dfg", sim_dfg)->required();
    sim->add_option("--seed", sim_seed);
    sim->add_option("--spikes-per-input", sim_spikes);
    sim->add_option("--out", sim_out);
    sim->callback([&] {
        const Artifact ga = load_artifact(sim_graph, "graph");
        const Artifact da = load_artifact(sim_dfg, "dfg");
        require_input(da, "graph", ga);
        const sentry::SdcnnGraph g = sentry::graph_from_json(ga.payload);
        const sentry::DataflowGraph dfg = sentry::dfg_from_json(da.payload);
        const sentry::Stimulus st =
                sentry::random_stimulus(g, sim_seed, sim_spikes);
        const sentry::SimResult direct = sentry::simulate_direct(g, st);
        const sentry::SimResult mapped = sentry::simulate_mapped(dfg, g, st);
        json report;
        report["total_fires_direct"] = direct.total_fires;
        report["total_fires_mapped"] = mapped.total_fires;
        report["relay_fires"] = mapped.relay_fires;
        json outputs = json::array();
        bool equivalent = true;
        for (const auto &n : g.neurons)
        {
            if (n.kind != sentry::NeuronKind::output)
                continue;
            const long long d = direct.fires_of(n.id);
            const long long m = mapped.fires_of(n.id);
            outputs.push_back(
                    {{"neuron", n.id}, {"direct", d}, {"mapped", m}});
            equivalent = equivalent && d == m;
        }
        report["outputs"] = outputs;
        report["equivalent"] = equivalent;
        std::cout << report.dump(2) << "\n";
        if (!sim_out.empty())
            write_artifact(sim_out, "report",
                    {{"graph", ga.hash}, {"dfg", da.hash}}, report);
    });

    // compare
    auto *cmp = app.add_subcommand("compare",
            "Sweep palette sizes and interconnects over a workload corpus");
    std::string cmp_corpus, cmp_hw, cmp_out;
    int cmp_batch = 64;
    cmp->add_option("--corpus", cmp_corpus, "directory of layer specs")
            ->required();
    cmp->add_option("--hardware", cmp_hw)->required();
    cmp->add_option("--batch", cmp_batch);
    cmp->add_option("--out", cmp_out, "results CSV")->required();
    cmp->callback([&] {
        const Artifact ha = load_artifact(cmp_hw, "hardware");
        const sentry::HardwareConfig base =
                sentry::hardware_from_json(ha.payload);
        std::vector<std::string> spec_paths;
        for (const auto &entry :
                std::filesystem::directory_iterator(cmp_corpus))
            if (entry.path().extension() == ".json" &&
                    entry.path().filename() != "hw.json")
                spec_paths.push_back(entry.path().string());
        std::sort(spec_paths.begin(), spec_paths.end());
        std::vector<sentry::WorkloadResult> rows;
        for (const auto &path : spec_paths)
        {
            const Artifact spec = load_artifact(path, "spec");
            const sentry::SdcnnGraph g = graph_from_spec(spec.payload);
            for (const int k : {1, 2, 4, 8})
                rows.push_back(sentry::run_workload(g,
                        sentry::hardware_with_palette(base, k), 11,
                        cmp_batch));
        }
        std::ofstream out(cmp_out);
        if (!out)
            throw sentry::parse_error("cannot write " + cmp_out);
        out << sentry::results_csv(rows);
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}

int main(int argc, char **argv)
{
    try
    {
        return run(argc, argv);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
