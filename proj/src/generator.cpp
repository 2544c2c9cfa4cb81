#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "sentry/graph.hpp"

namespace sentry
{

namespace
{

// A layer's output: neuron ids arranged as a (channels, height, width)
// feature map. Dense layers use h = w = 1.
struct FeatureMap
{
    int channels{};
    int height{};
    int width{};
    std::vector<int> ids; // [(c * height + y) * width + x]

    int at(int c, int y, int x) const
    {
        return ids[(static_cast<size_t>(c) * height + y) * width + x];
    }
    size_t size() const { return ids.size(); }
};

int resolve_layer_ref(int ref, int current, size_t layer_count)
{
    const int idx = (ref < 0) ? current + ref : ref;
    if (idx < 0 || idx >= static_cast<int>(layer_count) || idx >= current)
        throw validation_error("layer " + std::to_string(current) +
                " references invalid layer " + std::to_string(ref));
    return idx;
}

class NetworkBuilder
{
public:
    NetworkBuilder(const GeneratorOptions &opts, std::uint64_t seed)
            : opts_(opts)
            , rng_(seed)
    {
    }

    void add_layer(const nlohmann::json &spec, int layer_index,
            size_t layer_count)
    {
        const std::string type = spec.at("type").get<std::string>();
        const int threshold = spec.value("threshold", opts_.default_threshold);
        if (layer_index == 0 && type != "input")
            throw validation_error("first layer must have type 'input'");

        if (type == "input")
            add_input(spec, threshold);
        else if (type == "conv")
            add_conv(spec, threshold);
        else if (type == "pool")
            add_pool(spec, threshold);
        else if (type == "dense")
            add_dense(spec, threshold);
        else if (type == "add")
            add_residual(spec, threshold, layer_index, layer_count);
        else if (type == "concat")
            add_concat(spec, layer_index, layer_count);
        else
            throw parse_error("unknown layer type: " + type);
    }

    SdcnnGraph finish(double prune_fraction)
    {
        SdcnnGraph g;
        g.name = opts_.name;
        g.weight_bits = opts_.weight_bits;
        g.neurons = std::move(neurons_);

        // Prune the smallest-magnitude weights; equal magnitudes go in
        // synapse creation order so that larger fractions remove supersets.
        std::vector<size_t> order(synapses_.size());
        for (size_t i = 0; i < order.size(); i++)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                [&](size_t a, size_t b) {
                    return std::abs(synapses_[a].weight) <
                            std::abs(synapses_[b].weight);
                });
        const size_t cut = static_cast<size_t>(
                prune_fraction * static_cast<double>(synapses_.size()));
        std::vector<char> removed(synapses_.size(), 0);
        for (size_t i = 0; i < cut; i++)
            removed[order[i]] = 1;
        for (size_t i = 0; i < synapses_.size(); i++)
            if (!removed[i])
                g.synapses.push_back(synapses_[i]);

        std::sort(g.synapses.begin(), g.synapses.end(),
                [](const Synapse &a, const Synapse &b) {
                    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
                });
        // Last layer's neurons are the network outputs.
        if (!layers_.empty())
        {
            std::unordered_map<int, size_t> pos;
            for (size_t i = 0; i < g.neurons.size(); i++)
                pos[g.neurons[i].id] = i;
            for (const int id : layers_.back().ids)
                g.neurons[pos.at(id)].kind = NeuronKind::output;
        }
        validate(g);
        return g;
    }

private:
    FeatureMap make_map(int channels, int height, int width, int threshold,
            NeuronKind kind)
    {
        FeatureMap fm{channels, height, width, {}};
        fm.ids.reserve(static_cast<size_t>(channels) * height * width);
        for (int i = 0; i < channels * height * width; i++)
        {
            neurons_.push_back(Neuron{next_id_, kind, threshold});
            fm.ids.push_back(next_id_++);
        }
        return fm;
    }

    int random_weight()
    {
        const int lo = -(1 << (opts_.weight_bits - 1));
        const int hi = (1 << (opts_.weight_bits - 1)) - 1;
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        while (true)
        {
            const int w = lo + static_cast<int>(rng_() % span);
            if (w != 0)
                return w;
        }
    }

    void connect(int src, int dst, int weight)
    {
        synapses_.push_back(Synapse{src, dst, weight});
    }

    const FeatureMap &previous() const
    {
        if (layers_.empty())
            throw validation_error("layer has no predecessor");
        return layers_.back();
    }

    void add_input(const nlohmann::json &spec, int threshold)
    {
        const int h = spec.at("height").get<int>();
        const int w = spec.at("width").get<int>();
        const int c = spec.value("channels", 1);
        if (h < 1 || w < 1 || c < 1)
            throw validation_error("input layer dimensions must be positive");
        layers_.push_back(make_map(c, h, w, threshold, NeuronKind::input));
    }

    void add_conv(const nlohmann::json &spec, int threshold)
    {
        const FeatureMap &in = previous();
        const int k = spec.at("kernel").get<int>();
        const int stride = spec.value("stride", 1);
        const int c_out = spec.value("channels", 1);
        if (k < 1 || stride < 1 || c_out < 1)
            throw validation_error("conv parameters must be positive");
        if (k > in.height || k > in.width)
            throw validation_error("conv kernel " + std::to_string(k) +
                    " exceeds input " + std::to_string(in.height) + "x" +
                    std::to_string(in.width));
        const int oh = (in.height - k) / stride + 1;
        const int ow = (in.width - k) / stride + 1;
        FeatureMap out = make_map(c_out, oh, ow, threshold, NeuronKind::hidden);
        for (int co = 0; co < c_out; co++)
            for (int y = 0; y < oh; y++)
                for (int x = 0; x < ow; x++)
                    for (int ci = 0; ci < in.channels; ci++)
                        for (int ky = 0; ky < k; ky++)
                            for (int kx = 0; kx < k; kx++)
                                connect(in.at(ci, y * stride + ky,
                                                x * stride + kx),
                                        out.at(co, y, x), random_weight());
        layers_.push_back(std::move(out));
    }

    void add_pool(const nlohmann::json &spec, int threshold)
    {
        const FeatureMap &in = previous();
        const int k = spec.at("size").get<int>();
        if (k < 1 || k > in.height || k > in.width)
            throw validation_error("pool size " + std::to_string(k) +
                    " exceeds input " + std::to_string(in.height) + "x" +
                    std::to_string(in.width));
        const int oh = in.height / k;
        const int ow = in.width / k;
        if (oh < 1 || ow < 1)
            throw validation_error("pool output is empty");
        FeatureMap out =
                make_map(in.channels, oh, ow, threshold, NeuronKind::hidden);
        for (int c = 0; c < in.channels; c++)
            for (int y = 0; y < oh; y++)
                for (int x = 0; x < ow; x++)
                    for (int ky = 0; ky < k; ky++)
                        for (int kx = 0; kx < k; kx++)
                            connect(in.at(c, y * k + ky, x * k + kx),
                                    out.at(c, y, x), 1);
        layers_.push_back(std::move(out));
    }

    void add_dense(const nlohmann::json &spec, int threshold)
    {
        const FeatureMap &in = previous();
        const int units = spec.at("units").get<int>();
        if (units < 1)
            throw validation_error("dense units must be positive");
        FeatureMap out = make_map(units, 1, 1, threshold, NeuronKind::hidden);
        for (int u = 0; u < units; u++)
            for (const int src : in.ids)
                connect(src, out.ids[u], random_weight());
        layers_.push_back(std::move(out));
    }

    // Identity-shortcut addition: element-wise merge of the previous layer
    // and an earlier layer of identical shape.
    void add_residual(const nlohmann::json &spec, int threshold,
            int layer_index, size_t layer_count)
    {
        const FeatureMap &a = previous();
        const int ref = resolve_layer_ref(
                spec.at("with").get<int>(), layer_index, layer_count);
        const FeatureMap &b = layers_[ref];
        if (a.size() != b.size() || a.channels != b.channels ||
                a.height != b.height || a.width != b.width)
            throw validation_error("add layer " + std::to_string(layer_index) +
                    ": operand shapes differ");
        FeatureMap out = make_map(
                a.channels, a.height, a.width, threshold, NeuronKind::hidden);
        for (size_t i = 0; i < out.size(); i++)
        {
            connect(a.ids[i], out.ids[i], 1);
            connect(b.ids[i], out.ids[i], 1);
        }
        layers_.push_back(std::move(out));
    }

    // Channel concatenation: a virtual layer, no new neurons.
    void add_concat(const nlohmann::json &spec, int layer_index,
            size_t layer_count)
    {
        std::vector<int> refs;
        refs.push_back(layer_index - 1);
        for (const auto &r : spec.at("with"))
            refs.push_back(resolve_layer_ref(
                    r.get<int>(), layer_index, layer_count));
        FeatureMap out;
        out.height = layers_[refs[0]].height;
        out.width = layers_[refs[0]].width;
        for (const int ref : refs)
        {
            const FeatureMap &fm = layers_[ref];
            if (fm.height != out.height || fm.width != out.width)
                throw validation_error("concat layer " +
                        std::to_string(layer_index) +
                        ": spatial dimensions differ");
            out.channels += fm.channels;
            out.ids.insert(out.ids.end(), fm.ids.begin(), fm.ids.end());
        }
        layers_.push_back(std::move(out));
    }

    GeneratorOptions opts_;
    std::mt19937_64 rng_;
    int next_id_{0};
    std::vector<Neuron> neurons_;
    std::vector<Synapse> synapses_;
    std::vector<FeatureMap> layers_;
};

}

SdcnnGraph generate_network(const nlohmann::json &layers,
        double prune_fraction, std::uint64_t seed, const GeneratorOptions &opts)
{
    if (!layers.is_array() || layers.empty())
        throw validation_error("generator spec must be a non-empty layer list");
    if (prune_fraction < 0.0 || prune_fraction >= 1.0)
        throw validation_error("prune_fraction must be in [0, 1)");
    NetworkBuilder builder(opts, seed);
    for (size_t i = 0; i < layers.size(); i++)
        builder.add_layer(layers[i], static_cast<int>(i), layers.size());
    return builder.finish(prune_fraction);
}

}
