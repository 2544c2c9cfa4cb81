#include "sentry/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <set>

namespace sentry
{

MaxPlusMatrix mp_multiply(const MaxPlusMatrix &a, const MaxPlusMatrix &b)
{
    MaxPlusMatrix c(a.n);
    for (int i = 0; i < a.n; i++)
        for (int k = 0; k < a.n; k++)
        {
            const double aik = a.at(i, k);
            if (aik == kMaxPlusZero)
                continue;
            for (int j = 0; j < a.n; j++)
            {
                const double bkj = b.at(k, j);
                if (bkj == kMaxPlusZero)
                    continue;
                c.at(i, j) = std::max(c.at(i, j), aik + bkj);
            }
        }
    return c;
}

MaxPlusMatrix mp_add(const MaxPlusMatrix &a, const MaxPlusMatrix &b)
{
    MaxPlusMatrix c(a.n);
    for (size_t i = 0; i < a.values.size(); i++)
        c.values[i] = std::max(a.values[i], b.values[i]);
    return c;
}

MaxPlusVector mp_apply(const MaxPlusMatrix &t, const MaxPlusVector &x)
{
    MaxPlusVector y(static_cast<size_t>(t.n), kMaxPlusZero);
    for (int i = 0; i < t.n; i++)
        for (int j = 0; j < t.n; j++)
        {
            const double tij = t.at(i, j);
            if (tij != kMaxPlusZero && x[j] != kMaxPlusZero)
                y[i] = std::max(y[i], tij + x[j]);
        }
    return y;
}

namespace
{

std::vector<std::vector<int>> subnet_predecessors(const DataflowGraph &dfg)
{
    std::vector<std::vector<int>> preds(dfg.subnets.size());
    for (const auto &c : dfg.channels)
        preds[c.dst_subnet].push_back(c.src_subnet);
    for (auto &p : preds)
    {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
    }
    return preds;
}

std::vector<int> subnet_topological_order(const DataflowGraph &dfg)
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

}

MaxPlusMatrix timing_matrix(const DataflowGraph &dfg)
{
    const int n = static_cast<int>(dfg.subnets.size());
    MaxPlusMatrix t(n);
    const auto preds = subnet_predecessors(dfg);
    const auto order = subnet_topological_order(dfg);
    // Longest execution-time path j ~> i, DP over topological order.
    for (const int i : order)
    {
        const double ti = dfg.exec_times[i];
        t.at(i, i) = ti; // a core is sequential across iterations
        for (int j = 0; j < n; j++)
        {
            double best = kMaxPlusZero;
            for (const int p : preds[i])
                best = std::max(best, t.at(p, j));
            if (best != kMaxPlusZero)
                t.at(i, j) = std::max(t.at(i, j), ti + best);
        }
    }
    return t;
}

std::vector<MaxPlusVector> maxplus_evolve(const MaxPlusMatrix &t,
        const MaxPlusVector &t0, int iterations)
{
    std::vector<MaxPlusVector> out;
    out.reserve(static_cast<size_t>(iterations));
    MaxPlusVector x = t0;
    for (int k = 0; k < iterations; k++)
    {
        x = mp_apply(t, x);
        out.push_back(x);
    }
    return out;
}

double steady_state_interval(const MaxPlusMatrix &t, int iteration_cap)
{
    if (t.n == 0)
        return 0.0;
    MaxPlusVector x(static_cast<size_t>(t.n), 0.0);
    MaxPlusVector prev_diff;
    for (int k = 0; k < iteration_cap; k++)
    {
        const MaxPlusVector y = mp_apply(t, x);
        MaxPlusVector diff(x.size());
        for (size_t i = 0; i < x.size(); i++)
            diff[i] = y[i] - x[i];
        if (!prev_diff.empty())
        {
            bool stable = true;
            for (size_t i = 0; i < diff.size(); i++)
                if (std::abs(diff[i] - prev_diff[i]) > 1e-12)
                    stable = false;
            if (stable)
                return *std::max_element(diff.begin(), diff.end());
        }
        prev_diff = std::move(diff);
        x = y;
    }
    throw error("steady-state interval did not converge");
}

PipelineAssignment allocate_pipelines(const DataflowGraph &dfg, int num_cores)
{
    const int n = static_cast<int>(dfg.subnets.size());
    if (n > num_cores)
        throw no_fit_error("need " + std::to_string(n) + " cores, have " +
                std::to_string(num_cores));

    std::vector<std::set<int>> out(n);
    std::vector<std::set<int>> in(n);
    for (const auto &c : dfg.channels)
    {
        out[c.src_subnet].insert(c.dst_subnet);
        in[c.dst_subnet].insert(c.src_subnet);
    }

    // Union single-successor/single-predecessor chain links.
    std::vector<int> parent(n);
    for (int i = 0; i < n; i++)
        parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int u = 0; u < n; u++)
        if (out[u].size() == 1)
        {
            const int v = *out[u].begin();
            if (in[v].size() == 1)
                parent[find(v)] = find(u);
        }

    PipelineAssignment pa;
    pa.pipeline_of.assign(n, -1);
    int next = 0;
    for (int i = 0; i < n; i++)
    {
        const int root = find(i);
        if (pa.pipeline_of[root] < 0)
            pa.pipeline_of[root] = next++;
        pa.pipeline_of[i] = pa.pipeline_of[root];
    }
    pa.num_pipelines = next;
    return pa;
}

double Schedule::end_of(int subnet, int image) const
{
    const size_t n = entries.size() / static_cast<size_t>(batch_size);
    return entries[static_cast<size_t>(image) * n + subnet].end;
}

Schedule schedule_batch(const DataflowGraph &dfg,
        const PipelineAssignment &pipelines, int batch_size, bool pipelined)
{
    if (batch_size < 1)
        throw validation_error("batch size must be >= 1");
    const int n = static_cast<int>(dfg.subnets.size());
    const auto preds = subnet_predecessors(dfg);
    const auto order = subnet_topological_order(dfg);

    Schedule sched;
    sched.batch_size = batch_size;
    sched.pipelined = pipelined;
    sched.pipelines = pipelines;
    sched.entries.resize(static_cast<size_t>(batch_size) * n);

    std::vector<double> core_free(n, 0.0); // per subnet (one core each)
    std::vector<double> end_time(n, 0.0);
    double prev_image_done = 0.0;
    for (int b = 0; b < batch_size; b++)
    {
        double image_done = 0.0;
        for (const int i : order)
        {
            double start = pipelined ? core_free[i] : prev_image_done;
            start = std::max(start, core_free[i]);
            for (const int p : preds[i])
                start = std::max(start, end_time[p]);
            const double end = start + dfg.exec_times[i];
            end_time[i] = end;
            core_free[i] = end;
            image_done = std::max(image_done, end);
            sched.entries[static_cast<size_t>(b) * n + i] =
                    ScheduleEntry{i, b, start, end};
        }
        prev_image_done = image_done;
        sched.image_latency.push_back(image_done);
        sched.makespan = std::max(sched.makespan, image_done);
    }
    sched.throughput =
            sched.makespan > 0.0 ? batch_size / sched.makespan : 0.0;
    if (n > 0)
        sched.steady_interval = steady_state_interval(timing_matrix(dfg));
    return sched;
}

nlohmann::json schedule_to_json(const Schedule &s)
{
    nlohmann::json j;
    j["batch_size"] = s.batch_size;
    j["pipelined"] = s.pipelined;
    j["num_pipelines"] = s.pipelines.num_pipelines;
    j["pipeline_of"] = s.pipelines.pipeline_of;
    j["entries"] = nlohmann::json::array();
    for (const auto &e : s.entries)
        j["entries"].push_back({{"subnet", e.subnet}, {"image", e.image},
                {"start", e.start}, {"end", e.end}});
    j["makespan"] = s.makespan;
    j["image_latency"] = s.image_latency;
    j["throughput"] = s.throughput;
    j["steady_interval"] = s.steady_interval;
    return j;
}

Schedule schedule_from_json(const nlohmann::json &j)
{
    Schedule s;
    try
    {
        s.batch_size = j.at("batch_size").get<int>();
        s.pipelined = j.at("pipelined").get<bool>();
        s.pipelines.num_pipelines = j.at("num_pipelines").get<int>();
        s.pipelines.pipeline_of =
                j.at("pipeline_of").get<std::vector<int>>();
        for (const auto &je : j.at("entries"))
            s.entries.push_back(ScheduleEntry{je.at("subnet").get<int>(),
                    je.at("image").get<int>(), je.at("start").get<double>(),
                    je.at("end").get<double>()});
        s.makespan = j.at("makespan").get<double>();
        s.image_latency = j.at("image_latency").get<std::vector<double>>();
        s.throughput = j.at("throughput").get<double>();
        s.steady_interval = j.at("steady_interval").get<double>();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw parse_error(std::string("malformed schedule file: ") + e.what());
    }
    return s;
}

std::string schedule_to_csv(const Schedule &s)
{
    std::string csv = "subnet,image,pipeline,start,end\n";
    for (const auto &e : s.entries)
    {
        csv += std::to_string(e.subnet) + "," + std::to_string(e.image) + "," +
                std::to_string(s.pipelines.pipeline_of[e.subnet]) + "," +
                std::to_string(e.start) + "," + std::to_string(e.end) + "\n";
    }
    return csv;
}

}
