#ifndef SENTRY_SCHEDULE_HPP
#define SENTRY_SCHEDULE_HPP

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentry/compiler.hpp"

namespace sentry
{

// Max-Plus semiring over R U {-inf}: a (+) b = max(a, b), a (*) b = a + b.
constexpr double kMaxPlusZero = -std::numeric_limits<double>::infinity();

using MaxPlusVector = std::vector<double>;

struct MaxPlusMatrix
{
    int n{};
    std::vector<double> values; // row-major, kMaxPlusZero for absent

    explicit MaxPlusMatrix(int dim)
            : n(dim)
            , values(static_cast<size_t>(dim) * dim, kMaxPlusZero)
    {
    }
    double &at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }
    double at(int i, int j) const
    {
        return values[static_cast<size_t>(i) * n + j];
    }
};

MaxPlusMatrix mp_multiply(const MaxPlusMatrix &a, const MaxPlusMatrix &b);
MaxPlusMatrix mp_add(const MaxPlusMatrix &a, const MaxPlusMatrix &b);
MaxPlusVector mp_apply(const MaxPlusMatrix &t, const MaxPlusVector &x);

// End-time evolution matrix of the DFG under self-timed execution:
// T[i][j] is the largest execution-time sum over paths j ~> i (both
// endpoints included), so t_k = T (*) t_{k-1} reproduces the
// discrete-event end times exactly, per-core sequencing included.
MaxPlusMatrix timing_matrix(const DataflowGraph &dfg);

// t_1..t_k from t_0 (defaults to the all-zeros vector: every core free
// at time zero).
std::vector<MaxPlusVector> maxplus_evolve(const MaxPlusMatrix &t,
        const MaxPlusVector &t0, int iterations);

// Steady-state iteration interval: Max-Plus power iteration until the
// end-time increment vector stabilizes. Throughput is its reciprocal.
double steady_state_interval(const MaxPlusMatrix &t, int iteration_cap = 10000);

struct PipelineAssignment
{
    std::vector<int> pipeline_of; // by subnet index
    int num_pipelines{};
};

// Chain contraction: single-successor/single-predecessor runs share a
// pipeline; parallel branches get their own.
PipelineAssignment allocate_pipelines(const DataflowGraph &dfg, int num_cores);

struct ScheduleEntry
{
    int subnet{};
    int image{};
    double start{};
    double end{};
};

struct Schedule
{
    int batch_size{1};
    bool pipelined{true};
    PipelineAssignment pipelines;
    std::vector<ScheduleEntry> entries; // image-major, subnet order
    double makespan{};
    std::vector<double> image_latency; // completion time per image
    double throughput{};               // images per time unit
    double steady_interval{};

    double end_of(int subnet, int image) const;
};

// Self-timed batch schedule: image b's subnet i starts once its
// predecessors for image b and the core's image b-1 are done. The
// non-pipelined variant admits an image only after the previous one
// fully drains.
Schedule schedule_batch(const DataflowGraph &dfg,
        const PipelineAssignment &pipelines, int batch_size,
        bool pipelined = true);

nlohmann::json schedule_to_json(const Schedule &s);
Schedule schedule_from_json(const nlohmann::json &j);
std::string schedule_to_csv(const Schedule &s);

}

#endif
