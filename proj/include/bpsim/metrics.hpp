#pragma once

#include "bpsim/engine.hpp"
#include "bpsim/grid.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bpsim {

struct MetricsSeries {
    std::vector<double> total_queue;            // per recorded step
    std::vector<double> cumulative_time_spent;  // running sum of total_queue
    std::vector<double> per_movement_mean;
    std::vector<double> per_movement_max;
};

MetricsSeries metrics_from_result(const SimResult& res);

// Vehicle-steps accumulated over the whole run: sum_t sum_i q_i(t).
double total_time_spent(const SimResult& res);

struct PolicyStats {
    std::string name;
    double mean = 0.0;
    double stddev = 0.0;             // sample standard deviation over runs
    std::vector<double> time_spent;  // total_time_spent per run
};

struct Comparison {
    std::vector<PolicyStats> per_policy;
    std::vector<std::vector<double>> mean_ratio;  // [i][j] = mean_i / mean_j
    std::vector<double> paired_ratio(std::size_t i, std::size_t j) const;
};

// Runs every policy against identical per-run inflow draws (common random
// numbers), so comparing a policy with itself gives a ratio of exactly 1.
// Backpressure policies get their weight mode applied to a copy of the spec.
Comparison compare_policies(const NetworkSpec& spec, const std::vector<Policy>& policies,
                            int n_runs, std::uint64_t seed0, const SimOptions& base);

// Max over time of the total queue at the intersections of each hop-distance
// group around the incident link. Requires a recorded trajectory.
std::map<std::string, double> incident_locality_stats(const SimResult& res,
                                                      const GridNetwork& net,
                                                      const std::string& incident_link);

struct LogRatioRow {
    int movement;
    RoadClass cls;
    double log_ratio;
};
struct LogRatioScatter {
    std::vector<LogRatioRow> rows;
    int excluded = 0;  // zero-mean movements skipped
};

// log(mean_a / mean_b) per real movement, classified arterial/secondary.
LogRatioScatter per_link_log_ratio(const std::vector<double>& mean_a,
                                   const std::vector<double>& mean_b, const GridNetwork& net);

// Replays recorded activations and inflows through the dynamics; true when
// every recorded state is reproduced bit-exactly.
bool replay_matches(const NetworkSpec& spec, const Trajectory& traj,
                    const std::vector<CapacityOverlay>& overlays = {});

// Long-format CSV: run,policy,t,metric,value.
std::string metrics_to_csv(const std::string& run_id, const std::string& policy,
                           const MetricsSeries& ms, const NetworkSpec& spec);

}  // namespace bpsim
