#pragma once

#include "bpsim/model.hpp"
#include "bpsim/network.hpp"
#include "bpsim/policy.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace bpsim {

enum class RecordLevel { MetricsOnly, Trajectory };

// Piecewise-linear scaling of all inflow means over time: interpolates
// between breakpoints, constant past the last one.
struct DemandProfile {
    std::vector<long> breakpoints;  // ascending knot times; first must be 0
    std::vector<double> scale;      // one per breakpoint
    double at(long t) const;
    static DemandProfile flat(double s = 1.0) { return {{0}, {s}}; }
};

// Time-windowed capacity override, e.g. a blocked link: movements in
// `movement` get capacity `value` during [begin, end).
struct CapacityOverlay {
    long begin = 0, end = 0;
    std::vector<int> movement;
    double value = 0.0;
};

struct SimOptions {
    long horizon = 0;
    std::uint64_t seed = 0;
    RecordLevel record = RecordLevel::MetricsOnly;
    std::optional<QueueState> initial;          // default: clamp-respecting zeros
    DemandProfile demand = DemandProfile::flat();
    std::vector<CapacityOverlay> overlays;
    // When set, arrivals[t][i] are consumed instead of drawing from the RNG;
    // lets paired policy runs share identical inflow realizations.
    const std::vector<std::vector<double>>* fixed_inflow = nullptr;
};

struct Trajectory {
    std::vector<QueueState> states;             // horizon+1 entries
    std::vector<std::vector<int>> phases;       // chosen phase per intersection per step
    std::vector<std::vector<double>> inflow;    // realized arrivals per step
    std::vector<std::vector<double>> priority;  // per-movement priorities (backpressure only)
};

struct SimResult {
    // Always recorded.
    std::vector<double> total_queue;            // sum_i q_i(t), horizon+1 samples
    std::vector<double> weighted_energy;        // 0.5 sum_i w_i q_i(t)^2
    std::vector<double> max_priority;           // per step, before the step executes
    std::vector<double> mean_queue;             // per movement, time average over 0..horizon
    std::vector<double> max_queue;              // per movement
    QueueState final_state;
    double total_inflow = 0.0;
    double total_served = 0.0;
    // Only with RecordLevel::Trajectory.
    std::optional<Trajectory> trajectory;
};

std::vector<std::vector<double>> draw_inflows(const NetworkSpec& spec, long horizon,
                                              std::uint64_t seed,
                                              const DemandProfile& demand);

SimResult simulate(const NetworkSpec& spec, const Policy& policy, const SimOptions& opt);

}  // namespace bpsim
