#pragma once

#include "bpsim/network.hpp"

#include <map>

namespace bpsim {

enum class WeightMode { Uniform, InverseCapacity, Custom };

enum class PolicyType { Backpressure, FixedCycle, Alternating };

// A signal control policy. Backpressure variants differ only in the queue
// weights they apply; fixed-cycle rotates phases on a timer; alternating is
// the two-queue round-robin benchmark for merge junctions.
struct Policy {
    PolicyType type = PolicyType::Backpressure;
    WeightMode weights = WeightMode::Uniform;
    std::map<MovementId, double> custom_weights;  // used when weights == Custom
    int dwell = 1;                                // fixed-cycle steps per phase
    std::vector<int> cycle;                       // fixed-cycle phase order; empty = listed order

    static Policy backpressure(WeightMode mode) {
        Policy p;
        p.type = PolicyType::Backpressure;
        p.weights = mode;
        return p;
    }
    static Policy fixed_cycle(int dwell, std::vector<int> cycle = {}) {
        Policy p;
        p.type = PolicyType::FixedCycle;
        p.dwell = dwell;
        p.cycle = std::move(cycle);
        return p;
    }
    static Policy alternating() {
        Policy p;
        p.type = PolicyType::Alternating;
        return p;
    }
    std::string name() const;
};

// Returns a copy of the spec with movement weights substituted for the mode:
// Uniform -> 1, InverseCapacity -> 1/c (rejects zero capacities), Custom ->
// explicit per-movement values (defaulting to 1 where missing).
NetworkSpec apply_weight_mode(const NetworkSpec& spec, WeightMode mode,
                              const std::map<MovementId, double>& custom = {});

// Weighted differential backlog per movement:
//   p(l,m) = (gamma(l,m) q(l,m) - sum_k gamma(m,k) q(m,k) r(m,k)) * c(l,m).
// `capacity` optionally overrides structural capacities (incidents).
std::vector<double> priorities(const QueueState& state, const NetworkSpec& spec,
                               const double* capacity = nullptr);

// Per intersection, pick the phase with the largest total priority.
// Exact ties go to the lowest phase index in listed order.
Activation backpressure_select(const std::vector<double>& priority, const NetworkSpec& spec);

// Timer rotation: phase (t / dwell) mod cycle length, independent of state.
Activation fixed_cycle_select(long t, const Policy& policy, const NetworkSpec& spec);

// Two-queue round robin for a merge junction: the lower-capacity approach on
// even steps, the other on odd steps. Rejects specs that are not shaped as a
// single two-phase merge (plus single-phase pass-through intersections).
Activation alternating_select(long t, const NetworkSpec& spec);

}  // namespace bpsim
