#pragma once

#include "bpsim/network.hpp"

namespace bpsim {

// Per-step service: everything queued departs, up to saturation flow.
inline double throughput(double queue, double capacity) {
    return queue < capacity ? queue : capacity;
}

// One synchronous step of the store-and-forward dynamics:
//   q'(l,m) = q(l,m) + r(l,m) * sum_k u(k,l) s(k,l) - u(l,m) s(l,m) + e(l,m)
// with s = min(q, c). Flow served on a sink movement (no onward movements)
// leaves the network. Clamped queues are reset to their constant after the
// update, discarding whatever arrived.
//
// `capacity` can override the structural capacities (incident overlays);
// pass nullptr to use spec capacities. Throws on negative inflow or an
// activation that does not pick exactly one phase per intersection.
QueueState step(const QueueState& state, const Activation& act,
                const std::vector<double>& inflow, const NetworkSpec& spec,
                const double* capacity = nullptr);

// Weighted quadratic backlog V(q) = 1/2 sum_i gamma_i q_i^2.
double lyapunov_value(const QueueState& state, const std::vector<double>& weights);

}  // namespace bpsim
