#include "bpsim/model.hpp"

namespace bpsim {

QueueState step(const QueueState& state, const Activation& act,
                const std::vector<double>& inflow, const NetworkSpec& spec,
                const double* capacity) {
    const std::size_t n = spec.size();
    if (state.q.size() != n) throw std::invalid_argument("state size mismatch");
    if (inflow.size() != n) throw std::invalid_argument("inflow size mismatch");
    for (double e : inflow)
        if (!(e >= 0.0)) throw std::invalid_argument("negative inflow");

    const double* cap = capacity ? capacity : spec.base_capacity.data();
    const std::vector<std::uint8_t> u = act.mask(spec);

    // Served flow per movement, then arrivals routed onto each movement's link.
    std::vector<double> served(n);
    for (std::size_t i = 0; i < n; ++i)
        served[i] = u[i] ? throughput(state.q[i], cap[i]) : 0.0;

    QueueState next;
    next.t = state.t + 1;
    next.q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double arrived = 0.0;
        for (int k : spec.into_link_of[i]) arrived += served[k];
        next.q[i] = state.q[i] + spec.movements[i].routing * arrived - served[i] + inflow[i];
        if (spec.movements[i].clamp) next.q[i] = *spec.movements[i].clamp;
    }
    return next;
}

double lyapunov_value(const QueueState& state, const std::vector<double>& weights) {
    if (state.q.size() != weights.size())
        throw std::invalid_argument("weights size mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < state.q.size(); ++i)
        v += weights[i] * state.q[i] * state.q[i];
    return 0.5 * v;
}

}  // namespace bpsim
