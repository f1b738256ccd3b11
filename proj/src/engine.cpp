#include "bpsim/engine.hpp"

#include "bpsim/random.hpp"

#include <algorithm>
#include <stdexcept>

namespace bpsim {

double DemandProfile::at(long t) const {
    if (breakpoints.empty() || breakpoints.size() != scale.size() || breakpoints.front() != 0)
        throw std::invalid_argument("engine: demand profile needs matching breakpoints starting at 0");
    if (t <= breakpoints.front()) return scale.front();
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (t <= breakpoints[i]) {
            const double span = static_cast<double>(breakpoints[i] - breakpoints[i - 1]);
            const double frac = static_cast<double>(t - breakpoints[i - 1]) / span;
            return scale[i - 1] + frac * (scale[i] - scale[i - 1]);
        }
    }
    return scale.back();
}

std::vector<std::vector<double>> draw_inflows(const NetworkSpec& spec, long horizon,
                                              std::uint64_t seed,
                                              const DemandProfile& demand) {
    const std::size_t n = spec.size();
    std::vector<std::vector<double>> arrivals(horizon, std::vector<double>(n, 0.0));
    if (spec.inflow_kind == InflowKind::Constant) {
        for (long t = 0; t < horizon; ++t) {
            const double s = demand.at(t);
            for (std::size_t i = 0; i < n; ++i)
                arrivals[t][i] = s * spec.movements[i].inflow_mean;
        }
        return arrivals;
    }
    // One stream per movement so adding a movement never reshuffles others.
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.movements[i].inflow_mean <= 0) continue;
        auto eng = make_engine(seed, static_cast<std::uint64_t>(i));
        for (long t = 0; t < horizon; ++t) {
            const double mean = demand.at(t) * spec.movements[i].inflow_mean;
            arrivals[t][i] = static_cast<double>(poisson(eng, mean));
        }
    }
    return arrivals;
}

namespace {

std::vector<double> overlaid_capacity(const NetworkSpec& spec,
                                      const std::vector<CapacityOverlay>& overlays, long t) {
    std::vector<double> cap = spec.base_capacity;
    for (const auto& ov : overlays) {
        if (t < ov.begin || t >= ov.end) continue;
        for (int m : ov.movement) {
            if (m < 0 || m >= static_cast<int>(cap.size()))
                throw std::invalid_argument("engine: overlay movement index out of range");
            cap[m] = ov.value;
        }
    }
    return cap;
}

}  // namespace

SimResult simulate(const NetworkSpec& spec, const Policy& policy, const SimOptions& opt) {
    if (opt.horizon <= 0) throw std::invalid_argument("engine: horizon must be positive");
    const std::size_t n = spec.size();

    QueueState state = opt.initial ? *opt.initial : make_initial_state(spec);
    if (state.q.size() != n) throw std::invalid_argument("engine: initial state size mismatch");

    std::vector<std::vector<double>> drawn;
    const std::vector<std::vector<double>>* arrivals = opt.fixed_inflow;
    if (arrivals == nullptr) {
        drawn = draw_inflows(spec, opt.horizon, opt.seed, opt.demand);
        arrivals = &drawn;
    }
    if (static_cast<long>(arrivals->size()) < opt.horizon)
        throw std::invalid_argument("engine: inflow series shorter than horizon");

    SimResult res;
    res.total_queue.reserve(opt.horizon + 1);
    res.weighted_energy.reserve(opt.horizon + 1);
    res.max_priority.reserve(opt.horizon);
    res.mean_queue.assign(n, 0.0);
    res.max_queue.assign(n, 0.0);

    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) weights[i] = spec.movements[i].weight;

    const bool keep_all = opt.record == RecordLevel::Trajectory;
    if (keep_all) {
        res.trajectory.emplace();
        res.trajectory->states.reserve(opt.horizon + 1);
        res.trajectory->phases.reserve(opt.horizon);
        res.trajectory->inflow.reserve(opt.horizon);
    }

    auto record_state = [&](const QueueState& st) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            total += st.q[i];
            res.mean_queue[i] += st.q[i];
            res.max_queue[i] = std::max(res.max_queue[i], st.q[i]);
        }
        res.total_queue.push_back(total);
        res.weighted_energy.push_back(lyapunov_value(st, weights));
        if (keep_all) res.trajectory->states.push_back(st);
    };

    record_state(state);

    const bool has_overlays = !opt.overlays.empty();
    for (long t = 0; t < opt.horizon; ++t) {
        std::vector<double> cap;
        const double* cap_ptr = nullptr;
        if (has_overlays) {
            cap = overlaid_capacity(spec, opt.overlays, t);
            cap_ptr = cap.data();
        }

        Activation act;
        switch (policy.type) {
            case PolicyType::Backpressure: {
                std::vector<double> pr = priorities(state, spec, cap_ptr);
                double pmax = pr.empty() ? 0.0 : *std::max_element(pr.begin(), pr.end());
                res.max_priority.push_back(pmax);
                act = backpressure_select(pr, spec);
                if (keep_all) res.trajectory->priority.push_back(std::move(pr));
                break;
            }
            case PolicyType::FixedCycle:
                res.max_priority.push_back(0.0);
                act = fixed_cycle_select(t, policy, spec);
                break;
            case PolicyType::Alternating:
                res.max_priority.push_back(0.0);
                act = alternating_select(t, spec);
                break;
        }

        const std::vector<double>& inflow = (*arrivals)[t];
        for (double a : inflow) res.total_inflow += a;
        const std::vector<std::uint8_t> mask = act.mask(spec);
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) {
                const double c = cap_ptr ? cap_ptr[i] : spec.base_capacity[i];
                res.total_served += throughput(state.q[i], c);
            }

        state = step(state, act, inflow, spec, cap_ptr);
        if (keep_all) {
            res.trajectory->phases.push_back(act.phase);
            res.trajectory->inflow.push_back(inflow);
        }
        record_state(state);
    }

    for (std::size_t i = 0; i < n; ++i)
        res.mean_queue[i] /= static_cast<double>(opt.horizon + 1);
    res.final_state = state;
    return res;
}

}  // namespace bpsim
