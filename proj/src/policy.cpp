#include "bpsim/policy.hpp"

namespace bpsim {

std::string Policy::name() const {
    switch (type) {
        case PolicyType::FixedCycle: return "fixed";
        case PolicyType::Alternating: return "alt";
        case PolicyType::Backpressure:
            switch (weights) {
                case WeightMode::Uniform: return "bp";
                case WeightMode::InverseCapacity: return "new";
                case WeightMode::Custom: return "bp-custom";
            }
    }
    return "?";
}

NetworkSpec apply_weight_mode(const NetworkSpec& spec, WeightMode mode,
                              const std::map<MovementId, double>& custom) {
    NetworkSpec out = spec;
    for (Movement& m : out.movements) {
        switch (mode) {
            case WeightMode::Uniform:
                m.weight = 1.0;
                break;
            case WeightMode::InverseCapacity:
                if (m.capacity <= 0.0)
                    throw std::invalid_argument(
                        "inverse-capacity weights need positive capacity on " + m.id.str());
                m.weight = 1.0 / m.capacity;
                break;
            case WeightMode::Custom: {
                auto it = custom.find(m.id);
                m.weight = it != custom.end() ? it->second : 1.0;
                if (!(m.weight > 0.0))
                    throw std::invalid_argument("custom weight must be > 0 on " + m.id.str());
                break;
            }
        }
    }
    out.finalize();
    return out;
}

std::vector<double> priorities(const QueueState& state, const NetworkSpec& spec,
                               const double* capacity) {
    const std::size_t n = spec.size();
    if (state.q.size() != n) throw std::invalid_argument("state size mismatch");
    const double* cap = capacity ? capacity : spec.base_capacity.data();

    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        double downstream = 0.0;
        for (int k : spec.out_of_link[i]) {
            const Movement& d = spec.movements[k];
            downstream += d.weight * state.q[k] * d.routing;
        }
        p[i] = (spec.movements[i].weight * state.q[i] - downstream) * cap[i];
    }
    return p;
}

Activation backpressure_select(const std::vector<double>& priority, const NetworkSpec& spec) {
    Activation act;
    act.phase.resize(spec.intersections.size());
    for (std::size_t k = 0; k < spec.intersections.size(); ++k) {
        const auto& phases = spec.intersections[k].phases;
        int best = 0;
        double best_sum = 0.0;
        for (std::size_t p = 0; p < phases.size(); ++p) {
            double sum = 0.0;
            for (int i : phases[p]) sum += priority[i];
            if (p == 0 || sum > best_sum) {
                best = static_cast<int>(p);
                best_sum = sum;
            }
        }
        act.phase[k] = best;
    }
    return act;
}

Activation fixed_cycle_select(long t, const Policy& policy, const NetworkSpec& spec) {
    if (policy.dwell <= 0) throw std::invalid_argument("dwell must be positive");
    const long slot = t / policy.dwell;
    Activation act;
    act.phase.resize(spec.intersections.size());
    for (std::size_t k = 0; k < spec.intersections.size(); ++k) {
        const long nphases = static_cast<long>(spec.intersections[k].phases.size());
        long idx;
        if (policy.cycle.empty()) {
            idx = slot % nphases;
        } else {
            idx = policy.cycle[slot % policy.cycle.size()] % nphases;
        }
        act.phase[k] = static_cast<int>(idx);
    }
    return act;
}

Activation alternating_select(long t, const NetworkSpec& spec) {
    // Locate the merge: the unique intersection with exactly two singleton phases.
    int merge = -1;
    for (std::size_t k = 0; k < spec.intersections.size(); ++k) {
        const auto& phases = spec.intersections[k].phases;
        if (phases.size() == 2 && phases[0].size() == 1 && phases[1].size() == 1) {
            if (merge != -1)
                throw std::invalid_argument("alternating policy needs a unique merge junction");
            merge = static_cast<int>(k);
        } else if (phases.size() != 1) {
            throw std::invalid_argument("alternating policy only applies to merge junctions");
        }
    }
    if (merge == -1)
        throw std::invalid_argument("alternating policy found no two-phase merge");

    const auto& phases = spec.intersections[merge].phases;
    const Movement& a = spec.movements[phases[0][0]];
    const Movement& b = spec.movements[phases[1][0]];
    // "Queue 1" is the narrower approach; tie broken by link name for determinism.
    int narrow_phase;
    if (a.capacity != b.capacity)
        narrow_phase = a.capacity < b.capacity ? 0 : 1;
    else
        narrow_phase = a.id.from < b.id.from ? 0 : 1;

    Activation act;
    act.phase.assign(spec.intersections.size(), 0);
    act.phase[merge] = (t % 2 == 0) ? narrow_phase : 1 - narrow_phase;
    return act;
}

}  // namespace bpsim
