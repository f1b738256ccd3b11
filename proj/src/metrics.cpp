#include "bpsim/metrics.hpp"

#include "bpsim/policy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bpsim {

MetricsSeries metrics_from_result(const SimResult& res) {
    MetricsSeries ms;
    ms.total_queue = res.total_queue;
    ms.cumulative_time_spent.reserve(res.total_queue.size());
    double acc = 0.0;
    for (double v : res.total_queue) {
        acc += v;
        ms.cumulative_time_spent.push_back(acc);
    }
    ms.per_movement_mean = res.mean_queue;
    ms.per_movement_max = res.max_queue;
    return ms;
}

double total_time_spent(const SimResult& res) {
    if (res.total_queue.empty())
        throw std::invalid_argument("metrics: empty run");
    double acc = 0.0;
    for (double v : res.total_queue) acc += v;
    return acc;
}

std::vector<double> Comparison::paired_ratio(std::size_t i, std::size_t j) const {
    const auto& a = per_policy.at(i).time_spent;
    const auto& b = per_policy.at(j).time_spent;
    std::vector<double> r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] / b[k];
    return r;
}

Comparison compare_policies(const NetworkSpec& spec, const std::vector<Policy>& policies,
                            int n_runs, std::uint64_t seed0, const SimOptions& base) {
    if (n_runs < 1) throw std::invalid_argument("metrics: need at least one run");
    Comparison cmp;
    cmp.per_policy.resize(policies.size());

    std::vector<NetworkSpec> specs;
    specs.reserve(policies.size());
    for (std::size_t p = 0; p < policies.size(); ++p) {
        cmp.per_policy[p].name = policies[p].name();
        specs.push_back(policies[p].type == PolicyType::Backpressure
                            ? apply_weight_mode(spec, policies[p].weights,
                                                policies[p].custom_weights)
                            : spec);
    }

    for (int r = 0; r < n_runs; ++r) {
        const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(r);
        const auto arrivals = draw_inflows(spec, base.horizon, seed, base.demand);
        for (std::size_t p = 0; p < policies.size(); ++p) {
            SimOptions opt = base;
            opt.seed = seed;
            opt.fixed_inflow = &arrivals;
            const SimResult res = simulate(specs[p], policies[p], opt);
            cmp.per_policy[p].time_spent.push_back(total_time_spent(res));
        }
    }

    for (PolicyStats& st : cmp.per_policy) {
        double sum = 0.0;
        for (double v : st.time_spent) sum += v;
        st.mean = sum / n_runs;
        double ss = 0.0;
        for (double v : st.time_spent) ss += (v - st.mean) * (v - st.mean);
        st.stddev = n_runs > 1 ? std::sqrt(ss / (n_runs - 1)) : 0.0;
    }
    cmp.mean_ratio.assign(policies.size(), std::vector<double>(policies.size(), 0.0));
    for (std::size_t i = 0; i < policies.size(); ++i)
        for (std::size_t j = 0; j < policies.size(); ++j)
            cmp.mean_ratio[i][j] = cmp.per_policy[i].mean / cmp.per_policy[j].mean;
    return cmp;
}

std::map<std::string, double> incident_locality_stats(const SimResult& res,
                                                      const GridNetwork& net,
                                                      const std::string& incident_link) {
    if (!res.trajectory)
        throw std::invalid_argument("metrics: locality stats need a recorded trajectory");
    const auto groups = incident_groups(net, incident_link);

    std::map<std::string, double> out;
    for (const auto& [label, node_list] : groups) {
        std::vector<int> movs;
        for (const std::string& node : node_list) {
            auto it = net.movements_at.find(node);
            if (it == net.movements_at.end()) continue;
            movs.insert(movs.end(), it->second.begin(), it->second.end());
        }
        double peak = 0.0;
        for (const QueueState& st : res.trajectory->states) {
            double total = 0.0;
            for (int i : movs) total += st.q[i];
            peak = std::max(peak, total);
        }
        out[label] = peak;
    }
    return out;
}

LogRatioScatter per_link_log_ratio(const std::vector<double>& mean_a,
                                   const std::vector<double>& mean_b, const GridNetwork& net) {
    if (mean_a.size() != net.spec.size() || mean_b.size() != net.spec.size())
        throw std::invalid_argument("metrics: mean vectors do not match the network");
    LogRatioScatter sc;
    for (std::size_t i = 0; i < net.spec.size(); ++i) {
        const RoadClass cls = net.movement_class(static_cast<int>(i));
        if (cls == RoadClass::Virtual) continue;
        if (!(mean_a[i] > 0.0) || !(mean_b[i] > 0.0)) {
            ++sc.excluded;
            continue;
        }
        sc.rows.push_back({static_cast<int>(i), cls, std::log(mean_a[i] / mean_b[i])});
    }
    return sc;
}

bool replay_matches(const NetworkSpec& spec, const Trajectory& traj,
                    const std::vector<CapacityOverlay>& overlays) {
    if (traj.states.empty() || traj.phases.size() + 1 != traj.states.size() ||
        traj.inflow.size() != traj.phases.size())
        return false;
    QueueState state = traj.states.front();
    for (std::size_t t = 0; t < traj.phases.size(); ++t) {
        std::vector<double> cap;
        const double* cap_ptr = nullptr;
        if (!overlays.empty()) {
            cap = spec.base_capacity;
            for (const CapacityOverlay& ov : overlays) {
                if (static_cast<long>(t) < ov.begin || static_cast<long>(t) >= ov.end) continue;
                for (int m : ov.movement) cap[m] = ov.value;
            }
            cap_ptr = cap.data();
        }
        Activation act;
        act.phase = traj.phases[t];
        state = step(state, act, traj.inflow[t], spec, cap_ptr);
        const QueueState& want = traj.states[t + 1];
        if (state.q.size() != want.q.size() || state.t != want.t) return false;
        for (std::size_t i = 0; i < state.q.size(); ++i)
            if (state.q[i] != want.q[i]) return false;
    }
    return true;
}

std::string metrics_to_csv(const std::string& run_id, const std::string& policy,
                           const MetricsSeries& ms, const NetworkSpec& spec) {
    std::ostringstream out;
    out << "run,policy,t,metric,value\n";
    out.precision(17);
    for (std::size_t t = 0; t < ms.total_queue.size(); ++t)
        out << run_id << ',' << policy << ',' << t << ",total_queue," << ms.total_queue[t]
            << '\n';
    for (std::size_t t = 0; t < ms.cumulative_time_spent.size(); ++t)
        out << run_id << ',' << policy << ',' << t << ",cumulative_time_spent,"
            << ms.cumulative_time_spent[t] << '\n';
    for (std::size_t i = 0; i < ms.per_movement_mean.size(); ++i)
        out << run_id << ',' << policy << ",,mean_q[" << spec.movements[i].id.str() << "],"
            << ms.per_movement_mean[i] << '\n';
    for (std::size_t i = 0; i < ms.per_movement_max.size(); ++i)
        out << run_id << ',' << policy << ",,max_q[" << spec.movements[i].id.str() << "],"
            << ms.per_movement_max[i] << '\n';
    return out.str();
}

}  // namespace bpsim
