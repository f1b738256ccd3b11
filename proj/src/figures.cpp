#include "bpsim/figures.hpp"

#include "bpsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bpsim {

namespace {

// Demand levels for the benchmark sweep; brackets the stable band and the
// oversaturated tail.
const std::vector<double> kRhoSweep = {0.25, 0.5, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0};
const std::vector<int> kHSweep = {0, 1, 2, 4, 6, 8, 10};
const std::vector<double> kCapacityRatioSweep = {1.0, 2.0, 4.0, 8.0};
// Sweep demand levels: the spacing sweep needs the near-saturated band for
// the heterogeneity ordering to resolve on the 10x10 grid; the capacity
// sweep sits at the peak-improvement demand.
constexpr double kHSweepRho = 2.5;
constexpr double kCapacitySweepRho = 1.5;
constexpr double kScatterRho = 1.5;
// Arrival seeds live far from OD seeds so the two streams never collide.
constexpr std::uint64_t kArrivalSeedOffset = 1000000;

Policy classical() { return Policy::backpressure(WeightMode::Uniform); }
Policy proposed() { return Policy::backpressure(WeightMode::InverseCapacity); }

// Paired classical/proposed runs over fresh OD draws; each run rebuilds the
// scenario with seed0+r and replays one arrival realization through both
// policies.
SweepPoint paired_sweep_point(const GridConfig& cfg, double rho, const SweepScale& scale,
                              const DemandProfile* profile = nullptr) {
    std::vector<double> ratios(scale.n_runs);
    double sum_a = 0.0, sum_b = 0.0;
    for (int r = 0; r < scale.n_runs; ++r) {
        GridNetwork net = load_grid_scenario(cfg, rho, scale.seed0 + r);
        SimOptions base;
        base.horizon = scale.horizon;
        if (profile) base.demand = *profile;
        Comparison cmp = compare_policies(net.spec, {classical(), proposed()}, 1,
                                          scale.seed0 + kArrivalSeedOffset + r, base);
        const double a = cmp.per_policy[0].time_spent[0];
        const double b = cmp.per_policy[1].time_spent[0];
        ratios[r] = a / b;
        sum_a += a;
        sum_b += b;
    }
    SweepPoint pt;
    double mean = 0.0;
    for (double v : ratios) mean += v;
    mean /= ratios.size();
    double ss = 0.0;
    for (double v : ratios) ss += (v - mean) * (v - mean);
    pt.ratio_mean = mean;
    pt.ratio_sd = ratios.size() > 1 ? std::sqrt(ss / (ratios.size() - 1)) : 0.0;
    pt.classical_mean = sum_a / scale.n_runs;
    pt.proposed_mean = sum_b / scale.n_runs;
    return pt;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

GridNetwork load_grid_scenario(const GridConfig& cfg, double rho, std::uint64_t seed) {
    GridNetwork net = build_manhattan(cfg);
    OdMap od = sample_od_demand(net, {1.0, 1.0, seed});
    Assignment asg = assign_shortest_paths(net, od);
    apply_assignment(net, asg, rho * calibrate_od_scale(asg));
    return net;
}

SweepTable fig4_rho_sweep(const SweepScale& scale) {
    SweepTable table;
    table.x_name = "rho";
    for (double rho : kRhoSweep) {
        SweepPoint pt = paired_sweep_point(GridConfig{}, rho, scale);
        pt.x = rho;
        table.points.push_back(pt);
    }
    return table;
}

SweepTable fig5_h_sweep(const SweepScale& scale) {
    SweepTable table;
    table.x_name = "h";
    for (int h : kHSweep) {
        GridConfig cfg;
        cfg.h = h;
        SweepPoint pt = paired_sweep_point(cfg, kHSweepRho, scale);
        pt.x = h;
        table.points.push_back(pt);
    }
    return table;
}

SweepTable fig6_ratio_sweep(const SweepScale& scale) {
    SweepTable table;
    table.x_name = "capacity_ratio";
    for (double cr : kCapacityRatioSweep) {
        GridConfig cfg;
        cfg.capacity_ratio = cr;
        SweepPoint pt = paired_sweep_point(cfg, kCapacitySweepRho, scale);
        pt.x = cr;
        table.points.push_back(pt);
    }
    return table;
}

ScatterTable fig7_scatter(const SweepScale& scale) {
    const int n_seeds = scale.full ? 30 : 5;
    GridNetwork probe = build_manhattan(GridConfig{});
    std::vector<double> mean_classical(probe.spec.size(), 0.0);
    std::vector<double> mean_proposed(probe.spec.size(), 0.0);

    for (int s = 0; s < n_seeds; ++s) {
        GridNetwork net = load_grid_scenario(GridConfig{}, kScatterRho, scale.seed0 + s);
        SimOptions base;
        base.horizon = scale.horizon;
        auto arrivals = draw_inflows(net.spec, scale.horizon,
                                     scale.seed0 + kArrivalSeedOffset + s, base.demand);
        base.fixed_inflow = &arrivals;
        SimResult a = simulate(apply_weight_mode(net.spec, WeightMode::Uniform), classical(), base);
        SimResult b =
            simulate(apply_weight_mode(net.spec, WeightMode::InverseCapacity), proposed(), base);
        for (std::size_t i = 0; i < net.spec.size(); ++i) {
            mean_classical[i] += a.mean_queue[i] / n_seeds;
            mean_proposed[i] += b.mean_queue[i] / n_seeds;
        }
    }

    LogRatioScatter sc = per_link_log_ratio(mean_proposed, mean_classical, probe);
    ScatterTable table;
    table.excluded = sc.excluded;
    std::vector<double> sec, art;
    for (const LogRatioRow& row : sc.rows) {
        ScatterRow out;
        out.movement = probe.spec.movements[row.movement].id.str();
        out.road_class = row.cls == RoadClass::Arterial ? "arterial" : "secondary";
        out.mean_proposed = mean_proposed[row.movement];
        out.mean_classical = mean_classical[row.movement];
        out.log_ratio = row.log_ratio;
        table.rows.push_back(std::move(out));
        (row.cls == RoadClass::Arterial ? art : sec).push_back(row.log_ratio);
    }
    table.median_secondary = median(std::move(sec));
    table.median_arterial = median(std::move(art));
    return table;
}

PeakSeries fig8_peak(const SweepScale& scale) {
    GridConfig cfg;
    cfg.rows = scale.full ? 50 : 20;
    cfg.cols = 10;
    cfg.h = 4;
    const long T = 480;
    const int n_seeds = scale.full ? 10 : 3;
    const DemandProfile profile = peak_profile(T, 3.0);

    PeakSeries series;
    series.rho.reserve(T + 1);
    for (long t = 0; t <= T; ++t) series.rho.push_back(profile.at(t));

    for (const Policy& pol : {classical(), proposed()}) {
        series.cumulative[pol.name()].assign(T + 1, 0.0);
    }
    for (int s = 0; s < n_seeds; ++s) {
        GridNetwork net = load_grid_scenario(cfg, 1.0, scale.seed0 + s);
        SimOptions base;
        base.horizon = T;
        base.demand = profile;
        auto arrivals =
            draw_inflows(net.spec, T, scale.seed0 + kArrivalSeedOffset + s, profile);
        base.fixed_inflow = &arrivals;
        for (const Policy& pol : {classical(), proposed()}) {
            SimResult res = simulate(apply_weight_mode(net.spec, pol.weights), pol, base);
            MetricsSeries ms = metrics_from_result(res);
            auto& acc = series.cumulative[pol.name()];
            for (long t = 0; t <= T; ++t) acc[t] += ms.cumulative_time_spent[t] / n_seeds;
        }
    }
    return series;
}

IncidentReport fig9_incident(const SweepScale& scale) {
    GridConfig cfg;
    cfg.rows = scale.full ? 50 : 20;
    cfg.cols = 10;
    cfg.h = 4;
    const long T = 720;
    const int n_seeds = scale.full ? 10 : 3;

    IncidentReport report;
    report.link = "l8_4E";  // central arterial block, far from the boundary
    report.t_start = 2 * steps_per_hour(cfg);
    report.t_end = report.t_start + steps_per_hour(cfg);

    const std::vector<Policy> policies = {classical(), proposed(), Policy::fixed_cycle(1)};
    GridNetwork probe = build_manhattan(cfg);
    std::vector<int> vicinity_movements;
    for (const auto& [label, nodes] : incident_groups(probe, report.link))
        for (const std::string& node : nodes) {
            const auto& movs = probe.movements_at.at(node);
            vicinity_movements.insert(vicinity_movements.end(), movs.begin(), movs.end());
        }

    for (const Policy& pol : policies) {
        report.vicinity[pol.name()].assign(T + 1, 0.0);
        report.end_cumulative[pol.name()] = 0.0;
    }
    for (int s = 0; s < n_seeds; ++s) {
        GridNetwork net = load_grid_scenario(cfg, 1.5, scale.seed0 + s);
        IncidentSpec inc{report.link, report.t_start, report.t_end};
        SimOptions base;
        base.horizon = T;
        base.record = RecordLevel::Trajectory;
        base.overlays = {inject_incident(net.spec, inc)};
        auto arrivals =
            draw_inflows(net.spec, T, scale.seed0 + kArrivalSeedOffset + s, base.demand);
        base.fixed_inflow = &arrivals;

        for (const Policy& pol : policies) {
            const NetworkSpec spec = pol.type == PolicyType::Backpressure
                                         ? apply_weight_mode(net.spec, pol.weights)
                                         : net.spec;
            SimResult res = simulate(spec, pol, base);
            for (const auto& [group, peak] : incident_locality_stats(res, net, report.link))
                report.max_by_group[pol.name()][group] += peak / n_seeds;
            auto& vic = report.vicinity[pol.name()];
            for (long t = 0; t <= T; ++t) {
                double total = 0.0;
                for (int m : vicinity_movements) total += res.trajectory->states[t].q[m];
                vic[t] += total / n_seeds;
            }
            report.end_cumulative[pol.name()] += total_time_spent(res) / n_seeds;
        }
    }
    return report;
}

std::string sweep_to_csv(const SweepTable& table) {
    std::ostringstream out;
    out.precision(10);
    out << table.x_name << ",ratio_mean,ratio_sd,classical_mean,proposed_mean\n";
    for (const SweepPoint& pt : table.points)
        out << pt.x << ',' << pt.ratio_mean << ',' << pt.ratio_sd << ',' << pt.classical_mean
            << ',' << pt.proposed_mean << '\n';
    return out.str();
}

std::string scatter_to_csv(const ScatterTable& table) {
    std::ostringstream out;
    out.precision(10);
    out << "movement,road_class,mean_proposed,mean_classical,log_ratio\n";
    for (const ScatterRow& row : table.rows)
        out << row.movement << ',' << row.road_class << ',' << row.mean_proposed << ','
            << row.mean_classical << ',' << row.log_ratio << '\n';
    return out.str();
}

std::string peak_to_csv(const PeakSeries& series) {
    std::ostringstream out;
    out.precision(10);
    out << "t,rho,policy,cumulative_time_spent\n";
    for (const auto& [policy, series_values] : series.cumulative)
        for (std::size_t t = 0; t < series_values.size(); ++t)
            out << t << ',' << series.rho[t] << ',' << policy << ',' << series_values[t] << '\n';
    return out.str();
}

std::string incident_to_csv(const IncidentReport& report) {
    std::ostringstream out;
    out.precision(10);
    out << "policy,metric,key,t,value\n";
    out << ",incident_window,start,," << report.t_start << '\n';
    out << ",incident_window,end,," << report.t_end << '\n';
    for (const auto& [policy, groups] : report.max_by_group)
        for (const auto& [group, value] : groups)
            out << policy << ",max_queue," << group << ",," << value << '\n';
    for (const auto& [policy, value] : report.end_cumulative)
        out << policy << ",end_cumulative_time_spent,,," << value << '\n';
    for (const auto& [policy, values] : report.vicinity)
        for (std::size_t t = 0; t < values.size(); ++t)
            out << policy << ",vicinity_queue,," << t << ',' << values[t] << '\n';
    return out.str();
}

}  // namespace bpsim
