#include "bpsim/junction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bpsim {

void JunctionParams::validate() const {
    if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("junction: c must be positive");
    if (!(k >= 1) || !std::isfinite(k)) throw std::invalid_argument("junction: k must be >= 1");
    if (!(eta > 0) || !(eta <= 0.5)) throw std::invalid_argument("junction: eta must be in (0, 1/2]");
    if (!(Q >= 0) || !std::isfinite(Q)) throw std::invalid_argument("junction: Q must be >= 0");
}

int RegionLabel::u() const {
    if (region == Region::U1S2) return 1;
    if (region == Region::U2S1) return 2;
    throw std::logic_error("junction: no unsaturated queue in an indeterminate region");
}

int RegionLabel::s() const { return u() == 1 ? 2 : 1; }

RegionLabel phase_region(const JunctionParams& p) {
    p.validate();
    if (!(p.k > 1.0))
        throw std::invalid_argument("junction: region classification needs k > 1");
    const double k = p.k, eta = p.eta;
    double lo, hi;  // Q <= lo -> queue 1 saturates; Q >= hi -> queue 2 saturates
    if (p.gamma == GammaMode::Uniform) {
        hi = (k * k - eta) / (k - 1.0) * p.c;
        lo = (k * k * eta - 1.0) / (k - 1.0) * p.c;
    } else {
        hi = (k - eta) / (k - 1.0) * p.c3();
        lo = (k * eta - 1.0) / (k - 1.0) * p.c3();
    }
    RegionLabel out;
    if (p.Q >= hi) out.region = Region::U1S2;
    else if (p.Q <= lo) out.region = Region::U2S1;
    else out.region = Region::Indeterminate;
    return out;
}

namespace {

struct Split {
    double cu, cs, fu, fs, gu, gs;
};

Split split_for(const JunctionParams& p, int u) {
    if (u == 1) return {p.c1(), p.c2(), p.f1(), p.f2(), p.gamma1(), p.gamma2()};
    if (u == 2) return {p.c2(), p.c1(), p.f2(), p.f1(), p.gamma2(), p.gamma1()};
    throw std::invalid_argument("junction: queue number must be 1 or 2");
}

}  // namespace

double activation_priority(const JunctionParams& p, int u) {
    p.validate();
    const Split sp = split_for(p, u);
    return (sp.gu * sp.fu - p.gamma0() * p.Q) * sp.cu;
}

SteadyStateBounds steady_state_bounds(const JunctionParams& p) {
    const RegionLabel label = phase_region(p);
    if (!label.definite())
        throw std::invalid_argument("junction: steady-state bounds need a definite region");
    const int u = label.u();
    const Split sp = split_for(p, u);
    SteadyStateBounds b;
    b.u = u;
    b.s = label.s();
    b.p_act = activation_priority(p, u);
    // Queue level at which the saturated side's priority equals p_act.
    // Branch per weight mode so the common integer-valued cases stay exact.
    if (p.gamma == GammaMode::InverseCapacity)
        b.q_s_act = (sp.cs - sp.cu) * p.Q / p.c3() + sp.fu;
    else
        b.q_s_act = (1.0 - sp.cu / sp.cs) * p.Q + sp.cu / sp.cs * sp.fu;
    b.q_u_lo = sp.fu;
    b.q_u_hi = 2.0 * sp.fu;
    b.q_s_lo = b.q_s_act + sp.fs - sp.cs;
    b.q_s_hi = b.q_s_act + sp.fs;
    return b;
}

double mean_queue_estimate(const JunctionParams& p) {
    const SteadyStateBounds b = steady_state_bounds(p);
    const Split sp = split_for(p, b.u);
    return b.q_s_act + sp.fs - 0.5 * sp.cs;
}

double time_spent_ratio(const JunctionParams& p) {
    JunctionParams uni = p;
    uni.gamma = GammaMode::Uniform;
    JunctionParams inv = p;
    inv.gamma = GammaMode::InverseCapacity;
    const RegionLabel ru = phase_region(uni);
    const RegionLabel ri = phase_region(inv);
    if (!ru.definite() || !ri.definite() || ru.region != ri.region)
        throw std::invalid_argument("junction: ratio needs both weight modes in the same definite region");
    return mean_queue_estimate(uni) / mean_queue_estimate(inv);
}

double asymptotic_ratio(Region region, double k) {
    if (region == Region::U1S2) return 1.0;
    if (region == Region::U2S1) return k;
    throw std::invalid_argument("junction: no asymptotic ratio in an indeterminate region");
}

std::vector<double> rolling_pmax(const std::vector<double>& max_priority_per_step) {
    if (max_priority_per_step.size() < 2)
        throw std::invalid_argument("junction: rolling max priority needs at least two samples");
    std::vector<double> out(max_priority_per_step.size() - 1);
    for (std::size_t j = 0; j + 1 < max_priority_per_step.size(); ++j)
        out[j] = std::min(max_priority_per_step[j], max_priority_per_step[j + 1]);
    return out;
}

std::optional<long> detect_transient_end(const std::vector<double>& pmax,
                                         double p_act, double tol) {
    if (!(tol >= 0)) throw std::invalid_argument("junction: tolerance must be >= 0");
    // Last index violating the band; settled from the next sample on.
    long last_bad = -1;
    for (std::size_t j = 0; j < pmax.size(); ++j)
        if (std::abs(pmax[j] - p_act) > tol) last_bad = static_cast<long>(j);
    if (last_bad + 1 >= static_cast<long>(pmax.size())) return std::nullopt;
    return last_bad + 2;  // rolling series sample j describes time j+1
}

double transient_tolerance(const JunctionParams& p) {
    p.validate();
    return std::max(p.f1(), p.f2());
}

double priority_deviation_bound(const JunctionParams& p) {
    p.validate();
    return std::min(p.gamma1() * p.f1() * p.c1(), p.gamma2() * p.f2() * p.c2());
}

SaturationWindow classify_saturation(const std::vector<double>& q1_series,
                                     const std::vector<double>& q2_series,
                                     const std::vector<std::uint8_t>& q1_green,
                                     const std::vector<std::uint8_t>& q2_green,
                                     double c1, double c2,
                                     std::size_t t_begin, std::size_t t_end) {
    if (q1_series.size() != q2_series.size() || q1_green.size() != q2_green.size() ||
        q1_green.size() != q1_series.size())
        throw std::invalid_argument("junction: saturation series lengths must match");
    if (t_end > q1_series.size() || t_begin >= t_end)
        throw std::invalid_argument("junction: bad saturation window");
    constexpr double kSlack = 1e-9;
    SaturationWindow w;
    w.q1_saturated = true;
    w.q2_saturated = true;
    for (std::size_t t = t_begin; t < t_end; ++t) {
        if (q1_green[t] && q1_series[t] < c1 - kSlack) w.q1_saturated = false;
        if (q2_green[t] && q2_series[t] < c2 - kSlack) w.q2_saturated = false;
    }
    if (w.q2_saturated && !w.q1_saturated) w.region = Region::U1S2;
    else if (w.q1_saturated && !w.q2_saturated) w.region = Region::U2S1;
    return w;
}

NetworkSpec make_junction_spec(const JunctionParams& p) {
    p.validate();
    NetworkSpec spec;
    spec.inflow_kind = InflowKind::Constant;
    Movement m13;
    m13.id = {"1", "3"};
    m13.capacity = p.c1();
    m13.inflow_mean = p.f1();
    Movement m23;
    m23.id = {"2", "3"};
    m23.capacity = p.c2();
    m23.inflow_mean = p.f2();
    Movement m34;
    m34.id = {"3", "4"};
    m34.capacity = p.c3();
    m34.clamp = p.Q;
    spec.movements = {m13, m23, m34};
    if (p.gamma == GammaMode::InverseCapacity)
        for (auto& m : spec.movements) m.weight = 1.0 / m.capacity;
    Intersection merge;
    merge.id = "J";
    merge.phases = {{1}, {0}};  // wide approach first: exact ties go to it
    Intersection down;
    down.id = "D";
    down.phases = {{2}};
    spec.intersections = {merge, down};
    spec.finalize();
    return spec;
}

JunctionIndex junction_index(const NetworkSpec& spec) {
    JunctionIndex ix;
    ix.q1 = spec.index({"1", "3"});
    ix.q2 = spec.index({"2", "3"});
    ix.q3 = spec.index({"3", "4"});
    for (std::size_t i = 0; i < spec.intersections.size(); ++i) {
        const auto& phases = spec.intersections[i].phases;
        for (std::size_t ph = 0; ph < phases.size(); ++ph) {
            if (phases[ph] == std::vector<int>{ix.q1}) {
                ix.merge_intersection = static_cast<int>(i);
                ix.phase_q1 = static_cast<int>(ph);
            }
            if (phases[ph] == std::vector<int>{ix.q2}) ix.phase_q2 = static_cast<int>(ph);
        }
    }
    if (ix.merge_intersection < 0 || ix.phase_q1 < 0 || ix.phase_q2 < 0)
        throw std::invalid_argument("junction: spec does not look like a two-to-one merge");
    return ix;
}

}  // namespace bpsim
