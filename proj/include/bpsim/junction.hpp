#pragma once

#include "bpsim/network.hpp"

#include <optional>

namespace bpsim {

enum class GammaMode { Uniform, InverseCapacity };

// Parametric two-to-one merge: approach 1 with capacity c and demand eta*c,
// approach 2 with capacity k*c and demand k*eta*c, joining a downstream link
// of capacity (k+1)*c whose queue is held constant at Q.
struct JunctionParams {
    double c = 10.0;    // narrow approach capacity
    double k = 2.0;     // capacity ratio of the wide approach
    double eta = 0.4;   // demand-to-capacity ratio, <= 1/2
    double Q = 0.0;     // constant downstream queue
    GammaMode gamma = GammaMode::Uniform;

    double c1() const { return c; }
    double c2() const { return k * c; }
    double c3() const { return (k + 1.0) * c; }
    double f1() const { return eta * c; }
    double f2() const { return k * eta * c; }
    double gamma1() const { return gamma == GammaMode::Uniform ? 1.0 : 1.0 / c1(); }
    double gamma2() const { return gamma == GammaMode::Uniform ? 1.0 : 1.0 / c2(); }
    double gamma0() const { return gamma == GammaMode::Uniform ? 1.0 : 1.0 / c3(); }

    void validate() const;  // throws on c<=0, k<1, eta outside (0, 1/2], Q<0
};

// Which queue ends up rate-limited in the long run. Saturation{u,s} uses
// queue numbers 1/2; u is unsaturated, s saturated.
enum class Region { U1S2, U2S1, Indeterminate };

struct RegionLabel {
    Region region = Region::Indeterminate;
    int u() const;  // unsaturated queue number (1 or 2); throws if indeterminate
    int s() const;
    bool definite() const { return region != Region::Indeterminate; }
};

// Closed-form regime classification from the downstream-queue threshold test.
// Requires k > 1 (equal approaches have no wide/narrow distinction).
RegionLabel phase_region(const JunctionParams& p);

// Priority at which the saturated queue is served once the system settles:
// the unsaturated queue's priority at its inflow floor, (gamma_u f_u - gamma0 Q) c_u.
double activation_priority(const JunctionParams& p, int u);

struct SteadyStateBounds {
    double q_u_lo = 0, q_u_hi = 0;       // unsaturated queue band [f_u, 2 f_u]
    double q_s_lo = 0, q_s_hi = 0;       // saturated queue band
    double q_s_act = 0;                  // queue level matching the activation priority
    double p_act = 0;
    int u = 0, s = 0;
};

// Long-run queue bands for a definite region. Throws on Indeterminate.
SteadyStateBounds steady_state_bounds(const JunctionParams& p);

// Long-run average of the saturated queue: q_s_act + f_s - c_s / 2.
double mean_queue_estimate(const JunctionParams& p);

// Predicted uniform/inverse-capacity ratio of the saturated queue's mean.
// Requires both weight modes to put the junction in the same definite region.
double time_spent_ratio(const JunctionParams& p);

// Limit of that ratio as the merge grows: 1 when the wide queue saturates,
// k when the narrow one does.
double asymptotic_ratio(Region region, double k);

// Rolling two-step minimum of per-step maximum priorities:
//   out[j] = min(max_p[j], max_p[j+1])  — the value at time j+1.
// Needs at least two samples.
std::vector<double> rolling_pmax(const std::vector<double>& max_priority_per_step);

// Smallest time t (in rolling_pmax's 1-based clock) from which the rolling
// max priority stays within tol of p_act to the end of the series.
// nullopt when the series never settles.
std::optional<long> detect_transient_end(const std::vector<double>& pmax,
                                         double p_act, double tol);

// Default tolerance for transient detection: one slot of inflow, max(f1, f2).
double transient_tolerance(const JunctionParams& p);

// Exact bound on the steady-state excursion of the rolling max priority above
// p_act: min(gamma_1 f_1 c_1, gamma_2 f_2 c_2). The discrete periodic orbits
// overshoot the activation level by up to one slot of inflow on the queue
// being served, scaled into priority units.
double priority_deviation_bound(const JunctionParams& p);

struct SaturationWindow {
    bool q1_saturated = false;
    bool q2_saturated = false;
    Region region = Region::Indeterminate;  // exactly one saturated -> definite
};

// Empirical regime labeling over [t_begin, t_end): a queue is saturated when
// every green it receives in the window serves at full capacity (q >= c).
// Queues never served in the window count as saturated.
SaturationWindow classify_saturation(const std::vector<double>& q1_series,
                                     const std::vector<double>& q2_series,
                                     const std::vector<std::uint8_t>& q1_green,
                                     const std::vector<std::uint8_t>& q2_green,
                                     double c1, double c2,
                                     std::size_t t_begin, std::size_t t_end);

// NetworkSpec for the merge: movements 1->3, 2->3 competing at one junction,
// 3->4 clamped at Q behind an always-green pass-through. The wide approach is
// listed first so that exact priority ties activate it.
NetworkSpec make_junction_spec(const JunctionParams& p);

// Movement indices inside a spec built by make_junction_spec.
struct JunctionIndex {
    int q1 = -1, q2 = -1, q3 = -1;
    int merge_intersection = -1;
    int phase_q1 = -1, phase_q2 = -1;
};
JunctionIndex junction_index(const NetworkSpec& spec);

}  // namespace bpsim
