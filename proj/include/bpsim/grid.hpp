#pragma once

#include "bpsim/engine.hpp"
#include "bpsim/network.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bpsim {

// Rectangular Manhattan grid of signalized intersections. Every h-th row and
// column of roads is a high-capacity arterial; each node carries virtual
// entry/exit links, so every intersection is a demand source and sink.
struct GridConfig {
    int rows = 10;
    int cols = 10;
    int h = 5;                    // arterial spacing; 0 = none, 1 = every road
    double capacity_ratio = 4.0;  // arterial capacity (and speed) multiplier
    double base_capacity = 8.0;   // secondary link saturation flow per step
    double time_step_seconds = 30.0;
};

struct DemandConfig {
    double rho = 1.0;            // demand magnitude
    double od_mean_scale = 1.0;  // per-pair mean = rho * od_mean_scale * Exp(1)
    std::uint64_t seed = 0;
};

struct IncidentSpec {
    std::string link;   // all movements queued on this link lose capacity
    long t_start = 0;
    long t_end = 0;     // exclusive
};

enum class RoadClass { Arterial, Secondary, Virtual };

// A generated grid: the NetworkSpec plus the topology tables that demand
// assignment and reporting need (node geometry, road classes).
struct GridNetwork {
    struct Link {
        std::string name;
        int tail = 0, head = 0;  // node indices, row-major r*cols+c
        int dir = 0;             // 0=E 1=S 2=W 3=N
        bool arterial = false;
        double capacity = 0.0;
    };

    NetworkSpec spec;
    GridConfig cfg;
    std::vector<std::string> nodes;     // intersection names, row-major
    std::vector<std::string> boundary;  // boundary node names, row-major
    std::vector<Link> links;            // real links, construction order
    std::map<std::string, int> link_index;
    // Real movements queued at each intersection (virtual buffers excluded).
    std::map<std::string, std::vector<int>> movements_at;

    bool is_boundary(int node) const;
    // Arterial/secondary from the link a movement queues on; Virtual for
    // entry/exit buffers.
    RoadClass movement_class(int movement) const;
};

// Mean demand per ordered (origin, destination) pair of nodes.
using OdMap = std::map<std::pair<std::string, std::string>, double>;

// Shortest-path loading of an OD map onto the grid.
struct Assignment {
    std::vector<double> flow;     // mean vehicles/step per movement
    std::vector<double> routing;  // per movement, normalized per from-link
    int dropped_pairs = 0;        // unreachable OD pairs skipped
    double max_eta = 0.0;         // max flow/capacity over real movements
};

// Deterministic generator; throws std::invalid_argument on rows/cols < 2,
// h < 0, capacity_ratio < 1, or nonpositive capacity/time step.
GridNetwork build_manhattan(const GridConfig& cfg);

// One Exp(1) draw per ordered node pair, scaled by rho * od_mean_scale.
// Same seed -> same map.
OdMap sample_od_demand(const GridNetwork& net, const DemandConfig& dcfg);

// All-or-nothing assignment along travel-time-shortest paths (secondary cost
// 1 per block, arterial cost 1/capacity_ratio). Flows land on the movement
// sequence entry -> links -> exit; routing shares are flow proportions,
// uniform on links that carry none.
Assignment assign_shortest_paths(const GridNetwork& net, const OdMap& od);

// Normalization constant making the peak movement load eta equal rho/4:
// returns 1 / (4 * max_eta) for an assignment built at rho=1, scale=1.
double calibrate_od_scale(const Assignment& asg);

// Writes routing shares and entry inflow means (flow * scale on virtual
// entry movements, Poisson arrivals) into net.spec.
void apply_assignment(GridNetwork& net, const Assignment& asg, double scale);

// Triangular demand profile: 0 at t=0, rho_max at t=T/2, 0 at t=T.
DemandProfile peak_profile(long T, double rho_max = 3.0);

// Zero-capacity window for every movement queued on the given link.
// Throws on unknown link names.
CapacityOverlay inject_incident(const NetworkSpec& spec, const IncidentSpec& inc);

// "One hour" of wall time in simulation steps.
long steps_per_hour(const GridConfig& cfg);

// Intersections grouped by directed hop distance from an incident link
// tail->head: d0 = head node, up1 = tail node, up2 = tails of links into
// up1, down1 = heads of links out of d0 (each node in its nearest group).
std::map<std::string, std::vector<std::string>> incident_groups(const GridNetwork& net,
                                                                const std::string& link);

}  // namespace bpsim
