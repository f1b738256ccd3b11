#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bpsim {

// A movement (l, m): vehicles queued on link l waiting to continue onto link m.
// Links are named; a movement is identified by its ordered link pair.
struct MovementId {
    std::string from;
    std::string to;

    bool operator==(const MovementId& o) const { return from == o.from && to == o.to; }
    bool operator!=(const MovementId& o) const { return !(*this == o); }
    bool operator<(const MovementId& o) const {
        return from != o.from ? from < o.from : to < o.to;
    }
    std::string str() const { return from + "->" + to; }
};

struct MovementIdHash {
    std::size_t operator()(const MovementId& m) const {
        std::hash<std::string> h;
        std::size_t a = h(m.from);
        return a ^ (h(m.to) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    }
};

struct Movement {
    MovementId id;
    double capacity = 0.0;     // saturation flow per step, c_{l,m}
    double weight = 1.0;       // queue weight gamma_{l,m} used by weighted priorities
    double routing = 1.0;      // share of flow arriving on link `from` that takes this movement
    double inflow_mean = 0.0;  // exogenous arrivals per step (mean if stochastic)
    std::optional<double> clamp;  // if set, queue is held constant at this value
};

// A controlled junction: exactly one phase (a compatible movement set) is green per step.
struct Intersection {
    std::string id;
    std::vector<std::vector<int>> phases;  // movement indices into NetworkSpec::movements
};

enum class InflowKind { Constant, Poisson };

// Static description of the network: movements, signal phases, weights,
// routing shares and exogenous inflows. Queue values live in QueueState.
class NetworkSpec {
public:
    std::vector<Movement> movements;
    std::vector<Intersection> intersections;
    InflowKind inflow_kind = InflowKind::Constant;

    // Derived tables, rebuilt by finalize().
    std::unordered_map<MovementId, int, MovementIdHash> index_of;
    std::vector<std::vector<int>> into_link_of;   // per movement i: movements (k, from_i)
    std::vector<std::vector<int>> out_of_link;    // per movement i: movements (to_i, k)
    std::vector<int> intersection_of;             // per movement: owning intersection
    std::vector<double> base_capacity;            // movements[i].capacity, contiguous

    // Validates invariants and rebuilds lookup tables. Throws std::invalid_argument
    // on: duplicate movements, capacity < 0, weight <= 0, routing outside [0,1],
    // unnormalized routing on a link with outgoing movements, empty or overlapping
    // phase membership, or a movement not covered by any phase.
    void finalize();

    int index(const MovementId& id) const;
    std::size_t size() const { return movements.size(); }
    bool is_sink(int i) const { return out_of_link[i].empty(); }
};

// Queue sizes for every movement at one time step. Continuous (fluid) values.
struct QueueState {
    std::vector<double> q;
    long t = 0;
};

// One selected phase per intersection.
struct Activation {
    std::vector<int> phase;  // phase[i] indexes intersections[i].phases

    // Expand to a per-movement green/red mask.
    std::vector<std::uint8_t> mask(const NetworkSpec& spec) const;
};

QueueState make_initial_state(const NetworkSpec& spec, double fill = 0.0);

// JSON serialization of the spec (schema documented in FORMATS.md).
std::string network_to_json(const NetworkSpec& spec);
NetworkSpec network_from_json(const std::string& text);

}  // namespace bpsim
