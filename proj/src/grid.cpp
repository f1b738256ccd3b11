#include "bpsim/grid.hpp"

#include "bpsim/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace bpsim {

namespace {

// Directions of travel: E = +col, S = +row, W = -col, N = -row.
constexpr int kDr[4] = {0, 1, 0, -1};
constexpr int kDc[4] = {1, 0, -1, 0};
constexpr char kDirLetter[5] = "ESWN";

int opposite(int dir) { return dir ^ 2; }

std::string node_name(int r, int c) {
    return "n" + std::to_string(r) + "_" + std::to_string(c);
}
std::string entry_name(int r, int c) {
    return "in" + std::to_string(r) + "_" + std::to_string(c);
}
std::string exit_name(int r, int c) {
    return "out" + std::to_string(r) + "_" + std::to_string(c);
}

void validate(const GridConfig& cfg) {
    if (cfg.rows < 2 || cfg.cols < 2)
        throw std::invalid_argument("grid: rows and cols must be at least 2");
    if (cfg.h < 0) throw std::invalid_argument("grid: arterial spacing must be >= 0");
    if (cfg.capacity_ratio < 1.0)
        throw std::invalid_argument("grid: capacity_ratio must be >= 1");
    if (!(cfg.base_capacity > 0.0))
        throw std::invalid_argument("grid: base_capacity must be positive");
    if (!(cfg.time_step_seconds > 0.0))
        throw std::invalid_argument("grid: time step must be positive");
}

}  // namespace

bool GridNetwork::is_boundary(int node) const {
    const int r = node / cfg.cols, c = node % cfg.cols;
    return r == 0 || r == cfg.rows - 1 || c == 0 || c == cfg.cols - 1;
}

RoadClass GridNetwork::movement_class(int movement) const {
    const std::string& from = spec.movements[movement].id.from;
    auto it = link_index.find(from);
    if (it == link_index.end()) return RoadClass::Virtual;
    return links[it->second].arterial ? RoadClass::Arterial : RoadClass::Secondary;
}

GridNetwork build_manhattan(const GridConfig& cfg) {
    validate(cfg);
    GridNetwork net;
    net.cfg = cfg;
    const int R = cfg.rows, C = cfg.cols;

    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) net.nodes.push_back(node_name(r, c));
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            if (r == 0 || r == R - 1 || c == 0 || c == C - 1)
                net.boundary.push_back(node_name(r, c));

    // Directed links between 4-connected neighbors. A horizontal link lies in
    // its row, a vertical one in its column; every h-th is an arterial.
    std::vector<std::vector<int>> links_out(R * C), links_in(R * C);
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            for (int d = 0; d < 4; ++d) {
                const int rr = r + kDr[d], cc = c + kDc[d];
                if (rr < 0 || rr >= R || cc < 0 || cc >= C) continue;
                GridNetwork::Link l;
                l.name = "l" + std::to_string(r) + "_" + std::to_string(c) + kDirLetter[d];
                l.tail = r * C + c;
                l.head = rr * C + cc;
                l.dir = d;
                const bool horizontal = (d == 0 || d == 2);
                const int line = horizontal ? r : c;
                l.arterial = cfg.h > 0 && line % cfg.h == 0;
                l.capacity = cfg.base_capacity * (l.arterial ? cfg.capacity_ratio : 1.0);
                const int idx = static_cast<int>(net.links.size());
                net.link_index[l.name] = idx;
                links_out[l.tail].push_back(idx);
                links_in[l.head].push_back(idx);
                net.links.push_back(std::move(l));
            }
        }
    }

    // One intersection per node; one phase per incoming link, activating all
    // of its movements: straight at half the link capacity, turns at a
    // quarter, plus an exit buffer draining trips that end here.
    NetworkSpec& spec = net.spec;
    for (int node = 0; node < R * C; ++node) {
        const int r = node / C, c = node % C;
        Intersection x;
        x.id = net.nodes[node];
        for (int li : links_in[node]) {
            const GridNetwork::Link& L = net.links[li];
            std::vector<int> phase;
            for (int mi : links_out[node]) {
                const GridNetwork::Link& M = net.links[mi];
                if (M.dir == opposite(L.dir)) continue;  // no U-turns
                Movement mv;
                mv.id = {L.name, M.name};
                mv.capacity = L.capacity * (M.dir == L.dir ? 0.5 : 0.25);
                phase.push_back(static_cast<int>(spec.movements.size()));
                spec.movements.push_back(std::move(mv));
            }
            {
                Movement mv;
                mv.id = {L.name, exit_name(r, c)};
                mv.capacity = L.capacity * 0.5;
                phase.push_back(static_cast<int>(spec.movements.size()));
                spec.movements.push_back(std::move(mv));
            }
            x.phases.push_back(std::move(phase));
        }
        spec.intersections.push_back(std::move(x));
    }

    // Virtual entry buffers: one movement per outgoing link of each node,
    // held in a single always-green source intersection.
    for (int node = 0; node < R * C; ++node) {
        const int r = node / C, c = node % C;
        Intersection x;
        x.id = "src" + std::to_string(r) + "_" + std::to_string(c);
        std::vector<int> phase;
        for (int mi : links_out[node]) {
            const GridNetwork::Link& M = net.links[mi];
            Movement mv;
            mv.id = {entry_name(r, c), M.name};
            mv.capacity = M.capacity * 0.5;
            phase.push_back(static_cast<int>(spec.movements.size()));
            spec.movements.push_back(std::move(mv));
        }
        x.phases.push_back(std::move(phase));
        spec.intersections.push_back(std::move(x));
    }

    // Placeholder uniform routing until an assignment is applied.
    std::map<std::string, int> fan_out;
    for (const Movement& m : spec.movements) ++fan_out[m.id.from];
    for (Movement& m : spec.movements) m.routing = 1.0 / fan_out[m.id.from];

    spec.inflow_kind = InflowKind::Poisson;
    spec.finalize();

    for (std::size_t i = 0; i < spec.size(); ++i) {
        auto it = net.link_index.find(spec.movements[i].id.from);
        if (it == net.link_index.end()) continue;
        net.movements_at[net.nodes[net.links[it->second].head]].push_back(static_cast<int>(i));
    }
    return net;
}

OdMap sample_od_demand(const GridNetwork& net, const DemandConfig& dcfg) {
    // A dedicated stream far above any per-movement inflow stream.
    std::mt19937_64 eng = make_engine(dcfg.seed, 1ull << 40);
    OdMap od;
    for (const std::string& o : net.nodes)
        for (const std::string& d : net.nodes) {
            if (o == d) continue;
            const double draw = exponential(eng, 1.0);
            od[{o, d}] = dcfg.rho * dcfg.od_mean_scale * draw;
        }
    return od;
}

Assignment assign_shortest_paths(const GridNetwork& net, const OdMap& od) {
    const NetworkSpec& spec = net.spec;
    const int n_nodes = net.cfg.rows * net.cfg.cols;

    std::vector<std::vector<int>> adj(n_nodes);
    std::vector<double> cost(net.links.size());
    for (std::size_t i = 0; i < net.links.size(); ++i) {
        adj[net.links[i].tail].push_back(static_cast<int>(i));
        cost[i] = net.links[i].arterial ? 1.0 / net.cfg.capacity_ratio : 1.0;
    }

    std::map<std::string, int> node_id;
    for (int i = 0; i < n_nodes; ++i) node_id[net.nodes[i]] = i;

    Assignment asg;
    asg.flow.assign(spec.size(), 0.0);

    std::vector<double> dist(n_nodes);
    std::vector<int> pred(n_nodes);
    // OdMap keys are sorted, so pairs sharing an origin are consecutive and
    // one Dijkstra tree per distinct origin suffices.
    for (auto it = od.begin(); it != od.end();) {
        const std::string origin = it->first.first;
        const int src = node_id.at(origin);
        const int orow = src / net.cfg.cols, ocol = src % net.cfg.cols;

        // Deterministic Dijkstra: ties keep the first-found predecessor.
        dist.assign(n_nodes, std::numeric_limits<double>::infinity());
        pred.assign(n_nodes, -1);
        dist[src] = 0.0;
        using Entry = std::pair<double, int>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
        pq.push({0.0, src});
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u]) continue;
            for (int li : adj[u]) {
                const int v = net.links[li].head;
                const double nd = d + cost[li];
                if (nd < dist[v] - 1e-12) {
                    dist[v] = nd;
                    pred[v] = li;
                    pq.push({nd, v});
                }
            }
        }

        for (; it != od.end() && it->first.first == origin; ++it) {
            const std::string& destination = it->first.second;
            if (destination == origin) continue;
            const double w = it->second;
            const int dst = node_id.at(destination);
            if (pred[dst] == -1) {
                ++asg.dropped_pairs;
                continue;
            }
            if (w <= 0.0) continue;
            std::vector<int> path;  // link indices, destination backwards
            for (int v = dst; v != src;) {
                path.push_back(pred[v]);
                v = net.links[pred[v]].tail;
            }
            std::reverse(path.begin(), path.end());

            const int drow = dst / net.cfg.cols, dcol = dst % net.cfg.cols;
            asg.flow[spec.index({entry_name(orow, ocol), net.links[path.front()].name})] += w;
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                asg.flow[spec.index({net.links[path[i]].name, net.links[path[i + 1]].name})] += w;
            asg.flow[spec.index({net.links[path.back()].name, exit_name(drow, dcol)})] += w;
        }
    }

    // Routing = flow proportions per from-link; uniform where nothing flows.
    std::map<std::string, double> link_flow;
    std::map<std::string, int> fan_out;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        link_flow[spec.movements[i].id.from] += asg.flow[i];
        ++fan_out[spec.movements[i].id.from];
    }
    asg.routing.assign(spec.size(), 0.0);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const std::string& from = spec.movements[i].id.from;
        asg.routing[i] = link_flow[from] > 0.0 ? asg.flow[i] / link_flow[from]
                                               : 1.0 / fan_out[from];
        if (net.link_index.count(from))
            asg.max_eta = std::max(asg.max_eta, asg.flow[i] / spec.movements[i].capacity);
    }
    return asg;
}

double calibrate_od_scale(const Assignment& asg) {
    if (!(asg.max_eta > 0.0))
        throw std::invalid_argument("grid: cannot calibrate a zero-flow assignment");
    return 0.25 / asg.max_eta;
}

void apply_assignment(GridNetwork& net, const Assignment& asg, double scale) {
    NetworkSpec& spec = net.spec;
    if (asg.flow.size() != spec.size() || asg.routing.size() != spec.size())
        throw std::invalid_argument("grid: assignment does not match the network");
    for (std::size_t i = 0; i < spec.size(); ++i) {
        Movement& m = spec.movements[i];
        m.routing = asg.routing[i];
        const bool entry = net.link_index.find(m.id.from) == net.link_index.end();
        m.inflow_mean = entry ? asg.flow[i] * scale : 0.0;
    }
    spec.inflow_kind = InflowKind::Poisson;
    spec.finalize();
}

DemandProfile peak_profile(long T, double rho_max) {
    if (T < 2) throw std::invalid_argument("grid: peak profile needs a horizon of at least 2");
    return {{0, T / 2, T}, {0.0, rho_max, 0.0}};
}

CapacityOverlay inject_incident(const NetworkSpec& spec, const IncidentSpec& inc) {
    if (inc.t_start >= inc.t_end)
        throw std::invalid_argument("grid: incident window must be nonempty");
    CapacityOverlay ov;
    ov.begin = inc.t_start;
    ov.end = inc.t_end;
    ov.value = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (spec.movements[i].id.from == inc.link) ov.movement.push_back(static_cast<int>(i));
    if (ov.movement.empty())
        throw std::invalid_argument("grid: incident on unknown link " + inc.link);
    return ov;
}

long steps_per_hour(const GridConfig& cfg) {
    return std::lround(3600.0 / cfg.time_step_seconds);
}

std::map<std::string, std::vector<std::string>> incident_groups(const GridNetwork& net,
                                                                const std::string& link) {
    auto it = net.link_index.find(link);
    if (it == net.link_index.end())
        throw std::invalid_argument("grid: unknown link " + link);
    const GridNetwork::Link& inc = net.links[it->second];

    std::set<int> taken;
    auto claim = [&](std::vector<int> cand) {
        std::vector<std::string> out;
        for (int n : cand)
            if (taken.insert(n).second) out.push_back(net.nodes[n]);
        return out;
    };

    std::map<std::string, std::vector<std::string>> groups;
    groups["d0"] = claim({inc.head});
    groups["up1"] = claim({inc.tail});
    std::vector<int> up2, down1;
    for (const GridNetwork::Link& l : net.links) {
        if (l.head == inc.tail) up2.push_back(l.tail);
        if (l.tail == inc.head) down1.push_back(l.head);
    }
    groups["up2"] = claim(up2);
    groups["down1"] = claim(down1);
    return groups;
}

}  // namespace bpsim
