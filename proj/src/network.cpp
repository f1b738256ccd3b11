#include "bpsim/network.hpp"

#include <cmath>
#include <set>

#include "json.hpp"

namespace bpsim {

void NetworkSpec::finalize() {
    const std::size_t n = movements.size();
    index_of.clear();
    index_of.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Movement& m = movements[i];
        if (!index_of.emplace(m.id, static_cast<int>(i)).second)
            throw std::invalid_argument("duplicate movement " + m.id.str());
        if (!(m.capacity >= 0.0) || !std::isfinite(m.capacity))
            throw std::invalid_argument("movement " + m.id.str() + ": capacity must be >= 0");
        if (!(m.weight > 0.0) || !std::isfinite(m.weight))
            throw std::invalid_argument("movement " + m.id.str() + ": weight must be > 0");
        if (!(m.routing >= 0.0 && m.routing <= 1.0))
            throw std::invalid_argument("movement " + m.id.str() + ": routing outside [0,1]");
        if (!(m.inflow_mean >= 0.0))
            throw std::invalid_argument("movement " + m.id.str() + ": inflow must be >= 0");
    }

    // Link-level adjacency: movements grouped by the link they queue on / feed.
    std::unordered_map<std::string, std::vector<int>> queued_on, feeding;
    for (std::size_t i = 0; i < n; ++i) {
        queued_on[movements[i].id.from].push_back(static_cast<int>(i));
        feeding[movements[i].id.to].push_back(static_cast<int>(i));
    }
    into_link_of.assign(n, {});
    out_of_link.assign(n, {});
    base_capacity.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        base_capacity[i] = movements[i].capacity;
        if (auto it = feeding.find(movements[i].id.from); it != feeding.end())
            into_link_of[i] = it->second;
        if (auto it = queued_on.find(movements[i].id.to); it != queued_on.end())
            out_of_link[i] = it->second;
    }

    // Routing shares out of any link must form a distribution.
    for (const auto& [link, movs] : queued_on) {
        double total = 0.0;
        for (int i : movs) total += movements[i].routing;
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("routing out of link " + link +
                                        " sums to " + std::to_string(total));
    }

    // Phase structure: nonempty phases, every movement in exactly one intersection.
    intersection_of.assign(n, -1);
    for (std::size_t k = 0; k < intersections.size(); ++k) {
        const Intersection& x = intersections[k];
        if (x.phases.empty())
            throw std::invalid_argument("intersection " + x.id + " has no phases");
        for (const auto& ph : x.phases) {
            if (ph.empty())
                throw std::invalid_argument("intersection " + x.id + " has an empty phase");
            for (int i : ph) {
                if (i < 0 || i >= static_cast<int>(n))
                    throw std::invalid_argument("intersection " + x.id +
                                                ": phase references movement out of range");
                if (intersection_of[i] != -1 && intersection_of[i] != static_cast<int>(k))
                    throw std::invalid_argument("movement " + movements[i].id.str() +
                                                " appears in two intersections");
                intersection_of[i] = static_cast<int>(k);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (intersection_of[i] == -1)
            throw std::invalid_argument("movement " + movements[i].id.str() +
                                        " not covered by any phase");
}

int NetworkSpec::index(const MovementId& id) const {
    auto it = index_of.find(id);
    if (it == index_of.end())
        throw std::invalid_argument("unknown movement " + id.str());
    return it->second;
}

std::vector<std::uint8_t> Activation::mask(const NetworkSpec& spec) const {
    if (phase.size() != spec.intersections.size())
        throw std::invalid_argument("activation does not match intersection count");
    std::vector<std::uint8_t> u(spec.size(), 0);
    for (std::size_t k = 0; k < phase.size(); ++k) {
        const auto& phases = spec.intersections[k].phases;
        int p = phase[k];
        if (p < 0 || p >= static_cast<int>(phases.size()))
            throw std::invalid_argument("activation selects phase out of range at intersection " +
                                        spec.intersections[k].id);
        for (int i : phases[p]) u[i] = 1;
    }
    return u;
}

QueueState make_initial_state(const NetworkSpec& spec, double fill) {
    QueueState s;
    s.q.assign(spec.size(), fill);
    for (std::size_t i = 0; i < spec.size(); ++i)
        if (spec.movements[i].clamp) s.q[i] = *spec.movements[i].clamp;
    s.t = 0;
    return s;
}

namespace {

using nlohmann::json;

json movement_ref(const MovementId& id) { return json::array({id.from, id.to}); }

MovementId parse_movement_ref(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("movement reference must be a [from, to] pair");
    return MovementId{j[0].get<std::string>(), j[1].get<std::string>()};
}

}  // namespace

std::string network_to_json(const NetworkSpec& spec) {
    json j;
    j["inflow_kind"] = spec.inflow_kind == InflowKind::Poisson ? "poisson" : "constant";
    j["movements"] = json::array();
    for (const Movement& m : spec.movements) {
        json mj{{"from", m.id.from},
                {"to", m.id.to},
                {"capacity", m.capacity},
                {"weight", m.weight},
                {"routing", m.routing},
                {"inflow_mean", m.inflow_mean}};
        if (m.clamp) mj["clamp"] = *m.clamp;
        j["movements"].push_back(std::move(mj));
    }
    j["intersections"] = json::array();
    for (const Intersection& x : spec.intersections) {
        json phases = json::array();
        for (const auto& ph : x.phases) {
            json pj = json::array();
            for (int i : ph) pj.push_back(movement_ref(spec.movements[i].id));
            phases.push_back(std::move(pj));
        }
        j["intersections"].push_back(json{{"id", x.id}, {"phases", std::move(phases)}});
    }
    return j.dump(2);
}

NetworkSpec network_from_json(const std::string& text) {
    json j = json::parse(text);
    NetworkSpec spec;
    if (j.contains("inflow_kind")) {
        const std::string k = j.at("inflow_kind").get<std::string>();
        if (k == "poisson")
            spec.inflow_kind = InflowKind::Poisson;
        else if (k == "constant")
            spec.inflow_kind = InflowKind::Constant;
        else
            throw std::invalid_argument("unknown inflow_kind: " + k);
    }
    for (const json& mj : j.at("movements")) {
        Movement m;
        m.id = MovementId{mj.at("from").get<std::string>(), mj.at("to").get<std::string>()};
        m.capacity = mj.at("capacity").get<double>();
        m.weight = mj.value("weight", 1.0);
        m.routing = mj.value("routing", 1.0);
        m.inflow_mean = mj.value("inflow_mean", 0.0);
        if (mj.contains("clamp")) m.clamp = mj.at("clamp").get<double>();
        spec.movements.push_back(std::move(m));
    }
    // finalize() below fills index_of; build a temporary map for phase refs first.
    std::unordered_map<MovementId, int, MovementIdHash> idx;
    for (std::size_t i = 0; i < spec.movements.size(); ++i)
        idx[spec.movements[i].id] = static_cast<int>(i);
    for (const json& xj : j.at("intersections")) {
        Intersection x;
        x.id = xj.at("id").get<std::string>();
        for (const json& pj : xj.at("phases")) {
            std::vector<int> phase;
            for (const json& ref : pj) {
                MovementId id = parse_movement_ref(ref);
                auto it = idx.find(id);
                if (it == idx.end())
                    throw std::invalid_argument("phase references unknown movement " + id.str());
                phase.push_back(it->second);
            }
            x.phases.push_back(std::move(phase));
        }
        spec.intersections.push_back(std::move(x));
    }
    spec.finalize();
    return spec;
}

}  // namespace bpsim
