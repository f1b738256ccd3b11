#pragma once

// Shared helpers for randomized property tests: small well-formed network
// instances with random topology, capacities, routing and inflows.

#include "bpsim/network.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

namespace bpsim::testutil {

inline NetworkSpec random_small_spec(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> nl(3, 7);
    const int n = nl(rng);
    std::vector<std::string> links(n);
    for (int i = 0; i < n; ++i) links[i] = "L" + std::to_string(i);

    NetworkSpec spec;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b || u01(rng) > 0.35) continue;
            Movement m;
            m.id = {links[a], links[b]};
            m.capacity = 0.5 + 11.5 * u01(rng);
            m.routing = 0.1 + u01(rng);  // normalized per link below
            m.inflow_mean = u01(rng) < 0.5 ? 1.5 * u01(rng) : 0.0;
            spec.movements.push_back(m);
        }
    if (spec.movements.empty()) {
        Movement m;
        m.id = {links[0], links[1]};
        m.capacity = 5.0;
        m.inflow_mean = 1.0;
        spec.movements.push_back(m);
    }

    std::map<std::string, double> row;
    for (auto& m : spec.movements) row[m.id.from] += m.routing;
    for (auto& m : spec.movements) m.routing /= row[m.id.from];

    std::map<std::string, std::vector<int>> by_from;
    for (std::size_t i = 0; i < spec.movements.size(); ++i)
        by_from[spec.movements[i].id.from].push_back(static_cast<int>(i));
    for (auto& [from, idx] : by_from) {
        Intersection x;
        x.id = "I" + from;
        if (idx.size() >= 2 && u01(rng) < 0.6) {
            auto cut = static_cast<std::size_t>(1 + u01(rng) * (idx.size() - 1));
            if (cut >= idx.size()) cut = idx.size() - 1;
            x.phases = {std::vector<int>(idx.begin(), idx.begin() + cut),
                        std::vector<int>(idx.begin() + cut, idx.end())};
        } else {
            x.phases = {idx};
        }
        spec.intersections.push_back(x);
    }
    spec.inflow_kind = u01(rng) < 0.5 ? InflowKind::Poisson : InflowKind::Constant;
    spec.finalize();
    return spec;
}

inline QueueState random_state(const NetworkSpec& spec, std::mt19937_64& rng,
                               double hi = 30.0) {
    std::uniform_real_distribution<double> u(0.0, hi);
    QueueState st;
    st.q.resize(spec.size());
    for (auto& v : st.q) v = u(rng);
    return st;
}

}  // namespace bpsim::testutil
