#include "bpsim/model.hpp"

#include "bpsim/junction.hpp"
#include "doctest.h"
#include "test_util.hpp"

#include <random>

using namespace bpsim;

TEST_CASE("throughput serves the whole queue up to capacity") {
    CHECK(throughput(3.0, 10.0) == 3.0);
    CHECK(throughput(25.0, 10.0) == 10.0);
    CHECK(throughput(0.0, 10.0) == 0.0);
}

TEST_CASE("step applies service, routing and clamps") {
    JunctionParams p;  // c1=10, c2=20, c3=30, f1=4, f2=8, Q=0
    p.Q = 50.0;
    NetworkSpec spec = make_junction_spec(p);
    JunctionIndex ix = junction_index(spec);

    QueueState st = make_initial_state(spec);
    st.q[ix.q1] = 12.0;
    st.q[ix.q2] = 25.0;

    Activation act;
    act.phase.assign(spec.intersections.size(), 0);
    act.phase[ix.merge_intersection] = ix.phase_q1;
    std::vector<double> inflow(spec.size(), 0.0);
    inflow[ix.q1] = p.f1();
    inflow[ix.q2] = p.f2();

    QueueState next = step(st, act, inflow, spec);
    CHECK(next.t == 1);
    // q1 green: serves min(12, 10) = 10, keeps 2, gains f1.
    CHECK(next.q[ix.q1] == doctest::Approx(12.0 - 10.0 + 4.0));
    // q2 red: only arrivals.
    CHECK(next.q[ix.q2] == doctest::Approx(25.0 + 8.0));
    // downstream is clamped regardless of the 10 vehicles routed into it.
    CHECK(next.q[ix.q3] == 50.0);
}

TEST_CASE("step honors capacity overrides") {
    JunctionParams p;
    NetworkSpec spec = make_junction_spec(p);
    JunctionIndex ix = junction_index(spec);
    QueueState st = make_initial_state(spec);
    st.q[ix.q1] = 12.0;

    Activation act;
    act.phase.assign(spec.intersections.size(), 0);
    act.phase[ix.merge_intersection] = ix.phase_q1;
    std::vector<double> inflow(spec.size(), 0.0);

    std::vector<double> cap(spec.base_capacity);
    cap[ix.q1] = 0.0;  // blocked
    QueueState next = step(st, act, inflow, spec, cap.data());
    CHECK(next.q[ix.q1] == 12.0);
}

TEST_CASE("step validates inputs") {
    JunctionParams p;
    NetworkSpec spec = make_junction_spec(p);
    QueueState st = make_initial_state(spec);
    Activation act;
    act.phase.assign(spec.intersections.size(), 0);
    std::vector<double> inflow(spec.size(), 0.0);

    SUBCASE("negative inflow") {
        inflow[0] = -1.0;
        CHECK_THROWS_AS(step(st, act, inflow, spec), std::invalid_argument);
    }
    SUBCASE("activation arity") {
        act.phase.pop_back();
        CHECK_THROWS_AS(step(st, act, inflow, spec), std::invalid_argument);
    }
    SUBCASE("phase out of range") {
        act.phase[0] = 5;
        CHECK_THROWS_AS(step(st, act, inflow, spec), std::invalid_argument);
    }
}

TEST_CASE("lyapunov value is the weighted quadratic backlog") {
    QueueState st;
    st.q = {3.0, 4.0};
    CHECK(lyapunov_value(st, {1.0, 1.0}) == doctest::Approx(0.5 * (9.0 + 16.0)));
    CHECK(lyapunov_value(st, {2.0, 0.5}) == doctest::Approx(0.5 * (2.0 * 9.0 + 0.5 * 16.0)));
}

TEST_CASE("randomized steps keep queues nonnegative and conserve mass") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int iter = 0; iter < 1000; ++iter) {
        NetworkSpec spec = testutil::random_small_spec(rng);
        QueueState st = testutil::random_state(spec, rng);
        for (int t = 0; t < 5; ++t) {
            Activation act;
            for (const auto& x : spec.intersections)
                act.phase.push_back(static_cast<int>(u01(rng) * x.phases.size()) %
                                    static_cast<int>(x.phases.size()));
            std::vector<double> inflow(spec.size());
            for (auto& v : inflow) v = u01(rng) < 0.3 ? 2.0 * u01(rng) : 0.0;

            auto mask = act.mask(spec);
            double before = 0.0, in = 0.0, out = 0.0;
            for (std::size_t i = 0; i < spec.size(); ++i) {
                before += st.q[i];
                in += inflow[i];
                if (mask[i] && spec.is_sink(i))
                    out += throughput(st.q[i], spec.base_capacity[i]);
            }

            QueueState next = step(st, act, inflow, spec);
            double after = 0.0, low = 0.0;
            for (double v : next.q) {
                after += v;
                low = std::min(low, v);
            }
            REQUIRE(low >= 0.0);
            REQUIRE(after == doctest::Approx(before + in - out).epsilon(1e-6));
            st = next;
        }
    }
}
