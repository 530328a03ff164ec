#include <cn/network.hpp>
#include <cn/schedule.hpp>

#include <gtest/gtest.h>

#include <numeric>
#include <vector>

using namespace cn;

namespace {

struct Value {
    int v = 0;
};
struct Nothing {};
using Net = ComputingNetwork<Value, Nothing>;

// Each node takes the sum of its ring neighbours mod 5.
Net ring(const std::vector<int>& values, const std::vector<std::size_t>& label, UpdateMode mode) {
    Net net(mode);
    const std::size_t n = values.size();
    std::vector<int> placed(n);
    for (std::size_t i = 0; i < n; ++i) placed[label[i]] = values[i];
    for (auto v : placed) net.add_node({v});
    for (std::size_t i = 0; i < n; ++i) net.add_edge({label[i], label[(i + 1) % n]}, false, {});
    return net;
}

Value neighbour_sum(const Net& net, std::size_t i) {
    int s = 0;
    for (auto e : net.incident_edges(i))
        for (auto m : net.edge(e).endpoints)
            if (m != i) s += net.node_payload(m).v;
    return {s % 5};
}

// Minimal instantiation: a counter that adds its input; the slow step doubles an increment.
struct Counter {
    struct Feedback {
        int seen = 0;
    };
    double total = 0;
    double increment = 1;
    bool explode_at_slow = false;

    std::size_t input_arity() const { return 1; }
    std::vector<double> next_input() { return {increment}; }
    std::vector<double> fast_step(std::span<const double> in, Feedback& fb, RngStream& rng) {
        total += in[0] + rng.uniform();
        ++fb.seen;
        return {total};
    }
    void slow_step(const Feedback&, RngStream&) {
        if (explode_at_slow) throw numeric_error("boom");
        increment *= 2;
    }
    double best_value() const { return total; }
    ParameterMap parameters() const { return {{"increment", increment}}; }
};
static_assert(Instantiation<Counter>);

} // namespace

TEST(ComputingNetwork, RejectsEdgesToMissingNodes) {
    Net net;
    net.add_node({});
    net.add_node({});
    EXPECT_THROW(net.add_edge({0, 2}, false, {}), Error);
    EXPECT_THROW(net.add_edge({0}, false, {}), Error);
    EXPECT_NO_THROW(net.add_edge({0, 1}, true, {}));
}

TEST(ComputingNetwork, HyperedgesNeedSupport) {
    Net plain;
    Net hyper(UpdateMode::synchronous, true);
    for (int i = 0; i < 3; ++i) {
        plain.add_node({});
        hyper.add_node({});
    }
    EXPECT_THROW(plain.add_edge({0, 1, 2}, false, {}), Error);
    const auto e = hyper.add_edge({0, 1, 2}, false, {});
    EXPECT_TRUE(hyper.edge(e).is_hyperedge());
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(hyper.incident_edges(i), std::vector<std::size_t>{e});
}

TEST(ComputingNetwork, SynchronousUpdateIgnoresNodeLabelling) {
    const std::vector<int> values{1, 4, 2, 0, 3, 3, 1};
    std::vector<std::size_t> identity(values.size()), shuffled(values.size());
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    shuffled = identity;
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        rng.shuffle(std::span<std::size_t>(shuffled));
        auto a = ring(values, identity, UpdateMode::synchronous);
        auto b = ring(values, shuffled, UpdateMode::synchronous);
        for (int step = 0; step < 5; ++step) {
            a.update_nodes(neighbour_sum, rng);
            b.update_nodes(neighbour_sum, rng);
        }
        for (std::size_t i = 0; i < values.size(); ++i)
            ASSERT_EQ(a.node_payload(i).v, b.node_payload(shuffled[i]).v);
    }
}

TEST(ComputingNetwork, AsynchronousFixedOrderReadsFreshValues) {
    const std::vector<int> values{1, 1, 1};
    std::vector<std::size_t> id{0, 1, 2};
    auto sync = ring(values, id, UpdateMode::synchronous);
    auto async = ring(values, id, UpdateMode::asynchronous_fixed_order);
    RngStream rng(1);
    sync.update_nodes(neighbour_sum, rng);
    async.update_nodes(neighbour_sum, rng);
    EXPECT_EQ(sync.node_payload(1).v, 2);
    // node 0 already became 2, node 1 sees 2 + 1
    EXPECT_EQ(async.node_payload(0).v, 2);
    EXPECT_EQ(async.node_payload(1).v, 3);
}

TEST(ComputingNetwork, RandomOrderIsReproducible) {
    const std::vector<int> values{1, 2, 3, 4, 0, 1, 2, 3};
    std::vector<std::size_t> id(values.size());
    std::iota(id.begin(), id.end(), std::size_t{0});
    auto a = ring(values, id, UpdateMode::asynchronous_random_order);
    auto b = ring(values, id, UpdateMode::asynchronous_random_order);
    RngStream ra(5), rb(5);
    for (int s = 0; s < 10; ++s) {
        a.update_nodes(neighbour_sum, ra);
        b.update_nodes(neighbour_sum, rb);
    }
    for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(a.node_payload(i).v, b.node_payload(i).v);
    EXPECT_EQ(a.node_count(), values.size());
    EXPECT_EQ(a.edge_count(), values.size());
}

TEST(Run, DegenerateScheduleGivesOneEvaluation) {
    Counter c;
    RngStream rng(1);
    const auto records = run(c, ScaleSchedule{1, 0, 0}, rng);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].slow_step, 0u);
    EXPECT_EQ(c.increment, 1.0);
}

TEST(Run, InterleavesFastAndSlowSteps) {
    Counter c;
    RngStream rng(1);
    const auto records = run(c, ScaleSchedule{3, 2, 0}, rng);
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[2].parameter_snapshot.at("increment"), 4.0);
    // 3 fast steps with increment 1, 2 and 4, plus nine uniforms in [0, 1)
    EXPECT_GE(c.total, 21.0);
    EXPECT_LT(c.total, 30.0);
}

TEST(Run, SameSeedSameRecords) {
    Counter a, b;
    RngStream ra(99), rb(99);
    const auto x = run(a, ScaleSchedule{2, 5, 0}, ra);
    const auto y = run(b, ScaleSchedule{2, 5, 0}, rb);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i].best_value, y[i].best_value);
        EXPECT_EQ(x[i].network_output, y[i].network_output);
    }
}

TEST(Run, ErrorsCarryTheirPosition) {
    Counter c;
    c.explode_at_slow = true;
    RngStream rng(1);
    try {
        run(c, ScaleSchedule{1, 3, 0}, rng);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::numeric);
        EXPECT_NE(std::string(e.what()).find("slow step 1"), std::string::npos);
    }
}

TEST(Run, RejectsMetaSchedulesAndZeroFastSteps) {
    Counter c;
    RngStream rng(1);
    EXPECT_THROW(run(c, ScaleSchedule{1, 1, 2}, rng), Error);
    EXPECT_THROW(run(c, ScaleSchedule{0, 1, 0}, rng), Error);
}
