#include <cn/ann.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace cn;
using namespace cn::ann;

namespace {

const std::vector<Sample> xor_samples{{{0, 0}, {0}}, {{0, 1}, {1}}, {{1, 0}, {1}}, {{1, 1}, {0}}};

// Central finite differences of the batch MSE, h = 1e-5; independent of backprop.
std::vector<double> numeric_gradient(FeedforwardNet& net, const std::vector<Sample>& batch, double h = 1e-5) {
    auto params = net.parameters();
    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        net.set_parameters(params);
        const double up = mean_squared_error(net, batch);
        params[i] = keep - h;
        net.set_parameters(params);
        const double down = mean_squared_error(net, batch);
        params[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    net.set_parameters(params);
    return g;
}

LayeredTopology random_topology(RngStream& rng) {
    // at most 20 weights (biases excluded), 2 to 4 layers
    while (true) {
        LayeredTopology t;
        const auto depth = 2 + rng.below(3);
        for (std::size_t k = 0; k < depth; ++k) t.layers.push_back(1 + rng.below(4));
        const Activation kinds[] = {Activation::tanh, Activation::logistic, Activation::identity};
        t.hidden = kinds[rng.below(3)];
        t.output = kinds[rng.below(3)];
        if (t.weight_count() <= 20) return t;
    }
}

} // namespace

TEST(WeightedSum, Examples) {
    const std::vector<double> in{1, 2}, w{0.5, 0.25};
    EXPECT_DOUBLE_EQ(weighted_sum(in, w, 0.0), 1.0);
    const std::vector<double> zeros{0, 0};
    EXPECT_DOUBLE_EQ(weighted_sum(in, zeros, 0.0), 0.0);
    const std::vector<double> x{-3.25}, one{1};
    EXPECT_DOUBLE_EQ(weighted_sum(x, one, 0.0), -3.25);
}

TEST(WeightedSum, LengthMismatchIsAConfigError) {
    const std::vector<double> in{1, 2}, w{1};
    try {
        weighted_sum(in, w, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::config);
    }
}

TEST(Activate, Examples) {
    EXPECT_DOUBLE_EQ(activate(Activation::tanh, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(activate(Activation::identity, 0.7), 0.7);
    EXPECT_DOUBLE_EQ(activate(Activation::logistic, 0.0), 0.5);
}

TEST(Activate, MonotoneAndBounded) {
    for (auto kind : {Activation::tanh, Activation::logistic, Activation::identity}) {
        double prev = activate(kind, -30.0);
        for (double s = -30.0; s <= 30.0; s += 0.01) {
            const double y = activate(kind, s);
            ASSERT_GE(y, prev);
            prev = y;
            if (kind == Activation::tanh) {
                ASSERT_LE(std::abs(y), 1.0);
            }
            if (kind == Activation::logistic) {
                ASSERT_TRUE(y >= 0.0 && y <= 1.0);
            }
        }
    }
}

TEST(Forward, ZeroWeightsGiveZeroOutput) {
    FeedforwardNet net({{2, 2, 1}, Activation::tanh, Activation::tanh});
    const std::vector<double> in{1, 1};
    EXPECT_EQ(net.forward(in), std::vector<double>{0.0});
    EXPECT_EQ(net.network().edge_count(), 6u);
    EXPECT_EQ(net.parameter_count(), 9u);
}

TEST(Forward, IdentityChain) {
    FeedforwardNet net({{1, 1}, Activation::identity, Activation::identity});
    net.set_parameters(std::vector<double>{1.0, 0.0});
    const std::vector<double> in{0.5};
    EXPECT_EQ(net.forward(in), std::vector<double>{0.5});
}

TEST(Forward, ZeroWeightNetOutputsActivationOfBias) {
    FeedforwardNet net({{3, 2, 2}, Activation::tanh, Activation::logistic});
    auto p = net.parameters();
    const std::size_t weights = net.topology().weight_count();
    for (std::size_t i = weights; i < p.size(); ++i) p[i] = 0.3 * static_cast<double>(i);
    net.set_parameters(p);
    RngStream rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<double> in{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const auto y = net.forward(in);
        EXPECT_DOUBLE_EQ(y[0], activate(Activation::logistic, p[weights + 2]));
        EXPECT_DOUBLE_EQ(y[1], activate(Activation::logistic, p[weights + 3]));
    }
}

TEST(Forward, ArityMismatchAndDivergence) {
    FeedforwardNet net({{2, 1}, Activation::identity, Activation::identity});
    const std::vector<double> bad{1.0};
    EXPECT_THROW(net.forward(bad), Error);
    net.set_parameters(std::vector<double>{1e308, 1e308, 0.0});
    const std::vector<double> in{10.0, 10.0};
    try {
        net.forward(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::numeric);
        EXPECT_NE(std::string(e.what()).find("node 2"), std::string::npos);
    }
}

TEST(Gradient, LinearNeuronMatchesClosedForm) {
    // y = w x + b, loss (t - y)^2: dL/dw = -2 (t - y) x, dL/db = -2 (t - y)
    FeedforwardNet net({{1, 1}, Activation::identity, Activation::identity});
    const double w = 0.7, b = -0.2, x = 1.5, t = 2.0;
    net.set_parameters(std::vector<double>{w, b});
    const std::vector<Sample> batch{{{x}, {t}}};
    const auto g = mse_gradient(net, batch);
    const double y = w * x + b;
    EXPECT_NEAR(g[0], -2 * (t - y) * x, 1e-15);
    EXPECT_NEAR(g[1], -2 * (t - y), 1e-15);
}

TEST(Gradient, MatchesFiniteDifferencesOnRandomNets) {
    for (std::uint64_t seed = 101; seed <= 130; ++seed) {
        RngStream rng(seed);
        auto topo = random_topology(rng);
        auto net = FeedforwardNet::random(topo, rng);
        std::vector<Sample> batch(3);
        for (auto& s : batch) {
            for (std::size_t i = 0; i < topo.layers.front(); ++i) s.input.push_back(rng.uniform(-1, 1));
            for (std::size_t i = 0; i < topo.layers.back(); ++i) s.target.push_back(rng.uniform(-1, 1));
        }
        const auto analytic = mse_gradient(net, batch);
        const auto numeric = numeric_gradient(net, batch);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
            EXPECT_LE(std::abs(analytic[i] - numeric[i]) / scale, 1e-4) << "seed " << seed << " param " << i;
        }
    }
}

TEST(TrainStep, ZeroLearningRateKeepsWeights) {
    RngStream rng(8);
    auto net = FeedforwardNet::random({{2, 2, 1}}, rng);
    const auto before = net.parameters();
    const double mse = train_step(net, xor_samples, 0.0);
    EXPECT_EQ(net.parameters(), before);
    EXPECT_DOUBLE_EQ(mse, mean_squared_error(net, xor_samples));
}

TEST(TrainStep, NegativeLearningRateRejected) {
    FeedforwardNet net({{2, 1}});
    EXPECT_THROW(train_step(net, xor_samples, -0.1), Error);
}

TEST(TrainStep, SmallStepDoesNotIncreaseMse) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        RngStream rng(seed);
        auto net = FeedforwardNet::random(random_topology(rng), rng);
        std::vector<Sample> batch(4);
        for (auto& s : batch) {
            for (std::size_t i = 0; i < net.input_arity(); ++i) s.input.push_back(rng.uniform(-1, 1));
            for (std::size_t i = 0; i < net.output_arity(); ++i) s.target.push_back(rng.uniform(-1, 1));
        }
        const double before = train_step(net, batch, 1e-3);
        const double after = mean_squared_error(net, batch);
        EXPECT_LE(after - before, 1e-12) << "seed " << seed;
    }
}

TEST(TrainStep, LearnsXor) {
    RngStream rng(7);
    auto net = FeedforwardNet::random({{2, 2, 1}, Activation::tanh, Activation::tanh}, rng);
    for (int epoch = 0; epoch < 5000; ++epoch) train_step(net, xor_samples, 0.5);
    EXPECT_LT(mean_squared_error(net, xor_samples), 0.05);
    const double expected[] = {0, 1, 1, 0};
    for (std::size_t i = 0; i < xor_samples.size(); ++i)
        EXPECT_NEAR(net.forward(xor_samples[i].input)[0], expected[i], 0.2);
}

TEST(BackpropTrainer, RunMatchesManualTrainSteps) {
    RngStream r1(3), r2(3);
    auto a = FeedforwardNet::random({{2, 2, 1}}, r1);
    auto b = FeedforwardNet::random({{2, 2, 1}}, r2);
    BackpropTrainer trainer(std::move(a), Dataset{2, 1, xor_samples}, 0.5);
    const auto records = run(trainer, ScaleSchedule{4, 10, 0}, r1);
    ASSERT_EQ(records.size(), 11u);
    double mse = 0.0;
    for (int i = 0; i < 10; ++i) mse = train_step(b, xor_samples, 0.5);
    (void)mse;
    const auto pa = trainer.net().parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_NEAR(pa[i], pb[i], 1e-12);
    EXPECT_NEAR(records.back().best_value, mean_squared_error(b, xor_samples), 1e-12);
}

TEST(BackpropTrainer, TopologyIsConserved) {
    RngStream rng(2);
    BackpropTrainer trainer(FeedforwardNet::random({{2, 3, 1}}, rng), Dataset{2, 1, xor_samples}, 0.1);
    const auto nodes = trainer.net().network().node_count();
    const auto edges = trainer.net().network().edge_count();
    run(trainer, ScaleSchedule{4, 20, 0}, rng);
    EXPECT_EQ(trainer.net().network().node_count(), nodes);
    EXPECT_EQ(trainer.net().network().edge_count(), edges);
    EXPECT_EQ(edges, 2u * 3u + 3u * 1u);
}
