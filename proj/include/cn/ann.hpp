#pragma once

#include <cn/error.hpp>
#include <cn/network.hpp>
#include <cn/rng.hpp>
#include <cn/schedule.hpp>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cn::ann {

enum class Activation { tanh, logistic, identity };

inline Activation parse_activation(std::string_view s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "logistic") return Activation::logistic;
    if (s == "identity") return Activation::identity;
    throw config_error("unknown activation '" + std::string(s) + "'");
}

inline const char* to_string(Activation a) noexcept {
    switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::logistic: return "logistic";
    case Activation::identity: return "identity";
    }
    return "identity";
}

/// bias + sum_k inputs[k] * weights[k]
inline double weighted_sum(std::span<const double> inputs, std::span<const double> weights,
                           double bias) {
    if (inputs.size() != weights.size())
        throw config_error("weighted_sum: " + std::to_string(inputs.size()) + " inputs but " +
                           std::to_string(weights.size()) + " weights");
    return std::inner_product(inputs.begin(), inputs.end(), weights.begin(), bias);
}

inline double activate(Activation kind, double s) noexcept {
    switch (kind) {
    case Activation::tanh: return std::tanh(s);
    case Activation::logistic: return 1.0 / (1.0 + std::exp(-s));
    case Activation::identity: return s;
    }
    return s;
}

/// dA/dS expressed through the output y = A(S).
inline double activation_slope(Activation kind, double y) noexcept {
    switch (kind) {
    case Activation::tanh: return 1.0 - y * y;
    case Activation::logistic: return y * (1.0 - y);
    case Activation::identity: return 1.0;
    }
    return 1.0;
}

struct NeuronPayload {
    Activation activation = Activation::identity;
    double bias = 0.0;
    double output = 0.0;
    double pre_activation = 0.0;
    std::size_t layer = 0;
};

struct SynapsePayload {
    double weight = 0.0;
};

/// Fully connected consecutive layers. Layer 0 receives the external input;
/// the last layer is the readout.
struct LayeredTopology {
    std::vector<std::size_t> layers;
    Activation hidden = Activation::tanh;
    Activation output = Activation::tanh;

    void validate() const {
        if (layers.size() < 2) throw config_error("ann.layers needs at least an input and an output layer");
        for (auto n : layers)
            if (n == 0) throw config_error("ann.layers entries must be positive");
    }

    std::size_t weight_count() const noexcept {
        std::size_t n = 0;
        for (std::size_t k = 0; k + 1 < layers.size(); ++k) n += layers[k] * layers[k + 1];
        return n;
    }

    std::size_t bias_count() const noexcept {
        return std::accumulate(layers.begin() + 1, layers.end(), std::size_t{0});
    }

    std::size_t parameter_count() const noexcept { return weight_count() + bias_count(); }

    bool operator==(const LayeredTopology&) const = default;
};

struct Sample {
    std::vector<double> input;
    std::vector<double> target;

    bool operator==(const Sample&) const = default;
};

struct Dataset {
    std::size_t input_arity = 0;
    std::size_t target_arity = 0;
    std::vector<Sample> samples;
};

/// Feedforward network on top of ComputingNetwork.
///
/// The flat parameter vector is every edge weight in edge order followed by
/// the bias of every non-input neuron in node order.
class FeedforwardNet {
public:
    using network_type = ComputingNetwork<NeuronPayload, SynapsePayload>;

    explicit FeedforwardNet(LayeredTopology topology) : topology_(std::move(topology)) {
        topology_.validate();
        const auto& layers = topology_.layers;
        for (std::size_t k = 0; k < layers.size(); ++k) {
            layer_start_.push_back(net_.node_count());
            const Activation a = k == 0 ? Activation::identity
                                 : k + 1 == layers.size() ? topology_.output
                                                          : topology_.hidden;
            for (std::size_t i = 0; i < layers[k]; ++i) {
                NeuronPayload p;
                p.activation = a;
                p.layer = k;
                p.output = activate(a, 0.0);
                net_.add_node(p);
            }
        }
        layer_start_.push_back(net_.node_count());
        incoming_.resize(net_.node_count());
        for (std::size_t k = 0; k + 1 < layers.size(); ++k)
            for (std::size_t i = layer_start_[k]; i < layer_start_[k + 1]; ++i)
                for (std::size_t j = layer_start_[k + 1]; j < layer_start_[k + 2]; ++j)
                    incoming_[j].push_back(net_.add_edge({i, j}, true, SynapsePayload{}));
    }

    /// Weights and biases uniform in [-0.5, 0.5].
    static FeedforwardNet random(LayeredTopology topology, RngStream& rng) {
        FeedforwardNet net(std::move(topology));
        std::vector<double> params(net.parameter_count());
        for (auto& p : params) p = rng.uniform(-0.5, 0.5);
        net.set_parameters(params);
        return net;
    }

    const LayeredTopology& topology() const noexcept { return topology_; }
    const network_type& network() const noexcept { return net_; }
    std::size_t input_arity() const noexcept { return topology_.layers.front(); }
    std::size_t output_arity() const noexcept { return topology_.layers.back(); }
    std::size_t parameter_count() const noexcept { return topology_.parameter_count(); }

    std::vector<double> parameters() const {
        std::vector<double> out;
        out.reserve(parameter_count());
        for (const auto& e : net_.edges()) out.push_back(e.payload.weight);
        for (std::size_t i = layer_start_[1]; i < net_.node_count(); ++i)
            out.push_back(net_.node_payload(i).bias);
        return out;
    }

    void set_parameters(std::span<const double> params) {
        if (params.size() != parameter_count())
            throw config_error("parameter vector has " + std::to_string(params.size()) +
                               " entries, network needs " + std::to_string(parameter_count()));
        std::size_t k = 0;
        for (std::size_t e = 0; e < net_.edge_count(); ++e) net_.edge_payload(e).weight = params[k++];
        for (std::size_t i = layer_start_[1]; i < net_.node_count(); ++i)
            net_.node_payload(i).bias = params[k++];
    }

    /// Fast scale: propagate layer by layer, return the readout.
    std::vector<double> forward(std::span<const double> input) {
        if (input.size() != input_arity())
            throw config_error("ann input has " + std::to_string(input.size()) +
                               " values, layer 0 has " + std::to_string(input_arity()));
        for (std::size_t i = 0; i < input.size(); ++i) {
            auto& p = net_.node_payload(i);
            p.pre_activation = input[i];
            p.output = input[i];
        }
        for (std::size_t j = layer_start_[1]; j < net_.node_count(); ++j) {
            auto& p = net_.node_payload(j);
            double s = p.bias;
            for (auto e : incoming_[j])
                s += net_.node_payload(net_.edge(e).endpoints[0]).output * net_.edge_payload(e).weight;
            p.pre_activation = s;
            p.output = activate(p.activation, s);
            if (!std::isfinite(p.output))
                throw numeric_error("ann node " + std::to_string(j) + " produced a non-finite output");
        }
        return readout();
    }

    /// Outputs of the last layer for the current state.
    std::vector<double> readout() const {
        std::vector<double> y;
        y.reserve(output_arity());
        for (std::size_t i = layer_start_[layer_start_.size() - 2]; i < net_.node_count(); ++i)
            y.push_back(net_.node_payload(i).output);
        return y;
    }

    /// Forward pass plus backpropagation of sum_o (t_o - y_o)^2; adds d/dparam into
    /// `gradient` (flat layout) and returns the squared error of this sample.
    double accumulate_gradient(std::span<const double> input, std::span<const double> target,
                               std::span<double> gradient) {
        if (target.size() != output_arity())
            throw config_error("target has " + std::to_string(target.size()) +
                               " values, readout has " + std::to_string(output_arity()));
        if (gradient.size() != parameter_count())
            throw config_error("gradient buffer has the wrong size");
        const auto y = forward(input);

        std::vector<double> delta(net_.node_count(), 0.0);
        double sse = 0.0;
        const std::size_t out0 = layer_start_[layer_start_.size() - 2];
        for (std::size_t o = 0; o < y.size(); ++o) {
            const double err = target[o] - y[o];
            sse += err * err;
            const auto& p = net_.node_payload(out0 + o);
            delta[out0 + o] = -2.0 * err * activation_slope(p.activation, p.output);
        }
        const std::size_t weights = net_.edge_count();
        const std::size_t last = topology_.layers.size() - 1;
        for (std::size_t k = last; k >= 1; --k) {
            for (std::size_t j = layer_start_[k]; j < layer_start_[k + 1]; ++j) {
                if (k != last) {
                    const auto& p = net_.node_payload(j);
                    delta[j] *= activation_slope(p.activation, p.output);
                }
                for (auto e : incoming_[j]) {
                    const std::size_t from = net_.edge(e).endpoints[0];
                    gradient[e] += delta[j] * net_.node_payload(from).output;
                    if (k > 1) delta[from] += net_.edge_payload(e).weight * delta[j];
                }
            }
        }
        for (std::size_t i = layer_start_[1]; i < net_.node_count(); ++i)
            gradient[weights + i - layer_start_[1]] += delta[i];
        return sse;
    }

private:
    LayeredTopology topology_;
    network_type net_;
    std::vector<std::size_t> layer_start_;
    std::vector<std::vector<std::size_t>> incoming_;
};

/// Mean over samples and outputs of (t - y)^2, recomputed through forward().
inline double mean_squared_error(FeedforwardNet& net, std::span<const Sample> batch) {
    if (batch.empty()) return 0.0;
    double sse = 0.0;
    for (const auto& s : batch) {
        if (s.target.size() != net.output_arity())
            throw config_error("target arity does not match the readout");
        const auto y = net.forward(s.input);
        for (std::size_t o = 0; o < y.size(); ++o) sse += (s.target[o] - y[o]) * (s.target[o] - y[o]);
    }
    return sse / static_cast<double>(batch.size() * net.output_arity());
}

/// Gradient of the batch MSE with respect to the flat parameter vector.
inline std::vector<double> mse_gradient(FeedforwardNet& net, std::span<const Sample> batch,
                                        double* mse = nullptr) {
    std::vector<double> grad(net.parameter_count(), 0.0);
    double sse = 0.0;
    for (const auto& s : batch) sse += net.accumulate_gradient(s.input, s.target, grad);
    const double scale = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size() * net.output_arity());
    for (auto& g : grad) {
        g *= scale;
        if (!std::isfinite(g)) throw numeric_error("ann gradient is not finite");
    }
    if (mse) *mse = sse * scale;
    return grad;
}

/// One step of gradient descent on the batch MSE. Returns the MSE before the update.
inline double train_step(FeedforwardNet& net, std::span<const Sample> batch, double learning_rate) {
    if (!(learning_rate >= 0.0)) throw config_error("learning_rate must be >= 0");
    double mse = 0.0;
    const auto grad = mse_gradient(net, batch, &mse);
    auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grad[i];
    net.set_parameters(params);
    return mse;
}

/// Backpropagation as the slow-scale algorithm: each fast step presents the next
/// sample and accumulates its gradient, the slow step descends the averaged gradient.
class BackpropTrainer {
public:
    struct Feedback {
        std::vector<double> gradient;
        double sse = 0.0;
        std::size_t samples = 0;
    };

    BackpropTrainer(FeedforwardNet net, Dataset data, double learning_rate)
        : net_(std::move(net)), data_(std::move(data)), learning_rate_(learning_rate) {
        if (data_.samples.empty()) throw config_error("ann dataset is empty");
        if (data_.input_arity != net_.input_arity() || data_.target_arity != net_.output_arity())
            throw config_error("dataset arities do not match ann.layers");
        if (!(learning_rate_ >= 0.0)) throw config_error("ann.learning_rate must be >= 0");
    }

    std::size_t input_arity() const noexcept { return net_.input_arity(); }

    std::vector<double> next_input() const { return data_.samples[cursor_].input; }

    std::vector<double> fast_step(std::span<const double> input, Feedback& fb, RngStream&) {
        if (fb.gradient.empty()) fb.gradient.assign(net_.parameter_count(), 0.0);
        const auto& target = data_.samples[cursor_].target;
        cursor_ = (cursor_ + 1) % data_.samples.size();
        fb.sse += net_.accumulate_gradient(input, target, fb.gradient);
        ++fb.samples;
        last_mse_ = fb.sse / static_cast<double>(fb.samples * net_.output_arity());
        return net_.readout();
    }

    void slow_step(const Feedback& fb, RngStream&) {
        if (fb.samples == 0) return;
        if (fb.gradient.size() != net_.parameter_count())
            throw config_error("feedback gradient does not match the network");
        const double scale = learning_rate_ / static_cast<double>(fb.samples * net_.output_arity());
        auto params = net_.parameters();
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!std::isfinite(fb.gradient[i])) throw numeric_error("ann gradient is not finite");
            params[i] -= scale * fb.gradient[i];
        }
        net_.set_parameters(params);
    }

    /// MSE observed during the latest pass of fast steps.
    double best_value() const noexcept { return last_mse_; }

    ParameterMap parameters() const { return {{"learning_rate", learning_rate_}}; }

    FeedforwardNet& net() noexcept { return net_; }
    const Dataset& data() const noexcept { return data_; }

private:
    FeedforwardNet net_;
    Dataset data_;
    double learning_rate_;
    std::size_t cursor_ = 0;
    double last_mse_ = 0.0;
};

} // namespace cn::ann
