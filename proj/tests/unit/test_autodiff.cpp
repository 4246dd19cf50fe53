// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "l2c/autodiff.hpp"
#include "l2c/error.hpp"

using namespace l2c;
using ad::Graph;
using ad::Tensor;

namespace {

Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    auto t = Tensor::zeros(std::move(dims));
    for (auto& v : t.data) v = g(rng);
    return t;
}

struct Net {
    ModelManifest model;  // topology only; parameters come from `params`
    std::vector<Tensor> params;
};

double net_loss(const Net& net, const Tensor& x, const Tensor& target, std::vector<Tensor>* grads = nullptr) {
    Graph g;
    std::vector<ad::NodeId> leaves;
    for (const auto& p : net.params) leaves.push_back(g.leaf(p, true));
    const auto in = g.leaf(x, false);
    const auto fr = ad::forward(g, net.model.topology, {}, [&](const std::string& name) {
        for (std::size_t k = 0; k < net.model.tensors.size(); ++k)
            if (net.model.tensors[k].name == name) return leaves[k];
        throw ShapeError(name);
    }, in);
    const auto loss = g.mse(fr.output(), g.leaf(target, false));
    if (grads) {
        g.backward(loss);
        grads->clear();
        for (auto id : leaves) grads->push_back(g.grad(id));
    }
    return g.value(loss).data[0];
}

// Oracle: plain loops, row-major, no library code.
std::vector<double> hand_mlp(const std::vector<std::vector<double>>& W, const std::vector<std::vector<double>>& b,
                             const std::vector<std::size_t>& widths, std::vector<double> x) {
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        std::vector<double> y(widths[l + 1]);
        for (std::size_t o = 0; o < widths[l + 1]; ++o) {
            double acc = 0.0;
            for (std::size_t i = 0; i < widths[l]; ++i) acc += W[l][o * widths[l] + i] * x[i];
            y[o] = acc + b[l][o];
            if (l + 2 < widths.size()) y[o] = std::max(0.0, y[o]);
        }
        x = std::move(y);
    }
    return x;
}

} // namespace

TEST_CASE("forward: trivial cases") {
    SUBCASE("1x1 dense") {
        Graph g;
        const auto y = g.matmul(g.leaf(Tensor({1, 1}, {3.0})), g.leaf(Tensor({1, 1}, {2.0})));
        CHECK(g.value(y).data[0] == 6.0);
    }
    SUBCASE("identity weights and relu keep non-negative input") {
        ModelManifest m;
        m.tensors.push_back({"I", TensorKind::dense_weight, {3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}});
        m.topology = {{OpKind::dense, "I"}, {OpKind::relu, ""}};
        const Tensor x({2, 3}, {0.0, 1.5, 2.0, 3.0, 0.25, 7.0});
        CHECK(ad::evaluate(m, x).back() == x);
    }
}

TEST_CASE("forward matches a hand-rolled MLP oracle within 1e-12") {
    const std::vector<std::size_t> widths{2, 4, 2};
    const auto m = fixtures::mlp({2, 4, 2}, 7);
    std::vector<std::vector<double>> W, b;
    for (std::size_t l = 0; l < 2; ++l) {
        W.emplace_back(m.tensors[2 * l].data.begin(), m.tensors[2 * l].data.end());
        b.emplace_back(m.tensors[2 * l + 1].data.begin(), m.tensors[2 * l + 1].data.end());
    }
    const auto xs = fixtures::randn(10, 3);
    const auto out = ad::evaluate(m, ad::batch_tensor(std::vector<std::uint32_t>{2}, xs, 5)).back();
    for (std::size_t s = 0; s < 5; ++s) {
        const auto ref = hand_mlp(W, b, widths, {xs[2 * s], xs[2 * s + 1]});
        for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(out.data[s * 2 + k] - ref[k]) <= 1e-12);
    }
}

TEST_CASE("conv2d matches a direct 3x3 zero-padded convolution") {
    std::mt19937_64 rng(4);
    const auto x = random_tensor({2, 3, 4, 5}, rng);
    const auto w = random_tensor({2, 3, 3, 3}, rng);
    Graph g;
    const auto y = g.value(g.conv2d(g.leaf(x), g.leaf(w)));
    REQUIRE(y.dims == std::vector<std::size_t>{2, 2, 4, 5});
    auto X = [&](std::size_t b, std::size_t c, long h, long v) {
        if (h < 0 || h >= 4 || v < 0 || v >= 5) return 0.0;
        return x.data[((b * 3 + c) * 4 + static_cast<std::size_t>(h)) * 5 + static_cast<std::size_t>(v)];
    };
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t o = 0; o < 2; ++o)
            for (long h = 0; h < 4; ++h)
                for (long v = 0; v < 5; ++v) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < 3; ++c)
                        for (long i = -1; i <= 1; ++i)
                            for (long j = -1; j <= 1; ++j)
                                acc += X(b, c, h + i, v + j) *
                                       w.data[((o * 3 + c) * 3 + static_cast<std::size_t>(i + 1)) * 3 +
                                              static_cast<std::size_t>(j + 1)];
                    CHECK(std::abs(y.data[((b * 2 + o) * 4 + static_cast<std::size_t>(h)) * 5 +
                                          static_cast<std::size_t>(v)] -
                                   acc) <= 1e-12);
                }
}

TEST_CASE("shape errors name the op index") {
    auto m = fixtures::mlp({3, 4, 2}, 0);
    m.input_dims = {3};
    const Tensor bad({1, 5}, std::vector<double>(5, 1.0));
    try {
        ad::evaluate(m, bad);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).rfind("op 0 (dense)", 0) == 0);
    }
}

TEST_CASE("backward: hand-derived gradients") {
    SUBCASE("mse(x, 0) with x = [1, 2] gives [1, 2]") {
        Graph g;
        const auto x = g.leaf(Tensor({2}, {1.0, 2.0}));
        const auto loss = g.mse(x, g.leaf(Tensor({2}, {0.0, 0.0}), false));
        g.backward(loss);
        CHECK(g.grad(x).data == std::vector<double>{1.0, 2.0});
    }
    SUBCASE("relu blocks negative inputs") {
        Graph g;
        const auto x = g.leaf(Tensor({1, 2}, {-1.0, 2.0}));
        const auto y = g.relu(x);
        g.backward(g.mse(y, g.leaf(Tensor({1, 2}, {0.0, 0.0}), false)));
        CHECK(g.grad(x).data[0] == 0.0);
        CHECK(g.grad(x).data[1] == 2.0);
    }
    SUBCASE("errors") {
        Graph g;
        const auto x = g.leaf(Tensor({2}, {1.0, 2.0}));
        CHECK_THROWS_AS(g.grad(x), StateError);
        CHECK_THROWS_AS(g.backward(42), StateError);
        CHECK_THROWS_AS(g.backward(x), ShapeError);
    }
}

TEST_CASE("ste_round") {
    Graph g;
    const auto x = g.leaf(Tensor({5}, {0.5, -0.5, 3.1, 2.5, -2.4}));
    const auto r = g.ste_round(x);
    CHECK(g.value(r).data == std::vector<double>{1.0, -1.0, 3.0, 3.0, -2.0});
    const auto s = g.custom({r}, Tensor::scalar(0.0), [](const Tensor& og, std::span<Tensor* const> ig) {
        for (auto& v : ig[0]->data) v += og.data[0];
    });
    g.backward(s);
    CHECK(g.grad(x).data == std::vector<double>(5, 1.0));
}

TEST_CASE("STE composite d/ds round(w/s)*s at w=0.26, s=0.1 is 0.4") {
    // f(s) = round(w/s) * s; with STE the chain gives round(w/s) - w/s.
    Graph g;
    const double w = 0.26;
    const auto s = g.leaf(Tensor({1}, {0.1}));
    const auto inv = g.custom({s}, Tensor({1}, {w / 0.1}), [w](const Tensor& og, std::span<Tensor* const> ig) {
        ig[0]->data[0] += og.data[0] * (-w / (0.1 * 0.1));
    });
    const auto q = g.ste_round(inv);
    const auto f = g.custom({q, s}, Tensor({1}, {g.value(q).data[0] * 0.1}),
                            [&g, q, s](const Tensor& og, std::span<Tensor* const> ig) {
                                ig[0]->data[0] += og.data[0] * g.value(s).data[0];
                                ig[1]->data[0] += og.data[0] * g.value(q).data[0];
                            });
    g.backward(f);
    CHECK(g.grad(s).data[0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("random MLP gradients match central differences") {
    std::mt19937_64 rng(11);
    Net net;
    net.model = fixtures::mlp({3, 5, 4, 2}, 0);
    for (const auto& t : net.model.tensors) {
        std::vector<std::size_t> dims(t.dims.begin(), t.dims.end());
        net.params.push_back(random_tensor(dims, rng, 0.7));
    }
    const auto x = random_tensor({6, 3}, rng);
    const auto target = random_tensor({6, 2}, rng);
    std::vector<Tensor> grads;
    net_loss(net, x, target, &grads);

    std::size_t checked = 0, passed = 0;
    const double h = 1e-4;
    for (std::size_t p = 0; p < net.params.size(); ++p) {
        for (std::size_t i = 0; i < net.params[p].numel(); ++i) {
            Net plus = net, minus = net;
            plus.params[p].data[i] += h;
            minus.params[p].data[i] -= h;
            const double fd = (net_loss(plus, x, target) - net_loss(minus, x, target)) / (2 * h);
            const double an = grads[p].data[i];
            ++checked;
            if (std::abs(fd - an) <= 1e-4 * std::max(1e-3, std::abs(fd))) ++passed;
        }
    }
    CHECK(checked > 50);
    CHECK(static_cast<double>(passed) >= 0.99 * static_cast<double>(checked));
}

TEST_CASE("identical inputs give bit-identical values and gradients") {
    std::mt19937_64 rng(2);
    Net net;
    net.model = fixtures::mlp({4, 6, 3}, 1);
    for (const auto& t : net.model.tensors) {
        std::vector<std::size_t> dims(t.dims.begin(), t.dims.end());
        net.params.push_back(random_tensor(dims, rng));
    }
    const auto x = random_tensor({5, 4}, rng);
    const auto t = random_tensor({5, 3}, rng);
    std::vector<Tensor> g1, g2;
    CHECK(net_loss(net, x, t, &g1) == net_loss(net, x, t, &g2));
    CHECK(g1 == g2);
}

TEST_CASE("adam") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        ad::Adam adam;
        std::vector<double> p{1.0, -2.0};
        adam.step(p, {0.0, 0.0});
        CHECK(p == std::vector<double>{1.0, -2.0});
    }
    SUBCASE("first step with g=1, lr=0.1 moves by lr/(1+eps)") {
        ad::Adam adam(ad::AdamConfig{.lr = 0.1});
        std::vector<double> p{0.0};
        adam.step(p, {1.0});
        // m_hat = 1, v_hat = 1
        CHECK(p[0] == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    }
    SUBCASE("two steps follow the textbook recursion") {
        const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ad::Adam adam(ad::AdamConfig{.lr = lr});
        std::vector<double> p{0.3};
        adam.step(p, {2.0});
        adam.step(p, {-1.0});
        double m = 0, v = 0, ref = 0.3;
        const double gs[] = {2.0, -1.0};
        for (int t = 1; t <= 2; ++t) {
            m = b1 * m + (1 - b1) * gs[t - 1];
            v = b2 * v + (1 - b2) * gs[t - 1] * gs[t - 1];
            ref -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
        }
        CHECK(p[0] == doctest::Approx(ref).epsilon(1e-14));
        CHECK(adam.steps() == 2);
    }
}
