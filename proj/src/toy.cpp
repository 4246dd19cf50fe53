// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/toy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "l2c/autodiff.hpp"
#include "l2c/error.hpp"

namespace l2c {

namespace {

constexpr const char* kLayerNames[] = {"fc1", "fc2", "fc3"};

ad::NodeId softmax_cross_entropy(ad::Graph& g, ad::NodeId logits, std::span<const int> labels) {
    const auto& z = g.value(logits);
    const std::size_t b = z.dims.at(0);
    const std::size_t c = z.dims.at(1);
    std::vector<double> probs(z.numel());
    double loss = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const double* row = z.data.data() + i * c;
        const double m = *std::max_element(row, row + c);
        double sum = 0.0;
        for (std::size_t k = 0; k < c; ++k) sum += std::exp(row[k] - m);
        for (std::size_t k = 0; k < c; ++k) probs[i * c + k] = std::exp(row[k] - m) / sum;
        loss -= row[labels[i]] - m - std::log(sum);
    }
    loss /= static_cast<double>(b);
    std::vector<int> lab(labels.begin(), labels.end());
    return g.custom({logits}, ad::Tensor::scalar(loss),
                    [probs = std::move(probs), lab = std::move(lab), b, c](const ad::Tensor& og,
                                                                           std::span<ad::Tensor* const> ig) {
                        const double s = og.data[0] / static_cast<double>(b);
                        for (std::size_t i = 0; i < b; ++i)
                            for (std::size_t k = 0; k < c; ++k) {
                                const double y = static_cast<int>(k) == lab[i] ? 1.0 : 0.0;
                                ig[0]->data[i * c + k] += s * (probs[i * c + k] - y);
                            }
                    });
}

ModelManifest mlp_skeleton(std::uint32_t in, std::uint32_t hidden, std::uint32_t classes) {
    ModelManifest m;
    m.input_dims = {in};
    const std::uint32_t widths[] = {in, hidden, hidden, classes};
    for (std::size_t l = 0; l < 3; ++l) {
        const std::string base = kLayerNames[l];
        m.tensors.push_back({base + ".w", TensorKind::dense_weight, {widths[l + 1], widths[l]}, {}});
        m.tensors.push_back({base + ".b", TensorKind::bias, {widths[l + 1]}, {}});
        m.topology.push_back({OpKind::dense, base + ".w"});
        m.topology.push_back({OpKind::bias_add, base + ".b"});
        if (l < 2) m.topology.push_back({OpKind::relu, ""});
    }
    return m;
}

} // namespace

LabeledSet spiral(std::uint32_t per_class, std::uint32_t classes, std::uint64_t seed, double noise) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    LabeledSet s;
    s.inputs.dims = {2};
    s.inputs.count = per_class * classes;
    for (std::uint32_t j = 0; j < classes; ++j) {
        for (std::uint32_t i = 0; i < per_class; ++i) {
            const double r = per_class > 1 ? static_cast<double>(i) / (per_class - 1) : 0.0;
            const double t = 4.0 * j + 4.0 * r + noise * gauss(rng);
            s.inputs.data.push_back(static_cast<float>(r * std::sin(t)));
            s.inputs.data.push_back(static_cast<float>(r * std::cos(t)));
            s.labels.push_back(static_cast<int>(j));
        }
    }
    return s;
}

double accuracy(const ModelManifest& model, const LabeledSet& set) {
    if (set.inputs.count == 0) return 0.0;
    const auto out = ad::evaluate(model, ad::batch_tensor(set.inputs.dims, set.inputs.data, set.inputs.count));
    const auto& z = out.back();
    const std::size_t c = z.dims.at(1);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < set.inputs.count; ++i) {
        const double* row = z.data.data() + i * c;
        if (std::max_element(row, row + c) - row == set.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(set.inputs.count);
}

ToyBundle make_toy(const ToyConfig& cfg) {
    ToyBundle b;
    b.train = spiral(cfg.train_per_class, cfg.classes, cfg.seed);
    b.eval = spiral(cfg.eval_per_class, cfg.classes, cfg.seed + 1);

    const std::uint32_t per = (cfg.calib_count + cfg.classes - 1) / cfg.classes;
    auto pool = spiral(per, cfg.classes, cfg.seed + 2);
    std::vector<std::size_t> pick(pool.inputs.count);
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    std::mt19937_64 crng(cfg.seed + 3);
    std::shuffle(pick.begin(), pick.end(), crng);
    b.calib.dims = {2};
    b.calib.count = cfg.calib_count;
    for (std::uint32_t i = 0; i < cfg.calib_count; ++i) {
        const auto s = pool.inputs.sample(pick[i]);
        b.calib.data.insert(b.calib.data.end(), s.begin(), s.end());
    }

    b.model = mlp_skeleton(2, cfg.hidden, cfg.classes);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> params;
    for (const auto& t : b.model.tensors) {
        std::vector<double> p(t.numel(), 0.0);
        if (t.kind == TensorKind::dense_weight) {
            const double sd = std::sqrt(2.0 / t.dims[1]);
            for (auto& v : p) v = sd * gauss(rng);
        }
        params.push_back(std::move(p));
    }

    auto store = [&] {
        for (std::size_t k = 0; k < params.size(); ++k)
            b.model.tensors[k].data.assign(params[k].begin(), params[k].end());
    };

    ad::Adam adam(ad::AdamConfig{.lr = cfg.lr});
    std::vector<std::size_t> order(b.train.inputs.count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();
    std::vector<std::vector<double>*> pptr;
    for (auto& p : params) pptr.push_back(&p);

    for (std::uint32_t step = 1; step <= cfg.max_steps; ++step) {
        std::vector<float> flat;
        std::vector<int> labels;
        for (std::uint32_t i = 0; i < cfg.batch_size; ++i) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const auto idx = order[cursor++];
            const auto s = b.train.inputs.sample(idx);
            flat.insert(flat.end(), s.begin(), s.end());
            labels.push_back(b.train.labels[idx]);
        }
        ad::Graph g;
        const auto x = g.leaf(ad::batch_tensor(b.train.inputs.dims, flat, labels.size()), false);
        std::vector<ad::NodeId> leaves;
        for (std::size_t k = 0; k < params.size(); ++k) {
            std::vector<std::size_t> dims(b.model.tensors[k].dims.begin(), b.model.tensors[k].dims.end());
            leaves.push_back(g.leaf(ad::Tensor(std::move(dims), params[k]), true));
        }
        const auto fr = ad::forward(g, b.model.topology, {}, [&](const std::string& name) {
            for (std::size_t k = 0; k < params.size(); ++k)
                if (b.model.tensors[k].name == name) return leaves[k];
            throw ShapeError("unknown tensor '" + name + "'");
        }, x);
        const auto loss = softmax_cross_entropy(g, fr.output(), labels);
        g.backward(loss);
        if (!std::isfinite(g.value(loss).data[0])) break;
        std::vector<std::vector<double>> grads;
        for (auto id : leaves) grads.push_back(g.grad(id).data);
        std::vector<const std::vector<double>*> gptr;
        for (const auto& gr : grads) gptr.push_back(&gr);
        adam.step(pptr, gptr);
        b.steps = step;

        if (step >= cfg.min_steps && (step % 250 == 0 || step == cfg.max_steps)) {
            store();
            b.train_accuracy = accuracy(b.model, b.train);
            if (b.train_accuracy >= cfg.target_accuracy) break;
        }
    }
    store();
    b.train_accuracy = accuracy(b.model, b.train);
    b.reached_target = b.train_accuracy >= cfg.target_accuracy;
    return b;
}

void save_labeled_csv(const LabeledSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const std::size_t d = set.inputs.sample_size();
    for (std::size_t k = 0; k < d; ++k) out << 'x' << k << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < set.inputs.count; ++i) {
        for (float v : set.inputs.sample(i)) {
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
            out << buf << ',';
        }
        out << set.labels[i] << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

LabeledSet load_labeled_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParameterError(path.string() + ": empty file");
    const auto cols = static_cast<std::uint32_t>(std::count(line.begin(), line.end(), ','));
    if (cols == 0 || line.substr(line.rfind(',') + 1) != "label")
        throw ParameterError(path.string() + ": expected header x0,...,label");
    LabeledSet s;
    s.inputs.dims = {cols};
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::uint32_t c = 0;
        try {
            while (std::getline(ls, cell, ',')) {
                if (c < cols) s.inputs.data.push_back(std::stof(cell));
                else s.labels.push_back(std::stoi(cell));
                ++c;
            }
        } catch (const std::exception&) {
            throw ParameterError(path.string() + ": bad number on line " + std::to_string(row));
        }
        if (c != cols + 1) throw ParameterError(path.string() + ": wrong column count on line " + std::to_string(row));
        ++s.inputs.count;
    }
    return s;
}

void save_toy(const ToyBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_raw_model(bundle.model, dir / "model.l2rm");
    save_calibration(bundle.calib, dir / "calib.l2ca");
    save_labeled_csv(bundle.eval, dir / "eval.csv");
}

} // namespace l2c
