// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/calibrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "l2c/error.hpp"

namespace l2c {

namespace {

constexpr double kMinParam = 1e-12;
// Range coder flush bytes per layer with more than one live symbol.
constexpr std::size_t kFlushBytes = 8;
// Budget fitting: calibration samples used to price a candidate grid, the
// threshold quantiles and step grid (relative to max |w|) that are tried.
constexpr std::size_t kProbeSamples = 128;
constexpr std::array<double, 12> kFitQuantiles{0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
constexpr int kFitSteps = 20;  // max|w| * 2^(1 - j/2), j < kFitSteps
constexpr int kLocalSteps = 8;  // current parameters * 2^(k/4), |k| <= kLocalSteps
constexpr std::size_t kFillRounds = 16;

std::vector<std::size_t> to_size_dims(const std::vector<std::uint32_t>& dims) {
    return {dims.begin(), dims.end()};
}

bool is_threshold(TransformKind kind, std::size_t k) {
    return k == 0 && (kind == TransformKind::prune || kind == TransformKind::joint);
}

// d param / d log param, zero where the threshold clamp is active.
std::array<double, 2> param_chain(const LayerState& layer) {
    std::array<double, 2> c{};
    for (std::size_t k = 0; k < layer.log_params.size(); ++k) {
        const double p = std::exp(layer.log_params[k]);
        c[k] = is_threshold(layer.kind, k) && p < kMinParam ? 0.0 : p;
    }
    return c;
}

ad::NodeId compress_node(ad::Graph& g, ad::NodeId w, ad::NodeId p, const LayerState& layer, bool gw, bool gp) {
    const TransformSpec spec = layer.spec();
    auto cv = apply_compress(layer.weights, spec);
    ad::Tensor out(layer.dims, std::move(cv.values));
    auto backward = [spec, chain = param_chain(layer), w = layer.weights, q = std::move(cv.symbols), gw,
                     gp](const ad::Tensor& og, std::span<ad::Tensor* const> ig) {
        const std::size_t np = spec.param_count();
        std::array<double, 2> dt{}, dti{}, acc{};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = og.data[i];
            if (gi == 0.0) continue;
            const auto qi = static_cast<double>(q[i]);
            const double dq = spec.inverse_dq(qi);
            if (gw) ig[0]->data[i] += gi * dq * spec.forward_dw(w[i]);
            if (gp) {
                spec.forward_dparams(w[i], dt);
                spec.inverse_dparams(qi, dti);
                for (std::size_t k = 0; k < np; ++k) acc[k] += gi * (dti[k] + dq * dt[k]);
            }
        }
        if (gp)
            for (std::size_t k = 0; k < np; ++k) ig[1]->data[k] += acc[k] * chain[k];
    };
    return g.custom({w, p}, std::move(out), std::move(backward));
}

ad::NodeId entropy_node(ad::Graph& g, ad::NodeId w, ad::NodeId p, const LayerState& layer,
                        const CounterConfig& counter, bool gw, bool gp) {
    const TransformSpec spec = layer.spec();
    const auto wbar = t_forward(layer.weights, spec);
    auto cl = relaxed_coding_length(wbar, counter, gw || gp);
    auto backward = [spec, chain = param_chain(layer), w = layer.weights, grad = std::move(cl.grad), gw,
                     gp](const ad::Tensor& og, std::span<ad::Tensor* const> ig) {
        const double g0 = og.data[0];
        if (g0 == 0.0 || grad.empty()) return;
        const std::size_t np = spec.param_count();
        std::array<double, 2> dt{}, acc{};
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double gi = g0 * grad[i];
            if (gi == 0.0) continue;
            if (gw) ig[0]->data[i] += gi * spec.forward_dw(w[i]);
            if (gp) {
                spec.forward_dparams(w[i], dt);
                for (std::size_t k = 0; k < np; ++k) acc[k] += gi * dt[k];
            }
        }
        if (gp)
            for (std::size_t k = 0; k < np; ++k) ig[1]->data[k] += acc[k] * chain[k];
    };
    return g.custom({w, p}, ad::Tensor::scalar(cl.bits), std::move(backward));
}

std::vector<TransformSpec> fit_candidates(const LayerState& layer) {
    const TransformSpec cur = layer.spec();
    std::vector<double> mag(layer.weights.size());
    std::transform(layer.weights.begin(), layer.weights.end(), mag.begin(), [](double v) { return std::abs(v); });
    const double top = *std::max_element(mag.begin(), mag.end());
    std::vector<TransformSpec> out{cur};
    if (top == 0.0) return out;
    std::vector<double> steps;
    for (int j = 0; j < kFitSteps; ++j) steps.push_back(top * std::exp2(1.0 - 0.5 * j));
    std::vector<double> thresholds{cur.threshold()};
    std::sort(mag.begin(), mag.end());
    for (double p : kFitQuantiles) {
        const double pos = p * static_cast<double>(mag.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double e = i + 1 < mag.size() ? mag[i] + (pos - static_cast<double>(i)) * (mag[i + 1] - mag[i]) : mag[i];
        if (e > 0.0) thresholds.push_back(e);
    }
    auto with = [&](std::size_t k, double v) {
        TransformSpec t = cur;
        t.params[k] = v;
        return t;
    };
    // Local moves around the current grid.
    for (int k = -kLocalSteps; k <= kLocalSteps; ++k) {
        if (k == 0) continue;
        const double r = std::exp2(0.25 * k);
        TransformSpec t = cur;
        t.params[0] *= r;
        out.push_back(t);
        if (cur.kind == TransformKind::joint) {
            out.push_back(with(1, cur.params[1] * r));
            t.params[1] *= r;
            out.push_back(t);
        }
    }
    switch (cur.kind) {
    case TransformKind::joint:
        for (double st : steps) {
            for (double e : thresholds) out.push_back(TransformSpec::joint(e, st));
            // e = s/2 is the plain uniform grid
            for (double r : {0.5, 1.0, 1.5}) out.push_back(TransformSpec::joint(r * st, st));
        }
        for (double e : thresholds) out.push_back(with(0, e));
        for (double st : steps) out.push_back(with(1, st));
        break;
    case TransformKind::prune:
        for (double e : thresholds) out.push_back(with(0, e));
        break;
    case TransformKind::linear:
        for (double st : steps) out.push_back(with(0, st));
        break;
    case TransformKind::log:
    case TransformKind::exp:
        for (int j = -8; j <= 12; ++j) out.push_back(with(0, cur.params[0] * std::exp2(0.5 * j)));
        break;
    }
    return out;
}

} // namespace

void CalibConfig::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " must be positive");
    };
    positive(cr_target, "cr_target");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be non-negative");
    if (batch_size == 0) throw ParameterError("batch_size must be positive");
    positive(lr_transform, "lr_transform");
    positive(lr_weights, "lr_weights");
    if (!(budget_margin >= 0.0 && budget_margin < 1.0)) throw ParameterError("budget_margin must lie in [0, 1)");
    counter.validate();
}

TransformSpec LayerState::spec() const {
    TransformSpec s{kind, {0.0, 0.0}};
    if (log_params.size() != s.param_count()) throw StateError("layer '" + name + "': parameter count mismatch");
    for (std::size_t k = 0; k < log_params.size(); ++k) {
        const double p = std::exp(log_params[k]);
        s.params[k] = is_threshold(kind, k) ? std::max(p, kMinParam) : p;
    }
    return s;
}

void LayerState::set_spec(const TransformSpec& spec) {
    kind = spec.kind;
    log_params.clear();
    for (double p : spec.param_span()) log_params.push_back(std::log(std::max(p, kMinParam)));
}

std::vector<std::int64_t> LayerState::symbols() const { return apply_compress(weights, spec()).symbols; }

ad::Tensor References::rows(std::size_t k, std::span<const std::size_t> samples) const {
    const auto& src = outputs.at(k);
    const std::size_t n = src.dims.at(0);
    const std::size_t row = n ? src.numel() / n : 0;
    auto dims = src.dims;
    dims[0] = samples.size();
    std::vector<double> data;
    data.reserve(samples.size() * row);
    for (auto s : samples) {
        if (s >= n) throw ShapeError("reference row " + std::to_string(s) + " out of range");
        data.insert(data.end(), src.data.begin() + static_cast<std::ptrdiff_t>(s * row),
                    src.data.begin() + static_cast<std::ptrdiff_t>((s + 1) * row));
    }
    return {std::move(dims), std::move(data)};
}

References cache_references(const ModelManifest& model, const CalibrationSet& calib,
                            std::span<const std::size_t> distill_points) {
    if (!model.input_dims.empty() && calib.dims != model.input_dims)
        throw ShapeError("calibration sample dims do not match the model input dims");
    constexpr std::size_t kChunk = 256;
    References refs;
    refs.op_indices.assign(distill_points.begin(), distill_points.end());
    refs.op_indices.push_back(model.topology.size() - 1);
    for (std::size_t start = 0; start < calib.count; start += kChunk) {
        const std::size_t n = std::min<std::size_t>(kChunk, calib.count - start);
        const auto flat = std::span<const float>(calib.data).subspan(start * calib.sample_size(),
                                                                      n * calib.sample_size());
        auto outs = ad::evaluate(model, ad::batch_tensor(calib.dims, flat, n), distill_points);
        if (refs.outputs.empty()) {
            refs.outputs.resize(outs.size());
            for (std::size_t k = 0; k < outs.size(); ++k) {
                refs.outputs[k].dims = outs[k].dims;
                refs.outputs[k].dims[0] = 0;
            }
        }
        for (std::size_t k = 0; k < outs.size(); ++k) {
            refs.outputs[k].dims[0] += n;
            refs.outputs[k].data.insert(refs.outputs[k].data.end(), outs[k].data.begin(), outs[k].data.end());
        }
    }
    return refs;
}

Calibrator::Calibrator(const ModelManifest& model, const CalibrationSet& calib, const CalibConfig& cfg)
    : model_(model), calib_(calib), cfg_(cfg), lambda_(cfg.lambda),
      adam_params_(ad::AdamConfig{.lr = cfg.lr_transform}), adam_weights_(ad::AdamConfig{.lr = cfg.lr_weights}) {
    cfg_.validate();
    model_.validate();
    if (calib_.count == 0) throw ParameterError("empty calibration set");
    distill_ = effective_distill_points(model_);
    refs_ = cache_references(model_, calib_, distill_);
    for (const auto& t : model_.tensors) {
        if (t.kind == TensorKind::bias) {
            biases_.push_back(codec::quantize_bias(t.name, t.data));
            continue;
        }
        LayerState layer;
        layer.name = t.name;
        layer.dims = to_size_dims(t.dims);
        layer.weights.assign(t.data.begin(), t.data.end());
        layer.set_spec(init_spec(layer.weights, cfg_.transform, cfg_.init));
        layers_.push_back(std::move(layer));
    }
    original_bits_ = l2c::original_bits(model_);
    order_.resize(calib_.count);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::mt19937_64 rng(cfg_.seed);
    std::shuffle(order_.begin(), order_.end(), rng);
    refresh_budget();
    if (cfg_.fit_initial_grid) project_to_budget();
}

std::size_t Calibrator::container_overhead_bytes() const {
    codec::Archive a;
    a.topology = codec::archive_topology(model_);
    std::size_t flush = 0;
    for (const auto& l : layers_) {
        codec::LayerRecord r;
        r.name = l.name;
        r.spec = l.spec();
        r.table = exact_table(l.symbols());
        if (r.table.distinct() > 1) flush += kFlushBytes;
        a.layers.push_back(std::move(r));
    }
    a.biases = biases_;
    const auto sizes = codec::itemize(a);
    return sizes.total() - sizes.payload_total() + flush;
}

void Calibrator::refresh_budget() {
    double b = (1.0 - cfg_.budget_margin) * static_cast<double>(original_bits_) / cfg_.cr_target;
    if (cfg_.reserve_overhead) b -= 8.0 * static_cast<double>(container_overhead_bytes());
    budget_ = std::max(b, 0.0);
}

double Calibrator::exact_bits() const {
    double bits = 0.0;
    for (const auto& l : layers_) bits += exact_coding_length_bits(exact_table(l.symbols()));
    return bits;
}

std::vector<std::size_t> Calibrator::next_batch() {
    const std::size_t n = std::min<std::size_t>(cfg_.batch_size, order_.size());
    std::vector<std::size_t> batch(n);
    for (auto& b : batch) {
        b = order_[cursor_];
        cursor_ = (cursor_ + 1) % order_.size();
    }
    return batch;
}

LossEval Calibrator::total_loss(std::span<const std::size_t> samples, bool grad_weights, bool grad_params) {
    return evaluate(samples, grad_weights, grad_params, true);
}

double Calibrator::output_mse(std::span<const std::size_t> samples) {
    return evaluate(samples, false, false, false).terms.mse;
}

LossEval Calibrator::evaluate(std::span<const std::size_t> samples, bool grad_weights, bool grad_params,
                              bool with_entropy) {
    ad::Graph g;
    const std::size_t ss = calib_.sample_size();
    std::vector<float> flat;
    flat.reserve(samples.size() * ss);
    for (auto s : samples) {
        const auto row = calib_.sample(s);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    const auto x = g.leaf(ad::batch_tensor(calib_.dims, flat, samples.size()), false);

    std::unordered_map<std::string, ad::NodeId> nodes;
    std::vector<ad::NodeId> wn, pn;
    ad::NodeId bits = g.leaf(ad::Tensor::scalar(0.0), false);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        wn.push_back(g.leaf(ad::Tensor(layer.dims, layer.weights), grad_weights));
        pn.push_back(g.leaf(ad::Tensor({layer.log_params.size()}, layer.log_params), grad_params));
        if (isolate_ < layers_.size() && l != isolate_)
            nodes[layer.name] = wn[l];
        else
            nodes[layer.name] = compress_node(g, wn[l], pn[l], layer, grad_weights, grad_params);
        if (!with_entropy) continue;
        CounterConfig cc = cfg_.counter;
        cc.seed = cfg_.counter.seed + l;
        bits = g.add(bits, entropy_node(g, wn[l], pn[l], layer, cc, grad_weights, grad_params));
    }
    for (const auto& b : biases_) {
        const auto deq = b.dequantized();
        nodes[b.name] = g.leaf(ad::Tensor(to_size_dims(model_.find(b.name)->dims), {deq.begin(), deq.end()}), false);
    }

    const auto fr = ad::forward(g, model_.topology, distill_,
                                [&](const std::string& name) {
                                    auto it = nodes.find(name);
                                    if (it == nodes.end()) throw ShapeError("unknown tensor '" + name + "'");
                                    return it->second;
                                },
                                x);
    ad::NodeId mse = g.leaf(ad::Tensor::scalar(0.0), false);
    for (std::size_t k = 0; k < fr.points.size(); ++k)
        mse = g.add(mse, g.mse(fr.points[k], g.leaf(refs_.rows(k, samples), false)));

    const double total_bits = g.value(bits).data[0];
    const double over = total_bits - budget_;
    const double orig = static_cast<double>(original_bits_);
    const double coef = over > 0.0 ? lambda_ / orig : 0.0;
    const auto reg = g.custom({bits}, ad::Tensor::scalar(over > 0.0 ? coef * over : 0.0),
                              [coef](const ad::Tensor& og, std::span<ad::Tensor* const> ig) {
                                  if (coef != 0.0) ig[0]->data[0] += og.data[0] * coef;
                              });
    const auto total = g.add(mse, reg);

    LossEval ev;
    ev.terms.mse = g.value(mse).data[0];
    ev.terms.bits = total_bits;
    ev.terms.regularizer = g.value(reg).data[0];
    ev.terms.total = g.value(total).data[0];
    if (grad_weights || grad_params) {
        g.backward(total);
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            if (grad_weights) ev.weight_grads.push_back(g.grad(wn[l]).data);
            if (grad_params) ev.param_grads.push_back(g.grad(pn[l]).data);
        }
    }
    return ev;
}

void Calibrator::check_finite(const LossTerms& t, const char* phase, std::uint32_t iter) const {
    if (std::isfinite(t.total)) return;
    throw DivergenceError(std::string(phase) + " phase diverged at iteration " + std::to_string(iter) +
                          " (mse " + std::to_string(t.mse) + ", bits " + std::to_string(t.bits) + ")");
}

void Calibrator::train_transform_phase(std::uint32_t iters) {
    std::vector<std::vector<double>*> params;
    for (auto& l : layers_) params.push_back(&l.log_params);
    for (std::uint32_t it = 0; it < iters; ++it) {
        const auto batch = next_batch();
        auto ev = total_loss(batch, false, true);
        check_finite(ev.terms, "transform", it);
        history_.push_back(ev.terms.total);
        std::vector<const std::vector<double>*> grads;
        for (const auto& g : ev.param_grads) grads.push_back(&g);
        std::vector<std::vector<double>> before;
        std::vector<bool> live;
        for (const auto& l : layers_) {
            before.push_back(l.log_params);
            live.push_back(exact_table(l.symbols()).distinct() > 1);
        }
        adam_params_.step(params, grads);
        // A step that leaves a live layer with a single symbol is undone.
        for (std::size_t l = 0; l < layers_.size(); ++l)
            if (live[l] && exact_table(layers_[l].symbols()).distinct() < 2) layers_[l].log_params = before[l];
    }
}

void Calibrator::finetune_weights_phase(std::uint32_t iters) {
    std::vector<std::vector<double>*> params;
    for (auto& l : layers_) params.push_back(&l.weights);
    for (std::uint32_t it = 0; it < iters; ++it) {
        const auto batch = next_batch();
        auto ev = total_loss(batch, true, false);
        check_finite(ev.terms, "finetune", it);
        history_.push_back(ev.terms.total);
        std::vector<const std::vector<double>*> grads;
        for (const auto& g : ev.weight_grads) grads.push_back(&g);
        adam_weights_.step(params, grads);
    }
}

bool Calibrator::project_to_budget() {
    refresh_budget();
    if (exact_bits() <= budget_) return false;
    fit_grids(true);
    return true;
}

bool Calibrator::spend_slack() {
    refresh_budget();
    if (exact_bits() > budget_) return false;
    return fit_grids(false);
}

bool Calibrator::fit_grids(bool reallocate) {
    const auto probe = probe_samples();

    // Cost of a layer: entropy bits plus its table and flush bytes. The rest of
    // the container does not depend on the grids.
    auto layer_cost = [&](const std::vector<std::int64_t>& q) {
        const auto t = exact_table(q);
        const double bits = exact_coding_length_bits(t);
        if (!cfg_.reserve_overhead) return bits;
        return bits + 8.0 * (4.0 * static_cast<double>(t.size()) +
                             (t.distinct() > 1 ? static_cast<double>(kFlushBytes) : 0.0));
    };
    struct Option {
        TransformSpec spec;
        double cost = 0.0;
        double mse = 0.0;
    };
    std::vector<std::vector<Option>> options(layers_.size());
    double variable = 0.0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto& layer = layers_[l];
        const auto saved = layer.log_params;
        const bool live = exact_table(layer.symbols()).distinct() > 1;
        // Priced with every other layer left uncompressed.
        isolate_ = l;
        for (const auto& spec : fit_candidates(layer)) {
            layer.set_spec(spec);
            const auto q = layer.symbols();
            if (live && exact_table(q).distinct() < 2) continue;
            options[l].push_back({spec, layer_cost(q), output_mse(probe)});
        }
        isolate_ = static_cast<std::size_t>(-1);
        layer.log_params = saved;
        variable += options[l].front().cost;
    }
    // Bits of the container that no candidate changes.
    const double overhead = cfg_.reserve_overhead ? 8.0 * static_cast<double>(container_overhead_bytes()) : 0.0;
    const double fixed = overhead - (variable - exact_bits());
    const double allowance =
        (1.0 - cfg_.budget_margin) * static_cast<double>(original_bits_) / cfg_.cr_target - fixed;

    std::vector<std::size_t> pick(layers_.size(), 0);
    auto choose = [&](double mu) {
        double total = 0.0;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            double best = INFINITY;
            for (std::size_t c = 0; c < options[l].size(); ++c) {
                const double v = options[l][c].mse + mu * options[l][c].cost;
                if (v < best) {
                    best = v;
                    pick[l] = c;
                }
            }
            total += options[l][pick[l]].cost;
        }
        return total;
    };
    double total = variable;
    if (reallocate) {
        double lo = 1e-12, hi = 1e12;
        if (choose(hi) <= allowance) {
            for (int it = 0; it < 100; ++it) {
                const double mid = std::sqrt(lo * hi);
                (choose(mid) <= allowance ? hi : lo) = mid;
            }
        }
        total = choose(hi);
        for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].set_spec(options[l][pick[l]].spec);
    }
    bool changed = reallocate;
    // Spend what is left on the candidates that lower the joint output MSE most.
    double mse = output_mse(probe);
    for (std::size_t round = 0; round < kFillRounds; ++round) {
        std::size_t bl = 0, bc = 0;
        double best = mse;
        for (std::size_t l = 0; l < layers_.size(); ++l)
            for (std::size_t c = 0; c < options[l].size(); ++c) {
                if (c == pick[l] || total - options[l][pick[l]].cost + options[l][c].cost > allowance) continue;
                layers_[l].set_spec(options[l][c].spec);
                const double m = output_mse(probe);
                if (m < best) {
                    best = m;
                    bl = l;
                    bc = c;
                }
                layers_[l].set_spec(options[l][pick[l]].spec);
            }
        if (!(best < mse)) break;
        total += options[bl][bc].cost - options[bl][pick[bl]].cost;
        pick[bl] = bc;
        layers_[bl].set_spec(options[bl][bc].spec);
        mse = best;
        changed = true;
    }
    refresh_budget();
    return changed;
}

std::vector<std::size_t> Calibrator::probe_samples() const {
    std::vector<std::size_t> probe(std::min<std::size_t>(order_.size(), kProbeSamples));
    std::iota(probe.begin(), probe.end(), std::size_t{0});
    return probe;
}

CalibrationResult Calibrator::run() {
    const auto probe = probe_samples();
    std::vector<LayerState> best;
    double best_mse = INFINITY;
    auto keep_best = [&] {
        refresh_budget();
        if (exact_bits() > budget_) return;
        const double m = output_mse(probe);
        if (m < best_mse) {
            best_mse = m;
            best = layers_;
        }
    };
    for (std::uint32_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
        train_transform_phase(cfg_.transform_iters);
        if (cfg_.fit_after_transform) project_to_budget();
        finetune_weights_phase(cfg_.finetune_iters);
        refresh_budget();
        if (exact_bits() > budget_) lambda_ *= 2.0;
        if (cfg_.keep_best) keep_best();
    }
    if (cfg_.epochs > 0 && cfg_.final_projection) projected_ = project_to_budget();
    if (cfg_.keep_best && !best.empty()) {
        const double m = output_mse(probe);
        refresh_budget();
        if (exact_bits() > budget_ || best_mse < m) {
            layers_ = std::move(best);
            refresh_budget();
        }
    }
    if (cfg_.epochs > 0 && cfg_.spend_slack) spend_slack();
    return result();
}

CalibrationResult Calibrator::result() const {
    CalibrationResult r;
    r.layers = layers_;
    for (const auto& l : layers_) r.symbols.push_back({l.name, l.spec(), l.symbols()});
    r.biases = biases_;
    r.achieved_bits = exact_bits();
    r.budget_bits = budget_;
    r.lambda = lambda_;
    r.target_missed = r.achieved_bits > budget_;
    r.projected = projected_;
    r.loss_history = history_;
    return r;
}

CalibrationResult run_schedule(const ModelManifest& model, const CalibrationSet& calib, const CalibConfig& cfg) {
    return Calibrator(model, calib, cfg).run();
}

} // namespace l2c
