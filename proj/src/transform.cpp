// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/transform.hpp"

#include <algorithm>
#include <cmath>

#include "l2c/error.hpp"

namespace l2c {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Shared dead-zone form: |w| < e maps linearly onto (-0.5, 0.5), the rest
// is quantized with step s starting at 0.5.
double dz_forward(double w, double e, double s) {
    const double a = std::abs(w);
    if (a < e) return 0.5 / e * w;
    return sgn(w) * ((a - e) / s + 0.5);
}

double dz_inverse(double q, double e, double s) {
    const double a = std::abs(q);
    if (a < 0.5) return 2.0 * e * q;
    return sgn(q) * (e + (a - 0.5) * s);
}

} // namespace

const char* to_string(TransformKind kind) {
    switch (kind) {
    case TransformKind::linear: return "linear";
    case TransformKind::log: return "log";
    case TransformKind::exp: return "exp";
    case TransformKind::prune: return "prune";
    case TransformKind::joint: return "joint";
    }
    return "?";
}

TransformKind transform_kind_from_string(const std::string& s) {
    for (auto k : {TransformKind::linear, TransformKind::log, TransformKind::exp, TransformKind::prune,
                   TransformKind::joint})
        if (s == to_string(k)) return k;
    throw ParameterError("unknown transform '" + s + "'");
}

std::size_t TransformSpec::param_count() const {
    switch (kind) {
    case TransformKind::linear: return 1;
    case TransformKind::prune: return 1;
    default: return 2;
    }
}

double TransformSpec::threshold() const {
    switch (kind) {
    case TransformKind::prune:
    case TransformKind::joint: return params[0];
    default: return 0.0;
    }
}

double TransformSpec::step() const {
    switch (kind) {
    case TransformKind::prune: return kPruneStep;
    case TransformKind::joint: return params[1];
    default: return params[0];
    }
}

void TransformSpec::validate() const {
    for (double p : param_span())
        if (!std::isfinite(p)) throw ParameterError(std::string(to_string(kind)) + ": non-finite parameter");
    if (prunes()) {
        if (threshold() == 0.0)
            throw ParameterError(std::string(to_string(kind)) + ": degenerate threshold e == 0");
        if (threshold() < 0.0) throw ParameterError(std::string(to_string(kind)) + ": negative threshold");
    }
    if (!(step() > 0.0)) throw ParameterError(std::string(to_string(kind)) + ": step must be positive");
    if ((kind == TransformKind::log || kind == TransformKind::exp) && !(params[1] > 0.0))
        throw ParameterError(std::string(to_string(kind)) + ": shape parameter must be positive");
}

double TransformSpec::forward(double w) const {
    switch (kind) {
    case TransformKind::linear: return w / params[0];
    case TransformKind::log: return sgn(w) * std::log1p(std::abs(w) / params[1]) / params[0];
    case TransformKind::exp: return sgn(w) * std::expm1(std::abs(w) / params[1]) / params[0];
    case TransformKind::prune: return dz_forward(w, params[0], kPruneStep);
    case TransformKind::joint: return dz_forward(w, params[0], params[1]);
    }
    return 0.0;
}

double TransformSpec::inverse(double q) const {
    switch (kind) {
    case TransformKind::linear: return q * params[0];
    case TransformKind::log: return sgn(q) * params[1] * std::expm1(std::abs(q) * params[0]);
    case TransformKind::exp: return sgn(q) * params[1] * std::log1p(std::abs(q) * params[0]);
    case TransformKind::prune: return dz_inverse(q, params[0], kPruneStep);
    case TransformKind::joint: return dz_inverse(q, params[0], params[1]);
    }
    return 0.0;
}

double TransformSpec::forward_dw(double w) const {
    const double a = std::abs(w);
    switch (kind) {
    case TransformKind::linear: return 1.0 / params[0];
    case TransformKind::log: return 1.0 / (params[0] * (params[1] + a));
    case TransformKind::exp: return std::exp(a / params[1]) / (params[1] * params[0]);
    case TransformKind::prune: return a < params[0] ? 0.5 / params[0] : 1.0 / kPruneStep;
    case TransformKind::joint: return a < params[0] ? 0.5 / params[0] : 1.0 / params[1];
    }
    return 0.0;
}

double TransformSpec::inverse_dq(double q) const {
    const double a = std::abs(q);
    switch (kind) {
    case TransformKind::linear: return params[0];
    case TransformKind::log: return params[1] * params[0] * std::exp(a * params[0]);
    case TransformKind::exp: return params[1] * params[0] / (1.0 + a * params[0]);
    case TransformKind::prune: return a < 0.5 ? 2.0 * params[0] : kPruneStep;
    case TransformKind::joint: return a < 0.5 ? 2.0 * params[0] : params[1];
    }
    return 0.0;
}

void TransformSpec::forward_dparams(double w, std::span<double> out) const {
    const double a = std::abs(w);
    const double sg = sgn(w);
    switch (kind) {
    case TransformKind::linear:
        out[0] = -w / (params[0] * params[0]);
        break;
    case TransformKind::log: {
        const double s = params[0], beta = params[1];
        out[0] = -forward(w) / s;
        out[1] = -sg * a / (s * beta * (beta + a));
        break;
    }
    case TransformKind::exp: {
        const double s = params[0], alpha = params[1];
        out[0] = -forward(w) / s;
        out[1] = -sg * std::exp(a / alpha) * a / (alpha * alpha * s);
        break;
    }
    case TransformKind::prune:
        out[0] = a < params[0] ? -0.5 * w / (params[0] * params[0]) : -sg / kPruneStep;
        break;
    case TransformKind::joint: {
        const double e = params[0], s = params[1];
        if (a < e) {
            out[0] = -0.5 * w / (e * e);
            out[1] = 0.0;
        } else {
            out[0] = -sg / s;
            out[1] = -sg * (a - e) / (s * s);
        }
        break;
    }
    }
}

void TransformSpec::inverse_dparams(double q, std::span<double> out) const {
    const double a = std::abs(q);
    const double sg = sgn(q);
    switch (kind) {
    case TransformKind::linear:
        out[0] = q;
        break;
    case TransformKind::log: {
        const double s = params[0], beta = params[1];
        out[0] = q * beta * std::exp(a * s);
        out[1] = sg * std::expm1(a * s);
        break;
    }
    case TransformKind::exp: {
        const double s = params[0], alpha = params[1];
        out[0] = q * alpha / (1.0 + a * s);
        out[1] = sg * std::log1p(a * s);
        break;
    }
    case TransformKind::prune:
        out[0] = a < 0.5 ? 2.0 * q : sg;
        break;
    case TransformKind::joint:
        if (a < 0.5) {
            out[0] = 2.0 * q;
            out[1] = 0.0;
        } else {
            out[0] = sg;
            out[1] = sg * (a - 0.5);
        }
        break;
    }
}

std::vector<double> t_forward(std::span<const double> w, const TransformSpec& spec) {
    spec.validate();
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i] = spec.forward(w[i]);
        if (!std::isfinite(out[i]))
            throw ParameterError(std::string(to_string(spec.kind)) + ": transform overflowed at element " +
                                 std::to_string(i));
    }
    return out;
}

std::vector<double> t_inverse(std::span<const double> q, const TransformSpec& spec) {
    spec.validate();
    std::vector<double> out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = spec.inverse(q[i]);
    return out;
}

CompressedValues apply_compress(std::span<const double> w, const TransformSpec& spec) {
    const auto t = t_forward(w, spec);
    CompressedValues out;
    out.symbols.resize(w.size());
    out.values.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double q = std::round(t[i]);
        out.symbols[i] = static_cast<std::int64_t>(q);
        out.values[i] = spec.inverse(q);
    }
    return out;
}

std::vector<double> dequantize(std::span<const std::int64_t> symbols, const TransformSpec& spec) {
    spec.validate();
    std::vector<double> out(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) out[i] = spec.inverse(static_cast<double>(symbols[i]));
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ParameterError("quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

TransformSpec init_spec(std::span<const double> w, TransformKind kind, const InitConfig& cfg) {
    if (w.empty()) throw ParameterError("init_spec: empty tensor");
    std::vector<double> mag(w.size());
    std::transform(w.begin(), w.end(), mag.begin(), [](double v) { return std::abs(v); });
    const double max_abs = *std::max_element(mag.begin(), mag.end());
    const double qmax = std::ldexp(1.0, cfg.base_bits - 1) - 1.0;
    if (max_abs == 0.0) {
        switch (kind) {
        case TransformKind::linear: return TransformSpec::linear(1.0);
        case TransformKind::log: return TransformSpec::log(1.0, 1.0);
        case TransformKind::exp: return TransformSpec::exp(1.0, 1.0);
        case TransformKind::prune: return TransformSpec::prune(0.0);
        case TransformKind::joint: return TransformSpec::joint(0.0, 1.0);
        }
    }
    switch (kind) {
    case TransformKind::linear: return TransformSpec::linear(max_abs / qmax);
    case TransformKind::log: {
        // beta at the mean magnitude concentrates levels where most weights live
        double mean = 0.0;
        for (double m : mag) mean += m;
        mean /= static_cast<double>(mag.size());
        const double beta = std::max(mean, max_abs * 1e-3);
        return TransformSpec::log(std::log1p(max_abs / beta) / qmax, beta);
    }
    case TransformKind::exp: {
        const double alpha = max_abs;
        return TransformSpec::exp(std::expm1(1.0) / qmax, alpha);
    }
    case TransformKind::prune: return TransformSpec::prune(quantile(std::move(mag), cfg.prune_quantile));
    case TransformKind::joint: {
        const double e = quantile(std::move(mag), cfg.prune_quantile);
        const double s = (max_abs - e) / (qmax - 0.5);
        return TransformSpec::joint(e, s > 0.0 ? s : 1.0);
    }
    }
    return TransformSpec::linear(1.0);
}

} // namespace l2c
