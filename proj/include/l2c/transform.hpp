// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace l2c {

/// Wire ids are part of the archive format.
enum class TransformKind : std::uint8_t { linear = 0, log = 1, exp = 2, prune = 3, joint = 4 };

const char* to_string(TransformKind kind);
TransformKind transform_kind_from_string(const std::string& s);

/// Fixed survivor step of the pure-pruning transform (it has no learnable step).
inline constexpr double kPruneStep = 1.0 / 256.0;

/// Thresholds below this are reported as "no pruning".
inline constexpr double kNoPruneThreshold = 1e-8;

/// Per-layer transform T and its parameters, in declared order:
///   linear(s), log(s, beta), exp(s, alpha), prune(e), joint(e, s).
///
/// T is odd, continuous and strictly increasing, so T^-1 exists on all of R.
/// Compressed weights are T^-1(round(T(w))) with round half away from zero.
struct TransformSpec {
    TransformKind kind = TransformKind::linear;
    std::array<double, 2> params{1.0, 1.0};

    static TransformSpec linear(double s) { return {TransformKind::linear, {s, 0.0}}; }
    static TransformSpec log(double s, double beta) { return {TransformKind::log, {s, beta}}; }
    static TransformSpec exp(double s, double alpha) { return {TransformKind::exp, {s, alpha}}; }
    static TransformSpec prune(double e) { return {TransformKind::prune, {e, 0.0}}; }
    static TransformSpec joint(double e, double s) { return {TransformKind::joint, {e, s}}; }

    std::size_t param_count() const;
    std::span<const double> param_span() const { return {params.data(), param_count()}; }
    std::span<double> param_span() { return {params.data(), param_count()}; }

    /// Pruning threshold (0 for pure quantizers).
    double threshold() const;
    /// Quantization step.
    double step() const;
    bool prunes() const { return kind == TransformKind::prune || kind == TransformKind::joint; }

    /// Throws ParameterError when an invariant (s > 0, e > 0 for pruning
    /// transforms, shape parameters > 0, all finite) is violated.
    void validate() const;

    // Scalar maps. No validation; call validate() once per array.
    double forward(double w) const;
    double inverse(double q) const;
    double forward_dw(double w) const;
    double inverse_dq(double q) const;
    /// d T(w) / d params[k], written to out[0..param_count()).
    void forward_dparams(double w, std::span<double> out) const;
    void inverse_dparams(double q, std::span<double> out) const;

    bool operator==(const TransformSpec&) const = default;
};

std::vector<double> t_forward(std::span<const double> w, const TransformSpec& spec);
std::vector<double> t_inverse(std::span<const double> q, const TransformSpec& spec);

struct CompressedValues {
    std::vector<double> values;         // w_hat
    std::vector<std::int64_t> symbols;  // round(T(w))
};

CompressedValues apply_compress(std::span<const double> w, const TransformSpec& spec);

/// Symbols back to weights (the decoder side).
std::vector<double> dequantize(std::span<const std::int64_t> symbols, const TransformSpec& spec);

struct InitConfig {
    int base_bits = 8;
    double prune_quantile = 0.05;
};

/// Data-driven starting point: step chosen so that max|T(w)| = 2^(b0-1) - 1;
/// for joint/prune e is the given quantile of |w|. All-zero input falls back
/// to s = 1, e = 0.
TransformSpec init_spec(std::span<const double> w, TransformKind kind, const InitConfig& cfg = {});

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

} // namespace l2c
