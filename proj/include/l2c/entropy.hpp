// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace l2c {

/// Relaxation kernels for the soft counter. Each is a symmetric unit-mass
/// density on [-delta, delta]:
///   cosine:   pi/(4 delta) cos(pi u / (2 delta))
///   linear:   1/(2 delta)               (uniform density, ramp CDF)
///   triangle: (delta - |u|) / delta^2
enum class Kernel : std::uint8_t { cosine, linear, triangle };

const char* to_string(Kernel k);
Kernel kernel_from_string(const std::string& s);

struct CounterConfig {
    Kernel kernel = Kernel::cosine;
    // delta = (max - min) / resolution, recomputed per evaluation.
    std::uint32_t resolution = 64;
    // Above this many elements the counter works on a strided subsample.
    std::size_t sample_cap = std::size_t{1} << 14;
    std::uint64_t seed = 0;
    double prob_floor = 1e-12;
    // Propagate gradients into the query points round(w)+-0.5 through a
    // straight-through round. Off gives the exact derivative of the
    // (piecewise smooth) forward value.
    bool query_gradient = true;

    void validate() const;
};

/// Exact symbol counts over a contiguous symbol range.
struct FrequencyTable {
    std::int32_t symbol_min = 0;
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;

    std::size_t size() const { return counts.size(); }
    std::int64_t symbol_max() const { return symbol_min + static_cast<std::int64_t>(counts.size()) - 1; }
    std::uint32_t count(std::int64_t symbol) const;
    /// Number of symbols with a non-zero count.
    std::size_t distinct() const;
    /// Sum matches total, no zero padding at either end.
    void validate() const;

    bool operator==(const FrequencyTable&) const = default;
};

FrequencyTable exact_table(std::span<const std::int64_t> symbols);

/// -sum_q n_q log2(n_q / total): the shortest total code length in bits.
double exact_coding_length_bits(const FrequencyTable& table);

double kernel_cdf(double u, double delta, Kernel kernel);
double kernel_density(double u, double delta, Kernel kernel);

/// Soft counter C(x) = sum_j CDF_K(x - v_j) over a sorted (and possibly
/// subsampled) copy of the values. Binary search bounds the window of
/// elements that lie within delta of a query.
class RelaxedCounter {
public:
    RelaxedCounter(std::span<const double> values, const CounterConfig& cfg);

    double delta() const { return delta_; }
    std::size_t numel() const { return numel_; }
    bool sampled() const { return sample_.size() != numel_; }

    /// Relaxed count of elements below x, scaled to the full population.
    double count(double x) const;
    /// d count / d x.
    double density(double x) const;
    /// [count(q + 0.5) - count(q - 0.5)] / numel, clamped below by prob_floor.
    double prob_mass(std::int64_t q) const;
    /// grad[i] += coef * d prob_mass(q) / d values[i] for every counted element.
    void accumulate_mass_grad(std::int64_t q, double coef, std::span<double> grad) const;

    /// Full sorted order (indices into the constructor input).
    const std::vector<std::size_t>& order() const { return order_; }
    const std::vector<double>& sorted() const { return sorted_; }

private:
    std::pair<std::size_t, std::size_t> window(double x) const;

    CounterConfig cfg_;
    std::size_t numel_ = 0;
    double delta_ = 0.0;
    double scale_ = 1.0;
    std::vector<std::size_t> order_;
    std::vector<double> sorted_;
    std::vector<double> sample_;            // ascending
    std::vector<std::size_t> sample_index_; // original index of each sample element
};

/// Counter query on an already sorted array (throws ParameterError if not).
double relaxed_count(std::span<const double> sorted, double x, const CounterConfig& cfg);
double prob_mass(std::span<const double> values, std::int64_t q, const CounterConfig& cfg);

struct CodingLength {
    double bits = 0.0;
    std::vector<double> grad;  // d bits / d values (empty unless requested)
};

/// -sum_i log2 P(round(v_i)) with P from the soft counter.
CodingLength relaxed_coding_length(std::span<const double> values, const CounterConfig& cfg, bool with_grad);
double relaxed_coding_length_bits(std::span<const double> values, const CounterConfig& cfg);

/// max(0, total_bits - original_bits / cr_target).
double cr_regularizer(double total_bits, std::uint64_t original_bits, double cr_target);

} // namespace l2c
