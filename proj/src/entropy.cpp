// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "l2c/error.hpp"

namespace l2c {

namespace {

constexpr double kMinDelta = 1e-9;

} // namespace

const char* to_string(Kernel k) {
    switch (k) {
    case Kernel::cosine: return "cosine";
    case Kernel::linear: return "linear";
    case Kernel::triangle: return "triangle";
    }
    return "?";
}

Kernel kernel_from_string(const std::string& s) {
    for (auto k : {Kernel::cosine, Kernel::linear, Kernel::triangle})
        if (s == to_string(k)) return k;
    throw ParameterError("unknown kernel '" + s + "'");
}

void CounterConfig::validate() const {
    if (resolution < 2) throw ParameterError("counter resolution must be >= 2");
    if (sample_cap < 1) throw ParameterError("counter sample cap must be >= 1");
    if (!(prob_floor > 0.0)) throw ParameterError("probability floor must be positive");
}

std::uint32_t FrequencyTable::count(std::int64_t symbol) const {
    if (symbol < symbol_min || symbol > symbol_max()) return 0;
    return counts[static_cast<std::size_t>(symbol - symbol_min)];
}

std::size_t FrequencyTable::distinct() const {
    return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c != 0; }));
}

void FrequencyTable::validate() const {
    if (counts.empty()) throw ParameterError("frequency table is empty");
    if (counts.front() == 0 || counts.back() == 0) throw ParameterError("frequency table has zero padding");
    const auto sum = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (sum != total) throw ParameterError("frequency table counts do not sum to total");
}

FrequencyTable exact_table(std::span<const std::int64_t> symbols) {
    if (symbols.empty()) throw ParameterError("exact_table: empty symbol stream");
    const auto [lo, hi] = std::minmax_element(symbols.begin(), symbols.end());
    if (*lo < std::numeric_limits<std::int32_t>::min() || *hi > std::numeric_limits<std::int32_t>::max())
        throw ParameterError("exact_table: symbol outside 32-bit range");
    const auto span = static_cast<std::uint64_t>(*hi - *lo) + 1;
    if (span > (std::uint64_t{1} << 28)) throw ParameterError("exact_table: symbol range too wide");
    FrequencyTable t;
    t.symbol_min = static_cast<std::int32_t>(*lo);
    t.counts.assign(static_cast<std::size_t>(span), 0);
    for (auto s : symbols) ++t.counts[static_cast<std::size_t>(s - *lo)];
    t.total = symbols.size();
    return t;
}

double exact_coding_length_bits(const FrequencyTable& table) {
    const auto total = static_cast<double>(table.total);
    double bits = 0.0;
    for (auto c : table.counts)
        if (c != 0) bits -= static_cast<double>(c) * std::log2(static_cast<double>(c) / total);
    return bits;
}

double kernel_cdf(double u, double delta, Kernel kernel) {
    if (!(delta > 0.0)) throw ParameterError("kernel relaxation factor must be positive");
    if (u <= -delta) return 0.0;
    if (u >= delta) return 1.0;
    switch (kernel) {
    case Kernel::cosine: return 0.5 * (1.0 + std::sin(std::numbers::pi * u / (2.0 * delta)));
    case Kernel::linear: return (u + delta) / (2.0 * delta);
    case Kernel::triangle: {
        if (u < 0.0) return (u + delta) * (u + delta) / (2.0 * delta * delta);
        return 1.0 - (delta - u) * (delta - u) / (2.0 * delta * delta);
    }
    }
    return 0.0;
}

double kernel_density(double u, double delta, Kernel kernel) {
    if (!(delta > 0.0)) throw ParameterError("kernel relaxation factor must be positive");
    if (u < -delta || u > delta) return 0.0;
    switch (kernel) {
    case Kernel::cosine: return std::numbers::pi / (4.0 * delta) * std::cos(std::numbers::pi * u / (2.0 * delta));
    case Kernel::linear: return 1.0 / (2.0 * delta);
    case Kernel::triangle: return (delta - std::abs(u)) / (delta * delta);
    }
    return 0.0;
}

RelaxedCounter::RelaxedCounter(std::span<const double> values, const CounterConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (values.empty()) throw ParameterError("relaxed counter over an empty tensor");
    numel_ = values.size();
    order_.resize(numel_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    sorted_.resize(numel_);
    for (std::size_t p = 0; p < numel_; ++p) sorted_[p] = values[order_[p]];
    delta_ = std::max((sorted_.back() - sorted_.front()) / cfg_.resolution, kMinDelta);

    if (numel_ > cfg_.sample_cap) {
        // Fixed stride over the sorted array with a seeded phase.
        std::mt19937_64 rng(cfg_.seed);
        const double phase = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double stride = static_cast<double>(numel_) / static_cast<double>(cfg_.sample_cap);
        sample_.resize(cfg_.sample_cap);
        sample_index_.resize(cfg_.sample_cap);
        for (std::size_t k = 0; k < cfg_.sample_cap; ++k) {
            auto p = static_cast<std::size_t>((static_cast<double>(k) + phase) * stride);
            p = std::min(p, numel_ - 1);
            sample_[k] = sorted_[p];
            sample_index_[k] = order_[p];
        }
        scale_ = stride;
    } else {
        sample_ = sorted_;
        sample_index_ = order_;
        scale_ = 1.0;
    }
}

std::pair<std::size_t, std::size_t> RelaxedCounter::window(double x) const {
    const auto lo = std::lower_bound(sample_.begin(), sample_.end(), x - delta_) - sample_.begin();
    const auto hi = std::upper_bound(sample_.begin() + lo, sample_.end(), x + delta_) - sample_.begin();
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

double RelaxedCounter::count(double x) const {
    const auto [lo, hi] = window(x);
    double c = static_cast<double>(lo);
    for (std::size_t j = lo; j < hi; ++j) c += kernel_cdf(x - sample_[j], delta_, cfg_.kernel);
    return c * scale_;
}

double RelaxedCounter::density(double x) const {
    const auto [lo, hi] = window(x);
    double d = 0.0;
    for (std::size_t j = lo; j < hi; ++j) d += kernel_density(x - sample_[j], delta_, cfg_.kernel);
    return d * scale_;
}

double RelaxedCounter::prob_mass(std::int64_t q) const {
    const double qd = static_cast<double>(q);
    const double p = (count(qd + 0.5) - count(qd - 0.5)) / static_cast<double>(numel_);
    return std::max(p, cfg_.prob_floor);
}

void RelaxedCounter::accumulate_mass_grad(std::int64_t q, double coef, std::span<double> grad) const {
    const double qd = static_cast<double>(q);
    const double f = coef * scale_ / static_cast<double>(numel_);
    // d count(x) / d v_j = -K(x - v_j)
    {
        const auto [lo, hi] = window(qd + 0.5);
        for (std::size_t j = lo; j < hi; ++j)
            grad[sample_index_[j]] -= f * kernel_density(qd + 0.5 - sample_[j], delta_, cfg_.kernel);
    }
    {
        const auto [lo, hi] = window(qd - 0.5);
        for (std::size_t j = lo; j < hi; ++j)
            grad[sample_index_[j]] += f * kernel_density(qd - 0.5 - sample_[j], delta_, cfg_.kernel);
    }
}

double relaxed_count(std::span<const double> sorted, double x, const CounterConfig& cfg) {
    if (!std::is_sorted(sorted.begin(), sorted.end()))
        throw ParameterError("relaxed_count: input must be sorted ascending");
    return RelaxedCounter(sorted, cfg).count(x);
}

double prob_mass(std::span<const double> values, std::int64_t q, const CounterConfig& cfg) {
    return RelaxedCounter(values, cfg).prob_mass(q);
}

CodingLength relaxed_coding_length(std::span<const double> values, const CounterConfig& cfg, bool with_grad) {
    CodingLength out;
    if (values.empty()) return out;
    const RelaxedCounter counter(values, cfg);
    const auto& sorted = counter.sorted();
    const auto& order = counter.order();
    if (with_grad) out.grad.assign(values.size(), 0.0);
    const double inv_ln2 = 1.0 / std::numbers::ln2;
    const double numel = static_cast<double>(values.size());

    // Runs of equal symbols in sorted order.
    std::size_t p = 0;
    while (p < sorted.size()) {
        const double qd = std::round(sorted[p]);
        std::size_t end = p;
        while (end < sorted.size() && std::round(sorted[end]) == qd) ++end;
        const auto n_q = static_cast<double>(end - p);
        const auto q = static_cast<std::int64_t>(qd);
        const double raw = (counter.count(qd + 0.5) - counter.count(qd - 0.5)) / numel;
        const double prob = std::max(raw, cfg.prob_floor);
        out.bits -= n_q * std::log2(prob);
        if (with_grad && raw > cfg.prob_floor) {
            counter.accumulate_mass_grad(q, -n_q * inv_ln2 / prob, out.grad);
            if (cfg.query_gradient) {
                const double dp_dq = (counter.density(qd + 0.5) - counter.density(qd - 0.5)) / numel;
                const double g = -inv_ln2 / prob * dp_dq;
                for (std::size_t k = p; k < end; ++k) out.grad[order[k]] += g;
            }
        }
        p = end;
    }
    return out;
}

double relaxed_coding_length_bits(std::span<const double> values, const CounterConfig& cfg) {
    return relaxed_coding_length(values, cfg, false).bits;
}

double cr_regularizer(double total_bits, std::uint64_t original_bits, double cr_target) {
    if (!(cr_target > 0.0)) throw ParameterError("target compression ratio must be positive");
    return std::max(0.0, total_bits - static_cast<double>(original_bits) / cr_target);
}

} // namespace l2c
