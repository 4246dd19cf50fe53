// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "l2c/entropy.hpp"
#include "l2c/error.hpp"

using namespace l2c;

namespace {

// Independent closed forms and an O(n) per query direct sum.
double oracle_cdf(double u, double d, Kernel k) {
    const double pi = std::numbers::pi;
    if (u <= -d) return 0.0;
    if (u >= d) return 1.0;
    switch (k) {
    case Kernel::cosine: return 0.5 + 0.5 * std::sin(pi * u / (2 * d));
    case Kernel::linear: return 0.5 + u / (2 * d);
    case Kernel::triangle: return u < 0 ? 0.5 * (1 + u / d) * (1 + u / d) : 1 - 0.5 * (1 - u / d) * (1 - u / d);
    }
    return NAN;
}

double oracle_count(const std::vector<double>& v, double x, double d, Kernel k) {
    double c = 0.0;
    for (double w : v) c += oracle_cdf(x - w, d, k);
    return c;
}

double oracle_delta(const std::vector<double>& v, std::uint32_t resolution) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return std::max((*hi - *lo) / resolution, 1e-9);
}

double exact_bits_of(const std::vector<double>& v) {
    std::vector<std::int64_t> q(v.size());
    std::transform(v.begin(), v.end(), q.begin(), [](double x) { return static_cast<std::int64_t>(std::round(x)); });
    return exact_coding_length_bits(exact_table(q));
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

CounterConfig with_resolution(std::uint32_t r, Kernel k = Kernel::cosine) {
    CounterConfig c;
    c.resolution = r;
    c.kernel = k;
    return c;
}

} // namespace

TEST_CASE("exact tables") {
    const std::vector<std::int64_t> a{0, 0, 2, 2};
    const auto t = exact_table(a);
    CHECK(t.symbol_min == 0);
    CHECK(t.counts == std::vector<std::uint32_t>{2, 0, 2});
    CHECK(t.total == 4);
    CHECK(t.distinct() == 2);
    CHECK(exact_coding_length_bits(t) == doctest::Approx(4.0).epsilon(1e-15));

    const std::vector<std::int64_t> five{5};
    CHECK(exact_table(five).symbol_min == 5);
    CHECK(exact_coding_length_bits(exact_table(five)) == 0.0);

    const std::vector<std::int64_t> three{0, 0, 1};
    CHECK(exact_coding_length_bits(exact_table(three)) == doctest::Approx(2.754887502163468).epsilon(1e-12));

    CHECK_THROWS_AS(exact_table(std::vector<std::int64_t>{}), ParameterError);

    std::mt19937_64 rng(3);
    std::vector<std::int64_t> u(10000);
    std::vector<std::uint32_t> tally(16, 0);
    for (auto& s : u) {
        s = static_cast<std::int64_t>(rng() % 16);
        ++tally[static_cast<std::size_t>(s)];
    }
    const auto tu = exact_table(u);
    CHECK(tu.counts == tally);
    CHECK(tu.total == 10000);
    tu.validate();
}

TEST_CASE("kernel CDFs") {
    for (auto k : {Kernel::cosine, Kernel::linear, Kernel::triangle}) {
        CHECK(kernel_cdf(0.0, 0.7, k) == doctest::Approx(0.5));
        CHECK(kernel_cdf(0.7, 0.7, k) == 1.0);
        CHECK(kernel_cdf(-0.7, 0.7, k) == 0.0);
        double prev = 0.0;
        for (double u = -1.0; u <= 1.0; u += 1e-3) {
            const double c = kernel_cdf(u, 0.7, k);
            CHECK(c >= prev);
            CHECK(c == doctest::Approx(oracle_cdf(u, 0.7, k)).epsilon(1e-14));
            prev = c;
            // density is the CDF slope
            if (std::abs(std::abs(u) - 0.7) > 1e-4) {
                const double fd = (kernel_cdf(u + 1e-6, 0.7, k) - kernel_cdf(u - 1e-6, 0.7, k)) / 2e-6;
                CHECK(kernel_density(u, 0.7, k) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
            }
        }
        CHECK(kernel_from_string(to_string(k)) == k);
        CHECK_THROWS_AS(kernel_cdf(0.1, 0.0, k), ParameterError);
    }
    CHECK(kernel_cdf(0.5, 1.0, Kernel::cosine) == doctest::Approx(0.8535533905932737).epsilon(1e-12));
    CHECK_THROWS_AS(kernel_from_string("gauss"), ParameterError);
}

TEST_CASE("relaxed count examples") {
    CHECK(relaxed_count(std::vector<double>{0.0, 10.0}, 5.0, with_resolution(64)) == 1.0);
    CHECK(relaxed_count(std::vector<double>{0.0}, 0.0, with_resolution(64)) == 0.5);
    // max - min = 2, resolution 8 -> delta 0.25
    CHECK(relaxed_count(std::vector<double>{-1.0, 0.0, 1.0}, 0.6, with_resolution(8)) == 2.0);
    CHECK_THROWS_AS(relaxed_count(std::vector<double>{1.0, 0.0}, 0.5, with_resolution(8)), ParameterError);
}

TEST_CASE("relaxed count matches the direct sum and is monotone") {
    for (auto k : {Kernel::cosine, Kernel::linear, Kernel::triangle}) {
        auto v = gaussian(500, 11, 3.0);
        const auto cfg = with_resolution(16, k);
        const RelaxedCounter c(v, cfg);
        const double d = oracle_delta(v, 16);
        CHECK(c.delta() == doctest::Approx(d).epsilon(1e-15));
        double prev = -1.0;
        for (double x = -12.0; x <= 12.0; x += 0.0137) {
            const double got = c.count(x);
            CHECK(got == doctest::Approx(oracle_count(v, x, d, k)).epsilon(1e-12).scale(1.0));
            CHECK(got >= prev);
            prev = got;
        }
    }
}

TEST_CASE("far-field exactness") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(50);
        for (auto& x : v) x = static_cast<double>(rng() % 20) + 0.1 * static_cast<double>(rng() % 5);
        const RelaxedCounter c(v, with_resolution(4096));
        const double x = static_cast<double>(rng() % 22) - 0.5;
        bool far = true;
        for (double w : v) far = far && std::abs(x - w) > c.delta();
        if (!far) continue;
        const auto below = std::count_if(v.begin(), v.end(), [&](double w) { return w < x; });
        CHECK(c.count(x) == doctest::Approx(static_cast<double>(below)).epsilon(1e-12));
    }
}

TEST_CASE("probability mass") {
    const std::vector<double> v{0.2, 0.2, 1.4};
    CHECK(prob_mass(v, 0, with_resolution(4096)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(prob_mass(v, 40, with_resolution(4096)) == 1e-12);

    for (auto k : {Kernel::cosine, Kernel::linear, Kernel::triangle})
        for (std::uint32_t res : {4u, 16u, 64u}) {
            const auto w = gaussian(2000, res, 2.5);
            const RelaxedCounter c(w, with_resolution(res, k));
            const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
            const auto pad = static_cast<std::int64_t>(std::ceil(c.delta())) + 2;
            const auto qmin = static_cast<std::int64_t>(std::round(*lo)) - pad;
            const auto qmax = static_cast<std::int64_t>(std::round(*hi)) + pad;
            double sum = 0.0;
            for (auto q = qmin; q <= qmax; ++q) sum += c.count(q + 0.5) - c.count(q - 0.5);
            CHECK(std::abs(sum - (c.count(qmax + 0.5) - c.count(qmin - 0.5))) <= 1e-12 * 2000);
            CHECK(sum == doctest::Approx(2000.0).epsilon(1e-12));
        }
}

TEST_CASE("relaxed coding length") {
    CHECK(relaxed_coding_length_bits(std::vector<double>(64, 3.0), with_resolution(64)) == doctest::Approx(0.0).scale(1.0));
    CHECK(relaxed_coding_length_bits(std::vector<double>{0.2, 0.2, 1.4}, with_resolution(4096)) ==
          doctest::Approx(2.754887502163468).epsilon(1e-9));

    // delta -> 0
    const auto small = gaussian(100, 21, 3.0);
    const double exact_small = exact_bits_of(small);
    CHECK(std::abs(relaxed_coding_length_bits(small, with_resolution(4096)) - exact_small) < 1e-3 * exact_small);

    // resolution 64 on 10^4 Gaussian samples
    const auto big = gaussian(10000, 22, 4.0);
    const double exact_big = exact_bits_of(big);
    CHECK(std::abs(relaxed_coding_length_bits(big, with_resolution(64)) - exact_big) < 0.02 * exact_big);
}

TEST_CASE("coding length gradient matches finite differences") {
    for (auto k : {Kernel::cosine, Kernel::triangle, Kernel::linear}) {
        auto cfg = with_resolution(16, k);
        cfg.query_gradient = false;
        auto v = gaussian(300, 31, 2.0);
        const auto cl = relaxed_coding_length(v, cfg, true);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const double vmin = *lo, vmax = *hi;
        std::size_t checked = 0, good = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double frac = v[i] - std::floor(v[i]);
            if (std::abs(frac - 0.5) < 1e-3 || v[i] == vmin || v[i] == vmax) continue;
            const double h = 1e-6;
            auto p = v, m = v;
            p[i] += h;
            m[i] -= h;
            const double fd = (relaxed_coding_length_bits(p, cfg) - relaxed_coding_length_bits(m, cfg)) / (2 * h);
            ++checked;
            if (std::abs(fd - cl.grad[i]) <= 1e-4 * std::max(std::abs(fd), 1e-3)) ++good;
        }
        CHECK(checked > 250);
        CHECK(static_cast<double>(good) >= 0.99 * static_cast<double>(checked));
    }
}

TEST_CASE("query-side gradient adds the straight-through term") {
    auto cfg = with_resolution(16);
    const auto v = gaussian(200, 41, 2.0);
    cfg.query_gradient = false;
    const auto off = relaxed_coding_length(v, cfg, true);
    cfg.query_gradient = true;
    const auto on = relaxed_coding_length(v, cfg, true);
    const double d = oracle_delta(v, 16);
    auto mass = [&](double x) { return (oracle_count(v, x + 0.5, d, cfg.kernel) - oracle_count(v, x - 0.5, d, cfg.kernel)) / 200.0; };
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double q = std::round(v[i]);
        const double dp = (mass(q + 1e-6) - mass(q - 1e-6)) / 2e-6;
        const double term = -dp / (mass(q) * std::numbers::ln2);
        CHECK(on.grad[i] - off.grad[i] == doctest::Approx(term).epsilon(1e-5).scale(1e-3));
    }
}

TEST_CASE("sampling") {
    const auto v = gaussian(20000, 51, 3.0);
    auto cfg = with_resolution(64);
    auto all = with_resolution(64);
    all.sample_cap = std::size_t{1} << 40;
    cfg.sample_cap = v.size();
    const auto full = relaxed_coding_length(v, all, true);
    const auto capped_at_n = relaxed_coding_length(v, cfg, true);
    CHECK(full.bits == capped_at_n.bits);
    CHECK(full.grad == capped_at_n.grad);

    cfg.sample_cap = 2000;
    const RelaxedCounter sampled(v, cfg);
    CHECK(sampled.sampled());
    const RelaxedCounter exact(v, all);
    for (double x : {-3.0, -1.0, 0.0, 2.0}) CHECK(sampled.count(x) == doctest::Approx(exact.count(x)).epsilon(0.01));
    const double a = relaxed_coding_length_bits(v, cfg);
    CHECK(a == relaxed_coding_length_bits(v, cfg));
    CHECK(a == doctest::Approx(full.bits).epsilon(0.02));
}

TEST_CASE("CR regularizer") {
    CHECK(cr_regularizer(1000.0, 3200, 8.0) == 600.0);
    CHECK(cr_regularizer(1000.0, 3200, 2.0) == 0.0);
    CHECK(cr_regularizer(400.0, 3200, 8.0) == 0.0);
    CHECK_THROWS_AS(cr_regularizer(1.0, 1, 0.0), ParameterError);
}

TEST_CASE("counter configuration is validated") {
    CounterConfig c;
    c.resolution = 1;
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c = {};
    c.sample_cap = 0;
    CHECK_THROWS_AS(RelaxedCounter(std::vector<double>{1.0}, c), ParameterError);
    CHECK_THROWS_AS(RelaxedCounter(std::vector<double>{}, CounterConfig{}), ParameterError);
}
