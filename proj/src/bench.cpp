// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/bench.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "l2c/codec.hpp"
#include "l2c/entropy.hpp"
#include "l2c/error.hpp"

namespace l2c {

std::vector<std::int64_t> zipf_stream(std::size_t count, std::size_t alphabet, double s, std::uint64_t seed) {
    std::vector<double> w(alphabet);
    for (std::size_t k = 0; k < alphabet; ++k) w[k] = std::pow(static_cast<double>(k + 1), -s);
    std::discrete_distribution<std::int64_t> dist(w.begin(), w.end());
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> out(count);
    for (auto& v : out) v = dist(rng);
    return out;
}

namespace {

BenchRow measure(std::string name, const std::vector<std::int64_t>& symbols) {
    const auto table = exact_table(symbols);
    BenchRow r;
    r.distribution = std::move(name);
    r.count = symbols.size();
    r.distinct = table.distinct();
    r.entropy_bytes = exact_coding_length_bits(table) / 8.0;
    const auto h = codec::huffman_encode(symbols, table);
    const auto rc = codec::range_encode(symbols, table);
    if (codec::huffman_decode(h, table, symbols.size()) != symbols ||
        codec::range_decode(rc, table, symbols.size()) != symbols)
        throw CodecError("bench round trip failed for " + r.distribution);
    r.huffman_bytes = h.size();
    r.range_bytes = rc.size();
    return r;
}

std::string label(const char* dist, const char* param, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(%s=%g)", dist, param, v);
    return buf;
}

} // namespace

std::vector<BenchRow> bench_codec(std::uint64_t seed, std::size_t count) {
    std::vector<BenchRow> rows;
    std::mt19937_64 rng(seed);
    {
        std::uniform_int_distribution<std::int64_t> u(0, 255);
        std::vector<std::int64_t> s(count);
        for (auto& v : s) v = u(rng);
        rows.push_back(measure("uniform(k=256)", s));
    }
    for (double sigma : {0.5, 2.0, 8.0}) {
        std::normal_distribution<double> g(0.0, sigma);
        std::vector<std::int64_t> s(count);
        for (auto& v : s) v = std::llround(g(rng));
        rows.push_back(measure(label("gaussian", "sigma", sigma), s));
    }
    for (double b : {0.25, 1.0, 4.0}) {
        std::exponential_distribution<double> e(1.0 / b);
        std::bernoulli_distribution sign(0.5);
        std::vector<std::int64_t> s(count);
        for (auto& v : s) v = std::llround(sign(rng) ? e(rng) : -e(rng));
        rows.push_back(measure(label("laplacian", "b", b), s));
    }
    for (double z : {1.1, 1.5, 2.0, 3.0})
        rows.push_back(measure(label("zipf64", "s", z), zipf_stream(count, 64, z, rng())));
    return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-22s %8s %8s %14s %14s %12s\n", "distribution", "count", "distinct",
                  "entropy_bytes", "huffman_bytes", "range_bytes");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-22s %8zu %8zu %14.1f %14zu %12zu\n", r.distribution.c_str(), r.count,
                      r.distinct, r.entropy_bytes, r.huffman_bytes, r.range_bytes);
        os << buf;
    }
    return os.str();
}

} // namespace l2c
