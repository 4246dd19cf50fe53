// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the unit tests: small seeded models, a scratch
// directory, and a byte builder that writes formats by hand.

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "l2c/model_io.hpp"
#include "l2c/toy.hpp"

namespace fixtures {

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("l2c_unit_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

/// Little-endian byte builder, deliberately independent of the library's
/// own ByteWriter.
struct Bytes {
    std::vector<std::uint8_t> b;

    Bytes& raw(const std::string& s) {
        b.insert(b.end(), s.begin(), s.end());
        return *this;
    }
    template <typename T>
    Bytes& le(T v) {
        std::uint8_t tmp[sizeof(T)];
        std::memcpy(tmp, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T); ++i) b.push_back(tmp[i]);  // host is little-endian
        return *this;
    }
    Bytes& str16(const std::string& s) {
        le<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
        return raw(s);
    }
};

inline std::vector<float> randn(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sd);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(g(rng));
    return v;
}

/// in -> hidden -> ... -> out dense/bias/relu chain with seeded weights.
inline l2c::ModelManifest mlp(const std::vector<std::uint32_t>& widths, std::uint64_t seed) {
    l2c::ModelManifest m;
    m.input_dims = {widths.front()};
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::string base = "fc" + std::to_string(l + 1);
        m.tensors.push_back({base + ".w", l2c::TensorKind::dense_weight, {widths[l + 1], widths[l]},
                             randn(std::size_t{widths[l + 1]} * widths[l], seed + 2 * l, 0.5)});
        m.tensors.push_back({base + ".b", l2c::TensorKind::bias, {widths[l + 1]},
                             randn(widths[l + 1], seed + 2 * l + 1, 0.1)});
        m.topology.push_back({l2c::OpKind::dense, base + ".w"});
        m.topology.push_back({l2c::OpKind::bias_add, base + ".b"});
        if (l + 2 < widths.size()) m.topology.push_back({l2c::OpKind::relu, ""});
    }
    return m;
}

inline l2c::CalibrationSet calib(std::uint32_t dim, std::uint32_t count, std::uint64_t seed) {
    l2c::CalibrationSet c;
    c.dims = {dim};
    c.count = count;
    c.data = randn(std::size_t{dim} * count, seed);
    return c;
}

/// Default toy bundle, trained once per test binary.
inline const l2c::ToyBundle& toy() {
    static const l2c::ToyBundle b = l2c::make_toy();
    return b;
}

} // namespace fixtures
