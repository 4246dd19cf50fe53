// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace l2c {

struct BenchRow {
    std::string distribution;  // e.g. "gaussian(sigma=4)"
    std::size_t count = 0;
    std::size_t distinct = 0;
    double entropy_bytes = 0.0;  // exact coding length / 8
    std::size_t huffman_bytes = 0;
    std::size_t range_bytes = 0;
};

/// Synthetic symbol streams: uniform-256, Gaussian, Laplacian and Zipf at
/// several skews. Each row round-trips through both coders.
std::vector<BenchRow> bench_codec(std::uint64_t seed, std::size_t count = 100000);

std::vector<std::int64_t> zipf_stream(std::size_t count, std::size_t alphabet, double s, std::uint64_t seed);

std::string bench_table(const std::vector<BenchRow>& rows);

} // namespace l2c
