// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <queue>
#include <tuple>

#include "l2c/codec.hpp"
#include "l2c/error.hpp"

namespace l2c::codec {

namespace {

struct Canonical {
    std::vector<std::uint8_t> lengths;     // per table slot
    std::vector<std::uint64_t> codes;      // per table slot
    std::vector<std::size_t> by_code;      // slots sorted by (length, slot)
    std::vector<std::uint64_t> first_code; // per length
    std::vector<std::size_t> first_index;  // per length, into by_code
    std::vector<std::size_t> count;        // per length
};

Canonical canonical(const FrequencyTable& table) {
    Canonical c;
    c.lengths = huffman_code_lengths(table);
    c.codes.assign(c.lengths.size(), 0);
    for (std::size_t i = 0; i < c.lengths.size(); ++i)
        if (c.lengths[i] != 0) c.by_code.push_back(i);
    std::sort(c.by_code.begin(), c.by_code.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(c.lengths[a], a) < std::tie(c.lengths[b], b);
    });
    const std::size_t max_len = c.by_code.empty() ? 0 : c.lengths[c.by_code.back()];
    c.first_code.assign(max_len + 1, 0);
    c.first_index.assign(max_len + 1, 0);
    c.count.assign(max_len + 1, 0);
    std::uint64_t code = 0;
    std::size_t prev_len = 0;
    for (std::size_t k = 0; k < c.by_code.size(); ++k) {
        const auto slot = c.by_code[k];
        const std::size_t len = c.lengths[slot];
        code <<= (len - prev_len);
        if (c.count[len] == 0) {
            c.first_code[len] = code;
            c.first_index[len] = k;
        }
        ++c.count[len];
        c.codes[slot] = code++;
        prev_len = len;
    }
    return c;
}

} // namespace

std::vector<std::uint8_t> huffman_code_lengths(const FrequencyTable& table) {
    const std::size_t k = table.counts.size();
    std::vector<std::uint8_t> lengths(k, 0);
    // (weight, tiebreak id, node)
    using Item = std::tuple<std::uint64_t, std::size_t, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::vector<std::size_t> parent;
    for (std::size_t i = 0; i < k; ++i) {
        parent.push_back(SIZE_MAX);
        if (table.counts[i] != 0) heap.emplace(table.counts[i], i, i);
    }
    if (heap.size() <= 1) return lengths;  // zero or one live symbol: no bits needed
    std::size_t next_id = k;
    while (heap.size() > 1) {
        auto [wa, ia, na] = heap.top();
        heap.pop();
        auto [wb, ib, nb] = heap.top();
        heap.pop();
        const std::size_t node = parent.size();
        parent.push_back(SIZE_MAX);
        parent[na] = node;
        parent[nb] = node;
        heap.emplace(wa + wb, next_id++, node);
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (table.counts[i] == 0) continue;
        std::size_t depth = 0;
        for (auto n = i; parent[n] != SIZE_MAX; n = parent[n]) ++depth;
        if (depth > 63) throw CodecError("huffman code length exceeds 63 bits");
        lengths[i] = static_cast<std::uint8_t>(depth);
    }
    return lengths;
}

std::vector<std::uint8_t> huffman_encode(std::span<const std::int64_t> symbols, const FrequencyTable& table) {
    if (symbols.empty()) return {};
    for (auto s : symbols)
        if (table.count(s) == 0) throw CodecError("symbol " + std::to_string(s) + " is not in the frequency table");
    const auto c = canonical(table);
    std::vector<std::uint8_t> out;
    std::uint8_t acc = 0;
    int filled = 0;
    for (auto s : symbols) {
        const auto slot = static_cast<std::size_t>(s - table.symbol_min);
        const int len = c.lengths[slot];
        const auto code = c.codes[slot];
        for (int b = len - 1; b >= 0; --b) {
            acc = static_cast<std::uint8_t>((acc << 1) | ((code >> b) & 1u));
            if (++filled == 8) {
                out.push_back(acc);
                acc = 0;
                filled = 0;
            }
        }
    }
    if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
    return out;
}

std::vector<std::int64_t> huffman_decode(std::span<const std::uint8_t> bytes, const FrequencyTable& table,
                                         std::size_t n) {
    std::vector<std::int64_t> out;
    if (n == 0) {
        if (!bytes.empty()) throw CodecError("huffman decoder: payload present for an empty stream");
        return out;
    }
    const auto c = canonical(table);
    if (c.by_code.size() == 1 || (c.by_code.empty() && table.distinct() == 1)) {
        if (!bytes.empty()) throw CodecError("huffman decoder: payload present for a single-symbol table");
        const auto it = std::find_if(table.counts.begin(), table.counts.end(), [](auto x) { return x != 0; });
        out.assign(n, table.symbol_min + (it - table.counts.begin()));
        return out;
    }
    if (c.by_code.empty()) throw CodecError("huffman decoder: empty table");
    out.reserve(n);
    const std::size_t max_len = c.first_code.size() - 1;
    std::size_t bit = 0;
    const std::size_t nbits = bytes.size() * 8;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t code = 0;
        std::size_t len = 0;
        for (;;) {
            if (bit >= nbits) throw CodecError("huffman decoder: truncated payload");
            code = (code << 1) | ((bytes[bit / 8] >> (7 - bit % 8)) & 1u);
            ++bit;
            ++len;
            if (len > max_len) throw CodecError("huffman decoder: invalid code");
            if (c.count[len] != 0 && code >= c.first_code[len] && code - c.first_code[len] < c.count[len]) {
                const auto slot = c.by_code[c.first_index[len] + (code - c.first_code[len])];
                out.push_back(table.symbol_min + static_cast<std::int64_t>(slot));
                break;
            }
        }
    }
    if ((bit + 7) / 8 != bytes.size()) throw CodecError("huffman decoder: payload longer than the declared symbol count");
    return out;
}

} // namespace l2c::codec
