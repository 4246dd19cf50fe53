// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <limits>

#include "l2c/codec.hpp"
#include "l2c/error.hpp"

namespace l2c::codec {

namespace {

constexpr int kWindowBits = 56;
constexpr std::uint64_t kTop = std::uint64_t{1} << kWindowBits;
constexpr std::uint64_t kMask = kTop - 1;
constexpr std::uint64_t kBottom = std::uint64_t{1} << (kWindowBits - 8);
constexpr int kWindowBytes = kWindowBits / 8;

struct CumulativeTable {
    std::vector<std::uint64_t> cum;  // size K + 1
    std::uint64_t total = 0;

    explicit CumulativeTable(const FrequencyTable& table) : cum(table.counts.size() + 1, 0) {
        for (std::size_t i = 0; i < table.counts.size(); ++i) cum[i + 1] = cum[i] + table.counts[i];
        total = cum.back();
        if (total != table.total) throw CodecError("frequency table total does not match its counts");
        if (total >= (std::uint64_t{1} << 32)) throw CodecError("frequency table total must be below 2^32");
    }
};

class Encoder {
public:
    void encode(std::uint64_t start, std::uint64_t size, std::uint64_t total) {
        const std::uint64_t r = range_ / total;
        low_ += r * start;
        range_ = r * size;
        while (range_ < kBottom) {
            range_ <<= 8;
            shift_low();
        }
    }

    std::vector<std::uint8_t> finish() {
        for (int i = 0; i <= kWindowBytes; ++i) shift_low();
        return std::move(out_);
    }

private:
    void shift_low() {
        if ((low_ & kMask) < (std::uint64_t{0xFF} << (kWindowBits - 8)) || low_ >= kTop) {
            const auto carry = static_cast<std::uint8_t>(low_ >> kWindowBits);
            // The very first cached byte lies above the initial interval and is always zero.
            if (started_) out_.push_back(static_cast<std::uint8_t>(cache_ + carry));
            started_ = true;
            for (; pending_ > 0; --pending_) out_.push_back(static_cast<std::uint8_t>(0xFF + carry));
            cache_ = static_cast<std::uint8_t>((low_ >> (kWindowBits - 8)) & 0xFF);
        } else {
            ++pending_;
        }
        low_ = (low_ & (kBottom - 1)) << 8;
    }

    std::uint64_t low_ = 0;
    std::uint64_t range_ = kMask;
    std::uint8_t cache_ = 0;
    std::uint64_t pending_ = 0;
    bool started_ = false;
    std::vector<std::uint8_t> out_;
};

class Decoder {
public:
    explicit Decoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
        for (int i = 0; i < kWindowBytes; ++i) code_ = (code_ << 8) | next();
    }

    std::uint64_t target(std::uint64_t total) {
        r_ = range_ / total;
        const std::uint64_t v = code_ / r_;
        if (v >= total) throw CodecError("range decoder: corrupt payload (code outside interval)");
        return v;
    }

    void consume(std::uint64_t start, std::uint64_t size) {
        code_ -= r_ * start;
        range_ = r_ * size;
        while (range_ < kBottom) {
            code_ = ((code_ << 8) | next()) & kMask;
            range_ <<= 8;
        }
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    std::uint64_t next() {
        if (pos_ >= bytes_.size()) throw CodecError("range decoder: truncated payload");
        return bytes_[pos_++];
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::uint64_t code_ = 0;
    std::uint64_t range_ = kMask;
    std::uint64_t r_ = 1;
};

} // namespace

std::vector<std::uint8_t> range_encode(std::span<const std::int64_t> symbols, const FrequencyTable& table) {
    if (symbols.empty()) return {};
    const CumulativeTable ct(table);
    for (auto s : symbols)
        if (table.count(s) == 0) throw CodecError("symbol " + std::to_string(s) + " is not in the frequency table");
    if (table.distinct() == 1) return {};
    Encoder enc;
    for (auto s : symbols) {
        const auto k = static_cast<std::size_t>(s - table.symbol_min);
        enc.encode(ct.cum[k], ct.cum[k + 1] - ct.cum[k], ct.total);
    }
    return enc.finish();
}

std::vector<std::int64_t> range_decode(std::span<const std::uint8_t> bytes, const FrequencyTable& table,
                                       std::size_t n) {
    std::vector<std::int64_t> out;
    if (n == 0) {
        if (!bytes.empty()) throw CodecError("range decoder: payload present for an empty stream");
        return out;
    }
    const CumulativeTable ct(table);
    if (table.distinct() == 1) {
        if (!bytes.empty()) throw CodecError("range decoder: payload present for a single-symbol table");
        const auto it = std::find_if(table.counts.begin(), table.counts.end(), [](auto c) { return c != 0; });
        out.assign(n, table.symbol_min + (it - table.counts.begin()));
        return out;
    }
    out.reserve(n);
    Decoder dec(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = dec.target(ct.total);
        // last k with cum[k] <= v
        const auto k = static_cast<std::size_t>(std::upper_bound(ct.cum.begin(), ct.cum.end(), v) - ct.cum.begin()) - 1;
        dec.consume(ct.cum[k], ct.cum[k + 1] - ct.cum[k]);
        out.push_back(table.symbol_min + static_cast<std::int64_t>(k));
    }
    if (!dec.exhausted()) throw CodecError("range decoder: payload longer than the declared symbol count");
    return out;
}

} // namespace l2c::codec
