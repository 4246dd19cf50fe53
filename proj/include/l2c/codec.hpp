// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "l2c/entropy.hpp"
#include "l2c/model_io.hpp"
#include "l2c/transform.hpp"

namespace l2c::codec {

// ---------------------------------------------------------------------------
// Static-model entropy coders. Both take the exact frequency table of the
// stream; the decoder rebuilds identical cumulative tables from it.
// A table with a single live symbol needs no payload at all.
// ---------------------------------------------------------------------------

/// Range coder with a 56-bit low/range window, byte-wise renormalization and
/// explicit carry propagation. Requires table.total < 2^32.
std::vector<std::uint8_t> range_encode(std::span<const std::int64_t> symbols, const FrequencyTable& table);

/// Throws CodecError on truncated or over-long payloads and on any state
/// that no encoder could have produced.
std::vector<std::int64_t> range_decode(std::span<const std::uint8_t> bytes, const FrequencyTable& table,
                                       std::size_t n);

/// Canonical Huffman code lengths, one per table slot (0 for absent symbols).
std::vector<std::uint8_t> huffman_code_lengths(const FrequencyTable& table);

std::vector<std::uint8_t> huffman_encode(std::span<const std::int64_t> symbols, const FrequencyTable& table);
std::vector<std::int64_t> huffman_decode(std::span<const std::uint8_t> bytes, const FrequencyTable& table,
                                         std::size_t n);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// L2CM archive
// ---------------------------------------------------------------------------

struct LayerRecord {
    std::string name;
    TransformSpec spec;
    FrequencyTable table;
    std::vector<std::uint8_t> payload;
    std::uint64_t checksum = 0;

    bool operator==(const LayerRecord&) const = default;
};

/// 8-bit symmetric linear quantization of a bias tensor, stored raw.
struct BiasRecord {
    std::string name;
    double scale = 1.0;
    std::vector<std::int8_t> values;

    std::vector<float> dequantized() const;
    bool operator==(const BiasRecord&) const = default;
};

BiasRecord quantize_bias(const std::string& name, std::span<const float> bias);

struct Archive {
    std::string topology;  // compact JSON: ops, distill points, input dims, tensor descriptors
    std::vector<LayerRecord> layers;
    std::vector<BiasRecord> biases;

    bool operator==(const Archive&) const = default;
};

struct LayerSymbols {
    std::string name;
    TransformSpec spec;
    std::vector<std::int64_t> symbols;
};

/// Topology blob stored in the archive header.
std::string archive_topology(const ModelManifest& model);

/// Range-codes every layer. Layers and biases must together cover every
/// tensor of the model exactly once.
Archive build_archive(const ModelManifest& model, std::span<const LayerSymbols> layers,
                      std::span<const BiasRecord> biases);

std::vector<std::uint8_t> pack_archive(const Archive& archive);
/// Structural parse plus per-layer checksum check (FormatError on failure).
Archive unpack_archive(std::span<const std::uint8_t> bytes);

/// Manifest skeleton (topology + tensor descriptors, no data) from the blob.
ModelManifest archive_skeleton(const Archive& archive);

/// Decodes one layer's symbols. CodecError (naming the layer) when the
/// payload and table disagree.
std::vector<std::int64_t> decode_layer(const LayerRecord& layer, std::size_t numel);

/// Full reconstruction: every weight is float(T^-1(symbol)), every bias
/// float(q * scale).
ModelManifest decode_model(const Archive& archive);

struct LayerBytes {
    std::string name;
    std::size_t header = 0;   // name, transform, params, symbol_min, K, lengths, checksum
    std::size_t table = 0;    // 4 * K
    std::size_t payload = 0;
    std::size_t total() const { return header + table + payload; }
};

struct SizeBreakdown {
    std::size_t preamble = 0;  // magic, version, layer count
    std::size_t topology = 0;  // length prefix + blob
    std::vector<LayerBytes> layers;
    std::size_t biases = 0;    // record count + every bias record
    std::size_t total() const;
    std::size_t payload_total() const;
};

SizeBreakdown itemize(const Archive& archive);

} // namespace l2c::codec
