// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "l2c/calibrate.hpp"
#include "l2c/codec.hpp"
#include "l2c/model_io.hpp"

namespace l2c {

struct CompressOutcome {
    CalibrationResult calib;
    codec::Archive archive;
    std::vector<std::uint8_t> bytes;
    ModelManifest compressed;  // in-memory model with w_hat weights
    std::uint64_t original_bits = 0;
    std::size_t bias_elements = 0;

    /// original_bits / (8 * archive bytes)
    double file_cr() const;
    /// original_bits / (exact entropy bits + 8 bits per bias element)
    double entropy_cr() const;
    bool target_met() const { return !calib.target_missed; }
};

CompressOutcome compress_model(const ModelManifest& model, const CalibrationSet& calib, const CalibConfig& cfg);

/// Replaces every weight by float(T^-1(symbol)) and every bias by its 8-bit
/// reconstruction.
ModelManifest compressed_manifest(const ModelManifest& model, const CalibrationResult& result);

ModelManifest decompress(std::span<const std::uint8_t> archive_bytes);

struct VerifyReport {
    bool ok = true;
    std::string first_mismatch;  // layer name
    std::string message;
    double max_abs_deviation = 0.0;  // final outputs, w_hat model vs original
    double mse = 0.0;
};

/// Re-encodes every decoded layer and compares against the stored payload
/// and table, then measures output deviation on the calibration set.
/// Structural damage surfaces as FormatError from unpacking.
VerifyReport verify(std::span<const std::uint8_t> archive_bytes, const ModelManifest& model,
                    const CalibrationSet& calib);

struct ReportRow {
    std::string layer;
    std::size_t numel = 0;
    double sparsity = 0.0;
    double entropy_bits_per_weight = 0.0;
    std::size_t distinct_symbols = 0;
    unsigned nominal_bits = 0;
    double layer_cr = 0.0;
};

struct Report {
    std::vector<ReportRow> layers;
    ReportRow total;
    std::size_t file_bytes = 0;
    std::uint64_t original_bits = 0;
};

Report report(std::span<const std::uint8_t> archive_bytes);
std::string report_csv(const Report& r);
nlohmann::json report_json(const Report& r);

/// ceil(log2 k), 0 for k <= 1.
unsigned nominal_bits(std::size_t distinct);

/// Final-output forward of a float32 model over a calibration set.
std::vector<double> forward_outputs(const ModelManifest& model, const CalibrationSet& inputs);

} // namespace l2c
