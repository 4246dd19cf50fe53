// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace l2c {

enum class TensorKind : std::uint8_t { dense_weight = 0, conv_weight = 1, bias = 2, other = 3 };

const char* to_string(TensorKind kind);

/// A named, row-major float32 tensor. The unit of compression.
struct WeightTensor {
    std::string name;
    TensorKind kind = TensorKind::other;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t numel() const;
    bool operator==(const WeightTensor&) const = default;
};

enum class OpKind { dense, conv2d, relu, flatten, bias_add };

const char* to_string(OpKind kind);
OpKind op_kind_from_string(const std::string& s);

/// One step of the linear op chain. `tensor` names the parameter for
/// dense/conv2d/bias_add and is empty otherwise.
struct Op {
    OpKind kind = OpKind::relu;
    std::string tensor;

    bool operator==(const Op&) const = default;
};

struct ModelManifest {
    std::vector<WeightTensor> tensors;
    std::vector<Op> topology;
    // Op indices whose outputs join the distillation loss. The final op is
    // always a loss point and need not be listed.
    std::vector<std::size_t> distill_points;
    // Per-sample input dims (batch dim excluded).
    std::vector<std::uint32_t> input_dims;

    const WeightTensor* find(const std::string& name) const;
    WeightTensor* find(const std::string& name);

    /// Throws ShapeError / ParameterError on dangling references, bad
    /// distill points, non-finite data or dims/data mismatches.
    void validate() const;

    bool operator==(const ModelManifest&) const = default;
};

/// Distill points with defaults applied: explicit points if any were given,
/// otherwise every relu output. Sorted, unique, never contains the final op.
std::vector<std::size_t> effective_distill_points(const ModelManifest& model);

struct CalibrationSet {
    std::vector<std::uint32_t> dims;  // per-sample dims
    std::uint32_t count = 0;
    std::vector<float> data;          // count * product(dims)

    std::size_t sample_size() const;
    std::span<const float> sample(std::size_t i) const;
    bool operator==(const CalibrationSet&) const = default;
};

nlohmann::json topology_to_json(const ModelManifest& model);
void topology_from_json(const nlohmann::json& j, ModelManifest& model);

std::vector<std::uint8_t> encode_raw_model(const ModelManifest& model);
ModelManifest decode_raw_model(std::span<const std::uint8_t> bytes);

ModelManifest load_raw_model(const std::filesystem::path& path);
void save_raw_model(const ModelManifest& model, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_calibration(const CalibrationSet& calib);
CalibrationSet decode_calibration(std::span<const std::uint8_t> bytes);

CalibrationSet load_calibration(const std::filesystem::path& path);
void save_calibration(const CalibrationSet& calib, const std::filesystem::path& path);

/// Keep only the first `limit` samples.
CalibrationSet truncate_calibration(const CalibrationSet& calib, std::uint32_t limit);

/// 32 bits per element over every tensor in the model.
std::uint64_t original_bits(const ModelManifest& model);

} // namespace l2c
