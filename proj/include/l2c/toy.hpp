// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "l2c/model_io.hpp"

namespace l2c {

/// Inputs plus integer class labels.
struct LabeledSet {
    CalibrationSet inputs;
    std::vector<int> labels;
};

/// Interleaved 2-D spirals, one arm per class, with Gaussian angle noise.
LabeledSet spiral(std::uint32_t per_class, std::uint32_t classes, std::uint64_t seed, double noise = 0.2);

struct ToyConfig {
    std::uint64_t seed = 0;
    std::uint32_t classes = 3;
    std::uint32_t hidden = 64;
    std::uint32_t train_per_class = 200;
    std::uint32_t eval_per_class = 100;
    std::uint32_t calib_count = 256;
    std::uint32_t min_steps = 3000;
    std::uint32_t max_steps = 8000;
    std::uint32_t batch_size = 64;
    double lr = 1e-2;
    double target_accuracy = 0.95;
};

struct ToyBundle {
    ModelManifest model;
    CalibrationSet calib;
    LabeledSet train;
    LabeledSet eval;
    double train_accuracy = 0.0;
    std::uint32_t steps = 0;
    bool reached_target = false;
};

/// Trains the 2-H-H-C ReLU MLP with softmax cross-entropy and Adam.
ToyBundle make_toy(const ToyConfig& cfg = {});

/// Fraction of samples whose arg-max output equals the label.
double accuracy(const ModelManifest& model, const LabeledSet& set);

/// model.l2rm, calib.l2ca, eval.csv (x0..x{d-1},label)
void save_toy(const ToyBundle& bundle, const std::filesystem::path& dir);
LabeledSet load_labeled_csv(const std::filesystem::path& path);
void save_labeled_csv(const LabeledSet& set, const std::filesystem::path& path);

} // namespace l2c
