// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "l2c/autodiff.hpp"
#include "l2c/codec.hpp"
#include "l2c/entropy.hpp"
#include "l2c/model_io.hpp"
#include "l2c/transform.hpp"

namespace l2c {

struct CalibConfig {
    double cr_target = 8.0;
    double lambda = 1.0;
    std::uint32_t epochs = 5;
    std::uint32_t transform_iters = 300;
    std::uint32_t finetune_iters = 1000;
    std::uint32_t batch_size = 32;
    double lr_transform = 1e-2;
    double lr_weights = 1e-4;
    CounterConfig counter;
    double budget_margin = 0.02;

    TransformKind transform = TransformKind::joint;
    InitConfig init;
    std::uint64_t seed = 0;
    // Take the archive container (headers, tables, biases) out of the
    // entropy budget so that the file-level ratio meets the target.
    bool reserve_overhead = true;
    // Refit layer grids to the budget: on the initial grid,
    // between the transform and fine-tuning phases of every epoch, and once
    // more if training ends over budget.
    bool fit_initial_grid = true;
    bool fit_after_transform = true;
    bool final_projection = true;
    // Return the epoch-end state (within budget) with the lowest output MSE
    // on the probe batch rather than the last one.
    bool keep_best = true;
    // Finally move layers to finer candidate grids while the budget allows
    // and the output MSE drops.
    bool spend_slack = true;

    void validate() const;
};

/// One entropy-coded tensor under optimization.
struct LayerState {
    std::string name;
    std::vector<std::size_t> dims;
    std::vector<double> weights;
    TransformKind kind = TransformKind::joint;
    std::vector<double> log_params;  // log of the spec parameters, declared order

    TransformSpec spec() const;
    void set_spec(const TransformSpec& spec);
    std::vector<std::int64_t> symbols() const;
};

/// Original-model outputs at every loss point (distill points, then the
/// final op), one [N, ...] tensor per point.
struct References {
    std::vector<std::size_t> op_indices;
    std::vector<ad::Tensor> outputs;

    /// Rows `samples` of point k as a batch tensor.
    ad::Tensor rows(std::size_t k, std::span<const std::size_t> samples) const;
};

References cache_references(const ModelManifest& model, const CalibrationSet& calib,
                            std::span<const std::size_t> distill_points);

struct LossTerms {
    double total = 0.0;
    double mse = 0.0;          // summed over loss points
    double bits = 0.0;         // relaxed coding length, all layers
    double regularizer = 0.0;  // lambda * max(0, bits - budget) / original_bits
};

struct LossEval {
    LossTerms terms;
    std::vector<std::vector<double>> weight_grads;  // per layer, empty unless requested
    std::vector<std::vector<double>> param_grads;   // per layer, w.r.t. log params
};

struct CalibrationResult {
    std::vector<LayerState> layers;
    std::vector<codec::LayerSymbols> symbols;
    std::vector<codec::BiasRecord> biases;
    double achieved_bits = 0.0;  // exact coding length of all symbol streams
    double budget_bits = 0.0;
    double lambda = 0.0;
    bool target_missed = false;
    bool projected = false;
    std::vector<double> loss_history;
};

class Calibrator {
public:
    Calibrator(const ModelManifest& model, const CalibrationSet& calib, const CalibConfig& cfg);

    const CalibConfig& config() const { return cfg_; }
    double lambda() const { return lambda_; }
    void set_lambda(double lambda) { lambda_ = lambda; }

    std::vector<LayerState>& layers() { return layers_; }
    const std::vector<LayerState>& layers() const { return layers_; }
    const std::vector<codec::BiasRecord>& biases() const { return biases_; }
    const References& references() const { return refs_; }
    std::uint64_t original_bits() const { return original_bits_; }

    /// Entropy budget the regularizer compares against.
    double budget_bits() const { return budget_; }
    void set_budget_bits(double bits) { budget_ = bits; }
    /// Recomputes the budget from the current symbol tables.
    void refresh_budget();
    /// Archive bytes outside the range-coded payloads for the current state.
    std::size_t container_overhead_bytes() const;

    LossEval total_loss(std::span<const std::size_t> samples, bool grad_weights, bool grad_params);

    void train_transform_phase(std::uint32_t iters);
    void finetune_weights_phase(std::uint32_t iters);

    /// Exact coding length of the current symbol streams.
    double exact_bits() const;

    /// Next batch in the seeded cyclic order.
    std::vector<std::size_t> next_batch();

    /// Budget fit: prices a grid of candidate parameters per layer (exact bits
    /// plus table bytes against output MSE on a probe batch) and picks one per
    /// layer under the budget by Lagrangian search. No-op within budget.
    /// Returns whether anything changed.
    bool project_to_budget();
    /// Within budget: moves layers to finer candidates while the probe
    /// output MSE drops and the budget still holds.
    bool spend_slack();

    CalibrationResult run();
    CalibrationResult result() const;
    const std::vector<double>& loss_history() const { return history_; }

private:
    bool fit_grids(bool reallocate);
    LossEval evaluate(std::span<const std::size_t> samples, bool grad_weights, bool grad_params, bool with_entropy);
    double output_mse(std::span<const std::size_t> samples);
    std::vector<std::size_t> probe_samples() const;
    void check_finite(const LossTerms& t, const char* phase, std::uint32_t iter) const;

    const ModelManifest& model_;
    const CalibrationSet& calib_;
    CalibConfig cfg_;
    std::vector<std::size_t> distill_;
    References refs_;
    std::vector<LayerState> layers_;
    std::vector<codec::BiasRecord> biases_;
    std::uint64_t original_bits_ = 0;
    double budget_ = 0.0;
    double lambda_ = 1.0;
    bool projected_ = false;
    std::size_t isolate_ = static_cast<std::size_t>(-1);  // only this layer is compressed when set

    ad::Adam adam_params_;
    ad::Adam adam_weights_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    std::vector<double> history_;
};

CalibrationResult run_schedule(const ModelManifest& model, const CalibrationSet& calib, const CalibConfig& cfg);

} // namespace l2c
