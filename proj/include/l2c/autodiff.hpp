// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "l2c/model_io.hpp"

namespace l2c::ad {

/// Dense row-major float64 tensor.
struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> d, std::vector<double> v);
    static Tensor zeros(std::vector<std::size_t> d);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::size_t numel() const { return data.size(); }
    bool operator==(const Tensor&) const = default;
};

enum class NodeOp {
    leaf, matmul, conv2d, bias_add, relu, flatten, mse, scalar_add, scalar_mul, ste_round, custom_backward
};

using NodeId = std::size_t;

/// Reverse-mode tape. Nodes are evaluated eagerly when created, so creation
/// order is a topological order and backward simply walks it in reverse.
class Graph {
public:
    /// Receives the gradient flowing into a custom node and accumulates into
    /// the gradients of its inputs (same order as `inputs`).
    using BackwardFn = std::function<void(const Tensor& out_grad, std::span<Tensor* const> input_grads)>;

    NodeId leaf(Tensor value, bool requires_grad = true);

    /// x:[B,in] . w:[out,in]^T -> [B,out]
    NodeId matmul(NodeId x, NodeId w);
    /// x:[B,C,H,W] conv w:[O,C,3,3], stride 1, zero padding 1 -> [B,O,H,W]
    NodeId conv2d(NodeId x, NodeId w);
    /// x:[B,C,...] + b:[C] broadcast over trailing dims.
    NodeId bias_add(NodeId x, NodeId b);
    NodeId relu(NodeId x);
    /// [B, ...] -> [B, prod(...)]
    NodeId flatten(NodeId x);
    /// Mean over all elements of (a - b)^2.
    NodeId mse(NodeId a, NodeId b);
    /// Elementwise a + b (same dims).
    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId x, double factor);
    /// Round half away from zero forward, identity backward.
    NodeId ste_round(NodeId x);
    NodeId custom(std::vector<NodeId> inputs, Tensor value, BackwardFn backward);

    const Tensor& value(NodeId id) const;
    const Tensor& grad(NodeId id) const;
    NodeOp op(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }

    /// Seeds d(loss)/d(loss) = 1 and propagates to every node.
    /// Throws StateError for unknown ids, ShapeError for non-scalar losses.
    void backward(NodeId loss);

private:
    struct Node {
        NodeOp op = NodeOp::leaf;
        Tensor value;
        Tensor grad;
        std::vector<NodeId> inputs;
        bool requires_grad = false;
        std::function<void(Node&, std::vector<Node>&)> backward;
    };

    NodeId push(NodeOp op, Tensor value, std::vector<NodeId> inputs,
                std::function<void(Node&, std::vector<Node>&)> backward);
    const Node& node(NodeId id) const;

    std::vector<Node> nodes_;
    bool has_grads_ = false;
};

/// Outputs of a model forward pass: one node per loss point, in ascending op
/// order, the last one always being the final output.
struct ForwardResult {
    std::vector<std::size_t> op_indices;
    std::vector<NodeId> points;
    NodeId output() const { return points.back(); }
};

using ParamLookup = std::function<NodeId(const std::string& tensor_name)>;

/// Runs the op chain on `input` (batch-major). Throws ShapeError naming the
/// offending op index when dims do not line up.
ForwardResult forward(Graph& g, const std::vector<Op>& topology, std::span<const std::size_t> distill_points,
                      const ParamLookup& params, NodeId input);

/// Convenience: forward a float32 manifest with frozen parameters.
/// Returns the values at distill points and the final output.
std::vector<Tensor> evaluate(const ModelManifest& model, const Tensor& batch,
                             std::span<const std::size_t> distill_points = {});

Tensor to_tensor(const WeightTensor& t);

/// Batch tensor [n, dims...] from float32 samples.
Tensor batch_tensor(std::span<const std::uint32_t> sample_dims, std::span<const float> flat, std::size_t n);

double round_half_away(double x);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Plain Adam over a fixed list of parameter vectors.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(std::span<std::vector<double>* const> params, std::span<const std::vector<double>* const> grads);
    void step(std::vector<double>& param, const std::vector<double>& grad);

    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

} // namespace l2c::ad
