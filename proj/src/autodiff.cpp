// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "l2c/error.hpp"

namespace l2c::ad {

namespace {

std::string dims_str(const std::vector<std::size_t>& d) {
    std::string s = "[";
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
    return s + "]";
}

std::size_t product(const std::vector<std::size_t>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t{1}, std::multiplies<>());
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> d, std::vector<double> v) : dims(std::move(d)), data(std::move(v)) {
    if (product(dims) != data.size()) throw ShapeError("tensor dims " + dims_str(dims) + " do not match data length");
}

Tensor Tensor::zeros(std::vector<std::size_t> d) {
    const auto n = product(d);
    return Tensor(std::move(d), std::vector<double>(n, 0.0));
}

double round_half_away(double x) { return std::round(x); }

NodeId Graph::push(NodeOp op, Tensor value, std::vector<NodeId> inputs,
                   std::function<void(Node&, std::vector<Node>&)> backward) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                  [&](NodeId i) { return nodes_[i].requires_grad; });
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    has_grads_ = false;
    return nodes_.size() - 1;
}

const Graph::Node& Graph::node(NodeId id) const {
    if (id >= nodes_.size()) throw StateError("unknown node id " + std::to_string(id));
    return nodes_[id];
}

const Tensor& Graph::value(NodeId id) const { return node(id).value; }

const Tensor& Graph::grad(NodeId id) const {
    const auto& n = node(id);
    if (!has_grads_) throw StateError("gradients requested before backward()");
    return n.grad;
}

NodeOp Graph::op(NodeId id) const { return node(id).op; }

NodeId Graph::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.op = NodeOp::leaf;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    has_grads_ = false;
    return nodes_.size() - 1;
}

NodeId Graph::matmul(NodeId xi, NodeId wi) {
    const auto& x = value(xi);
    const auto& w = value(wi);
    if (x.dims.size() != 2 || w.dims.size() != 2 || x.dims[1] != w.dims[1])
        throw ShapeError("matmul: input " + dims_str(x.dims) + " vs weight " + dims_str(w.dims));
    const std::size_t B = x.dims[0], in = x.dims[1], out = w.dims[0];
    Tensor y = Tensor::zeros({B, out});
    for (std::size_t b = 0; b < B; ++b) {
        const double* xr = &x.data[b * in];
        for (std::size_t o = 0; o < out; ++o) {
            const double* wr = &w.data[o * in];
            double acc = 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
            y.data[b * out + o] = acc;
        }
    }
    return push(NodeOp::matmul, std::move(y), {xi, wi}, [B, in, out](Node& self, std::vector<Node>& ns) {
        auto& xn = ns[self.inputs[0]];
        auto& wn = ns[self.inputs[1]];
        const auto& gy = self.grad.data;
        if (xn.requires_grad) {
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t o = 0; o < out; ++o) {
                    const double g = gy[b * out + o];
                    if (g == 0.0) continue;
                    const double* wr = &wn.value.data[o * in];
                    double* gx = &xn.grad.data[b * in];
                    for (std::size_t i = 0; i < in; ++i) gx[i] += g * wr[i];
                }
        }
        if (wn.requires_grad) {
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t o = 0; o < out; ++o) {
                    const double g = gy[b * out + o];
                    if (g == 0.0) continue;
                    const double* xr = &xn.value.data[b * in];
                    double* gw = &wn.grad.data[o * in];
                    for (std::size_t i = 0; i < in; ++i) gw[i] += g * xr[i];
                }
        }
    });
}

NodeId Graph::conv2d(NodeId xi, NodeId wi) {
    const auto& x = value(xi);
    const auto& w = value(wi);
    if (x.dims.size() != 4 || w.dims.size() != 4 || w.dims[2] != 3 || w.dims[3] != 3 || x.dims[1] != w.dims[1])
        throw ShapeError("conv2d: input " + dims_str(x.dims) + " vs weight " + dims_str(w.dims));
    const std::size_t B = x.dims[0], C = x.dims[1], H = x.dims[2], W = x.dims[3], O = w.dims[0];
    Tensor y = Tensor::zeros({B, O, H, W});
    auto xat = [&](std::size_t b, std::size_t c, std::size_t h, std::size_t ww) {
        return ((b * C + c) * H + h) * W + ww;
    };
    auto wat = [&](std::size_t o, std::size_t c, std::size_t kh, std::size_t kw) {
        return ((o * C + c) * 3 + kh) * 3 + kw;
    };
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t o = 0; o < O; ++o)
            for (std::size_t h = 0; h < H; ++h)
                for (std::size_t c2 = 0; c2 < W; ++c2) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < C; ++c)
                        for (std::size_t kh = 0; kh < 3; ++kh) {
                            const auto ih = static_cast<std::ptrdiff_t>(h + kh) - 1;
                            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
                            for (std::size_t kw = 0; kw < 3; ++kw) {
                                const auto iw = static_cast<std::ptrdiff_t>(c2 + kw) - 1;
                                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                                acc += x.data[xat(b, c, ih, iw)] * w.data[wat(o, c, kh, kw)];
                            }
                        }
                    y.data[((b * O + o) * H + h) * W + c2] = acc;
                }
    return push(NodeOp::conv2d, std::move(y), {xi, wi}, [=](Node& self, std::vector<Node>& ns) {
        auto& xn = ns[self.inputs[0]];
        auto& wn = ns[self.inputs[1]];
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t o = 0; o < O; ++o)
                for (std::size_t h = 0; h < H; ++h)
                    for (std::size_t c2 = 0; c2 < W; ++c2) {
                        const double g = self.grad.data[((b * O + o) * H + h) * W + c2];
                        if (g == 0.0) continue;
                        for (std::size_t c = 0; c < C; ++c)
                            for (std::size_t kh = 0; kh < 3; ++kh) {
                                const auto ih = static_cast<std::ptrdiff_t>(h + kh) - 1;
                                if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
                                for (std::size_t kw = 0; kw < 3; ++kw) {
                                    const auto iw = static_cast<std::ptrdiff_t>(c2 + kw) - 1;
                                    if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                                    const auto xi2 = ((b * C + c) * H + ih) * W + iw;
                                    const auto wi2 = ((o * C + c) * 3 + kh) * 3 + kw;
                                    if (xn.requires_grad) xn.grad.data[xi2] += g * wn.value.data[wi2];
                                    if (wn.requires_grad) wn.grad.data[wi2] += g * xn.value.data[xi2];
                                }
                            }
                    }
    });
}

NodeId Graph::bias_add(NodeId xi, NodeId bi) {
    const auto& x = value(xi);
    const auto& b = value(bi);
    if (x.dims.size() < 2 || b.dims.size() != 1 || b.dims[0] != x.dims[1])
        throw ShapeError("bias_add: input " + dims_str(x.dims) + " vs bias " + dims_str(b.dims));
    const std::size_t B = x.dims[0], C = x.dims[1], inner = x.numel() / (B * C);
    Tensor y = x;
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t k = 0; k < inner; ++k) y.data[(n * C + c) * inner + k] += b.data[c];
    return push(NodeOp::bias_add, std::move(y), {xi, bi}, [B, C, inner](Node& self, std::vector<Node>& ns) {
        auto& xn = ns[self.inputs[0]];
        auto& bn = ns[self.inputs[1]];
        for (std::size_t i = 0; i < self.grad.numel(); ++i) xn.grad.data[i] += self.grad.data[i];
        for (std::size_t n = 0; n < B; ++n)
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t k = 0; k < inner; ++k) bn.grad.data[c] += self.grad.data[(n * C + c) * inner + k];
    });
}

NodeId Graph::relu(NodeId xi) {
    Tensor y = value(xi);
    for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
    return push(NodeOp::relu, std::move(y), {xi}, [](Node& self, std::vector<Node>& ns) {
        auto& xn = ns[self.inputs[0]];
        for (std::size_t i = 0; i < self.grad.numel(); ++i)
            if (xn.value.data[i] > 0.0) xn.grad.data[i] += self.grad.data[i];
    });
}

NodeId Graph::flatten(NodeId xi) {
    const auto& x = value(xi);
    if (x.dims.empty()) throw ShapeError("flatten: scalar input");
    Tensor y({x.dims[0], x.numel() / x.dims[0]}, x.data);
    return push(NodeOp::flatten, std::move(y), {xi}, [](Node& self, std::vector<Node>& ns) {
        auto& xn = ns[self.inputs[0]];
        for (std::size_t i = 0; i < self.grad.numel(); ++i) xn.grad.data[i] += self.grad.data[i];
    });
}

NodeId Graph::mse(NodeId ai, NodeId bi) {
    const auto& a = value(ai);
    const auto& b = value(bi);
    if (a.dims != b.dims) throw ShapeError("mse: " + dims_str(a.dims) + " vs " + dims_str(b.dims));
    const auto n = static_cast<double>(a.numel());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return push(NodeOp::mse, Tensor::scalar(acc / n), {ai, bi}, [n](Node& self, std::vector<Node>& ns) {
        auto& an = ns[self.inputs[0]];
        auto& bn = ns[self.inputs[1]];
        const double g = self.grad.data[0];
        for (std::size_t i = 0; i < an.value.numel(); ++i) {
            const double d = 2.0 * (an.value.data[i] - bn.value.data[i]) / n * g;
            an.grad.data[i] += d;
            bn.grad.data[i] -= d;
        }
    });
}

NodeId Graph::add(NodeId ai, NodeId bi) {
    const auto& a = value(ai);
    const auto& b = value(bi);
    if (a.dims != b.dims) throw ShapeError("add: " + dims_str(a.dims) + " vs " + dims_str(b.dims));
    Tensor y = a;
    for (std::size_t i = 0; i < y.numel(); ++i) y.data[i] += b.data[i];
    return push(NodeOp::scalar_add, std::move(y), {ai, bi}, [](Node& self, std::vector<Node>& ns) {
        for (auto in : self.inputs)
            for (std::size_t i = 0; i < self.grad.numel(); ++i) ns[in].grad.data[i] += self.grad.data[i];
    });
}

NodeId Graph::scale(NodeId xi, double factor) {
    Tensor y = value(xi);
    for (auto& v : y.data) v *= factor;
    return push(NodeOp::scalar_mul, std::move(y), {xi}, [factor](Node& self, std::vector<Node>& ns) {
        auto& xn = ns[self.inputs[0]];
        for (std::size_t i = 0; i < self.grad.numel(); ++i) xn.grad.data[i] += factor * self.grad.data[i];
    });
}

NodeId Graph::ste_round(NodeId xi) {
    Tensor y = value(xi);
    for (auto& v : y.data) v = round_half_away(v);
    return push(NodeOp::ste_round, std::move(y), {xi}, [](Node& self, std::vector<Node>& ns) {
        auto& xn = ns[self.inputs[0]];
        for (std::size_t i = 0; i < self.grad.numel(); ++i) xn.grad.data[i] += self.grad.data[i];
    });
}

NodeId Graph::custom(std::vector<NodeId> inputs, Tensor value, BackwardFn fn) {
    for (auto i : inputs) node(i);
    return push(NodeOp::custom_backward, std::move(value), std::move(inputs),
                [fn = std::move(fn)](Node& self, std::vector<Node>& ns) {
                    std::vector<Tensor*> grads;
                    grads.reserve(self.inputs.size());
                    for (auto i : self.inputs) grads.push_back(&ns[i].grad);
                    fn(self.grad, grads);
                });
}

void Graph::backward(NodeId loss) {
    if (loss >= nodes_.size()) throw StateError("backward() on unknown node " + std::to_string(loss));
    if (nodes_[loss].value.numel() != 1) throw ShapeError("backward() needs a scalar loss");
    for (auto& n : nodes_) n.grad = Tensor::zeros(n.value.dims);
    nodes_[loss].grad.data[0] = 1.0;
    for (std::size_t i = loss + 1; i-- > 0;) {
        auto& n = nodes_[i];
        if (n.requires_grad && n.backward) n.backward(n, nodes_);
    }
    has_grads_ = true;
}

ForwardResult forward(Graph& g, const std::vector<Op>& topology, std::span<const std::size_t> distill_points,
                      const ParamLookup& params, NodeId input) {
    if (topology.empty()) throw ShapeError("empty topology");
    ForwardResult r;
    NodeId cur = input;
    for (std::size_t i = 0; i < topology.size(); ++i) {
        const auto& op = topology[i];
        try {
            switch (op.kind) {
            case OpKind::dense: cur = g.matmul(cur, params(op.tensor)); break;
            case OpKind::conv2d: cur = g.conv2d(cur, params(op.tensor)); break;
            case OpKind::bias_add: cur = g.bias_add(cur, params(op.tensor)); break;
            case OpKind::relu: cur = g.relu(cur); break;
            case OpKind::flatten: cur = g.flatten(cur); break;
            }
        } catch (const ShapeError& e) {
            throw ShapeError("op " + std::to_string(i) + " (" + to_string(op.kind) + "): " + e.what());
        }
        const bool last = i + 1 == topology.size();
        if (last || std::find(distill_points.begin(), distill_points.end(), i) != distill_points.end()) {
            r.op_indices.push_back(i);
            r.points.push_back(cur);
        }
    }
    return r;
}

Tensor to_tensor(const WeightTensor& t) {
    return Tensor(std::vector<std::size_t>(t.dims.begin(), t.dims.end()),
                  std::vector<double>(t.data.begin(), t.data.end()));
}

Tensor batch_tensor(std::span<const std::uint32_t> sample_dims, std::span<const float> flat, std::size_t n) {
    std::vector<std::size_t> dims{n};
    dims.insert(dims.end(), sample_dims.begin(), sample_dims.end());
    return Tensor(std::move(dims), std::vector<double>(flat.begin(), flat.end()));
}

std::vector<Tensor> evaluate(const ModelManifest& model, const Tensor& batch,
                             std::span<const std::size_t> distill_points) {
    Graph g;
    std::vector<std::pair<std::string, NodeId>> cache;
    auto lookup = [&](const std::string& name) {
        for (const auto& [n, id] : cache)
            if (n == name) return id;
        const auto* t = model.find(name);
        if (!t) throw ShapeError("unknown tensor '" + name + "'");
        auto id = g.leaf(to_tensor(*t), false);
        cache.emplace_back(name, id);
        return id;
    };
    const auto in = g.leaf(batch, false);
    const auto r = forward(g, model.topology, distill_points, lookup, in);
    std::vector<Tensor> out;
    for (auto id : r.points) out.push_back(g.value(id));
    return out;
}

void Adam::step(std::span<std::vector<double>* const> params, std::span<const std::vector<double>* const> grads) {
    if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient count mismatch");
    if (m_.empty()) {
        for (auto* p : params) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }
    if (m_.size() != params.size()) throw ShapeError("adam: parameter list changed between steps");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = *params[k];
        const auto& g = *grads[k];
        if (p.size() != g.size() || p.size() != m_[k].size()) throw ShapeError("adam: dims mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g[i];
            v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mh = m_[k][i] / c1;
            const double vh = v_[k][i] / c2;
            p[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
        }
    }
}

void Adam::step(std::vector<double>& param, const std::vector<double>& grad) {
    std::vector<double>* p[] = {&param};
    const std::vector<double>* g[] = {&grad};
    step(p, g);
}

} // namespace l2c::ad
