// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "l2c/bytes.hpp"
#include "l2c/error.hpp"

namespace l2c {

namespace {

constexpr char kModelMagic[4] = {'L', '2', 'R', 'M'};
constexpr char kCalibMagic[4] = {'L', '2', 'C', 'A'};
constexpr std::uint16_t kVersion = 1;

std::size_t product(const std::vector<std::uint32_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t b) { return a * b; });
}

void expect_magic(ByteReader& r, const char (&magic)[4], const char* what) {
    const auto at = r.offset();
    auto raw = r.get_bytes(4);
    if (!std::equal(raw.begin(), raw.end(), std::begin(magic),
                    [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); }))
        throw FormatError(std::string("bad magic, expected ") + what, at);
}

} // namespace

const char* to_string(TensorKind kind) {
    switch (kind) {
    case TensorKind::dense_weight: return "dense-weight";
    case TensorKind::conv_weight: return "conv-weight";
    case TensorKind::bias: return "bias";
    case TensorKind::other: return "other";
    }
    return "?";
}

const char* to_string(OpKind kind) {
    switch (kind) {
    case OpKind::dense: return "dense";
    case OpKind::conv2d: return "conv2d";
    case OpKind::relu: return "relu";
    case OpKind::flatten: return "flatten";
    case OpKind::bias_add: return "bias_add";
    }
    return "?";
}

OpKind op_kind_from_string(const std::string& s) {
    for (auto k : {OpKind::dense, OpKind::conv2d, OpKind::relu, OpKind::flatten, OpKind::bias_add})
        if (s == to_string(k)) return k;
    throw ParameterError("unknown op '" + s + "'");
}

std::size_t WeightTensor::numel() const { return product(dims); }

const WeightTensor* ModelManifest::find(const std::string& name) const {
    auto it = std::find_if(tensors.begin(), tensors.end(),
                           [&](const WeightTensor& t) { return t.name == name; });
    return it == tensors.end() ? nullptr : &*it;
}

WeightTensor* ModelManifest::find(const std::string& name) {
    return const_cast<WeightTensor*>(std::as_const(*this).find(name));
}

void ModelManifest::validate() const {
    std::set<std::string> names;
    for (const auto& t : tensors) {
        if (!names.insert(t.name).second) throw ParameterError("duplicate tensor name '" + t.name + "'");
        if (std::any_of(t.dims.begin(), t.dims.end(), [](std::uint32_t d) { return d == 0; }))
            throw ShapeError("tensor '" + t.name + "' has a zero dimension");
        if (t.numel() != t.data.size())
            throw ShapeError("tensor '" + t.name + "': product(dims) != data length");
        for (float v : t.data)
            if (!std::isfinite(v)) throw ParameterError("tensor '" + t.name + "' holds a non-finite value");
    }
    for (std::size_t i = 0; i < topology.size(); ++i) {
        const auto& op = topology[i];
        const bool needs_tensor =
            op.kind == OpKind::dense || op.kind == OpKind::conv2d || op.kind == OpKind::bias_add;
        if (needs_tensor && !find(op.tensor))
            throw ShapeError("op " + std::to_string(i) + " references unknown tensor '" + op.tensor + "'");
        if (!needs_tensor && !op.tensor.empty())
            throw ShapeError("op " + std::to_string(i) + " (" + to_string(op.kind) + ") takes no tensor");
    }
    for (auto p : distill_points)
        if (p >= topology.size())
            throw ShapeError("distill point " + std::to_string(p) + " is not a valid op index");
}

std::vector<std::size_t> effective_distill_points(const ModelManifest& model) {
    std::set<std::size_t> pts(model.distill_points.begin(), model.distill_points.end());
    if (pts.empty())
        for (std::size_t i = 0; i < model.topology.size(); ++i)
            if (model.topology[i].kind == OpKind::relu) pts.insert(i);
    if (!model.topology.empty()) pts.erase(model.topology.size() - 1);
    return {pts.begin(), pts.end()};
}

std::size_t CalibrationSet::sample_size() const { return product(dims); }

std::span<const float> CalibrationSet::sample(std::size_t i) const {
    const auto n = sample_size();
    return std::span<const float>(data).subspan(i * n, n);
}

nlohmann::json topology_to_json(const ModelManifest& model) {
    // ops as ["kind"] or ["kind", "tensor"]
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : model.topology) {
        nlohmann::json o = nlohmann::json::array({to_string(op.kind)});
        if (!op.tensor.empty()) o.push_back(op.tensor);
        ops.push_back(std::move(o));
    }
    return {{"ops", ops}, {"distill_points", model.distill_points}, {"input_dims", model.input_dims}};
}

void topology_from_json(const nlohmann::json& j, ModelManifest& model) {
    model.topology.clear();
    for (const auto& o : j.at("ops")) {
        Op op;
        if (!o.is_array() || o.empty() || o.size() > 2) throw ParameterError("malformed op entry");
        op.kind = op_kind_from_string(o.at(0).get<std::string>());
        if (o.size() == 2) op.tensor = o.at(1).get<std::string>();
        model.topology.push_back(std::move(op));
    }
    model.distill_points = j.value("distill_points", std::vector<std::size_t>{});
    model.input_dims = j.value("input_dims", std::vector<std::uint32_t>{});
}

std::vector<std::uint8_t> encode_raw_model(const ModelManifest& model) {
    model.validate();
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(kModelMagic), 4});
    w.put(kVersion);
    w.put(static_cast<std::uint32_t>(model.tensors.size()));
    for (const auto& t : model.tensors) {
        w.put_string16(t.name);
        w.put(static_cast<std::uint8_t>(t.kind));
        if (t.dims.size() > 255) throw ShapeError("tensor '" + t.name + "' rank exceeds 255");
        w.put(static_cast<std::uint8_t>(t.dims.size()));
        for (auto d : t.dims) w.put(d);
        for (float v : t.data) w.put_f32(v);
    }
    const std::string blob = topology_to_json(model).dump();
    w.put(static_cast<std::uint64_t>(blob.size()));
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(blob.data()), blob.size()});
    return w.take();
}

ModelManifest decode_raw_model(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    expect_magic(r, kModelMagic, "L2RM");
    const auto version_at = r.offset();
    if (r.get<std::uint16_t>() != kVersion) throw FormatError("unsupported L2RM version", version_at);
    const auto count = r.get<std::uint32_t>();
    ModelManifest m;
    for (std::uint32_t i = 0; i < count; ++i) {
        WeightTensor t;
        t.name = r.get_string16();
        const auto kind_at = r.offset();
        const auto kind = r.get<std::uint8_t>();
        if (kind > 3) throw FormatError("tensor '" + t.name + "': unknown kind", kind_at);
        t.kind = static_cast<TensorKind>(kind);
        const auto rank = r.get<std::uint8_t>();
        for (std::uint8_t k = 0; k < rank; ++k) {
            const auto dim_at = r.offset();
            const auto d = r.get<std::uint32_t>();
            if (d == 0) throw FormatError("tensor '" + t.name + "': zero dimension", dim_at);
            t.dims.push_back(d);
        }
        const std::uint64_t n = t.numel();
        r.require(n * 4, "truncated tensor payload");
        t.data.resize(n);
        for (std::uint64_t k = 0; k < n; ++k) {
            const auto at = r.offset();
            t.data[k] = r.get_f32();
            if (!std::isfinite(t.data[k]))
                throw FormatError("tensor '" + t.name + "' element " + std::to_string(k) + " is not finite", at);
        }
        m.tensors.push_back(std::move(t));
    }
    const auto blob_at = r.offset();
    const auto blob_len = r.get<std::uint64_t>();
    auto blob = r.get_bytes(blob_len);
    try {
        topology_from_json(nlohmann::json::parse(blob.begin(), blob.end()), m);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad topology JSON: ") + e.what(), blob_at);
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after topology block", r.offset());
    try {
        m.validate();
    } catch (const std::exception& e) {
        throw FormatError(std::string("inconsistent model: ") + e.what(), blob_at);
    }
    return m;
}

ModelManifest load_raw_model(const std::filesystem::path& path) {
    return decode_raw_model(read_file(path));
}

void save_raw_model(const ModelManifest& model, const std::filesystem::path& path) {
    write_file(path, encode_raw_model(model));
}

std::vector<std::uint8_t> encode_calibration(const CalibrationSet& calib) {
    if (calib.data.size() != calib.sample_size() * calib.count)
        throw ShapeError("calibration data length != count * product(dims)");
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(kCalibMagic), 4});
    w.put(kVersion);
    w.put(calib.count);
    w.put(static_cast<std::uint8_t>(calib.dims.size()));
    for (auto d : calib.dims) w.put(d);
    for (float v : calib.data) w.put_f32(v);
    return w.take();
}

CalibrationSet decode_calibration(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    expect_magic(r, kCalibMagic, "L2CA");
    const auto version_at = r.offset();
    if (r.get<std::uint16_t>() != kVersion) throw FormatError("unsupported L2CA version", version_at);
    CalibrationSet c;
    const auto count_at = r.offset();
    c.count = r.get<std::uint32_t>();
    if (c.count == 0) throw FormatError("calibration set is empty", count_at);
    const auto rank = r.get<std::uint8_t>();
    for (std::uint8_t k = 0; k < rank; ++k) {
        const auto at = r.offset();
        const auto d = r.get<std::uint32_t>();
        if (d == 0) throw FormatError("zero calibration dimension", at);
        c.dims.push_back(d);
    }
    const std::uint64_t n = static_cast<std::uint64_t>(c.count) * c.sample_size();
    r.require(n * 4, "truncated calibration payload");
    c.data.resize(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        const auto at = r.offset();
        c.data[k] = r.get_f32();
        if (!std::isfinite(c.data[k])) throw FormatError("non-finite calibration value", at);
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after calibration payload", r.offset());
    return c;
}

CalibrationSet load_calibration(const std::filesystem::path& path) {
    return decode_calibration(read_file(path));
}

void save_calibration(const CalibrationSet& calib, const std::filesystem::path& path) {
    write_file(path, encode_calibration(calib));
}

CalibrationSet truncate_calibration(const CalibrationSet& calib, std::uint32_t limit) {
    if (limit == 0 || limit >= calib.count) return calib;
    CalibrationSet out = calib;
    out.count = limit;
    out.data.resize(static_cast<std::size_t>(limit) * calib.sample_size());
    return out;
}

std::uint64_t original_bits(const ModelManifest& model) {
    std::uint64_t bits = 0;
    for (const auto& t : model.tensors) bits += 32ull * t.numel();
    return bits;
}

} // namespace l2c
