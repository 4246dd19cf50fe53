// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2c/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "l2c/autodiff.hpp"
#include "l2c/error.hpp"

namespace l2c {

double CompressOutcome::file_cr() const {
    return static_cast<double>(original_bits) / (8.0 * static_cast<double>(bytes.size()));
}

double CompressOutcome::entropy_cr() const {
    const double bits = calib.achieved_bits + 8.0 * static_cast<double>(bias_elements);
    return bits > 0.0 ? static_cast<double>(original_bits) / bits : INFINITY;
}

ModelManifest compressed_manifest(const ModelManifest& model, const CalibrationResult& result) {
    ModelManifest m = model;
    for (const auto& l : result.symbols) {
        auto* t = m.find(l.name);
        if (!t) throw ShapeError("unknown layer '" + l.name + "'");
        const auto values = dequantize(l.symbols, l.spec);
        t->data.assign(values.begin(), values.end());
    }
    for (const auto& b : result.biases) {
        auto* t = m.find(b.name);
        if (!t) throw ShapeError("unknown bias '" + b.name + "'");
        t->data = b.dequantized();
    }
    return m;
}

CompressOutcome compress_model(const ModelManifest& model, const CalibrationSet& calib, const CalibConfig& cfg) {
    CompressOutcome out;
    out.calib = run_schedule(model, calib, cfg);
    out.archive = codec::build_archive(model, out.calib.symbols, out.calib.biases);
    out.bytes = codec::pack_archive(out.archive);
    out.compressed = compressed_manifest(model, out.calib);
    out.original_bits = original_bits(model);
    for (const auto& b : out.calib.biases) out.bias_elements += b.values.size();
    return out;
}

ModelManifest decompress(std::span<const std::uint8_t> archive_bytes) {
    return codec::decode_model(codec::unpack_archive(archive_bytes));
}

std::vector<double> forward_outputs(const ModelManifest& model, const CalibrationSet& inputs) {
    const auto outs = ad::evaluate(model, ad::batch_tensor(inputs.dims, inputs.data, inputs.count));
    return outs.back().data;
}

VerifyReport verify(std::span<const std::uint8_t> archive_bytes, const ModelManifest& model,
                    const CalibrationSet& calib) {
    VerifyReport rep;
    const auto archive = codec::unpack_archive(archive_bytes);
    const auto skeleton = codec::archive_skeleton(archive);
    auto fail = [&](const std::string& layer, const std::string& msg) {
        rep.ok = false;
        rep.first_mismatch = layer;
        rep.message = msg;
        return rep;
    };
    for (const auto& l : archive.layers) {
        const auto* t = skeleton.find(l.name);
        if (!t) return fail(l.name, "layer '" + l.name + "' has no tensor descriptor");
        std::vector<std::int64_t> symbols;
        try {
            symbols = codec::decode_layer(l, t->numel());
        } catch (const CodecError& e) {
            return fail(l.name, e.what());
        }
        if (exact_table(symbols) != l.table)
            return fail(l.name, "layer '" + l.name + "': decoded symbols disagree with the stored table");
        if (codec::range_encode(symbols, l.table) != l.payload)
            return fail(l.name, "layer '" + l.name + "': re-encoded payload differs");
    }
    ModelManifest decoded;
    try {
        decoded = codec::decode_model(archive);
    } catch (const CodecError& e) {
        return fail("", e.what());
    }
    if (decoded.topology != model.topology || decoded.tensors.size() != model.tensors.size())
        return fail("", "archive topology does not match the model");
    for (std::size_t i = 0; i < model.tensors.size(); ++i) {
        const auto& a = decoded.tensors[i];
        const auto& b = model.tensors[i];
        if (a.name != b.name || a.dims != b.dims || a.kind != b.kind)
            return fail(b.name, "tensor '" + b.name + "' differs in name, kind or dims");
    }
    const auto y_hat = forward_outputs(decoded, calib);
    const auto y = forward_outputs(model, calib);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y_hat[i] - y[i];
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(d));
        acc += d * d;
    }
    rep.mse = y.empty() ? 0.0 : acc / static_cast<double>(y.size());
    rep.message = "ok";
    return rep;
}

unsigned nominal_bits(std::size_t distinct) {
    unsigned b = 0;
    while ((std::size_t{1} << b) < distinct) ++b;
    return b;
}

Report report(std::span<const std::uint8_t> archive_bytes) {
    const auto archive = codec::unpack_archive(archive_bytes);
    const auto skeleton = codec::archive_skeleton(archive);
    const auto sizes = codec::itemize(archive);
    Report r;
    r.file_bytes = archive_bytes.size();
    std::uint64_t numel_all = 0;
    for (const auto& t : skeleton.tensors) numel_all += t.numel();
    r.original_bits = 32 * numel_all;

    std::size_t layer_numel = 0, zeros = 0, max_distinct = 0;
    double bits = 0.0;
    for (std::size_t i = 0; i < archive.layers.size(); ++i) {
        const auto& l = archive.layers[i];
        ReportRow row;
        row.layer = l.name;
        row.numel = l.table.total;
        const double n = static_cast<double>(row.numel);
        const std::size_t z = l.table.count(0);
        const double b = exact_coding_length_bits(l.table);
        row.sparsity = row.numel ? static_cast<double>(z) / n : 0.0;
        row.entropy_bits_per_weight = row.numel ? b / n : 0.0;
        row.distinct_symbols = l.table.distinct();
        row.nominal_bits = nominal_bits(row.distinct_symbols);
        row.layer_cr = 32.0 * n / (8.0 * static_cast<double>(sizes.layers[i].total()));
        layer_numel += row.numel;
        zeros += z;
        bits += b;
        max_distinct = std::max(max_distinct, row.distinct_symbols);
        r.layers.push_back(std::move(row));
    }
    r.total.layer = "total";
    r.total.numel = numel_all;
    r.total.sparsity = layer_numel ? static_cast<double>(zeros) / static_cast<double>(layer_numel) : 0.0;
    r.total.entropy_bits_per_weight = layer_numel ? bits / static_cast<double>(layer_numel) : 0.0;
    r.total.distinct_symbols = max_distinct;
    r.total.nominal_bits = nominal_bits(max_distinct);
    r.total.layer_cr = static_cast<double>(r.original_bits) / (8.0 * static_cast<double>(r.file_bytes));
    return r;
}

std::string report_csv(const Report& r) {
    std::ostringstream os;
    os.precision(10);
    os << "layer,numel,sparsity,entropy_bits_per_weight,distinct_symbols,nominal_bits,layer_cr\n";
    auto line = [&](const ReportRow& row) {
        os << row.layer << ',' << row.numel << ',' << row.sparsity << ',' << row.entropy_bits_per_weight << ','
           << row.distinct_symbols << ',' << row.nominal_bits << ',' << row.layer_cr << '\n';
    };
    for (const auto& row : r.layers) line(row);
    line(r.total);
    return os.str();
}

nlohmann::json report_json(const Report& r) {
    auto row_json = [](const ReportRow& row) {
        return nlohmann::json{{"layer", row.layer},
                              {"numel", row.numel},
                              {"sparsity", row.sparsity},
                              {"entropy_bits_per_weight", row.entropy_bits_per_weight},
                              {"distinct_symbols", row.distinct_symbols},
                              {"nominal_bits", row.nominal_bits},
                              {"layer_cr", row.layer_cr}};
    };
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& row : r.layers) layers.push_back(row_json(row));
    return {{"layers", layers},
            {"total", row_json(r.total)},
            {"file_bytes", r.file_bytes},
            {"original_bits", r.original_bits}};
}

} // namespace l2c
