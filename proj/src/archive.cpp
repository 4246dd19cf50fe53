// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "l2c/bytes.hpp"
#include "l2c/codec.hpp"
#include "l2c/error.hpp"

namespace l2c::codec {

namespace {

constexpr char kMagic[4] = {'L', '2', 'C', 'M'};
constexpr std::uint16_t kVersion = 1;

std::size_t layer_header_bytes(const LayerRecord& l) {
    return 2 + l.name.size()                 // name
           + 1 + 1 + 8 * l.spec.param_count() // transform id, param count, params
           + 4 + 4                            // symbol_min, K
           + 8 + 8;                           // payload length, checksum
}

std::size_t bias_record_bytes(const BiasRecord& b) { return 2 + b.name.size() + 8 + 4 + b.values.size(); }

} // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<float> BiasRecord::dequantized() const {
    std::vector<float> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<float>(values[i] * scale);
    return out;
}

BiasRecord quantize_bias(const std::string& name, std::span<const float> bias) {
    BiasRecord r;
    r.name = name;
    float max_abs = 0.0f;
    for (float v : bias) max_abs = std::max(max_abs, std::abs(v));
    r.scale = max_abs > 0.0f ? static_cast<double>(max_abs) / 127.0 : 1.0;
    r.values.resize(bias.size());
    for (std::size_t i = 0; i < bias.size(); ++i)
        r.values[i] = static_cast<std::int8_t>(std::clamp(std::round(bias[i] / r.scale), -127.0, 127.0));
    return r;
}

std::string archive_topology(const ModelManifest& model) {
    auto j = topology_to_json(model);
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& t : model.tensors)
        tensors.push_back({t.name, static_cast<int>(t.kind), t.dims});
    j["tensors"] = std::move(tensors);
    return j.dump();
}

Archive build_archive(const ModelManifest& model, std::span<const LayerSymbols> layers,
                      std::span<const BiasRecord> biases) {
    std::set<std::string> covered;
    Archive a;
    a.topology = archive_topology(model);
    for (const auto& l : layers) {
        const auto* t = model.find(l.name);
        if (!t) throw ParameterError("archive layer '" + l.name + "' is not a model tensor");
        if (t->numel() != l.symbols.size()) throw ShapeError("archive layer '" + l.name + "': symbol count != numel");
        if (!covered.insert(l.name).second) throw ParameterError("tensor '" + l.name + "' stored twice");
        LayerRecord r;
        r.name = l.name;
        r.spec = l.spec;
        r.table = exact_table(l.symbols);
        r.payload = range_encode(l.symbols, r.table);
        r.checksum = fnv1a64(r.payload);
        a.layers.push_back(std::move(r));
    }
    for (const auto& b : biases) {
        const auto* t = model.find(b.name);
        if (!t) throw ParameterError("bias record '" + b.name + "' is not a model tensor");
        if (t->numel() != b.values.size()) throw ShapeError("bias record '" + b.name + "': length != numel");
        if (!covered.insert(b.name).second) throw ParameterError("tensor '" + b.name + "' stored twice");
        a.biases.push_back(b);
    }
    if (covered.size() != model.tensors.size()) throw ParameterError("archive does not cover every model tensor");
    return a;
}

std::vector<std::uint8_t> pack_archive(const Archive& archive) {
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
    w.put(kVersion);
    w.put(static_cast<std::uint32_t>(archive.layers.size()));
    w.put(static_cast<std::uint64_t>(archive.topology.size()));
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(archive.topology.data()), archive.topology.size()});
    for (const auto& l : archive.layers) {
        w.put_string16(l.name);
        w.put(static_cast<std::uint8_t>(l.spec.kind));
        w.put(static_cast<std::uint8_t>(l.spec.param_count()));
        for (double p : l.spec.param_span()) w.put_f64(p);
        w.put(l.table.symbol_min);
        w.put(static_cast<std::uint32_t>(l.table.counts.size()));
        for (auto c : l.table.counts) w.put(c);
        w.put(static_cast<std::uint64_t>(l.payload.size()));
        w.put_bytes(l.payload);
        w.put(l.checksum);
    }
    w.put(static_cast<std::uint32_t>(archive.biases.size()));
    for (const auto& b : archive.biases) {
        w.put_string16(b.name);
        w.put_f64(b.scale);
        w.put(static_cast<std::uint32_t>(b.values.size()));
        for (auto v : b.values) w.put(static_cast<std::uint8_t>(v));
    }
    return w.take();
}

Archive unpack_archive(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    {
        auto raw = r.get_bytes(4);
        if (!std::equal(raw.begin(), raw.end(), std::begin(kMagic),
                        [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); }))
            throw FormatError("bad magic, expected L2CM", 0);
    }
    const auto version_at = r.offset();
    if (r.get<std::uint16_t>() != kVersion) throw FormatError("unsupported L2CM version", version_at);
    Archive a;
    const auto layer_count = r.get<std::uint32_t>();
    const auto topo_len = r.get<std::uint64_t>();
    auto topo = r.get_bytes(topo_len);
    a.topology.assign(reinterpret_cast<const char*>(topo.data()), topo.size());
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        LayerRecord l;
        l.name = r.get_string16();
        const auto id_at = r.offset();
        const auto id = r.get<std::uint8_t>();
        if (id > 4) throw FormatError("layer '" + l.name + "': unknown transform id", id_at);
        l.spec.kind = static_cast<TransformKind>(id);
        const auto pc_at = r.offset();
        const auto pc = r.get<std::uint8_t>();
        if (pc != l.spec.param_count()) throw FormatError("layer '" + l.name + "': wrong parameter count", pc_at);
        for (std::uint8_t k = 0; k < pc; ++k) l.spec.params[k] = r.get_f64();
        try {
            l.spec.validate();
        } catch (const ParameterError& e) {
            throw FormatError("layer '" + l.name + "': " + e.what(), pc_at);
        }
        l.table.symbol_min = r.get<std::int32_t>();
        const auto k = r.get<std::uint32_t>();
        r.require(std::uint64_t{k} * 4, "truncated frequency table");
        l.table.counts.resize(k);
        for (auto& c : l.table.counts) c = r.get<std::uint32_t>();
        l.table.total = std::accumulate(l.table.counts.begin(), l.table.counts.end(), std::uint64_t{0});
        const auto payload_len = r.get<std::uint64_t>();
        auto payload = r.get_bytes(payload_len);
        l.payload.assign(payload.begin(), payload.end());
        const auto sum_at = r.offset();
        l.checksum = r.get<std::uint64_t>();
        if (fnv1a64(l.payload) != l.checksum) throw FormatError("layer '" + l.name + "': payload checksum mismatch", sum_at);
        a.layers.push_back(std::move(l));
    }
    const auto bias_count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < bias_count; ++i) {
        BiasRecord b;
        b.name = r.get_string16();
        b.scale = r.get_f64();
        const auto n = r.get<std::uint32_t>();
        auto raw = r.get_bytes(n);
        b.values.resize(n);
        std::transform(raw.begin(), raw.end(), b.values.begin(), [](std::uint8_t v) { return static_cast<std::int8_t>(v); });
        a.biases.push_back(std::move(b));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after archive", r.offset());
    return a;
}

ModelManifest archive_skeleton(const Archive& archive) {
    ModelManifest m;
    try {
        const auto j = nlohmann::json::parse(archive.topology);
        topology_from_json(j, m);
        for (const auto& t : j.at("tensors")) {
            WeightTensor w;
            w.name = t.at(0).get<std::string>();
            const int kind = t.at(1).get<int>();
            if (kind < 0 || kind > 3) throw ParameterError("bad tensor kind");
            w.kind = static_cast<TensorKind>(kind);
            w.dims = t.at(2).get<std::vector<std::uint32_t>>();
            m.tensors.push_back(std::move(w));
        }
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad archive topology blob: ") + e.what(), 18);
    }
    return m;
}

std::vector<std::int64_t> decode_layer(const LayerRecord& layer, std::size_t numel) {
    try {
        if (layer.table.total != numel) throw CodecError("frequency table total != tensor size");
        layer.table.validate();
        auto symbols = range_decode(layer.payload, layer.table, numel);
        return symbols;
    } catch (const std::exception& e) {
        throw CodecError("layer '" + layer.name + "': " + e.what());
    }
}

ModelManifest decode_model(const Archive& archive) {
    ModelManifest m = archive_skeleton(archive);
    for (auto& t : m.tensors) {
        auto lit = std::find_if(archive.layers.begin(), archive.layers.end(),
                                [&](const LayerRecord& l) { return l.name == t.name; });
        auto bit = std::find_if(archive.biases.begin(), archive.biases.end(),
                                [&](const BiasRecord& b) { return b.name == t.name; });
        if (lit != archive.layers.end()) {
            const auto symbols = decode_layer(*lit, t.numel());
            const auto values = dequantize(symbols, lit->spec);
            t.data.assign(values.begin(), values.end());
        } else if (bit != archive.biases.end()) {
            if (bit->values.size() != t.numel()) throw CodecError("bias '" + t.name + "': length != tensor size");
            t.data = bit->dequantized();
        } else {
            throw CodecError("tensor '" + t.name + "' missing from archive");
        }
    }
    m.validate();
    return m;
}

std::size_t SizeBreakdown::total() const {
    std::size_t n = preamble + topology + biases;
    for (const auto& l : layers) n += l.total();
    return n;
}

std::size_t SizeBreakdown::payload_total() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.payload;
    return n;
}

SizeBreakdown itemize(const Archive& archive) {
    SizeBreakdown s;
    s.preamble = 4 + 2 + 4;
    s.topology = 8 + archive.topology.size();
    for (const auto& l : archive.layers)
        s.layers.push_back({l.name, layer_header_bytes(l), 4 * l.table.counts.size(), l.payload.size()});
    s.biases = 4;
    for (const auto& b : archive.biases) s.biases += bias_record_bytes(b);
    return s;
}

} // namespace l2c::codec
