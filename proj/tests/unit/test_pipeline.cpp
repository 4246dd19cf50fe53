// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "l2c/error.hpp"
#include "l2c/pipeline.hpp"
#include "l2c/toy.hpp"

using namespace l2c;

namespace {

CalibConfig quick(double cr) {
    CalibConfig c;
    c.cr_target = cr;
    c.epochs = 2;
    c.transform_iters = 60;
    c.finetune_iters = 60;
    return c;
}

const CompressOutcome& outcome() {
    static const CompressOutcome o = compress_model(fixtures::toy().model, fixtures::toy().calib, quick(8.0));
    return o;
}

// Independent per-sample forward in double over float weights.
std::vector<double> naive_outputs(const ModelManifest& m, const CalibrationSet& c) {
    std::vector<double> out;
    for (std::size_t s = 0; s < c.count; ++s) {
        const auto row = c.sample(s);
        std::vector<double> x(row.begin(), row.end());
        for (const auto& op : m.topology) {
            if (op.kind == OpKind::relu) {
                for (auto& v : x) v = std::max(v, 0.0);
            } else if (op.kind == OpKind::bias_add) {
                const auto* b = m.find(op.tensor);
                for (std::size_t i = 0; i < x.size(); ++i) x[i] += b->data[i];
            } else {
                const auto* w = m.find(op.tensor);
                std::vector<double> y(w->dims[0], 0.0);
                for (std::size_t r = 0; r < y.size(); ++r)
                    for (std::size_t k = 0; k < x.size(); ++k) y[r] += double(w->data[r * x.size() + k]) * x[k];
                x = std::move(y);
            }
        }
        out.insert(out.end(), x.begin(), x.end());
    }
    return out;
}

} // namespace

TEST_CASE("nominal bit width") {
    CHECK(nominal_bits(0) == 0);
    CHECK(nominal_bits(1) == 0);
    CHECK(nominal_bits(2) == 1);
    CHECK(nominal_bits(3) == 2);
    CHECK(nominal_bits(4) == 2);
    CHECK(nominal_bits(256) == 8);
    CHECK(nominal_bits(257) == 9);
}

TEST_CASE("toy fixture") {
    const auto& t = fixtures::toy();
    CHECK(t.reached_target);
    CHECK(t.train_accuracy >= 0.95);
    CHECK(t.model.tensors.size() == 6);
    CHECK(t.model.find("fc2.w")->dims == std::vector<std::uint32_t>{64, 64});
    CHECK(t.calib.count == 256);
    CHECK(t.eval.inputs.count == 300);
    CHECK(accuracy(t.model, t.train) == t.train_accuracy);

    const auto s = spiral(5, 3, 7);
    CHECK(s.inputs.count == 15);
    CHECK(s.labels == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2});
    CHECK(s.inputs.data[0] == 0.0f);  // radius 0 at the start of every arm
    CHECK(spiral(5, 3, 7).inputs == s.inputs);

    const auto dir = fixtures::scratch_dir("toy");
    save_toy(t, dir);
    CHECK(load_raw_model(dir / "model.l2rm") == t.model);
    CHECK(load_calibration(dir / "calib.l2ca") == t.calib);
    const auto eval = load_labeled_csv(dir / "eval.csv");
    CHECK(eval.labels == t.eval.labels);
    CHECK(eval.inputs.data == t.eval.inputs.data);
    CHECK(accuracy(t.model, eval) == accuracy(t.model, t.eval));
}

TEST_CASE("compress meets the target and the archive decodes losslessly") {
    const auto& t = fixtures::toy();
    const auto& o = outcome();
    CHECK(o.target_met());
    CHECK(o.file_cr() >= 8.0);
    CHECK(o.file_cr() == doctest::Approx(double(original_bits(t.model)) / (8.0 * double(o.bytes.size()))));
    CHECK(o.entropy_cr() > o.file_cr());
    CHECK(o.bias_elements == 64 + 64 + 3);
    CHECK(o.bytes == codec::pack_archive(o.archive));

    const auto decoded = decompress(o.bytes);
    CHECK(decoded == o.compressed);
    CHECK(forward_outputs(decoded, t.calib) == forward_outputs(o.compressed, t.calib));

    // every weight is the float cast of its grid value
    for (const auto& layer : o.calib.symbols) {
        const auto* w = decoded.find(layer.name);
        for (std::size_t i = 0; i < layer.symbols.size(); ++i)
            REQUIRE(w->data[i] == static_cast<float>(layer.spec.inverse(static_cast<double>(layer.symbols[i]))));
    }
    for (const auto& b : o.calib.biases) CHECK(decoded.find(b.name)->data == b.dequantized());

    const auto dir = fixtures::scratch_dir("pipeline");
    save_raw_model(decoded, dir / "out.l2rm");
    CHECK(load_raw_model(dir / "out.l2rm") == decoded);
}

TEST_CASE("forward_outputs agrees with a per-sample forward") {
    const auto& t = fixtures::toy();
    const auto a = forward_outputs(t.model, t.calib);
    const auto b = naive_outputs(t.model, t.calib);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12).scale(1e-12));
}

TEST_CASE("verify") {
    const auto& t = fixtures::toy();
    const auto& o = outcome();

    SUBCASE("fresh archive passes with the recomputed deviation") {
        const auto v = verify(o.bytes, t.model, t.calib);
        CHECK(v.ok);
        const auto y = naive_outputs(t.model, t.calib);
        const auto yh = naive_outputs(o.compressed, t.calib);
        double mx = 0.0, mse = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            mx = std::max(mx, std::abs(y[i] - yh[i]));
            mse += (y[i] - yh[i]) * (y[i] - yh[i]);
        }
        mse /= static_cast<double>(y.size());
        CHECK(v.max_abs_deviation == doctest::Approx(mx).epsilon(1e-9));
        CHECK(v.mse == doctest::Approx(mse).epsilon(1e-9));
        CHECK(v.max_abs_deviation > 0.0);
    }
    SUBCASE("an edited frequency table fails naming the layer") {
        auto a = o.archive;
        auto& table = a.layers[1].table;
        std::size_t from = 0, to = 0;
        for (std::size_t k = 0; k < table.counts.size(); ++k)
            if (table.counts[k] > table.counts[from]) from = k;
        to = from == 0 ? 1 : from - 1;
        table.counts[from] -= 1;
        table.counts[to] += 1;
        const auto v = verify(codec::pack_archive(a), t.model, t.calib);
        CHECK_FALSE(v.ok);
        CHECK(v.first_mismatch == a.layers[1].name);
        CHECK(v.message.find(a.layers[1].name) != std::string::npos);
    }
    SUBCASE("a flipped payload byte is a format error") {
        auto bytes = o.bytes;
        const auto sizes = codec::itemize(o.archive);
        // last payload byte of the final layer sits just before its checksum
        std::size_t end = sizes.preamble + sizes.topology;
        for (const auto& l : sizes.layers) end += l.total();
        bytes[end - 9] ^= 0x40;
        CHECK_THROWS_AS(verify(bytes, t.model, t.calib), FormatError);
        CHECK_THROWS_AS(decompress(bytes), FormatError);
    }
    SUBCASE("a different model fails the structural comparison") {
        const auto other = fixtures::mlp({2, 8, 3}, 1);
        const auto v = verify(o.bytes, other, t.calib);
        CHECK_FALSE(v.ok);
    }
}

TEST_CASE("report") {
    const auto& o = outcome();
    const auto r = report(o.bytes);
    CHECK(r.file_bytes == o.bytes.size());
    CHECK(r.original_bits == o.original_bits);
    CHECK(r.total.layer_cr == doctest::Approx(double(r.original_bits) / (8.0 * double(r.file_bytes))));
    REQUIRE(r.layers.size() == o.calib.symbols.size());

    std::size_t numel = 0;
    const auto sizes = codec::itemize(o.archive);
    for (std::size_t i = 0; i < r.layers.size(); ++i) {
        const auto& row = r.layers[i];
        const auto& s = o.calib.symbols[i].symbols;
        CHECK(row.layer == o.calib.symbols[i].name);
        CHECK(row.numel == s.size());
        // tallies by hand
        std::map<std::int64_t, std::size_t> hist;
        for (auto q : s) ++hist[q];
        double bits = 0.0;
        for (const auto& [q, n] : hist) bits -= double(n) * std::log2(double(n) / double(s.size()));
        const std::size_t zeros = hist.count(0) ? hist.at(0) : 0;
        CHECK(row.sparsity == doctest::Approx(double(zeros) / double(s.size())));
        CHECK(row.distinct_symbols == hist.size());
        CHECK(row.entropy_bits_per_weight == doctest::Approx(bits / double(s.size())).epsilon(1e-12));
        CHECK(row.nominal_bits == static_cast<unsigned>(std::ceil(std::log2(double(row.distinct_symbols)))));
        CHECK(row.layer_cr == doctest::Approx(32.0 * double(s.size()) / (8.0 * double(sizes.layers[i].total()))));
        numel += s.size();
    }
    CHECK(r.total.numel == numel + o.bias_elements);

    const auto csv = report_csv(r);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "layer,numel,sparsity,entropy_bits_per_weight,distinct_symbols,nominal_bits,layer_cr");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == r.layers.size() + 1);

    const auto j = report_json(r);
    CHECK(j["file_bytes"] == r.file_bytes);
    CHECK(j["layers"].size() == r.layers.size());
    CHECK(j["total"]["layer"] == "total");
    CHECK(j["layers"][0]["numel"] == r.layers[0].numel);
}

TEST_CASE("an all-zero layer reports sparsity 1 and zero bits") {
    ModelManifest m;
    m.input_dims = {2};
    m.tensors.push_back({"w", TensorKind::dense_weight, {2, 2}, {0.f, 0.f, 0.f, 0.f}});
    m.topology.push_back({OpKind::dense, "w"});
    const std::vector<codec::LayerSymbols> syms{{"w", TransformSpec::joint(0.1, 1.0), {0, 0, 0, 0}}};
    const auto bytes = codec::pack_archive(codec::build_archive(m, syms, {}));
    const auto r = report(bytes);
    CHECK(r.layers[0].sparsity == 1.0);
    CHECK(r.layers[0].entropy_bits_per_weight == 0.0);
    CHECK(r.layers[0].distinct_symbols == 1);
    CHECK(r.layers[0].nominal_bits == 0);
}

TEST_CASE("CR 1 is near-lossless and within target") {
    const auto& t = fixtures::toy();
    auto cfg = quick(1.0);
    cfg.epochs = 1;
    const auto o = compress_model(t.model, t.calib, cfg);
    CHECK(o.target_met());
    CHECK(o.file_cr() >= 1.0);
    CHECK(accuracy(o.compressed, t.eval) >= accuracy(t.model, t.eval) - 0.01);
}
