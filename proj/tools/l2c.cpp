// Copyright 2026 The l2c Authors
// SPDX-License-Identifier: Apache-2.0
//
// l2c: compress, inspect and restore model weight files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "l2c/bench.hpp"
#include "l2c/bytes.hpp"
#include "l2c/error.hpp"
#include "l2c/pipeline.hpp"
#include "l2c/toy.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kMismatch = 1, kInputError = 2, kTargetMissed = 3, kToyFailed = 4 };

struct CompressArgs {
    std::string model, calib, output, csv, json;
    double target_cr = 8.0;
    std::string transform = "joint";
    std::string kernel = "cosine";
    std::uint32_t resolution = 64;
    std::uint32_t epochs = 5;
    std::uint32_t transform_iters = 300;
    std::uint32_t finetune_iters = 1000;
    bool no_finetune = false;
    std::uint32_t calib_limit = 0;
    std::uint32_t batch_size = 32;
    double lambda = 1.0;
    double lr_transform = 1e-2;
    double lr_weights = 1e-4;
    double budget_margin = 0.02;
    std::uint64_t seed = 0;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw l2c::IoError("cannot write " + path);
    out << text;
}

int print_report(const std::vector<std::uint8_t>& bytes, const std::string& csv, const std::string& json) {
    const auto r = l2c::report(bytes);
    const auto table = l2c::report_csv(r);
    std::cout << table;
    if (!csv.empty()) write_text(csv, table);
    if (!json.empty()) write_text(json, l2c::report_json(r).dump(2) + "\n");
    return kOk;
}

int run_compress(const CompressArgs& a) {
    auto model = l2c::load_raw_model(a.model);
    auto calib = l2c::load_calibration(a.calib);
    if (a.calib_limit > 0) calib = l2c::truncate_calibration(calib, a.calib_limit);

    l2c::CalibConfig cfg;
    cfg.cr_target = a.target_cr;
    cfg.lambda = a.lambda;
    cfg.epochs = a.epochs;
    cfg.transform_iters = a.transform_iters;
    cfg.finetune_iters = a.no_finetune ? 0 : a.finetune_iters;
    cfg.batch_size = a.batch_size;
    cfg.lr_transform = a.lr_transform;
    cfg.lr_weights = a.lr_weights;
    cfg.budget_margin = a.budget_margin;
    cfg.transform = l2c::transform_kind_from_string(a.transform);
    cfg.counter.kernel = l2c::kernel_from_string(a.kernel);
    cfg.counter.resolution = a.resolution;
    cfg.counter.seed = a.seed;
    cfg.seed = a.seed;

    const auto out = l2c::compress_model(model, calib, cfg);
    const std::string path = a.output.empty() ? fs::path(a.model).replace_extension(".l2cm").string() : a.output;
    l2c::write_file(path, out.bytes);

    std::printf("archive: %s (%zu bytes)\n", path.c_str(), out.bytes.size());
    std::printf("file CR: %.4f  entropy CR: %.4f  target: %.4f\n", out.file_cr(), out.entropy_cr(), a.target_cr);
    std::printf("entropy bits: %.1f  budget: %.1f  lambda: %g%s\n", out.calib.achieved_bits, out.calib.budget_bits,
                out.calib.lambda, out.calib.projected ? "  (grids refit to the budget after training)" : "");
    print_report(out.bytes, a.csv, a.json);
    if (!out.target_met()) {
        std::fprintf(stderr, "target missed: %.1f entropy bits over a budget of %.1f\n", out.calib.achieved_bits,
                     out.calib.budget_bits);
        return kTargetMissed;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learned-transform weight compression with entropy coding"};
    app.require_subcommand(1);

    CompressArgs ca;
    auto* compress = app.add_subcommand("compress", "Calibrate transforms and write an L2CM archive");
    compress->add_option("model", ca.model, "L2RM model file")->required()->check(CLI::ExistingFile);
    compress->add_option("calib", ca.calib, "L2CA calibration file")->required()->check(CLI::ExistingFile);
    compress->add_option("-o,--output", ca.output, "Archive path (default: model path with .l2cm)");
    compress->add_option("--target-cr", ca.target_cr, "Target compression ratio")->check(CLI::PositiveNumber);
    compress->add_option("--transform", ca.transform, "Transform variant")
        ->check(CLI::IsMember({"linear", "log", "exp", "prune", "joint"}));
    compress->add_option("--kernel", ca.kernel, "Soft counter kernel")
        ->check(CLI::IsMember({"cosine", "linear", "triangle"}));
    compress->add_option("--resolution", ca.resolution, "Counter resolution")->check(CLI::PositiveNumber);
    compress->add_option("--epochs", ca.epochs, "Epochs");
    compress->add_option("--transform-iters", ca.transform_iters, "Transform iterations per epoch");
    compress->add_option("--finetune-iters", ca.finetune_iters, "Weight fine-tuning iterations per epoch");
    compress->add_flag("--no-finetune", ca.no_finetune, "Skip weight fine-tuning");
    compress->add_option("--calib-limit", ca.calib_limit, "Use only the first N calibration samples");
    compress->add_option("--batch-size", ca.batch_size, "Calibration batch size")->check(CLI::PositiveNumber);
    compress->add_option("--lambda", ca.lambda, "Initial regularizer weight")->check(CLI::NonNegativeNumber);
    compress->add_option("--lr-transform", ca.lr_transform, "Adam step for transform parameters")
        ->check(CLI::PositiveNumber);
    compress->add_option("--lr-weights", ca.lr_weights, "Adam step for weights")->check(CLI::PositiveNumber);
    compress->add_option("--budget-margin", ca.budget_margin, "Fraction of the bit budget held back")
        ->check(CLI::Range(0.0, 0.999));
    compress->add_option("--seed", ca.seed, "Random seed");
    compress->add_option("--csv", ca.csv, "Also write the per-layer report as CSV");
    compress->add_option("--json", ca.json, "Also write the per-layer report as JSON");

    std::string archive_path, out_path, model_path, calib_path, csv_path, json_path;
    auto* decompress = app.add_subcommand("decompress", "Restore an L2RM model from an archive");
    decompress->add_option("archive", archive_path)->required()->check(CLI::ExistingFile);
    decompress->add_option("output", out_path)->required();

    auto* verify = app.add_subcommand("verify", "Check an archive against its source model");
    verify->add_option("archive", archive_path)->required()->check(CLI::ExistingFile);
    verify->add_option("model", model_path)->required()->check(CLI::ExistingFile);
    verify->add_option("calib", calib_path)->required()->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "Per-layer statistics of an archive");
    report->add_option("archive", archive_path)->required()->check(CLI::ExistingFile);
    report->add_option("--csv", csv_path, "Write CSV here as well");
    report->add_option("--json", json_path, "Write JSON here (printed to stdout when '-')");

    std::string toy_dir;
    std::uint64_t toy_seed = 0;
    auto* toy = app.add_subcommand("make-toy", "Train the spiral MLP and write model, calibration and eval files");
    toy->add_option("dir", toy_dir)->required();
    toy->add_option("--seed", toy_seed, "Random seed");

    std::string eval_path;
    auto* evaluate = app.add_subcommand("evaluate", "Classification accuracy of a model on a labelled CSV");
    evaluate->add_option("model", model_path)->required()->check(CLI::ExistingFile);
    evaluate->add_option("eval", eval_path)->required()->check(CLI::ExistingFile);

    std::uint64_t bench_seed = 0;
    std::size_t bench_count = 100000;
    auto* bench = app.add_subcommand("bench-codec", "Huffman vs range coding on synthetic symbol streams");
    bench->add_option("--seed", bench_seed, "Random seed");
    bench->add_option("--count", bench_count, "Symbols per stream")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (*compress) return run_compress(ca);
        if (*decompress) {
            const auto bytes = l2c::read_file(archive_path);
            l2c::save_raw_model(l2c::decompress(bytes), out_path);
            std::printf("wrote %s\n", out_path.c_str());
            return kOk;
        }
        if (*verify) {
            const auto bytes = l2c::read_file(archive_path);
            const auto rep = l2c::verify(bytes, l2c::load_raw_model(model_path), l2c::load_calibration(calib_path));
            if (!rep.ok) {
                std::fprintf(stderr, "verify failed: %s\n", rep.message.c_str());
                return kMismatch;
            }
            std::printf("verify ok: max output deviation %.9g, output mse %.9g\n", rep.max_abs_deviation, rep.mse);
            return kOk;
        }
        if (*report) {
            const auto bytes = l2c::read_file(archive_path);
            if (json_path == "-") {
                std::cout << l2c::report_json(l2c::report(bytes)).dump(2) << "\n";
                return kOk;
            }
            return print_report(bytes, csv_path, json_path);
        }
        if (*toy) {
            l2c::ToyConfig cfg;
            cfg.seed = toy_seed;
            const auto b = l2c::make_toy(cfg);
            std::printf("train accuracy %.4f after %u steps\n", b.train_accuracy, b.steps);
            if (!b.reached_target) {
                std::fprintf(stderr, "toy training stalled below %.2f accuracy; try another seed\n",
                             cfg.target_accuracy);
                return kToyFailed;
            }
            l2c::save_toy(b, toy_dir);
            std::printf("eval accuracy %.4f\nwrote %s/{model.l2rm,calib.l2ca,eval.csv}\n",
                        l2c::accuracy(b.model, b.eval), toy_dir.c_str());
            return kOk;
        }
        if (*evaluate) {
            const auto acc = l2c::accuracy(l2c::load_raw_model(model_path), l2c::load_labeled_csv(eval_path));
            std::printf("accuracy %.6f\n", acc);
            return kOk;
        }
        if (*bench) {
            std::cout << l2c::bench_table(l2c::bench_codec(bench_seed, bench_count));
            return kOk;
        }
    } catch (const l2c::CodecError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInputError;
    } catch (const l2c::DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kTargetMissed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInputError;
    }
    return kInputError;
}
