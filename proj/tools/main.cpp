// Command line front end: train one model and dump its pruning trajectory,
// run a sweep over several architectures, report the random-half benchmark,
// or render a recorded trajectory as an SVG plot.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error
// (unreadable or malformed input files), 3 internal error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "phasenet/cvnn.hpp"
#include "phasenet/errors.hpp"
#include "phasenet/experiment.hpp"
#include "phasenet/mnist.hpp"
#include "phasenet/pruning.hpp"
#include "phasenet/report.hpp"
#include "phasenet/rvnn.hpp"

namespace {

using namespace phasenet;

// One slot per shared configuration flag. Values are kept as the raw
// strings and fed through apply_config_entry so the CLI and config files
// share one parser and one set of error messages.
struct ConfigFlags {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App& cmd, ConfigFlags& flags) {
    static const std::pair<const char*, const char*> kKeys[] = {
        {"net", "network kind: complex or real"},
        {"hidden", "comma separated hidden layer widths, e.g. 512,100"},
        {"lr", "learning rate (default 0.05 complex, 0.1 real)"},
        {"steps", "number of SGD steps"},
        {"batch", "minibatch size (0 = full batch)"},
        {"eval-every", "evaluate every this many steps"},
        {"eval-subset", "evaluate on the first N test samples (0 = all)"},
        {"variants", "comma separated pruning variants, e.g. none,phase,half"},
        {"seed", "RNG seed"},
        {"prune-mode", "copy (prune evaluation copies) or permanent (prune the live model after every step)"},
        {"half-scope", "random-half counting scope: per-matrix or global"},
        {"data-dir", "directory holding the MNIST IDX files"},
        {"out", "output directory"},
    };
    for (const auto& [key, help] : kKeys) {
        auto [it, inserted] = flags.values.emplace(key, std::string{});
        flags.options[key] =
            cmd.add_option("--" + it->first, it->second, help);
        (void)inserted;
    }
}

// Applies exactly the flags the user passed, leaving defaults untouched.
void apply_flags(ExperimentConfig& cfg, const ConfigFlags& flags) {
    for (const auto& [key, opt] : flags.options) {
        if (opt->count() > 0) apply_config_entry(cfg, key, flags.values.at(key));
    }
}

void merge_flags(std::map<std::string, std::string>& entries,
                 const ConfigFlags& flags) {
    for (const auto& [key, opt] : flags.options) {
        if (opt->count() > 0) entries[key] = flags.values.at(key);
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw data_error("cannot create output directory " + dir + ": " +
                         ec.message());
    }
}

std::string dims_token(const std::vector<std::size_t>& dims) {
    std::string s;
    for (std::size_t d : dims) {
        if (!s.empty()) s += ',';
        s += std::to_string(d);
    }
    return s;
}

int run_train(const ConfigFlags& flags, const std::string& save_model) {
    ExperimentConfig cfg;
    apply_flags(cfg, flags);
    const ExperimentConfig full = finalize_config(cfg);
    ensure_dir(full.out_dir);
    std::vector<TrialRecord> records;
    if (save_model.empty()) {
        records = train_and_evaluate(full);
    } else {
        const Encode enc = full.net_kind == NetKind::Complex ? Encode::Complex
                                                             : Encode::Real;
        const Dataset train = load_mnist(full.data_dir, Split::Train, enc);
        const Dataset test = load_mnist(full.data_dir, Split::Test, enc);
        AnyModel model;
        records = train_and_evaluate(full, train, test, &model);
        const std::string path = full.out_dir + "/" + save_model;
        if (std::holds_alternative<CvnnModel>(model)) {
            save_cvnn(std::get<CvnnModel>(model), path);
        } else {
            save_rvnn(std::get<RvnnModel>(model), path);
        }
        std::cout << "model: " << path << "\n";
    }
    const std::string csv = full.out_dir + "/records.csv";
    write_csv(records, csv);
    std::cout << "records: " << csv << " (" << records.size() << " rows)\n";
    return 0;
}

int run_sweep_cmd(const std::string& config_path, const ConfigFlags& flags,
                  unsigned jobs) {
    std::map<std::string, std::string> entries = parse_config_file(config_path);
    merge_flags(entries, flags);
    const SweepPlan plan = expand_sweep(entries);
    const std::vector<SweepResult> results =
        run_sweep(plan.configs, plan.master_seed, jobs);
    ensure_dir(plan.out_dir);
    int exit_code = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const SweepResult& r = results[i];
        const std::string label = "config " + std::to_string(i) + " (hidden=" +
                                  dims_token(r.config.hidden_dims) +
                                  " seed=" + std::to_string(r.config.seed) + ")";
        if (!r.error.empty()) {
            std::cerr << label << " failed: " << r.error << "\n";
            if (exit_code == 0) exit_code = r.error_class;
            continue;
        }
        const std::string csv =
            plan.out_dir + "/sweep_" + std::to_string(i) + ".csv";
        write_csv(r.records, csv);
        std::cout << label << " -> " << csv << " (" << r.records.size()
                  << " rows)\n";
    }
    return exit_code;
}

int run_bench_half(const ConfigFlags& flags, std::size_t window) {
    ExperimentConfig cfg;
    apply_flags(cfg, flags);
    std::cout << format_double(benchmark_half(cfg, window)) << "\n";
    return 0;
}

int run_plot(const std::string& in, const std::string& out) {
    emit_plot(read_csv(in), out);
    std::cout << "plot: " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dense MNIST classifiers with complex or real weights, plus "
                 "pruning operators that keep only part of each weight "
                 "(phase, amplitude, sign, magnitude, one component, or a "
                 "random half) and tools to track accuracy under pruning."};
    app.require_subcommand(1);

    ConfigFlags train_flags;
    std::string save_model;
    CLI::App* train_cmd = app.add_subcommand(
        "train", "train one model and record pruned accuracy over time");
    add_config_flags(*train_cmd, train_flags);
    train_cmd->add_option("--save-model", save_model,
                          "also save the final unpruned model under this "
                          "file name inside the output directory");

    ConfigFlags sweep_flags;
    std::string config_path;
    unsigned jobs = 1;
    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "run several configurations from a config file");
    sweep_cmd->add_option("--config", config_path, "key=value config file")
        ->required();
    add_config_flags(*sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--jobs", jobs, "worker threads (default 1)");

    ConfigFlags bench_flags;
    std::size_t window = 10;
    CLI::App* bench_cmd = app.add_subcommand(
        "bench-half", "print the mean random-half accuracy over the last "
                      "evaluation steps of one training run");
    add_config_flags(*bench_cmd, bench_flags);
    bench_cmd->add_option("--window", window,
                          "number of trailing evaluation steps to average");

    std::string plot_in;
    std::string plot_out = "curves.svg";
    CLI::App* plot_cmd =
        app.add_subcommand("plot", "render a records CSV as an SVG plot");
    plot_cmd->add_option("--in", plot_in, "records CSV produced by train or sweep")
        ->required();
    plot_cmd->add_option("--out", plot_out, "output SVG path");

    try {
        app.parse(argc, argv);
        if (*train_cmd) return run_train(train_flags, save_model);
        if (*sweep_cmd) return run_sweep_cmd(config_path, sweep_flags, jobs);
        if (*bench_cmd) return run_bench_half(bench_flags, window);
        if (*plot_cmd) return run_plot(plot_in, plot_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
