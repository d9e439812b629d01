#include "phasenet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <string_view>
#include <thread>
#include <utility>

#include "phasenet/cvnn.hpp"
#include "phasenet/errors.hpp"
#include "phasenet/loss.hpp"
#include "phasenet/rng.hpp"
#include "phasenet/rvnn.hpp"

namespace phasenet {

namespace {

std::string trim(std::string_view s) {
    const auto space = [](char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n';
    };
    while (!s.empty() && space(s.front())) s.remove_prefix(1);
    while (!s.empty() && space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw config_error("invalid value for " + key + ": '" + value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v{};
    const char* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (value.empty() || ec != std::errc() || p != end) bad_value(key, value);
    return v;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_real(const std::string& key, const std::string& value) {
    double v{};
    const char* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (value.empty() || ec != std::errc() || p != end) bad_value(key, value);
    return v;
}

std::vector<std::size_t> parse_dims(const std::string& key, const std::string& value) {
    std::vector<std::size_t> dims;
    for (const std::string& tok : split_list(value, ',')) {
        if (tok.empty()) bad_value(key, value);
        dims.push_back(parse_count(key, tok));
        if (dims.back() == 0) bad_value(key, value);
    }
    return dims;
}

std::vector<PruneVariant> parse_variants(const std::string& value) {
    std::vector<PruneVariant> vs;
    for (const std::string& tok : split_list(value, ',')) {
        if (tok.empty()) throw config_error("empty variant name in '" + value + "'");
        vs.push_back(parse_variant(tok));
    }
    return vs;
}

RealMatrix slice_cols(const RealMatrix& src, std::size_t start, std::size_t count) {
    RealMatrix out(src.rows, count);
    const std::size_t first = std::min(count, src.cols - start);
    for (std::size_t r = 0; r < src.rows; ++r) {
        const double* in = src.row(r);
        double* dst = out.row(r);
        std::copy(in + start, in + start + first, dst);
        std::copy(in, in + (count - first), dst + first);
    }
    return out;
}

struct ComplexOps {
    using Model = CvnnModel;
    using Mat = ComplexMatrix;
    static const Mat& input(const Dataset& d) { return d.complex_x(); }
    static std::size_t rows(const Mat& m) { return m.rows(); }
    static std::size_t cols(const Mat& m) { return m.cols(); }
    static Mat slice(const Mat& m, std::size_t start, std::size_t count) {
        return {slice_cols(m.re, start, count), slice_cols(m.im, start, count)};
    }
    static Model init(const std::vector<std::size_t>& dims, std::uint64_t seed) {
        return init_model(dims, seed);
    }
    static RealMatrix predict(const Model& model, const Mat& x) {
        return forward(model, x).a.back().re;
    }
    static void train_step(Model& model, const Mat& bx, const RealMatrix& by,
                           double lr) {
        const ForwardCache cache = forward(model, bx);
        sgd_step(model, backward(model, cache, bx, by), lr);
    }
    static Model prune(const Model& model, PruneVariant v, std::uint64_t seed,
                       HalfScope scope) {
        return prune_complex(model, v, seed, scope);
    }
};

struct RealOps {
    using Model = RvnnModel;
    using Mat = RealMatrix;
    static const Mat& input(const Dataset& d) { return d.real_x(); }
    static std::size_t rows(const Mat& m) { return m.rows; }
    static std::size_t cols(const Mat& m) { return m.cols; }
    static Mat slice(const Mat& m, std::size_t start, std::size_t count) {
        return slice_cols(m, start, count);
    }
    static Model init(const std::vector<std::size_t>& dims, std::uint64_t seed) {
        return r_init_model(dims, seed);
    }
    static RealMatrix predict(const Model& model, const Mat& x) {
        return r_forward(model, x).a.back();
    }
    static void train_step(Model& model, const Mat& bx, const RealMatrix& by,
                           double lr) {
        const RvnnForwardCache cache = r_forward(model, bx);
        r_sgd_step(model, r_backward(model, cache, bx, by), lr);
    }
    static Model prune(const Model& model, PruneVariant v, std::uint64_t seed,
                       HalfScope scope) {
        return prune_real(model, v, seed, scope);
    }
};

std::size_t variant_pos(const std::vector<PruneVariant>& vs, PruneVariant v) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (vs[i] == v) return i;
    }
    return vs.size();
}

template <class Ops>
std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg,
                                   const Dataset& train, const Dataset& test,
                                   AnyModel* final_model) {
    if (final_model != nullptr && cfg.prune_mode != PruneMode::Copy) {
        throw config_error("the final model is only defined for prune-mode copy");
    }
    const auto& train_x = Ops::input(train);
    const auto& test_x = Ops::input(test);
    const RealMatrix& train_y = train.y;
    const RealMatrix& test_y = test.y;

    const std::size_t m = Ops::cols(train_x);
    const std::size_t tm = Ops::cols(test_x);
    if (m == 0 || train_y.cols != m) {
        throw data_error("training set is empty or label counts disagree");
    }
    if (tm == 0 || test_y.cols != tm) {
        throw data_error("test set is empty or label counts disagree");
    }
    if (cfg.batch_size > m) {
        throw config_error("batch size exceeds the training set size");
    }
    if (cfg.eval_subset > tm) {
        throw config_error("eval subset exceeds the test set size");
    }
    const std::size_t batch = cfg.batch_size == 0 ? m : cfg.batch_size;
    const bool full_batch = batch == m;
    const std::size_t sub = cfg.eval_subset == 0 ? tm : cfg.eval_subset;

    typename Ops::Mat eval_x_store;
    RealMatrix eval_y_store;
    const typename Ops::Mat* eval_x = &test_x;
    const RealMatrix* eval_y = &test_y;
    if (sub != tm) {
        eval_x_store = Ops::slice(test_x, 0, sub);
        eval_y_store = slice_cols(test_y, 0, sub);
        eval_x = &eval_x_store;
        eval_y = &eval_y_store;
    }

    std::vector<std::size_t> dims;
    dims.push_back(Ops::rows(train_x));
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(train_y.rows);

    const std::vector<std::size_t> points =
        evaluation_steps(cfg.steps, cfg.eval_every);

    // Runs the shared training loop. after_step(step, model) fires once for
    // the initial weights and then after every gradient update; on_eval(step,
    // model, batch) fires at every evaluation step with the batch of the
    // update just taken (the upcoming first batch for step 0).
    const auto training_loop = [&](typename Ops::Model& model, auto&& after_step,
                                   auto&& on_eval) {
        std::size_t pi = 0;
        after_step(std::size_t{0}, model);
        if (points[pi] == 0) {
            if (full_batch) {
                on_eval(std::size_t{0}, model, train_x, train_y);
            } else {
                const auto bx = Ops::slice(train_x, 0, batch);
                const auto by = slice_cols(train_y, 0, batch);
                on_eval(std::size_t{0}, model, bx, by);
            }
            ++pi;
        }
        for (std::size_t s = 1; s <= cfg.steps; ++s) {
            const bool at_point = pi < points.size() && points[pi] == s;
            if (full_batch) {
                Ops::train_step(model, train_x, train_y, cfg.lr);
                after_step(s, model);
                if (at_point) {
                    on_eval(s, model, train_x, train_y);
                    ++pi;
                }
            } else {
                const std::size_t start = ((s - 1) * batch) % m;
                const auto bx = Ops::slice(train_x, start, batch);
                const auto by = slice_cols(train_y, start, batch);
                Ops::train_step(model, bx, by, cfg.lr);
                after_step(s, model);
                if (at_point) {
                    on_eval(s, model, bx, by);
                    ++pi;
                }
            }
        }
    };
    const auto no_step_hook = [](std::size_t, typename Ops::Model&) {};

    std::vector<TrialRecord> records;
    records.reserve(points.size() * cfg.variants.size());

    if (cfg.prune_mode == PruneMode::Copy) {
        typename Ops::Model model = Ops::init(dims, cfg.seed);
        training_loop(model, no_step_hook,
                      [&](std::size_t p, typename Ops::Model& live,
                          const typename Ops::Mat& bx, const RealMatrix& by) {
            for (PruneVariant v : cfg.variants) {
                const typename Ops::Model pruned =
                    Ops::prune(live, v, mix_seed(cfg.seed, p), cfg.half_scope);
                records.push_back({p, v,
                                   accuracy(Ops::predict(pruned, *eval_x), *eval_y),
                                   cross_entropy(Ops::predict(pruned, bx), by)});
            }
        });
        if (final_model != nullptr) *final_model = std::move(model);
    } else {
        // Pruning inside the training loop: the projection runs after every
        // update (and once on the initial weights), so training continues
        // from pruned weights and the recorded model is the live one. None
        // is the identity and is skipped to keep its trajectory bit-equal to
        // copy mode's.
        for (PruneVariant v : cfg.variants) {
            typename Ops::Model model = Ops::init(dims, cfg.seed);
            const auto project = [&](std::size_t s, typename Ops::Model& live) {
                if (v == PruneVariant::None) return;
                live = Ops::prune(live, v, mix_seed(cfg.seed, s), cfg.half_scope);
            };
            training_loop(model, project,
                          [&](std::size_t p, typename Ops::Model& live,
                              const typename Ops::Mat& bx, const RealMatrix& by) {
                records.push_back({p, v,
                                   accuracy(Ops::predict(live, *eval_x), *eval_y),
                                   cross_entropy(Ops::predict(live, bx), by)});
            });
        }
    }

    std::stable_sort(records.begin(), records.end(),
                     [&](const TrialRecord& a, const TrialRecord& b) {
                         if (a.step != b.step) return a.step < b.step;
                         return variant_pos(cfg.variants, a.variant) <
                                variant_pos(cfg.variants, b.variant);
                     });
    return records;
}

} // namespace

const char* net_kind_token(NetKind k) {
    return k == NetKind::Complex ? "complex" : "real";
}

const char* prune_mode_token(PruneMode m) {
    return m == PruneMode::Copy ? "copy" : "permanent";
}

ExperimentConfig finalize_config(ExperimentConfig cfg) {
    if (cfg.lr == 0.0) {
        cfg.lr = cfg.net_kind == NetKind::Complex ? 0.05 : 0.1;
    }
    if (cfg.variants.empty()) {
        cfg.variants =
            cfg.net_kind == NetKind::Complex
                ? std::vector<PruneVariant>{PruneVariant::None,
                                            PruneVariant::RandomHalf,
                                            PruneVariant::PhaseOnly,
                                            PruneVariant::AmplitudeOnly,
                                            PruneVariant::RealOnly,
                                            PruneVariant::ImagOnly}
                : std::vector<PruneVariant>{PruneVariant::None,
                                            PruneVariant::RandomHalf,
                                            PruneVariant::SignOnly,
                                            PruneVariant::MagnitudeOnly};
    }
    std::vector<PruneVariant> unique;
    for (PruneVariant v : cfg.variants) {
        if (variant_pos(unique, v) == unique.size()) unique.push_back(v);
    }
    cfg.variants = std::move(unique);

    if (!std::isfinite(cfg.lr) || cfg.lr <= 0.0) {
        throw config_error("lr must be a positive number");
    }
    if (cfg.steps < 1) throw config_error("steps must be >= 1");
    if (cfg.eval_every < 1) throw config_error("eval-every must be >= 1");
    if (cfg.hidden_dims.empty()) {
        throw config_error("at least one hidden layer width is required");
    }
    for (std::size_t d : cfg.hidden_dims) {
        if (d == 0) throw config_error("hidden layer widths must be positive");
    }
    for (PruneVariant v : cfg.variants) {
        const bool ok = cfg.net_kind == NetKind::Complex ? applies_to_complex(v)
                                                         : applies_to_real(v);
        if (!ok) {
            throw config_error(std::string(variant_token(v)) +
                               " cannot be used with a " +
                               net_kind_token(cfg.net_kind) + " net");
        }
    }
    return cfg;
}

std::vector<std::size_t> evaluation_steps(std::size_t steps, std::size_t eval_every) {
    if (steps < 1 || eval_every < 1) {
        throw config_error("steps and eval-every must be >= 1");
    }
    std::vector<std::size_t> pts;
    for (std::size_t p = 0; p < steps; p += eval_every) pts.push_back(p);
    pts.push_back(steps);
    return pts;
}

double accuracy(const RealMatrix& probs, const RealMatrix& labels) {
    if (!probs.same_shape(labels)) {
        throw shape_error("accuracy: probability and label shapes differ");
    }
    if (probs.cols == 0 || probs.rows == 0) {
        throw shape_error("accuracy: empty batch");
    }
    std::size_t correct = 0;
    for (std::size_t j = 0; j < probs.cols; ++j) {
        std::size_t bp = 0;
        std::size_t bl = 0;
        for (std::size_t i = 1; i < probs.rows; ++i) {
            if (probs(i, j) > probs(bp, j)) bp = i;
            if (labels(i, j) > labels(bl, j)) bl = i;
        }
        correct += bp == bl ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.cols);
}

std::vector<TrialRecord> train_and_evaluate(const ExperimentConfig& cfg0,
                                            const Dataset& train,
                                            const Dataset& test,
                                            AnyModel* final_model) {
    const ExperimentConfig cfg = finalize_config(cfg0);
    const bool want_complex = cfg.net_kind == NetKind::Complex;
    const bool have_complex = std::holds_alternative<ComplexMatrix>(train.x) &&
                              std::holds_alternative<ComplexMatrix>(test.x);
    const bool have_real = std::holds_alternative<RealMatrix>(train.x) &&
                           std::holds_alternative<RealMatrix>(test.x);
    if (want_complex ? !have_complex : !have_real) {
        throw config_error("dataset encoding does not match the net kind");
    }
    return want_complex ? run_trial<ComplexOps>(cfg, train, test, final_model)
                        : run_trial<RealOps>(cfg, train, test, final_model);
}

std::vector<TrialRecord> train_and_evaluate(const ExperimentConfig& cfg,
                                            const Dataset& train,
                                            const Dataset& test) {
    return train_and_evaluate(cfg, train, test, nullptr);
}

std::vector<TrialRecord> train_and_evaluate(const ExperimentConfig& cfg0) {
    const ExperimentConfig cfg = finalize_config(cfg0);
    const Encode enc =
        cfg.net_kind == NetKind::Complex ? Encode::Complex : Encode::Real;
    const Dataset train = load_mnist(cfg.data_dir, Split::Train, enc);
    const Dataset test = load_mnist(cfg.data_dir, Split::Test, enc);
    return train_and_evaluate(cfg, train, test);
}

double benchmark_half(const std::vector<TrialRecord>& records, std::size_t window) {
    if (window == 0) throw config_error("window must be >= 1");
    std::vector<std::pair<std::size_t, double>> half;
    for (const TrialRecord& r : records) {
        if (r.variant == PruneVariant::RandomHalf) {
            half.emplace_back(r.step, r.test_accuracy);
        }
    }
    std::stable_sort(half.begin(), half.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (half.size() < window) {
        throw config_error("need at least " + std::to_string(window) +
                           " RandomHalf evaluations, have " +
                           std::to_string(half.size()));
    }
    double sum = 0.0;
    for (std::size_t i = half.size() - window; i < half.size(); ++i) {
        sum += half[i].second;
    }
    return sum / static_cast<double>(window);
}

double benchmark_half(const ExperimentConfig& cfg0, std::size_t window) {
    const ExperimentConfig cfg = finalize_config(cfg0);
    if (variant_pos(cfg.variants, PruneVariant::RandomHalf) == cfg.variants.size()) {
        throw config_error("the half variant must be enabled for bench-half");
    }
    return benchmark_half(train_and_evaluate(cfg), window);
}

std::vector<SweepResult> run_sweep(std::vector<ExperimentConfig> configs,
                                   std::uint64_t master_seed,
                                   unsigned parallelism) {
    std::vector<SweepResult> results(configs.size());
    if (configs.empty()) return results;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        configs[i].seed = master_seed ^ static_cast<std::uint64_t>(i);
    }

    struct LoadedPair {
        Dataset train;
        Dataset test;
    };
    std::map<std::pair<std::string, int>, std::shared_ptr<const LoadedPair>> cache;
    std::mutex cache_mu;
    const auto data_for =
        [&](const ExperimentConfig& cfg) -> std::shared_ptr<const LoadedPair> {
        const std::pair<std::string, int> key{
            cfg.data_dir, cfg.net_kind == NetKind::Complex ? 1 : 0};
        const std::lock_guard<std::mutex> lock(cache_mu);
        if (const auto it = cache.find(key); it != cache.end()) return it->second;
        const Encode enc =
            cfg.net_kind == NetKind::Complex ? Encode::Complex : Encode::Real;
        auto loaded = std::make_shared<LoadedPair>(
            LoadedPair{load_mnist(cfg.data_dir, Split::Train, enc),
                       load_mnist(cfg.data_dir, Split::Test, enc)});
        cache.emplace(key, loaded);
        return loaded;
    };

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
            SweepResult& r = results[i];
            r.config = configs[i];
            try {
                const ExperimentConfig cfg = finalize_config(configs[i]);
                r.config = cfg;
                const auto data = data_for(cfg);
                r.records = train_and_evaluate(cfg, data->train, data->test);
            } catch (const config_error& e) {
                r.error = e.what();
                r.error_class = 1;
            } catch (const data_error& e) {
                r.error = e.what();
                r.error_class = 2;
            } catch (const std::exception& e) {
                r.error = e.what();
                r.error_class = 3;
            }
        }
    };

    const std::size_t jobs =
        std::max<std::size_t>(1, std::min<std::size_t>(parallelism, configs.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }
    return results;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "net") {
        if (value == "complex") {
            cfg.net_kind = NetKind::Complex;
        } else if (value == "real") {
            cfg.net_kind = NetKind::Real;
        } else {
            throw config_error("net must be 'complex' or 'real', got '" + value +
                               "'");
        }
    } else if (key == "hidden") {
        cfg.hidden_dims = parse_dims(key, value);
    } else if (key == "lr") {
        cfg.lr = parse_real(key, value);
    } else if (key == "steps") {
        cfg.steps = parse_count(key, value);
    } else if (key == "batch") {
        cfg.batch_size = parse_count(key, value);
    } else if (key == "eval-every") {
        cfg.eval_every = parse_count(key, value);
    } else if (key == "eval-subset") {
        cfg.eval_subset = parse_count(key, value);
    } else if (key == "variants") {
        cfg.variants = parse_variants(value);
    } else if (key == "seed") {
        cfg.seed = parse_u64(key, value);
    } else if (key == "prune-mode") {
        if (value == "copy") {
            cfg.prune_mode = PruneMode::Copy;
        } else if (value == "permanent") {
            cfg.prune_mode = PruneMode::Permanent;
        } else {
            throw config_error("prune-mode must be 'copy' or 'permanent', got '" +
                               value + "'");
        }
    } else if (key == "half-scope") {
        cfg.half_scope = parse_half_scope(value);
    } else if (key == "data-dir") {
        cfg.data_dir = value;
    } else if (key == "out") {
        cfg.out_dir = value;
    } else {
        throw config_error("unknown config key: " + key);
    }
}

SweepPlan expand_sweep(const std::map<std::string, std::string>& entries) {
    ExperimentConfig base;
    std::vector<std::vector<std::size_t>> hidden_sets;
    std::size_t repeats = 1;
    for (const auto& [key, value] : entries) {
        if (key == "sweep-hidden") {
            for (const std::string& group : split_list(value, '|')) {
                if (group.empty()) bad_value(key, value);
                hidden_sets.push_back(parse_dims(key, group));
            }
        } else if (key == "repeats") {
            repeats = parse_count(key, value);
            if (repeats == 0) throw config_error("repeats must be >= 1");
        } else {
            apply_config_entry(base, key, value);
        }
    }
    if (hidden_sets.empty()) hidden_sets.push_back(base.hidden_dims);

    SweepPlan plan;
    plan.master_seed = base.seed;
    plan.out_dir = base.out_dir;
    for (const std::vector<std::size_t>& dims : hidden_sets) {
        for (std::size_t r = 0; r < repeats; ++r) {
            ExperimentConfig cfg = base;
            cfg.hidden_dims = dims;
            plan.configs.push_back(std::move(cfg));
        }
    }
    return plan;
}

} // namespace phasenet
