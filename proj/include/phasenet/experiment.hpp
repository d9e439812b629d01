#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "phasenet/mnist.hpp"
#include "phasenet/pruning.hpp"

namespace phasenet {

enum class NetKind { Complex, Real };
enum class PruneMode { Copy, Permanent };

struct ExperimentConfig {
    NetKind net_kind = NetKind::Complex;
    std::vector<std::size_t> hidden_dims{100};
    double lr = 0.0; // 0 selects the per-kind default: 0.05 complex, 0.1 real
    std::size_t steps = 3000;
    std::size_t batch_size = 100; // 0 = full batch
    std::size_t eval_every = 10;
    std::size_t eval_subset = 0; // 0 = full test set, else first N test columns
    std::vector<PruneVariant> variants; // empty selects every applicable variant
    std::uint64_t seed = 1;
    PruneMode prune_mode = PruneMode::Copy;
    HalfScope half_scope = HalfScope::PerMatrix;
    std::string data_dir = "data";
    std::string out_dir = "out";
};

struct TrialRecord {
    std::size_t step = 0;
    PruneVariant variant = PruneVariant::None;
    double test_accuracy = 0.0;
    double train_loss = 0.0;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Fills defaulted fields (lr, variants) and validates; throws config_error.
ExperimentConfig finalize_config(ExperimentConfig cfg);

/// Steps at which evaluation happens: 0, every eval_every-th step, and the
/// final step. Sorted, duplicate-free.
std::vector<std::size_t> evaluation_steps(std::size_t steps, std::size_t eval_every);

/// Fraction of columns whose probability argmax matches the label argmax.
/// Ties break toward the lowest class index.
double accuracy(const RealMatrix& probs, const RealMatrix& labels);

using AnyModel = std::variant<CvnnModel, RvnnModel>;

/// Trains one model from cfg.seed and records, at every evaluation step and
/// for every configured variant, the pruned model's test accuracy and its
/// cross-entropy on the training batch of that step. In copy mode all
/// variants share one trajectory and pruning touches only evaluation
/// copies; in permanent mode each variant trains its own model and pruning
/// replaces the live weights after every gradient update (and once at
/// initialization), so training continues from the pruned weights.
///
/// When final_model is non-null it receives the trained unpruned model;
/// that is only well defined in copy mode (permanent mode trains one model
/// per variant) and is rejected otherwise.
std::vector<TrialRecord> train_and_evaluate(const ExperimentConfig& cfg,
                                            const Dataset& train,
                                            const Dataset& test,
                                            AnyModel* final_model);
std::vector<TrialRecord> train_and_evaluate(const ExperimentConfig& cfg,
                                            const Dataset& train,
                                            const Dataset& test);

/// Convenience overload that loads MNIST from cfg.data_dir first.
std::vector<TrialRecord> train_and_evaluate(const ExperimentConfig& cfg);

/// Mean RandomHalf accuracy over the last `window` evaluation steps.
double benchmark_half(const std::vector<TrialRecord>& records, std::size_t window);
double benchmark_half(const ExperimentConfig& cfg, std::size_t window);

struct SweepResult {
    ExperimentConfig config;              // effective config, seed included
    std::vector<TrialRecord> records;
    std::string error;                    // empty on success
    int error_class = 0;                  // 0 ok, 1 config, 2 data, 3 runtime
};

/// Runs every config with seed = master_seed xor config index. Failures are
/// captured per config; results do not depend on the parallelism degree.
std::vector<SweepResult> run_sweep(std::vector<ExperimentConfig> configs,
                                   std::uint64_t master_seed,
                                   unsigned parallelism);

/// Line-oriented `key = value` file with `#` comments. Later duplicates win.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Applies one key (the CLI flag names: net, hidden, lr, steps, batch,
/// eval-every, eval-subset, variants, seed, prune-mode, half-scope,
/// data-dir, out) to a config. Unknown keys are rejected.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

struct SweepPlan {
    std::vector<ExperimentConfig> configs; // seeds assigned later by run_sweep
    std::uint64_t master_seed = 1;
    std::string out_dir = "out";
};

/// Expands config entries into a sweep: `sweep-hidden = 512|20|512,100`
/// yields one config per `|` group and `repeats = k` clones each group k
/// times (distinct seeds come from the xor-with-index rule). Without
/// sweep-hidden the single `hidden` value forms a one-config sweep.
SweepPlan expand_sweep(const std::map<std::string, std::string>& entries);

const char* net_kind_token(NetKind k);
const char* prune_mode_token(PruneMode m);

} // namespace phasenet
