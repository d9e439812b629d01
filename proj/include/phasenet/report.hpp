#pragma once

#include <string>
#include <vector>

#include "phasenet/experiment.hpp"

namespace phasenet {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// Header `step,variant,test_accuracy,train_loss`, one row per record,
/// UTF-8 with LF line endings. Doubles round-trip exactly through read_csv.
void write_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_csv(const std::string& path);

/// Standalone SVG with one accuracy-over-steps polyline per variant, axes,
/// and a legend naming the variants. Rejects an empty record list.
void emit_plot(const std::vector<TrialRecord>& records, const std::string& path);

} // namespace phasenet
