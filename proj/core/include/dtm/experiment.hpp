#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtm/features.hpp"
#include "dtm/memory.hpp"

namespace dtm {

/// Groups of labels sharing one register, e.g. {0,5},{1,6},... An empty
/// pairing means one register per label.
using LabelPairing = std::vector<LabelSet>;

/// Parses "0:5,1:6,2:7" into {{0,5},{1,6},{2,7}}. Throws kConfig on empty
/// groups or a label used twice.
LabelPairing parse_pairing(std::string_view text);

/// Stratified k-fold assignment: record index -> fold id in [0, k).
struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;

  std::vector<std::size_t> train_indices(std::size_t test_fold) const;
  std::vector<std::size_t> test_indices(std::size_t test_fold) const;
};

/// Shuffles each label's records with a seeded mt19937_64 and deals them
/// round-robin over k folds. Throws kStratification when a label has fewer
/// than k records, kConfig when k < 2.
FoldPlan make_folds(const Dataset& ds, std::size_t k, std::uint64_t seed);

/// One register per label (or per pairing group), each holding the
/// abstraction of the cues of its training records.
RegisterBank fill_bank(const Dataset& ds, std::span<const std::size_t> train, const QuantizationSpec& spec,
                       const LabelPairing& pairing = {});
RegisterBank fill_bank(const Dataset& ds, const FoldPlan& plan, std::size_t test_fold,
                       const QuantizationSpec& spec, const LabelPairing& pairing = {});

struct MetricsRow {
  std::size_t level = 0;
  std::size_t fold = 0;
  LabelSet labels;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double entropy = 0.0;
};

/// tp/(tp+fp) and tp/(tp+fn), each 1 when its denominator is 0.
double precision_of(std::size_t tp, std::size_t fp);
double recall_of(std::size_t tp, std::size_t fn);

/// Acceptance count of register `register_labels` over test records whose true
/// label is `true_label`.
struct ConfusionCell {
  std::size_t level = 0;
  std::string true_label;
  LabelSet register_labels;
  std::size_t accept_count = 0;
  std::size_t total = 0;
};

struct FoldEvaluation {
  std::vector<MetricsRow> rows;        // one per register, bank order
  std::vector<ConfusionCell> confusion;  // label-major, then bank order
};

/// Recognizes every test record against every register of the bank.
FoldEvaluation evaluate_fold(const RegisterBank& bank, const Dataset& ds, std::span<const std::size_t> test,
                             const QuantizationSpec& spec, std::size_t fold);
FoldEvaluation evaluate_fold(const RegisterBank& bank, const Dataset& ds, const FoldPlan& plan,
                             std::size_t test_fold, const QuantizationSpec& spec);

struct AggregateRow {
  std::size_t level = 0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_entropy = 0.0;
};

struct SweepConfig {
  std::vector<std::size_t> levels;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  LabelPairing pairing;
  /// Worker threads for (level, fold) cells; 0 = hardware concurrency.
  std::size_t threads = 1;
};

struct ExperimentReport {
  SweepConfig config;
  std::string mode;  // "kfold" or "fixed-split"
  std::vector<MetricsRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<ConfusionCell> confusion;  // summed over folds per level
  std::size_t degenerate_rows = 0;       // rows using the zero-denominator convention
};

/// Mean over registers within each fold, then over folds, per level (levels
/// in first-appearance order).
std::vector<AggregateRow> aggregate(std::span<const MetricsRow> rows);

/// Stratified k-fold sweep over every level in config.levels.
ExperimentReport run_sweep(const Dataset& ds, const SweepConfig& config);

/// Fills from `train`, tests on `test` (fold id 0), for every level.
ExperimentReport run_fixed_split(const Dataset& train, const Dataset& test, const SweepConfig& config);

/// CSV outputs, floats with 6 decimals, register labels joined by '+'.
void write_metrics_csv(std::ostream& out, const ExperimentReport& report);
void write_aggregates_csv(std::ostream& out, const ExperimentReport& report);
void write_confusion_csv(std::ostream& out, const ExperimentReport& report);

/// "%.6f" formatting shared by report writers and the CLI.
std::string format_fixed6(double value);

}  // namespace dtm
