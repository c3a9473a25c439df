#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dtm/grid.hpp"

namespace dtm {

struct FeatureRecord {
  std::string label;
  std::vector<double> values;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

/// Equal-width binning of [lo, hi] into `levels` grid rows.
class QuantizationSpec {
 public:
  static constexpr double kDefaultLo = 0.0;
  static constexpr double kDefaultHi = 10.0;
  static constexpr std::size_t kDefaultFeatures = 625;

  /// Throws kConfig unless levels >= 1, n_features >= 1 and hi > lo.
  QuantizationSpec(std::size_t levels, double lo = kDefaultLo, double hi = kDefaultHi,
                   std::size_t n_features = kDefaultFeatures);

  std::size_t levels() const noexcept { return levels_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t n_features() const noexcept { return n_features_; }

 private:
  std::size_t levels_;
  double lo_;
  double hi_;
  std::size_t n_features_;
};

/// Level in [1, L]: x is clamped into [lo, hi], then
/// min(L, floor((x - lo) * L / (hi - lo)) + 1).
std::size_t quantize_value(double x, const QuantizationSpec& spec);

/// Total function grid (n_features x levels) with one mark per column.
/// Throws kShape when the record length differs from spec.n_features().
Grid cue_from_record(const FeatureRecord& rec, const QuantizationSpec& spec);
Grid cue_from_values(std::span<const double> values, const QuantizationSpec& spec);

/// Number of values of `values` lying outside [lo, hi].
std::size_t count_out_of_range(std::span<const double> values, double lo, double hi);

class Dataset {
 public:
  Dataset(std::size_t n_features, double lo, double hi);

  std::size_t n_features() const noexcept { return n_features_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const std::vector<FeatureRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }

  /// Throws kShape on a length mismatch.
  void add(FeatureRecord rec);

  /// Record count per label, in label order.
  std::map<std::string, std::size_t> label_counts() const;
  std::vector<std::string> labels() const;

  QuantizationSpec spec(std::size_t levels) const { return QuantizationSpec(levels, lo_, hi_, n_features_); }

  /// Values outside the declared range over all records (clamped on cue construction).
  std::size_t clamped_value_count() const;

 private:
  std::size_t n_features_;
  double lo_;
  double hi_;
  std::vector<FeatureRecord> records_;
};

/// Feature file:
///
///   #dtm-features v1 n=<n_features> lo=<lo> hi=<hi>
///   <label>,<v1>,...,<vn>
///
/// Lines beginning with '#' after the header are comments. Parse errors name
/// the offending line.
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);
void save_dataset(std::ostream& out, const Dataset& ds);

}  // namespace dtm
