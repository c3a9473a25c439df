#include "dtm/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "dtm/error.hpp"
#include "dtm/memory.hpp"
#include "text_util.hpp"

namespace dtm {

QuantizationSpec::QuantizationSpec(std::size_t levels, double lo, double hi, std::size_t n_features)
    : levels_(levels), lo_(lo), hi_(hi), n_features_(n_features) {
  if (levels == 0) throw Error(ErrorKind::kConfig, "quantization needs at least one level");
  if (n_features == 0) throw Error(ErrorKind::kConfig, "quantization needs at least one feature");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw Error(ErrorKind::kConfig, "quantization range needs finite hi > lo");
  }
}

std::size_t quantize_value(double x, const QuantizationSpec& spec) {
  if (std::isnan(x)) x = spec.lo();
  x = std::clamp(x, spec.lo(), spec.hi());
  const double scaled = (x - spec.lo()) * static_cast<double>(spec.levels()) / (spec.hi() - spec.lo());
  const auto level = static_cast<std::size_t>(std::floor(scaled)) + 1;
  return std::min(spec.levels(), level);
}

Grid cue_from_values(std::span<const double> values, const QuantizationSpec& spec) {
  if (values.size() != spec.n_features()) {
    throw Error(ErrorKind::kShape, "record has " + std::to_string(values.size()) +
                                       " features, expected " + std::to_string(spec.n_features()));
  }
  Grid cue(spec.n_features(), spec.levels());
  for (std::size_t i = 0; i < values.size(); ++i) cue.set(i + 1, quantize_value(values[i], spec));
  return cue;
}

Grid cue_from_record(const FeatureRecord& rec, const QuantizationSpec& spec) {
  return cue_from_values(rec.values, spec);
}

std::size_t count_out_of_range(std::span<const double> values, double lo, double hi) {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [&](double v) { return !(v >= lo && v <= hi); }));
}

Dataset::Dataset(std::size_t n_features, double lo, double hi) : n_features_(n_features), lo_(lo), hi_(hi) {
  QuantizationSpec(1, lo, hi, n_features);  // validates the declaration
}

void Dataset::add(FeatureRecord rec) {
  if (rec.values.size() != n_features_) {
    throw Error(ErrorKind::kShape, "record has " + std::to_string(rec.values.size()) +
                                       " features, dataset declares " + std::to_string(n_features_));
  }
  validate_label(rec.label);
  records_.push_back(std::move(rec));
}

std::map<std::string, std::size_t> Dataset::label_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records_) ++counts[r.label];
  return counts;
}

std::vector<std::string> Dataset::labels() const {
  std::vector<std::string> out;
  for (const auto& [label, count] : label_counts()) out.push_back(label);
  return out;
}

std::size_t Dataset::clamped_value_count() const {
  std::size_t total = 0;
  for (const auto& r : records_) total += count_out_of_range(r.values, lo_, hi_);
  return total;
}

Dataset load_dataset(std::istream& in) {
  detail::LineReader reader(in);
  const auto header = reader.next();
  if (!header) detail::LineReader::fail_at(1, "empty input, expected #dtm-features header");
  const auto toks = detail::tokens(*header);
  if (toks.empty() || toks[0] != "#dtm-features") reader.fail("expected #dtm-features header");
  if (toks.size() < 2 || toks[1] != "v1") reader.fail("unsupported feature format version");
  if (toks.size() != 5) reader.fail("expected n=, lo= and hi= header fields");
  const auto n_text = detail::field_value(toks[2], "n");
  const auto lo_text = detail::field_value(toks[3], "lo");
  const auto hi_text = detail::field_value(toks[4], "hi");
  if (!n_text || !lo_text || !hi_text) reader.fail("expected n=<count> lo=<lo> hi=<hi>");
  const auto n = detail::parse_size(*n_text);
  const auto lo = detail::parse_double(*lo_text);
  const auto hi = detail::parse_double(*hi_text);
  if (!n || *n == 0) reader.fail("n must be a positive integer");
  if (!lo || !hi || !std::isfinite(*lo) || !std::isfinite(*hi) || !(*hi > *lo)) {
    reader.fail("lo/hi must be finite numbers with hi > lo");
  }

  Dataset ds(*n, *lo, *hi);
  while (const auto line = reader.next()) {
    if (line->empty() || line->front() == '#') continue;
    const auto fields = detail::split(*line, ',');
    if (fields.size() != *n + 1) {
      reader.fail("expected " + std::to_string(*n) + " values, got " + std::to_string(fields.size() - 1));
    }
    FeatureRecord rec;
    rec.label = std::string(fields[0]);
    try {
      validate_label(rec.label);
    } catch (const Error& e) {
      reader.fail(e.what());
    }
    rec.values.reserve(*n);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = detail::parse_double(fields[i]);
      if (!v || !std::isfinite(*v)) reader.fail("value " + std::to_string(i) + " '" + std::string(fields[i]) + "' is not numeric");
      rec.values.push_back(*v);
    }
    ds.add(std::move(rec));
  }
  return ds;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open feature file '" + path + "'");
  return load_dataset(in);
}

void save_dataset(std::ostream& out, const Dataset& ds) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "#dtm-features v1 n=" << ds.n_features() << " lo=" << ds.lo() << " hi=" << ds.hi() << '\n';
  for (const auto& r : ds.records()) {
    out << r.label;
    for (double v : r.values) out << ',' << v;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace dtm
