#include "dtm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "dtm/entropic_ops.hpp"
#include "dtm/error.hpp"
#include "text_util.hpp"

namespace dtm {

namespace {

// Unbiased draw in [0, bound) from the raw 64-bit engine output. Used instead
// of std::uniform_int_distribution so fold plans agree across standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = 0;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

LabelPairing resolve_pairing(const std::vector<std::string>& labels, const LabelPairing& pairing) {
  if (pairing.empty()) {
    LabelPairing singles;
    singles.reserve(labels.size());
    for (const auto& l : labels) singles.push_back(LabelSet{l});
    return singles;
  }
  for (const auto& l : labels) {
    const bool covered = std::any_of(pairing.begin(), pairing.end(),
                                     [&](const LabelSet& group) { return group.contains(l); });
    if (!covered) throw Error(ErrorKind::kConfig, "label '" + l + "' is not covered by the pairing");
  }
  return pairing;
}

void check_spec(const Dataset& ds, const QuantizationSpec& spec) {
  if (spec.n_features() != ds.n_features()) {
    throw Error(ErrorKind::kShape, "quantization expects " + std::to_string(spec.n_features()) +
                                       " features, dataset has " + std::to_string(ds.n_features()));
  }
}

}  // namespace

LabelPairing parse_pairing(std::string_view text) {
  LabelPairing groups;
  std::set<std::string> seen;
  for (auto group_text : detail::split(text, ',')) {
    std::vector<std::string> labels;
    for (auto label : detail::split(group_text, ':')) {
      if (label.empty()) throw Error(ErrorKind::kConfig, "empty label in pairing '" + std::string(text) + "'");
      if (!seen.insert(std::string(label)).second) {
        throw Error(ErrorKind::kConfig, "label '" + std::string(label) + "' appears twice in pairing");
      }
      labels.emplace_back(label);
    }
    groups.emplace_back(std::move(labels));
  }
  return groups;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t test_fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != test_fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t test_fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == test_fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::kConfig, "k-fold needs k >= 2");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < ds.size(); ++i) by_label[ds[i].label].push_back(i);
  for (const auto& [label, members] : by_label) {
    if (members.size() < k) {
      throw Error(ErrorKind::kStratification, "label '" + label + "' has " + std::to_string(members.size()) +
                                                  " records, fewer than k=" + std::to_string(k));
    }
  }

  FoldPlan plan{k, seed, std::vector<std::size_t>(ds.size(), 0)};
  std::mt19937_64 rng(seed);
  for (auto& [label, members] : by_label) {
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[uniform_below(rng, i + 1)]);
    }
    for (std::size_t pos = 0; pos < members.size(); ++pos) plan.assignment[members[pos]] = pos % k;
  }
  return plan;
}

RegisterBank fill_bank(const Dataset& ds, std::span<const std::size_t> train, const QuantizationSpec& spec,
                       const LabelPairing& pairing) {
  check_spec(ds, spec);
  const LabelPairing groups = resolve_pairing(ds.labels(), pairing);
  std::vector<Grid> contents(groups.size(), Grid(spec.n_features(), spec.levels()));
  for (std::size_t idx : train) {
    const auto& rec = ds[idx];
    const auto owner = std::find_if(groups.begin(), groups.end(),
                                    [&](const LabelSet& g) { return g.contains(rec.label); });
    // Same as register_cue on the owning register, without copying it per record.
    abstract_into(contents[static_cast<std::size_t>(owner - groups.begin())], cue_from_record(rec, spec));
  }
  std::vector<MemoryRegister> registers;
  registers.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) registers.emplace_back(std::move(contents[i]), groups[i]);
  return RegisterBank(std::move(registers));
}

RegisterBank fill_bank(const Dataset& ds, const FoldPlan& plan, std::size_t test_fold,
                       const QuantizationSpec& spec, const LabelPairing& pairing) {
  const auto train = plan.train_indices(test_fold);
  return fill_bank(ds, train, spec, pairing);
}

double precision_of(std::size_t tp, std::size_t fp) {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall_of(std::size_t tp, std::size_t fn) {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

FoldEvaluation evaluate_fold(const RegisterBank& bank, const Dataset& ds, std::span<const std::size_t> test,
                             const QuantizationSpec& spec, std::size_t fold) {
  check_spec(ds, spec);
  if (bank.empty()) throw Error(ErrorKind::kConfig, "cannot evaluate an empty bank");
  if (bank.n_cols() != spec.n_features() || bank.m_rows() != spec.levels()) {
    throw Error(ErrorKind::kShape, "bank shape does not match the quantization");
  }
  const auto labels = ds.labels();
  const std::size_t n_regs = bank.size();

  FoldEvaluation eval;
  eval.rows.resize(n_regs);
  eval.confusion.resize(labels.size() * n_regs);
  for (std::size_t l = 0; l < labels.size(); ++l) {
    for (std::size_t r = 0; r < n_regs; ++r) {
      auto& cell = eval.confusion[l * n_regs + r];
      cell.level = spec.levels();
      cell.true_label = labels[l];
      cell.register_labels = bank[r].labels();
    }
  }

  for (std::size_t idx : test) {
    const auto& rec = ds[idx];
    const Grid cue = cue_from_record(rec, spec);
    const auto label_pos =
        static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), rec.label) - labels.begin());
    for (std::size_t r = 0; r < n_regs; ++r) {
      const bool accepted = recognize(bank[r], cue);
      const bool positive = bank[r].labels().contains(rec.label);
      auto& row = eval.rows[r];
      if (accepted && positive) ++row.tp;
      if (accepted && !positive) ++row.fp;
      if (!accepted && positive) ++row.fn;
      if (!accepted && !positive) ++row.tn;
      auto& cell = eval.confusion[label_pos * n_regs + r];
      ++cell.total;
      if (accepted) ++cell.accept_count;
    }
  }

  for (std::size_t r = 0; r < n_regs; ++r) {
    auto& row = eval.rows[r];
    row.level = spec.levels();
    row.fold = fold;
    row.labels = bank[r].labels();
    row.precision = precision_of(row.tp, row.fp);
    row.recall = recall_of(row.tp, row.fn);
    row.entropy = entropy(bank[r].content()).bits;
  }
  return eval;
}

FoldEvaluation evaluate_fold(const RegisterBank& bank, const Dataset& ds, const FoldPlan& plan,
                             std::size_t test_fold, const QuantizationSpec& spec) {
  const auto test = plan.test_indices(test_fold);
  return evaluate_fold(bank, ds, test, spec, test_fold);
}

std::vector<AggregateRow> aggregate(std::span<const MetricsRow> rows) {
  struct FoldSums {
    double precision = 0, recall = 0, entropy = 0;
    std::size_t count = 0;
  };
  std::vector<std::size_t> level_order;
  std::map<std::size_t, std::map<std::size_t, FoldSums>> sums;  // level -> fold -> sums
  for (const auto& row : rows) {
    if (!sums.contains(row.level)) level_order.push_back(row.level);
    auto& s = sums[row.level][row.fold];
    s.precision += row.precision;
    s.recall += row.recall;
    s.entropy += row.entropy;
    ++s.count;
  }
  std::vector<AggregateRow> out;
  for (std::size_t level : level_order) {
    AggregateRow agg{level, 0, 0, 0};
    const auto& folds = sums[level];
    for (const auto& [fold, s] : folds) {
      const auto n = static_cast<double>(s.count);
      agg.mean_precision += s.precision / n;
      agg.mean_recall += s.recall / n;
      agg.mean_entropy += s.entropy / n;
    }
    const auto n_folds = static_cast<double>(folds.size());
    agg.mean_precision /= n_folds;
    agg.mean_recall /= n_folds;
    agg.mean_entropy /= n_folds;
    out.push_back(agg);
  }
  return out;
}

namespace {

struct Cell {
  std::size_t level_pos = 0;
  std::size_t fold = 0;
};

// Runs fn(cell_index) over [0, n) on up to `threads` workers. Results are
// written by index, so scheduling never affects output order.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentReport assemble(const SweepConfig& config, std::string mode, std::vector<Cell> cells,
                          std::vector<FoldEvaluation> evals) {
  ExperimentReport report;
  report.config = config;
  report.mode = std::move(mode);
  std::map<std::size_t, std::size_t> confusion_base;  // level_pos -> first cell index
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& eval = evals[c];
    for (auto& row : eval.rows) {
      if (row.tp + row.fp == 0 || row.tp + row.fn == 0) ++report.degenerate_rows;
      report.rows.push_back(std::move(row));
    }
    const auto [it, inserted] = confusion_base.try_emplace(cells[c].level_pos, report.confusion.size());
    if (inserted) {
      for (auto& cell : eval.confusion) report.confusion.push_back(std::move(cell));
      continue;
    }
    for (std::size_t i = 0; i < eval.confusion.size(); ++i) {
      auto& acc = report.confusion[it->second + i];
      acc.accept_count += eval.confusion[i].accept_count;
      acc.total += eval.confusion[i].total;
    }
  }
  report.aggregates = aggregate(report.rows);
  return report;
}

void check_levels(const SweepConfig& config) {
  if (config.levels.empty()) throw Error(ErrorKind::kConfig, "sweep needs at least one level");
  for (std::size_t l : config.levels) {
    if (l == 0) throw Error(ErrorKind::kConfig, "levels must be >= 1");
  }
}

}  // namespace

ExperimentReport run_sweep(const Dataset& ds, const SweepConfig& config) {
  check_levels(config);
  const FoldPlan plan = make_folds(ds, config.folds, config.seed);
  // Fail on a bad pairing before spawning any work.
  resolve_pairing(ds.labels(), config.pairing);

  std::vector<Cell> cells;
  for (std::size_t lp = 0; lp < config.levels.size(); ++lp) {
    for (std::size_t f = 0; f < config.folds; ++f) cells.push_back({lp, f});
  }
  std::vector<FoldEvaluation> evals(cells.size());
  parallel_for(cells.size(), config.threads, [&](std::size_t c) {
    const auto spec = ds.spec(config.levels[cells[c].level_pos]);
    const auto train = plan.train_indices(cells[c].fold);
    const auto test = plan.test_indices(cells[c].fold);
    const RegisterBank bank = fill_bank(ds, train, spec, config.pairing);
    evals[c] = evaluate_fold(bank, ds, test, spec, cells[c].fold);
  });
  return assemble(config, "kfold", std::move(cells), std::move(evals));
}

ExperimentReport run_fixed_split(const Dataset& train, const Dataset& test, const SweepConfig& config) {
  check_levels(config);
  if (train.n_features() != test.n_features() || train.lo() != test.lo() || train.hi() != test.hi()) {
    throw Error(ErrorKind::kConfig, "train and test feature files declare different n/lo/hi");
  }
  resolve_pairing(train.labels(), config.pairing);
  resolve_pairing(test.labels(), config.pairing);

  std::vector<std::size_t> train_idx(train.size());
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<std::size_t> test_idx(test.size());
  std::iota(test_idx.begin(), test_idx.end(), 0);

  std::vector<Cell> cells;
  for (std::size_t lp = 0; lp < config.levels.size(); ++lp) cells.push_back({lp, 0});
  std::vector<FoldEvaluation> evals(cells.size());
  parallel_for(cells.size(), config.threads, [&](std::size_t c) {
    const auto spec = train.spec(config.levels[cells[c].level_pos]);
    RegisterBank bank = fill_bank(train, train_idx, spec, config.pairing);
    // Test labels absent from training still need a register under no pairing.
    if (config.pairing.empty()) {
      std::vector<MemoryRegister> regs = bank.registers();
      for (const auto& l : test.labels()) {
        if (!bank.find(l)) regs.emplace_back(Grid(spec.n_features(), spec.levels()), LabelSet{l});
      }
      std::sort(regs.begin(), regs.end(),
                [](const MemoryRegister& a, const MemoryRegister& b) { return a.labels() < b.labels(); });
      bank = RegisterBank(std::move(regs));
    }
    evals[c] = evaluate_fold(bank, test, test_idx, spec, 0);
  });
  return assemble(config, "fixed-split", std::move(cells), std::move(evals));
}

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

void write_metrics_csv(std::ostream& out, const ExperimentReport& report) {
  out << "level,fold,labels,tp,fp,fn,tn,precision,recall,entropy\n";
  for (const auto& r : report.rows) {
    out << r.level << ',' << r.fold << ',' << r.labels.join('+') << ',' << r.tp << ',' << r.fp << ',' << r.fn
        << ',' << r.tn << ',' << format_fixed6(r.precision) << ',' << format_fixed6(r.recall) << ','
        << format_fixed6(r.entropy) << '\n';
  }
}

void write_aggregates_csv(std::ostream& out, const ExperimentReport& report) {
  out << "level,mean_precision,mean_recall,mean_entropy\n";
  for (const auto& a : report.aggregates) {
    out << a.level << ',' << format_fixed6(a.mean_precision) << ',' << format_fixed6(a.mean_recall) << ','
        << format_fixed6(a.mean_entropy) << '\n';
  }
}

void write_confusion_csv(std::ostream& out, const ExperimentReport& report) {
  out << "level,true_label,register_labels,accept_count,total\n";
  for (const auto& c : report.confusion) {
    out << c.level << ',' << c.true_label << ',' << c.register_labels.join('+') << ',' << c.accept_count << ','
        << c.total << '\n';
  }
}

}  // namespace dtm
