#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "dtm/entropic_ops.hpp"
#include "dtm/error.hpp"
#include "dtm/experiment.hpp"
#include "dtm/features.hpp"
#include "dtm/grid_text.hpp"
#include "dtm/memory.hpp"

namespace dtm::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kFooter =
    "Exit codes: 0 success, 1 data error (unreadable or inconsistent input), 2 usage error.\n"
    "DTM_THREADS caps the number of worker threads used by `experiment`.";

// Flag-level problems found after CLI11 parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes all files or none: every payload goes to a temporary sibling first
// and is renamed into place only once all of them were written.
void write_files_atomic(const std::vector<std::pair<fs::path, std::string>>& files) {
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto discard = [&] {
    std::error_code ec;
    for (const auto& [tmp, dst] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [dst, payload] : files) {
    fs::path tmp = dst;
    tmp += ".tmp." + std::to_string(::getpid());
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << payload;
    f.close();
    staged.emplace_back(tmp, dst);
    if (!f) {
      discard();
      throw Error(ErrorKind::kIo, "cannot write '" + dst.string() + "'");
    }
  }
  for (const auto& [tmp, dst] : staged) {
    std::error_code ec;
    fs::rename(tmp, dst, ec);
    if (ec) {
      discard();
      throw Error(ErrorKind::kIo, "cannot move output into '" + dst.string() + "': " + ec.message());
    }
  }
}

RegisterBank load_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open memory file '" + path + "'");
  return read_bank(in);
}

Grid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open grid file '" + path + "'");
  return read_grid(in);
}

std::string bank_text(const RegisterBank& bank) {
  std::ostringstream s;
  write_bank(s, bank);
  return s.str();
}

LabelPairing pairing_flag(const std::string& text) {
  if (text.empty()) return {};
  try {
    return parse_pairing(text);
  } catch (const Error& e) {
    throw UsageError(std::string("--pairs: ") + e.what());
  }
}

std::size_t sweep_threads() {
  std::size_t threads = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DTM_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || cap == 0) throw UsageError("DTM_THREADS must be a positive integer");
    threads = std::min<std::size_t>(threads, cap);
  }
  return threads;
}

void log_clamped(std::ostream& err, const Dataset& ds, const std::string& path) {
  if (const std::size_t clamped = ds.clamped_value_count(); clamped > 0) {
    err << "note: " << clamped << " feature values in '" << path << "' fall outside [" << ds.lo() << ", "
        << ds.hi() << "] and are clamped\n";
  }
}

struct FillArgs {
  std::string features;
  std::size_t levels = 0;
  std::string pairs;
  std::string out;
};

int cmd_fill(const FillArgs& a, std::ostream& out, std::ostream& err) {
  const auto pairing = pairing_flag(a.pairs);
  const Dataset ds = load_dataset_file(a.features);
  log_clamped(err, ds, a.features);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  const RegisterBank bank = fill_bank(ds, all, ds.spec(a.levels), pairing);
  write_files_atomic({{a.out, bank_text(bank)}});
  out << "wrote " << bank.size() << " registers (" << ds.n_features() << "x" << a.levels << ") to " << a.out
      << '\n';
  return kExitOk;
}

struct RecognizeArgs {
  std::string memory;
  std::string features;
};

int cmd_recognize(const RecognizeArgs& a, std::ostream& out, std::ostream& err) {
  const RegisterBank bank = load_bank(a.memory);
  const Dataset ds = load_dataset_file(a.features);
  log_clamped(err, ds, a.features);
  if (bank.n_cols() != ds.n_features()) {
    throw Error(ErrorKind::kShape, "memory has " + std::to_string(bank.n_cols()) + " columns, features have " +
                                       std::to_string(ds.n_features()));
  }
  const auto spec = ds.spec(bank.m_rows());
  out << "record_index,label,register_labels,accepted\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Grid cue = cue_from_record(ds[i], spec);
    for (const auto& answer : bank_recognize(bank, cue)) {
      out << i << ',' << ds[i].label << ',' << answer.labels.join('+') << ','
          << (answer.accepted ? "true" : "false") << '\n';
    }
  }
  return kExitOk;
}

struct RetrieveArgs {
  std::string memory;
  std::string cue_grid;
  std::string out;
  std::string output_grid;
  std::string reduced_grid;
  std::string register_label;
};

int cmd_retrieve(const RetrieveArgs& a, std::ostream& out, std::ostream&) {
  RegisterBank bank = load_bank(a.memory);
  const Grid cue = load_grid(a.cue_grid);
  if (!cue.same_shape(bank[0].content())) {
    throw Error(ErrorKind::kShape, "cue grid shape differs from the memory registers");
  }
  std::vector<std::size_t> targets;
  if (!a.register_label.empty()) {
    const auto idx = bank.find(a.register_label);
    if (!idx) throw Error(ErrorKind::kConfig, "no register holds label '" + a.register_label + "'");
    targets.push_back(*idx);
  } else {
    targets.resize(bank.size());
    std::iota(targets.begin(), targets.end(), 0);
  }
  if ((!a.output_grid.empty() || !a.reduced_grid.empty()) && targets.size() != 1) {
    throw UsageError("--output-grid/--reduced-grid need a single target register (use --register)");
  }

  std::optional<Grid> output;
  std::optional<Grid> reduced;
  out << "register_labels,accepted\n";
  for (std::size_t idx : targets) {
    const auto outcome = retrieve(bank[idx], cue);
    // Intermediate memory state between the reduction and the re-registration
    // of the cue; blank when the inclusion test fails.
    reduced = outcome.accepted ? reduction({bank[idx].content(), cue}).phi : Grid(cue.n_cols(), cue.m_rows());
    out << bank[idx].labels().join('+') << ',' << (outcome.accepted ? "true" : "false") << '\n';
    bank.replace(idx, MemoryRegister(outcome.new_content, bank[idx].labels()));
    output = outcome.output;
  }

  std::vector<std::pair<fs::path, std::string>> files{{a.out, bank_text(bank)}};
  if (!a.output_grid.empty()) files.emplace_back(a.output_grid, grid_to_text(*output));
  if (!a.reduced_grid.empty()) files.emplace_back(a.reduced_grid, grid_to_text(*reduced));
  write_files_atomic(files);
  return kExitOk;
}

struct ExperimentArgs {
  std::string features;
  std::vector<std::string> fixed_split;
  std::vector<std::size_t> levels;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::string pairs;
  std::string out_dir;
};

void print_aggregates(std::ostream& out, const ExperimentReport& report) {
  out << "mode=" << report.mode << " folds=" << (report.mode == "kfold" ? report.config.folds : 1)
      << " seed=" << report.config.seed << " registers/fold="
      << (report.aggregates.empty() ? 0 : report.rows.size() / report.aggregates.size() /
                                              (report.mode == "kfold" ? report.config.folds : 1))
      << '\n';
  out << std::setw(6) << "level" << std::setw(12) << "precision" << std::setw(12) << "recall" << std::setw(12)
      << "entropy" << '\n';
  for (const auto& a : report.aggregates) {
    out << std::setw(6) << a.level << std::setw(12) << format_fixed6(a.mean_precision) << std::setw(12)
        << format_fixed6(a.mean_recall) << std::setw(12) << format_fixed6(a.mean_entropy) << '\n';
  }
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  if (a.features.empty() == a.fixed_split.empty()) {
    throw UsageError("experiment needs exactly one of --features or --fixed-split");
  }
  SweepConfig config;
  config.levels = a.levels;
  config.folds = a.folds;
  config.seed = a.seed;
  config.pairing = pairing_flag(a.pairs);
  config.threads = sweep_threads();

  ExperimentReport report;
  if (!a.features.empty()) {
    const Dataset ds = load_dataset_file(a.features);
    log_clamped(err, ds, a.features);
    report = run_sweep(ds, config);
  } else {
    const Dataset train = load_dataset_file(a.fixed_split[0]);
    const Dataset test = load_dataset_file(a.fixed_split[1]);
    log_clamped(err, train, a.fixed_split[0]);
    log_clamped(err, test, a.fixed_split[1]);
    report = run_fixed_split(train, test, config);
  }
  if (report.degenerate_rows > 0) {
    err << "note: " << report.degenerate_rows
        << " metric rows had a zero denominator; precision/recall set to 1 by convention\n";
  }

  std::ostringstream metrics, aggregates, confusion;
  write_metrics_csv(metrics, report);
  write_aggregates_csv(aggregates, report);
  write_confusion_csv(confusion, report);
  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory '" + a.out_dir + "': " + ec.message());
  write_files_atomic({{dir / "metrics.csv", metrics.str()},
                      {dir / "aggregates.csv", aggregates.str()},
                      {dir / "confusion.csv", confusion.str()}});
  print_aggregates(out, report);
  return kExitOk;
}

struct EntropyArgs {
  std::string memory;
};

int cmd_entropy(const EntropyArgs& a, std::ostream& out, std::ostream&) {
  const RegisterBank bank = load_bank(a.memory);
  out << "register_labels,entropy_bits\n";
  for (const auto& reg : bank.registers()) {
    out << reg.labels().join('+') << ',' << format_fixed6(entropy(reg.content()).bits) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Associative memory registers over binary grids", "dtm"};
  app.footer(kFooter);
  app.require_subcommand(1);

  FillArgs fill;
  auto* fill_cmd = app.add_subcommand("fill", "Register every record of a feature file into a register bank");
  fill_cmd->add_option("--features", fill.features, "Feature file")->required();
  fill_cmd->add_option("--levels", fill.levels, "Quantization levels (grid rows)")
      ->required()
      ->check(CLI::PositiveNumber);
  fill_cmd->add_option("--pairs", fill.pairs, "Label groups sharing a register, e.g. 0:5,1:6");
  fill_cmd->add_option("--out", fill.out, "Bank file to write")->required();

  RecognizeArgs recog;
  auto* recog_cmd = app.add_subcommand("recognize", "Test every record against every register");
  recog_cmd->add_option("--memory", recog.memory, "Bank file")->required();
  recog_cmd->add_option("--features", recog.features, "Feature file")->required();

  RetrieveArgs retr;
  auto* retr_cmd = app.add_subcommand("retrieve", "Retrieve a cue grid from memory registers");
  retr_cmd->add_option("--memory", retr.memory, "Bank file")->required();
  retr_cmd->add_option("--cue-grid", retr.cue_grid, "Cue grid file")->required();
  retr_cmd->add_option("--out", retr.out, "Updated bank file to write")->required();
  retr_cmd->add_option("--output-grid", retr.output_grid, "Write the output buffer grid here");
  retr_cmd->add_option("--reduced-grid", retr.reduced_grid, "Write the memory state right after reduction here");
  retr_cmd->add_option("--register", retr.register_label, "Only retrieve from the register holding this label");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Cross-validated recognition sweep over quantization levels");
  exp_cmd->add_option("--features", exp.features, "Feature file (k-fold mode)");
  exp_cmd->add_option("--fixed-split", exp.fixed_split, "Train and test feature files")->expected(2);
  exp_cmd->add_option("--levels", exp.levels, "Comma-separated levels, e.g. 1,2,4,8")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  exp_cmd->add_option("--folds", exp.folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000000));
  exp_cmd->add_option("--seed", exp.seed, "Seed for fold assignment")->capture_default_str();
  exp_cmd->add_option("--pairs", exp.pairs, "Label groups sharing a register, e.g. 0:5,1:6");
  exp_cmd->add_option("--out-dir", exp.out_dir, "Directory for metrics/aggregates/confusion CSVs")->required();

  EntropyArgs ent;
  auto* ent_cmd = app.add_subcommand("entropy", "Print the entropy of every register");
  ent_cmd->add_option("--memory", ent.memory, "Bank file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  }

  try {
    if (fill_cmd->parsed()) return cmd_fill(fill, out, err);
    if (recog_cmd->parsed()) return cmd_recognize(recog, out, err);
    if (retr_cmd->parsed()) return cmd_retrieve(retr, out, err);
    if (exp_cmd->parsed()) return cmd_experiment(exp, out, err);
    if (ent_cmd->parsed()) return cmd_entropy(ent, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace dtm::cli
