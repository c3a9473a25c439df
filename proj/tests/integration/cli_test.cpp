#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "dtm/grid_text.hpp"
#include "dtm/memory.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace dtm {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dtm_cli_test_" + std::to_string(std::random_device{}()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  Result run(std::vector<std::string> args) const {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  void write_dataset(const std::string& name, const Dataset& ds) const {
    std::ofstream f(path(name));
    save_dataset(f, ds);
  }

  RegisterBank bank(const std::string& name) const {
    std::ifstream in(path(name));
    return read_bank(in);
  }

  fs::path dir_;
};

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

constexpr const char* kToy =
    "#dtm-features v1 n=3 lo=0 hi=10\n"
    "a,1,2,3\n"
    "a,1.5,2,9\n"
    "b,8,8,8\n"
    "b,7,9,6\n";

TEST_F(CliTest, FillWritesOneRegisterPerLabel) {
  write("toy.txt", kToy);
  const auto r = run({"fill", "--features", path("toy.txt"), "--levels", "4", "--out", path("m.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const RegisterBank b = bank("m.txt");
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(b.m_rows(), 4u);
}

TEST_F(CliTest, FillRejectsZeroLevelsWithoutTouchingOutput) {
  write("toy.txt", kToy);
  const auto r = run({"fill", "--features", path("toy.txt"), "--levels", "0", "--out", path("m.txt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(path("m.txt")));
}

TEST_F(CliTest, FillWithDigitPairs) {
  write_dataset("digits.txt", testing::gaussian_clusters({10, 3, 5, 0, 10, 0.5, 1}));
  const auto r = run({"fill", "--features", path("digits.txt"), "--levels", "4", "--pairs", "0:5,1:6,2:7,3:8,4:9",
                      "--out", path("m.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(bank("m.txt").size(), 5u);
  const auto bad = run({"fill", "--features", path("digits.txt"), "--levels", "4", "--pairs", "0:5,5:1",
                        "--out", path("x.txt")});
  EXPECT_EQ(bad.code, 2);
}

TEST_F(CliTest, DataErrorsExitOne) {
  write("ragged.txt", "#dtm-features v1 n=3 lo=0 hi=10\na,1,2\n");
  const auto r = run({"fill", "--features", path("ragged.txt"), "--levels", "2", "--out", path("m.txt")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("m.txt")));
  EXPECT_EQ(run({"fill", "--features", path("missing.txt"), "--levels", "2", "--out", path("m.txt")}).code, 1);
}

TEST_F(CliTest, RecognizeOwnRecords) {
  write("toy.txt", kToy);
  ASSERT_EQ(run({"fill", "--features", path("toy.txt"), "--levels", "4", "--out", path("m.txt")}).code, 0);
  const auto r = run({"recognize", "--memory", path("m.txt"), "--features", path("toy.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "record_index,label,register_labels,accepted");
  std::size_t own = 0;
  while (std::getline(lines, line)) {
    const auto parts = [&] {
      std::vector<std::string> p;
      std::stringstream s(line);
      for (std::string f; std::getline(s, f, ',');) p.push_back(f);
      return p;
    }();
    ASSERT_EQ(parts.size(), 4u);
    if (parts[1] == parts[2]) {
      EXPECT_EQ(parts[3], "true") << line;
      ++own;
    }
  }
  EXPECT_EQ(own, 4u);
}

TEST_F(CliTest, RecognizeReportsMultipleAcceptances) {
  // Register "x" holds everything in rows 1-2, "y" rows 2-3: a cue in row 2
  // everywhere is accepted by both.
  Grid x(2, 4), y(2, 4);
  for (std::size_t c = 1; c <= 2; ++c) {
    x.set(c, 1);
    x.set(c, 2);
    y.set(c, 2);
    y.set(c, 3);
  }
  const RegisterBank overlapping({MemoryRegister(x, LabelSet{"x"}), MemoryRegister(y, LabelSet{"y"})});
  {
    std::ofstream f(path("m.txt"));
    write_bank(f, overlapping);
  }
  write("f.txt", "#dtm-features v1 n=2 lo=0 hi=4\nx,1.5,1.2\n");
  const Grid cue = cue_from_record({"x", {1.5, 1.2}}, QuantizationSpec(4, 0, 4, 2));
  ASSERT_TRUE(recognize(overlapping[0], cue));
  ASSERT_TRUE(recognize(overlapping[1], cue));

  const auto r = run({"recognize", "--memory", path("m.txt"), "--features", path("f.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "record_index,label,register_labels,accepted\n0,x,x,true\n0,x,y,true\n");
}

TEST_F(CliTest, RecognizeEmptyMemoryIsDataError) {
  write("m.txt", "");
  write("toy.txt", kToy);
  EXPECT_EQ(run({"recognize", "--memory", path("m.txt"), "--features", path("toy.txt")}).code, 1);
}

TEST_F(CliTest, RecognizeShapeMismatch) {
  write("toy.txt", kToy);
  write("m.txt", "#dtm-memory v1 n=2 m=4 labels=a\n..\n..\n..\nXX\n");
  EXPECT_EQ(run({"recognize", "--memory", path("m.txt"), "--features", path("toy.txt")}).code, 1);
}

TEST_F(CliTest, RetrieveSelfCueIsLossless) {
  const Grid g = grid_from_index({{2, 6, 4, 5}}, 7);
  {
    std::ofstream f(path("m.txt"));
    write_register(f, MemoryRegister(g, LabelSet{"g"}));
  }
  write("cue.txt", grid_to_text(g));
  const auto r = run({"retrieve", "--memory", path("m.txt"), "--cue-grid", path("cue.txt"), "--out", path("m2.txt"),
                      "--output-grid", path("out.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "register_labels,accepted\ng,true\n");
  EXPECT_EQ(read("m2.txt"), read("m.txt"));
  EXPECT_EQ(grid_from_text(read("out.txt")), g);
}

TEST_F(CliTest, RetrieveRejectedCueLeavesMemory) {
  {
    std::ofstream f(path("m.txt"));
    write_register(f, MemoryRegister(grid_from_index({{1, 2, 4, 7}}, 7), LabelSet{"f"}));
  }
  write("cue.txt", grid_to_text(grid_from_index({{2, 6, 4, 5}}, 7)));
  const auto r = run({"retrieve", "--memory", path("m.txt"), "--cue-grid", path("cue.txt"), "--out", path("m2.txt"),
                      "--output-grid", path("out.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "register_labels,accepted\nf,false\n");
  EXPECT_EQ(read("m2.txt"), read("m.txt"));
  EXPECT_TRUE(grid_from_text(read("out.txt")).empty());
}

TEST_F(CliTest, RetrieveExposesReductionLoss) {
  write("m.txt", "#dtm-memory v1 n=1 m=4 labels=w\nX\n.\nX\n.\n");  // column {2,4}
  write("cue.txt", "#dtm-grid v1 n=1 m=4\n.\n.\n.\nX\n");               // column {1}
  write("cue2.txt", "#dtm-grid v1 n=1 m=4\n.\n.\nX\n.\n");              // column {2}
  const auto r = run({"retrieve", "--memory", path("m.txt"), "--cue-grid", path("cue2.txt"), "--out",
                      path("m2.txt"), "--reduced-grid", path("reduced.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "register_labels,accepted\nw,true\n");
  EXPECT_EQ(read("reduced.txt"), "#dtm-grid v1 n=1 m=4\nX\n.\n.\n.\n");  // column {4}
  EXPECT_EQ(read("m2.txt"), read("m.txt"));                             // cue re-registered

  const auto miss = run({"retrieve", "--memory", path("m.txt"), "--cue-grid", path("cue.txt"), "--out",
                         path("m3.txt")});
  ASSERT_EQ(miss.code, 0);
  EXPECT_EQ(miss.out, "register_labels,accepted\nw,false\n");
}

TEST_F(CliTest, RetrieveOutputGridNeedsSingleRegister) {
  write("toy.txt", kToy);
  ASSERT_EQ(run({"fill", "--features", path("toy.txt"), "--levels", "2", "--out", path("m.txt")}).code, 0);
  write("cue.txt", "#dtm-grid v1 n=3 m=2\n...\nXXX\n");
  const auto r = run({"retrieve", "--memory", path("m.txt"), "--cue-grid", path("cue.txt"), "--out", path("m2.txt"),
                      "--output-grid", path("o.txt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(path("m2.txt")));
  const auto one = run({"retrieve", "--memory", path("m.txt"), "--cue-grid", path("cue.txt"), "--out",
                        path("m2.txt"), "--output-grid", path("o.txt"), "--register", "a"});
  EXPECT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, "register_labels,accepted\na,true\n");
}

TEST_F(CliTest, EntropyPerRegister) {
  std::vector<MemoryRegister> regs;
  regs.emplace_back(grid_from_index({{1, 2, 4, 7}}, 7), LabelSet{"f"});
  regs.emplace_back(testing::grid_of({{1, 2}, {2, 6}, {4}, {5, 7}}, 7), LabelSet{"mixed"});
  regs.emplace_back(Grid(4, 7), LabelSet{"blank"});
  {
    std::ofstream f(path("m.txt"));
    write_bank(f, RegisterBank(regs));
  }
  const auto r = run({"entropy", "--memory", path("m.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "register_labels,entropy_bits\nf,0.000000\nmixed,0.750000\nblank,0.000000\n");
  write("bad.txt", "#dtm-memory v1 n=1\n");
  EXPECT_EQ(run({"entropy", "--memory", path("bad.txt")}).code, 1);
}

TEST_F(CliTest, ExperimentWritesThreeCsvs) {
  write_dataset("toy.txt", testing::gaussian_clusters({3, 10, 8, 0, 10, 0.5, 2}));
  const auto r = run({"experiment", "--features", path("toy.txt"), "--levels", "1,2,4", "--folds", "5", "--seed",
                      "3", "--out-dir", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string agg = read("out/aggregates.csv");
  EXPECT_EQ(std::count(agg.begin(), agg.end(), '\n'), 4);
  EXPECT_EQ(first_line(agg), "level,mean_precision,mean_recall,mean_entropy");
  EXPECT_EQ(first_line(read("out/metrics.csv")), "level,fold,labels,tp,fp,fn,tn,precision,recall,entropy");
  EXPECT_EQ(first_line(read("out/confusion.csv")), "level,true_label,register_labels,accept_count,total");
  EXPECT_NE(r.out.find("level"), std::string::npos);

  // Same flags, same bytes.
  ASSERT_EQ(run({"experiment", "--features", path("toy.txt"), "--levels", "1,2,4", "--folds", "5", "--seed", "3",
                 "--out-dir", path("again")})
                .code,
            0);
  EXPECT_EQ(read("out/metrics.csv"), read("again/metrics.csv"));
  EXPECT_EQ(read("out/confusion.csv"), read("again/confusion.csv"));
}

TEST_F(CliTest, ExperimentFixedSplit) {
  write_dataset("train.txt", testing::gaussian_clusters({2, 10, 4, 0, 10, 0.5, 5}));
  write_dataset("test.txt", testing::gaussian_clusters({2, 4, 4, 0, 10, 0.5, 5}));
  const auto r = run({"experiment", "--fixed-split", path("train.txt"), path("test.txt"), "--levels", "1,8",
                      "--out-dir", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mode=fixed-split"), std::string::npos);
}

TEST_F(CliTest, ExperimentUsageErrors) {
  EXPECT_EQ(run({"experiment", "--levels", "1,2", "--out-dir", path("out")}).code, 2);
  EXPECT_EQ(run({"experiment", "--features", "x", "--levels", "1,0", "--out-dir", path("out")}).code, 2);
  EXPECT_EQ(run({"experiment", "--features", "x", "--levels", "1", "--folds", "1", "--out-dir", path("out")}).code,
            2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_FALSE(fs::exists(path("out")));
}

TEST_F(CliTest, ExperimentStratificationFailureLeavesNoOutput) {
  write("toy.txt", kToy);
  const auto r = run({"experiment", "--features", path("toy.txt"), "--levels", "2", "--folds", "10", "--out-dir",
                      path("out")});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(path("out/metrics.csv")));
}

TEST_F(CliTest, HelpDocumentsExitCodes) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
  EXPECT_NE(r.out.find("DTM_THREADS"), std::string::npos);
}

TEST_F(CliTest, BadThreadCapIsUsageError) {
  write_dataset("toy.txt", testing::gaussian_clusters({2, 4, 4, 0, 10, 0.5, 5}));
  ::setenv("DTM_THREADS", "zero", 1);
  const auto r = run({"experiment", "--features", path("toy.txt"), "--levels", "1", "--folds", "2", "--out-dir",
                      path("out")});
  ::unsetenv("DTM_THREADS");
  EXPECT_EQ(r.code, 2);
}

}  // namespace
}  // namespace dtm
