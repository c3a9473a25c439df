#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtm/grid.hpp"

namespace dtm {

/// Sorted, duplicate-free set of class labels.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::initializer_list<std::string> labels);
  explicit LabelSet(std::vector<std::string> labels);

  bool contains(std::string_view label) const;
  bool intersects(const LabelSet& other) const;
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Labels joined by `sep` ("0,5" in memory headers, "0+5" in CSV reports).
  std::string join(char sep) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
  friend auto operator<=>(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Rejects labels that cannot round-trip through the text formats.
void validate_label(std::string_view label);

/// One associative memory: a grid holding the superposed cues of its labels.
class MemoryRegister {
 public:
  MemoryRegister(Grid content, LabelSet labels);

  const Grid& content() const noexcept { return content_; }
  const LabelSet& labels() const noexcept { return labels_; }

  friend bool operator==(const MemoryRegister&, const MemoryRegister&) = default;

 private:
  Grid content_;
  LabelSet labels_;
};

struct RetrievalOutcome {
  bool accepted = false;
  Grid output;       // the external grid after the operation
  Grid new_content;  // the register content after the operation
};

/// content <- abstraction(content, cue).
MemoryRegister register_cue(const MemoryRegister& reg, const Grid& cue);

/// Inclusion of the cue in the register content. The register is unchanged.
bool recognize(const MemoryRegister& reg, const Grid& cue);

/// On a failed inclusion test the output is blank and the content unchanged.
/// Otherwise content <- abstraction(reduction(content, cue).phi, cue) and the
/// whole new content is copied into the output buffer.
RetrievalOutcome retrieve(const MemoryRegister& reg, const Grid& cue);

struct RegisterAnswer {
  LabelSet labels;
  bool accepted = false;

  friend bool operator==(const RegisterAnswer&, const RegisterAnswer&) = default;
};

/// Parallel array of registers with one shape and pairwise disjoint labels.
class RegisterBank {
 public:
  RegisterBank() = default;
  explicit RegisterBank(std::vector<MemoryRegister> registers);

  const std::vector<MemoryRegister>& registers() const noexcept { return registers_; }
  std::size_t size() const noexcept { return registers_.size(); }
  bool empty() const noexcept { return registers_.empty(); }
  const MemoryRegister& operator[](std::size_t i) const { return registers_[i]; }

  std::size_t n_cols() const;
  std::size_t m_rows() const;

  /// Index of the register holding `label`, if any.
  std::optional<std::size_t> find(std::string_view label) const;

  /// Replaces register i (same shape and labels required).
  void replace(std::size_t i, MemoryRegister reg);

  friend bool operator==(const RegisterBank&, const RegisterBank&) = default;

 private:
  std::vector<MemoryRegister> registers_;
};

/// recognize() against every register, reported in bank order.
std::vector<RegisterAnswer> bank_recognize(const RegisterBank& bank, const Grid& cue);

/// Memory file: "#dtm-memory v1 n=<n> m=<m> labels=<l1[,l2]>" plus a grid body.
/// A bank file concatenates register files separated by blank lines.
void write_register(std::ostream& out, const MemoryRegister& reg);
void write_bank(std::ostream& out, const RegisterBank& bank);
RegisterBank read_bank(std::istream& in);

}  // namespace dtm
