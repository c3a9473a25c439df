#include "dtm/memory.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "dtm/entropic_ops.hpp"
#include "dtm/error.hpp"
#include "dtm/grid_text.hpp"
#include "text_util.hpp"

namespace dtm {

void validate_label(std::string_view label) {
  if (label.empty()) throw Error(ErrorKind::kConfig, "empty label");
  for (char c : label) {
    if (c == ',' || c == '+' || c == ':' || c == '#' || static_cast<unsigned char>(c) <= ' ') {
      throw Error(ErrorKind::kConfig,
                  "label '" + std::string(label) + "' contains a reserved character");
    }
  }
}

LabelSet::LabelSet(std::initializer_list<std::string> labels)
    : LabelSet(std::vector<std::string>(labels)) {}

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (const auto& l : labels_) validate_label(l);
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

bool LabelSet::contains(std::string_view label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

bool LabelSet::intersects(const LabelSet& other) const {
  return std::any_of(labels_.begin(), labels_.end(),
                     [&](const std::string& l) { return other.contains(l); });
}

std::string LabelSet::join(char sep) const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i > 0) out += sep;
    out += labels_[i];
  }
  return out;
}

MemoryRegister::MemoryRegister(Grid content, LabelSet labels)
    : content_(std::move(content)), labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(ErrorKind::kConfig, "memory register needs at least one label");
}

MemoryRegister register_cue(const MemoryRegister& reg, const Grid& cue) {
  Grid content = reg.content();
  abstract_into(content, cue);
  return MemoryRegister(std::move(content), reg.labels());
}

bool recognize(const MemoryRegister& reg, const Grid& cue) {
  return inclusion_test(reg.content(), cue);
}

RetrievalOutcome retrieve(const MemoryRegister& reg, const Grid& cue) {
  if (!inclusion_test(reg.content(), cue)) {
    return RetrievalOutcome{false, Grid(cue.n_cols(), cue.m_rows()), reg.content()};
  }
  Grid restored = reduction({reg.content(), cue}).phi;
  abstract_into(restored, cue);
  return RetrievalOutcome{true, restored, restored};
}

RegisterBank::RegisterBank(std::vector<MemoryRegister> registers) : registers_(std::move(registers)) {
  for (std::size_t i = 1; i < registers_.size(); ++i) {
    if (!registers_[i].content().same_shape(registers_[0].content())) {
      throw Error(ErrorKind::kShape, "bank registers must share one shape");
    }
  }
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    for (std::size_t j = i + 1; j < registers_.size(); ++j) {
      if (registers_[i].labels().intersects(registers_[j].labels())) {
        throw Error(ErrorKind::kConfig, "label sets '" + registers_[i].labels().join(',') +
                                            "' and '" + registers_[j].labels().join(',') +
                                            "' overlap");
      }
    }
  }
}

std::size_t RegisterBank::n_cols() const {
  if (registers_.empty()) throw Error(ErrorKind::kShape, "empty bank has no shape");
  return registers_.front().content().n_cols();
}

std::size_t RegisterBank::m_rows() const {
  if (registers_.empty()) throw Error(ErrorKind::kShape, "empty bank has no shape");
  return registers_.front().content().m_rows();
}

std::optional<std::size_t> RegisterBank::find(std::string_view label) const {
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    if (registers_[i].labels().contains(label)) return i;
  }
  return std::nullopt;
}

void RegisterBank::replace(std::size_t i, MemoryRegister reg) {
  if (i >= registers_.size()) throw Error(ErrorKind::kArgument, "register index out of range");
  if (!reg.content().same_shape(registers_[i].content())) {
    throw Error(ErrorKind::kShape, "replacement register has a different shape");
  }
  if (reg.labels() != registers_[i].labels()) {
    throw Error(ErrorKind::kConfig, "replacement register has different labels");
  }
  registers_[i] = std::move(reg);
}

std::vector<RegisterAnswer> bank_recognize(const RegisterBank& bank, const Grid& cue) {
  std::vector<RegisterAnswer> answers;
  answers.reserve(bank.size());
  for (const auto& reg : bank.registers()) answers.push_back({reg.labels(), recognize(reg, cue)});
  return answers;
}

void write_register(std::ostream& out, const MemoryRegister& reg) {
  out << "#dtm-memory v1 n=" << reg.content().n_cols() << " m=" << reg.content().m_rows()
      << " labels=" << reg.labels().join(',') << '\n';
  write_grid_body(out, reg.content());
}

void write_bank(std::ostream& out, const RegisterBank& bank) {
  for (std::size_t i = 0; i < bank.size(); ++i) {
    if (i > 0) out << '\n';
    write_register(out, bank[i]);
  }
}

RegisterBank read_bank(std::istream& in) {
  detail::LineReader reader(in);
  std::vector<MemoryRegister> registers;
  while (const auto line = reader.next()) {
    if (line->empty()) continue;
    const auto toks = detail::tokens(*line);
    if (toks.empty() || toks[0] != "#dtm-memory") reader.fail("expected #dtm-memory header");
    if (toks.size() < 2 || toks[1] != "v1") reader.fail("unsupported memory format version");
    if (toks.size() != 5) reader.fail("expected n=, m= and labels= header fields");
    const auto shape = detail::parse_shape(toks, 2, reader);
    const auto label_text = detail::field_value(toks[4], "labels");
    if (!label_text) reader.fail("expected labels=<l1[,l2]>");
    std::vector<std::string> labels;
    for (auto part : detail::split(*label_text, ',')) labels.emplace_back(part);
    const std::size_t header_line = reader.line_no();
    try {
      LabelSet label_set(std::move(labels));
      Grid content = detail::read_grid_body(reader, shape.n_cols, shape.m_rows);
      registers.emplace_back(std::move(content), std::move(label_set));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kParse) throw;
      detail::LineReader::fail_at(header_line, e.what());
    }
  }
  if (registers.empty()) throw Error(ErrorKind::kParse, "memory file contains no registers");
  try {
    return RegisterBank(std::move(registers));
  } catch (const Error& e) {
    throw Error(ErrorKind::kParse, e.what());
  }
}

}  // namespace dtm
