// Copyright 2026 The simulmt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared vocabulary of the streaming translator: tokens, alignment grids,
// stream events and session traces.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace simulmt {

// ============================================================================
// Errors
// ============================================================================

// Malformed shapes: empty matrices, mismatched vector sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value that violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad input data: unreadable files, schema errors, out-of-order streams.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ============================================================================
// Tokens
// ============================================================================

inline bool is_punct(std::string_view text) {
  return text == "," || text == "." || text == "?" || text == "!";
}

inline bool is_sentence_final(std::string_view text) {
  return text == "." || text == "?" || text == "!";
}

struct Token {
  std::size_t id = 0;
  std::string text;
  bool is_punct = false;
  bool is_sentence_final = false;

  static Token make(std::size_t id, std::string text) {
    Token t;
    t.id = id;
    t.is_punct = simulmt::is_punct(text);
    t.is_sentence_final = simulmt::is_sentence_final(text);
    t.text = std::move(text);
    return t;
  }
};

// Text <-> id mapping. Ids are assigned in insertion order, so a vocabulary
// file (one token per line) gives id == 0-based line number.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t add(const std::string& text) {
    auto it = ids_.find(text);
    if (it != ids_.end()) return it->second;
    std::size_t id = texts_.size();
    ids_.emplace(text, id);
    texts_.push_back(text);
    return id;
  }

  bool contains(const std::string& text) const { return ids_.count(text) > 0; }

  std::optional<Token> find(const std::string& text) const {
    auto it = ids_.find(text);
    if (it == ids_.end()) return std::nullopt;
    return Token::make(it->second, text);
  }

  Token at(const std::string& text) const {
    auto tok = find(text);
    if (!tok) throw DataError("unknown token '" + text + "'");
    return *tok;
  }

  const std::string& text(std::size_t id) const { return texts_.at(id); }
  std::size_t size() const { return texts_.size(); }
  const std::vector<std::string>& texts() const { return texts_; }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocabulary file " + path);
    Vocabulary v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (v.contains(line))
        throw DataError(path + ":" + std::to_string(lineno) + ": duplicate token '" + line + "'");
      v.add(line);
    }
    return v;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write vocabulary file " + path);
    for (const auto& t : texts_) out << t << '\n';
  }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> texts_;
};

// ============================================================================
// Grids
// ============================================================================

// Dense row-major matrix. The tag keeps attention weights, cumulative
// attention and label matrices from being mixed up.
template <typename T, typename Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Grid from_rows(const std::vector<std::vector<T>>& rows) {
    if (rows.empty() || rows.front().empty())
      throw DimensionError("grid must have at least one row and one column");
    Grid g(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != g.cols_)
        throw DimensionError("ragged grid: row " + std::to_string(r + 1) + " has " +
                             std::to_string(rows[r].size()) + " columns, expected " +
                             std::to_string(g.cols_));
      std::copy(rows[r].begin(), rows[r].end(), g.data_.begin() + r * g.cols_);
    }
    return g;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<std::vector<T>> to_rows() const {
    std::vector<std::vector<T>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct AttentionTag;
struct CumulativeTag;
struct LabelTag;

// Soft alignment weights, |y| x |x|, each row a distribution over source.
using AttentionMatrix = Grid<double, AttentionTag>;
// Row-wise running sums of an AttentionMatrix.
using CumulativeMatrix = Grid<double, CumulativeTag>;
// Binary write-permission matrix: 1 at (i, j) means target i may be written
// once source tokens 1..j have been read.
using PolicyLabelMatrix = Grid<std::uint8_t, LabelTag>;

inline constexpr double kRowSumTolerance = 1e-6;

// Result of a structural check. `row` is 1-based, 0 when not row-specific.
struct Violation {
  std::size_t row = 0;
  std::string message;
};

using CheckResult = std::optional<Violation>;  // nullopt == ok

inline CheckResult validate_attention(const AttentionMatrix& a) {
  if (a.empty()) throw DimensionError("attention matrix is empty");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double w = a(i, j);
      if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
        std::ostringstream os;
        os << "row " << i + 1 << " column " << j + 1 << " has weight " << w << " outside [0,1]";
        return Violation{i + 1, os.str()};
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os << "row " << i + 1 << " sums to " << sum;
      return Violation{i + 1, os.str()};
    }
  }
  return std::nullopt;
}

inline CheckResult validate_staircase(const PolicyLabelMatrix& l) {
  if (l.empty()) throw DimensionError("label matrix is empty");
  const std::size_t last = l.cols() - 1;
  for (std::size_t i = 0; i < l.rows(); ++i) {
    if (l(i, last) != 1)
      return Violation{i + 1, "row " + std::to_string(i + 1) + " does not end in a write"};
    for (std::size_t j = 0; j < l.cols(); ++j) {
      if (l(i, j) > 1)
        return Violation{i + 1, "row " + std::to_string(i + 1) + " is not binary"};
      if (j > 0 && l(i, j - 1) == 1 && l(i, j) == 0)
        return Violation{i + 1, "row " + std::to_string(i + 1) + " is not a staircase"};
      if (i > 0 && l(i, j) == 1 && l(i - 1, j) == 0)
        return Violation{i + 1, "row " + std::to_string(i + 1) + " writes left of row " +
                                    std::to_string(i)};
    }
  }
  return std::nullopt;
}

// 0-based column of the first write in row r, or cols() if there is none.
inline std::size_t write_point(const PolicyLabelMatrix& l, std::size_t r) {
  for (std::size_t j = 0; j < l.cols(); ++j)
    if (l(r, j) == 1) return j;
  return l.cols();
}

enum class Action : int { kRead = 0, kWrite = 1 };

inline const char* to_string(Action a) { return a == Action::kWrite ? "WRITE" : "READ"; }

// ============================================================================
// Streams and traces
// ============================================================================

enum class EventKind { kPartial, kFinal, kEndOfStream };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kPartial: return "PARTIAL";
    case EventKind::kFinal: return "FINAL";
    case EventKind::kEndOfStream: return "END_OF_STREAM";
  }
  return "?";
}

// One ASR output. `tokens` is the full hypothesis since the stream started.
struct StreamEvent {
  double time_sec = 0.0;
  EventKind kind = EventKind::kPartial;
  std::vector<std::string> tokens;

  friend bool operator==(const StreamEvent&, const StreamEvent&) = default;
};

struct WriteRecord {
  std::size_t segment = 0;       // 0-based segment (sentence) number
  std::size_t target_index = 0;  // 1-based within the segment
  std::string token;
  std::size_t g = 0;             // source tokens of the segment consumed at write time
  double write_time_sec = 0.0;
  double source_time_sec = 0.0;  // when the g-th source token was read

  friend bool operator==(const WriteRecord&, const WriteRecord&) = default;
};

struct ReadRecord {
  std::size_t segment = 0;
  std::size_t source_index = 0;  // 1-based within the segment
  std::string token;
  double read_time_sec = 0.0;

  friend bool operator==(const ReadRecord&, const ReadRecord&) = default;
};

struct SessionTrace {
  std::vector<WriteRecord> writes;
  std::vector<ReadRecord> reads;
  // Number of writes recorded when each state reset happened.
  std::vector<std::size_t> flush_points;

  friend bool operator==(const SessionTrace&, const SessionTrace&) = default;

  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    out.reserve(writes.size());
    for (const auto& w : writes) out.push_back(w.token);
    return out;
  }

  std::vector<std::size_t> delays() const {
    std::vector<std::size_t> g;
    g.reserve(writes.size());
    for (const auto& w : writes) g.push_back(w.g);
    return g;
  }

  // Writes of one segment, in order.
  std::vector<WriteRecord> segment_writes(std::size_t segment) const {
    std::vector<WriteRecord> out;
    for (const auto& w : writes)
      if (w.segment == segment) out.push_back(w);
    return out;
  }
};

inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::string join_words(std::span<const std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace simulmt
