//
// Copyright 2026 The dpchi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPCHI_IO_H_
#define DPCHI_IO_H_

// Plain-text readers for count data. Histograms hold one count per line;
// tables are comma-separated rows. Blank lines and text after '#' are
// ignored in both.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "dpchi/errors.h"
#include "dpchi/histogram.h"

namespace dpchi {

namespace internal {

inline std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string_view StripComment(std::string_view line) {
  const auto hash = line.find('#');
  return Trim(hash == std::string_view::npos ? line : line.substr(0, hash));
}

inline int64_t ParseCount(std::string_view field, const std::string& where) {
  field = Trim(field);
  int64_t value = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw DataError(where + ": expected a nonnegative integer, got '" +
                    std::string(field) + "'");
  }
  if (value < 0) {
    throw DataError(where + ": counts must be nonnegative, got " +
                    std::to_string(value));
  }
  return value;
}

inline std::ifstream OpenForRead(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

}  // namespace internal

inline Histogram ParseHistogram(std::istream& in,
                                const std::string& source = "input") {
  Histogram h;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const std::string_view body = internal::StripComment(line);
    if (body.empty()) continue;
    h.counts.push_back(internal::ParseCount(
        body, source + ":" + std::to_string(line_no)));
  }
  if (h.counts.empty()) throw DataError(source + ": no counts found");
  return h;
}

inline ContingencyTable ParseTable(std::istream& in,
                                   const std::string& source = "input") {
  std::vector<int64_t> cells;
  int rows = 0;
  int cols = 0;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const std::string_view body = internal::StripComment(line);
    if (body.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    int fields = 0;
    size_t start = 0;
    while (true) {
      const size_t comma = body.find(',', start);
      const std::string_view field =
          body.substr(start, comma == std::string_view::npos ? body.npos
                                                             : comma - start);
      cells.push_back(internal::ParseCount(field, where));
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw DataError(where + ": ragged table, expected " +
                      std::to_string(cols) + " columns but found " +
                      std::to_string(fields));
    }
    ++rows;
  }
  if (rows == 0) throw DataError(source + ": no table rows found");
  return ContingencyTable(rows, cols, std::move(cells));
}

inline Histogram ReadHistogram(const std::string& path) {
  std::ifstream in = internal::OpenForRead(path);
  return ParseHistogram(in, path);
}

inline ContingencyTable ReadTable(const std::string& path) {
  std::ifstream in = internal::OpenForRead(path);
  return ParseTable(in, path);
}

}  // namespace dpchi

#endif  // DPCHI_IO_H_
