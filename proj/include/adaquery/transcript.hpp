// Copyright 2026 The Adaquery Authors
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

#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace adaquery {

struct TranscriptRecord {
  std::uint64_t query_id;
  double answer;
  std::uint64_t samples_examined;
  std::uint64_t elapsed_ns;
};

// Ordered record of one full adaptive session.
struct Transcript {
  std::vector<TranscriptRecord> records;
  // Set when a session aborted mid-operation (e.g. budget ran out inside a
  // multi-query operation); a partial transcript carries no guarantee.
  bool invalidated = false;

  void append(std::uint64_t query_id, double answer,
              std::uint64_t samples_examined, std::uint64_t elapsed_ns) {
    records.push_back({query_id, answer, samples_examined, elapsed_ns});
  }
};

// Shortest round-trippable decimal rendering of a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

inline void write_csv(const Transcript& t, std::ostream& out) {
  out << "query_id,answer,samples_examined,elapsed_ns\n";
  for (const TranscriptRecord& r : t.records) {
    out << r.query_id << ',' << format_double(r.answer) << ','
        << r.samples_examined << ',' << r.elapsed_ns << '\n';
  }
}

}  // namespace adaquery
