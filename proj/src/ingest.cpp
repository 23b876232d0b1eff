#include "lrmc/ingest.hpp"

#include <algorithm>
#include <map>

namespace lrmc {

IngestResult ingest_transitions(const std::vector<std::pair<std::string, std::string>>& records,
                                long min_visits) {
  if (records.empty()) throw InvalidInputError("ingest_transitions: no records");
  if (min_visits < 0) throw InvalidInputError("ingest_transitions: min_visits must be >= 0");

  std::map<std::string, long> visits;
  for (const auto& [from, to] : records) {
    visits[from] += 1;
    visits[to] += 1;
  }

  std::map<std::string, int> index;
  IngestResult out;
  for (const auto& [id, count] : visits) {
    if (count >= min_visits) {
      index.emplace(id, static_cast<int>(out.index_to_id.size()));
      out.index_to_id.push_back(id);
    }
  }
  if (out.index_to_id.empty())
    throw InvalidInputError("ingest_transitions: every state fell below min_visits");

  const int p = static_cast<int>(out.index_to_id.size());
  CountMatrix counts = CountMatrix::Zero(p, p);
  for (const auto& [from, to] : records) {
    ++out.records_read;
    const auto fi = index.find(from);
    const auto ti = index.find(to);
    if (fi == index.end() || ti == index.end()) {
      ++out.records_dropped;
      continue;
    }
    counts(fi->second, ti->second) += 1;
  }
  if (counts.sum() == 0)
    throw InvalidInputError("ingest_transitions: no transitions between surviving states");
  out.counts = TransitionCounts::from_counts(std::move(counts));
  return out;
}

IngestResult ingest_transitions_csv(std::istream& in, long min_visits) {
  std::vector<std::pair<std::string, std::string>> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw ParseError("expected exactly two comma-separated fields", line_no);
    std::string from = line.substr(0, comma);
    std::string to = line.substr(comma + 1);
    if (line_no == 1 && from == "from_id" && to == "to_id") continue;  // header
    if (from.empty() || to.empty()) throw ParseError("empty state id", line_no);
    records.emplace_back(std::move(from), std::move(to));
  }
  if (records.empty()) throw InvalidInputError("ingest_transitions_csv: no records");
  return ingest_transitions(records, min_visits);
}

}  // namespace lrmc
