#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "lrmc/types.hpp"

namespace lrmc {

struct IngestResult {
  TransitionCounts counts;              // over surviving states only
  std::vector<std::string> index_to_id; // sorted id order
  long records_read = 0;
  long records_dropped = 0;             // touched a filtered state
};

/// Builds transition counts from (from_id, to_id) records, dropping states
/// visited fewer than `min_visits` times (a visit is any appearance, as
/// origin or destination). Surviving states are indexed in sorted id order.
IngestResult ingest_transitions(const std::vector<std::pair<std::string, std::string>>& records,
                                long min_visits);

/// Parses "from_id,to_id" CSV lines (optional "from_id,to_id" header) and
/// ingests them. Throws ParseError with the offending line number.
IngestResult ingest_transitions_csv(std::istream& in, long min_visits);

}  // namespace lrmc
