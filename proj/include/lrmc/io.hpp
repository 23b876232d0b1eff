#pragma once

#include <iosfwd>
#include <string>

#include "lrmc/types.hpp"

namespace lrmc {

/// Shortest round-trip decimal form of a double (17 significant digits).
std::string format_double(double v);

void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

void write_counts_csv(std::ostream& out, const TransitionCounts& c);
TransitionCounts read_counts_csv(std::istream& in);

/// Trajectory text format: header "# p=<int>", then one state per line.
void write_trajectory(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in);

// Path-based convenience wrappers; throw IoError on failure.
void save_matrix_csv(const std::string& path, const Matrix& m);
Matrix load_matrix_csv(const std::string& path);
void save_counts_csv(const std::string& path, const TransitionCounts& c);
TransitionCounts load_counts_csv(const std::string& path);
void save_trajectory(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& path);
void save_text(const std::string& path, const std::string& content);

}  // namespace lrmc
