#include "lrmc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace lrmc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

namespace {

std::vector<std::vector<std::string>> read_csv_cells(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line[0] == ',' || cells.empty()) throw ParseError("malformed csv row", line_no);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

Matrix read_matrix_csv(std::istream& in) {
  const auto rows = read_csv_cells(in);
  if (rows.empty()) throw ParseError("empty matrix csv", 1);
  const std::size_t cols = rows[0].size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw ParseError("ragged matrix csv", static_cast<long>(i + 1));
    for (std::size_t j = 0; j < cols; ++j) {
      try {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::stod(rows[i][j]);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + rows[i][j] + "'", static_cast<long>(i + 1));
      }
    }
  }
  return m;
}

void write_counts_csv(std::ostream& out, const TransitionCounts& c) {
  for (Eigen::Index i = 0; i < c.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.counts.cols(); ++j) {
      if (j) out << ',';
      out << c.counts(i, j);
    }
    out << '\n';
  }
}

TransitionCounts read_counts_csv(std::istream& in) {
  const auto rows = read_csv_cells(in);
  if (rows.empty()) throw ParseError("empty counts csv", 1);
  const std::size_t cols = rows[0].size();
  CountMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ParseError("ragged counts csv", static_cast<long>(i + 1));
    for (std::size_t j = 0; j < cols; ++j) {
      try {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::stoll(rows[i][j]);
      } catch (const std::exception&) {
        throw ParseError("bad count '" + rows[i][j] + "'", static_cast<long>(i + 1));
      }
    }
  }
  return TransitionCounts::from_counts(std::move(m));
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "# p=" << traj.p << '\n';
  for (int s : traj.states) out << s << '\n';
}

Trajectory read_trajectory(std::istream& in) {
  Trajectory traj;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line.rfind("# p=", 0) != 0) throw ParseError("expected header '# p=<int>'", line_no);
      try {
        traj.p = std::stoi(line.substr(4));
      } catch (const std::exception&) {
        throw ParseError("bad state count in header", line_no);
      }
      have_header = true;
      continue;
    }
    try {
      traj.states.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw ParseError("bad state '" + line + "'", line_no);
    }
  }
  if (!have_header) throw ParseError("missing header '# p=<int>'", 1);
  traj.validate();
  return traj;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

}  // namespace

void save_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = open_out(path);
  write_matrix_csv(out, m);
  if (!out.good()) throw IoError("write failed: " + path);
}

Matrix load_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  return read_matrix_csv(in);
}

void save_counts_csv(const std::string& path, const TransitionCounts& c) {
  auto out = open_out(path);
  write_counts_csv(out, c);
  if (!out.good()) throw IoError("write failed: " + path);
}

TransitionCounts load_counts_csv(const std::string& path) {
  auto in = open_in(path);
  return read_counts_csv(in);
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  write_trajectory(out, traj);
  if (!out.good()) throw IoError("write failed: " + path);
}

Trajectory load_trajectory(const std::string& path) {
  auto in = open_in(path);
  return read_trajectory(in);
}

void save_text(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace lrmc
