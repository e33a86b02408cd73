#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcbf/error.hpp"
#include "pcbf/sim.hpp"

namespace pcbf {

void write_csv(const SimTrace& trace, std::ostream& out) {
  for (std::size_t i = 0; i < trace.columns.size(); ++i) out << (i ? "," : "") << trace.columns[i];
  out << '\n';
  char buf[32];
  for (const auto& row : trace.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_csv(const SimTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(trace, out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace

SimTrace read_csv(std::istream& in) {
  SimTrace trace;
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  trace.columns = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != trace.columns.size()) {
      throw IoError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(trace.columns.size()) +
                    " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || *end != '\0') throw IoError("csv line " + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

SimTrace read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  return read_csv(in);
}

}  // namespace pcbf
