#pragma once

// Text serialization: CSV tables and YAML summaries / solve reports.

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "nlh/error.hpp"
#include "nlh/solver.hpp"

namespace nlh {

/// Shortest round-trip decimal; std::to_chars ignores the locale, so the
/// separator is always '.'.
inline std::string format_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Minimal CSV table: header row then one row per record.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& add(double x) {
    row_.push_back(format_number(x));
    return *this;
  }
  CsvTable& add(int x) {
    row_.push_back(std::to_string(x));
    return *this;
  }
  CsvTable& add(std::size_t x) {
    row_.push_back(std::to_string(x));
    return *this;
  }
  CsvTable& add(bool x) {
    row_.push_back(x ? "1" : "0");
    return *this;
  }
  CsvTable& add(const std::string& s) {
    row_.push_back(s);
    return *this;
  }
  void end_row() {
    if (row_.size() != header_.size()) fail(ErrorCode::Precondition, "CSV row width differs from header");
    rows_.push_back(std::move(row_));
    row_.clear();
  }

  void write(std::ostream& os) const {
    write_row(os, header_);
    for (const auto& r : rows_) write_row(os, r);
  }

 private:
  static void write_row(std::ostream& os, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::string> row_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::Io, "cannot write " + path);
  os << text;
  if (!os) fail(ErrorCode::Io, "write failed for " + path);
}

inline std::string emit_yaml(const YAML::Node& node) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << node;
  return std::string(out.c_str()) + "\n";
}

inline std::string trace_csv(const std::vector<TracePoint>& trace) {
  CsvTable t({"iteration", "energy", "residual"});
  for (std::size_t i = 0; i < trace.size(); ++i) t.add(i).add(trace[i].energy).add(trace[i].residual).end_row();
  std::ostringstream os;
  t.write(os);
  return os.str();
}

inline YAML::Node flow(const std::vector<double>& v) {
  YAML::Node n;
  for (double x : v) n.push_back(x);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

/// Key/value document with the iteration trace embedded as a CSV block.
inline YAML::Node report_to_yaml(const SolveReport& r, bool with_trace = true) {
  YAML::Node n;
  n["energy"] = r.energy;
  n["residual"] = r.residual;
  n["t_scale"] = r.t_scale;
  n["iterations"] = r.iterations;
  n["converged"] = r.converged;
  n["barycenter"] = flow(r.barycenter);
  n["u_norms"]["lp"] = r.u_lp;
  n["u_norms"]["sup"] = r.u_sup;
  n["u_norms"]["lp_k_scale"] = r.u_lp_k;
  n["u_norms"]["sup_k_scale"] = r.u_sup_k;
  if (with_trace) n["trace"] = trace_csv(r.trace);
  return n;
}

}  // namespace nlh
