#include "aap/bench.hpp"
#include "aap/errors.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace aap::bench {

const char* const kTableHeader =
    "problem,size,n,mask,adapt,p,m,sketch,seed,converged,iterations,ls_solves,accepted_masks,final_residual,time_s";

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, std::size_t line) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError(line, "expected a number, got '" + text + "'");
  return v;
}

namespace {

template <class Int>
Int parse_int(const std::string& text, std::size_t line) {
  Int v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ParseError(line, "expected an integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& row, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(row);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!row.empty() && row.back() == sep) out.emplace_back();
  return out;
}

} // namespace

std::string to_csv_row(const RunRecord& r) {
  std::ostringstream out;
  out << r.problem << ',' << r.size << ',' << r.n << ',' << r.mask << ',' << r.adapt << ',' << r.p << ',' << r.m
      << ',' << format_double(r.sketch) << ',' << r.seed << ',' << (r.converged ? 1 : 0) << ',' << r.iterations
      << ',' << r.ls_solves << ',' << r.accepted_masks << ',' << format_double(r.final_residual) << ',';
  if (r.time_s) out << format_double(*r.time_s);
  return out.str();
}

RunRecord parse_csv_row(const std::string& row, std::size_t line) {
  const auto cells = split(row, ',');
  if (cells.size() != 15) throw ParseError(line, "expected 15 columns, got " + std::to_string(cells.size()));
  RunRecord r;
  r.problem = cells[0];
  r.size = parse_int<std::size_t>(cells[1], line);
  r.n = parse_int<std::size_t>(cells[2], line);
  r.mask = cells[3];
  r.adapt = cells[4];
  r.p = parse_int<int>(cells[5], line);
  r.m = parse_int<int>(cells[6], line);
  r.sketch = parse_double(cells[7], line);
  r.seed = parse_int<std::uint64_t>(cells[8], line);
  const int conv = parse_int<int>(cells[9], line);
  if (conv != 0 && conv != 1) throw ParseError(line, "converged must be 0 or 1");
  r.converged = conv == 1;
  r.iterations = parse_int<int>(cells[10], line);
  r.ls_solves = parse_int<int>(cells[11], line);
  r.accepted_masks = parse_int<int>(cells[12], line);
  r.final_residual = parse_double(cells[13], line);
  if (!cells[14].empty()) r.time_s = parse_double(cells[14], line);
  return r;
}

void write_table(std::ostream& out, const std::vector<RunRecord>& rows) {
  out << kTableHeader << '\n';
  for (const auto& r : rows) out << to_csv_row(r) << '\n';
}

std::vector<RunRecord> read_table(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != kTableHeader) throw ParseError(1, "missing or unexpected table header");
  std::vector<RunRecord> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    rows.push_back(parse_csv_row(line, lineno));
  }
  return rows;
}

} // namespace aap::bench
