#include "aap/bench.hpp"
#include "aap/errors.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace aap::bench {

namespace {

constexpr const char* kMagic = "aap-trace 1";

template <class Seq>
void write_values(std::ostream& out, const char* tag, const Seq& values) {
  out << tag;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

} // namespace

TraceWriter::TraceWriter(std::ostream& out, const TraceHeader& h) : out_(out) {
  out_ << kMagic << '\n'
       << "problem " << h.problem << '\n'
       << "n " << h.n << '\n'
       << "l1 " << h.l1 << '\n'
       << "omega " << format_double(h.omega) << '\n'
       << "window " << h.window << '\n'
       << "alternation " << h.alternation << '\n'
       << "adapt " << h.adapt << '\n'
       << "eta_exponent " << format_double(h.eta_exponent) << '\n'
       << "strict " << (h.strict ? 1 : 0) << '\n';
}

void TraceWriter::on_mixing_step(const MixingStepView& s) {
  const StabilityRecord& r = *s.record;
  out_ << "mix " << s.iteration << ' ' << s.columns << ' ' << to_string(r.status) << ' ' << (r.accepted ? 1 : 0)
       << ' ' << format_double(r.sigma_hat) << ' ' << format_double(r.lipschitz) << ' ' << format_double(r.eps_lhs)
       << ' ' << format_double(r.eps_rhs) << ' ' << format_double(r.eta_sum) << '\n';
  write_values(out_, "dx", s.dx_norms);
  write_values(out_, "f", s.f_restricted);
  for (std::size_t j = 0; j < s.columns; ++j) write_values(out_, "col", s.increments->col(s.first_column + j));
  if (s.masked) {
    out_ << "mask";
    for (auto i : s.rows) out_ << ' ' << i;
    out_ << '\n';
  } else {
    out_ << "mask all\n";
  }
  if (s.ls_solution.empty())
    out_ << "alpha none\n";
  else
    write_values(out_, "alpha", s.ls_solution);
  out_ << "end\n";
}

namespace {

class LineReader {
public:
  LineReader(std::istream& in, std::size_t consumed) : in_(in), line_(consumed) {}

  // Next line split into tag and remaining tokens; false at end of input.
  bool next(std::string& tag, std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (line.empty()) continue;
      std::istringstream ss(line);
      ss >> tag;
      tokens.clear();
      for (std::string t; ss >> t;) tokens.push_back(t);
      return true;
    }
    return false;
  }

  void expect(const std::string& want, std::vector<std::string>& tokens) {
    std::string tag;
    if (!next(tag, tokens)) throw ParseError(line_ + 1, "unexpected end of trace, expected '" + want + "'");
    if (tag != want) throw ParseError(line_, "expected '" + want + "', got '" + tag + "'");
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::istream& in_;
  std::size_t line_;
};

std::size_t to_index(const std::string& s, std::size_t line) {
  const double v = parse_double(s, line);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ParseError(line, "expected a non-negative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::vector<double> to_values(const std::vector<std::string>& tokens, std::size_t line) {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(parse_double(t, line));
  return out;
}

std::string single(const std::vector<std::string>& tokens, std::size_t line) {
  if (tokens.size() != 1) throw ParseError(line, "expected exactly one value");
  return tokens.front();
}

} // namespace

Trace parse_trace(std::istream& in) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) throw ParseError(1, "not a trace file");
  LineReader r(in, 1);
  std::vector<std::string> t;
  Trace trace;
  TraceHeader& h = trace.header;

  r.expect("problem", t);
  h.problem = single(t, r.line());
  r.expect("n", t);
  h.n = to_index(single(t, r.line()), r.line());
  r.expect("l1", t);
  h.l1 = to_index(single(t, r.line()), r.line());
  if (h.l1 == 0 || h.l1 > h.n) throw ParseError(r.line(), "l1 must lie in [1, n]");
  r.expect("omega", t);
  h.omega = parse_double(single(t, r.line()), r.line());
  r.expect("window", t);
  h.window = static_cast<int>(to_index(single(t, r.line()), r.line()));
  r.expect("alternation", t);
  h.alternation = static_cast<int>(to_index(single(t, r.line()), r.line()));
  r.expect("adapt", t);
  h.adapt = single(t, r.line());
  try {
    parse_adaptivity(h.adapt);
  } catch (const InvalidConfig& e) {
    throw ParseError(r.line(), e.what());
  }
  r.expect("eta_exponent", t);
  h.eta_exponent = parse_double(single(t, r.line()), r.line());
  r.expect("strict", t);
  h.strict = to_index(single(t, r.line()), r.line()) != 0;

  std::string tag;
  while (r.next(tag, t)) {
    if (tag != "mix") throw ParseError(r.line(), "expected 'mix', got '" + tag + "'");
    if (t.size() != 9) throw ParseError(r.line(), "mix record needs 9 fields");
    TraceStep s;
    const std::size_t line = r.line();
    s.iteration = static_cast<int>(to_index(t[0], line));
    s.columns = to_index(t[1], line);
    s.status = t[2];
    s.accepted = to_index(t[3], line) != 0;
    s.sigma_hat = parse_double(t[4], line);
    s.lipschitz = parse_double(t[5], line);
    s.eps_lhs = parse_double(t[6], line);
    s.eps_rhs = parse_double(t[7], line);
    s.eta_sum = parse_double(t[8], line);
    if (s.columns == 0 || s.columns > static_cast<std::size_t>(h.window))
      throw ParseError(line, "column count outside the window");

    r.expect("dx", t);
    s.dx_norms = to_values(t, r.line());
    if (s.dx_norms.size() != s.columns) throw ParseError(r.line(), "dx needs one value per column");
    r.expect("f", t);
    s.f = to_values(t, r.line());
    if (s.f.size() != h.l1) throw ParseError(r.line(), "f needs l1 values");
    for (std::size_t j = 0; j < s.columns; ++j) {
      r.expect("col", t);
      s.increments.push_back(to_values(t, r.line()));
      if (s.increments.back().size() != h.l1) throw ParseError(r.line(), "increment column needs l1 values");
    }
    r.expect("mask", t);
    if (t.size() == 1 && t[0] == "all") {
      s.mask.reset();
    } else {
      if (t.empty()) throw ParseError(r.line(), "empty mask");
      std::vector<std::size_t> rows;
      for (const auto& v : t) rows.push_back(to_index(v, r.line()));
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i] >= h.l1 || (i > 0 && rows[i] <= rows[i - 1]))
          throw ParseError(r.line(), "mask rows must be strictly increasing and below l1");
      s.mask = std::move(rows);
    }
    r.expect("alpha", t);
    if (t.size() == 1 && t[0] == "none") {
      s.alpha.reset();
    } else {
      s.alpha = to_values(t, r.line());
      if (s.alpha->size() != s.columns) throw ParseError(r.line(), "alpha needs one value per column");
    }
    r.expect("end", t);
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

TraceHeader make_trace_header(const FixedPointProblem& problem, const SolverConfig& config) {
  TraceHeader h;
  h.problem = problem.name();
  h.n = problem.dimension();
  if (!config.mask_indices.empty())
    h.l1 = config.mask_indices.size();
  else
    h.l1 = build_static_mask(problem, config.mask_field).size();
  h.omega = config.omega.value_or(problem.recommended_omega());
  h.window = config.window;
  h.alternation = config.alternation;
  h.adapt = to_string(config.adaptivity);
  h.eta_exponent = config.eta_exponent;
  h.strict = config.strict_lhs;
  return h;
}

} // namespace aap::bench
