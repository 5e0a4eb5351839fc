#include "aap/bench.hpp"
#include "aap/errors.hpp"

#include <Eigen/Core>
#include <omp.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace aap::bench {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Comma- or whitespace-separated list.
std::vector<std::string> split_list(const std::string& value) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream ss(v);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

template <class Int>
Int parse_int(const std::string& text, std::size_t line) {
  Int v{};
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) throw ParseError(line, "not an integer: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, std::size_t line) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw ParseError(line, "not a boolean: '" + text + "'");
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

SolverConfig config_for(const ExperimentPlan& plan, const ProblemInfo& info, const std::string& mask,
                        const std::string& adapt, int p) {
  SolverConfig c;
  c.window = plan.window > 0 ? plan.window : info.default_window;
  c.alternation = p;
  c.rel_tolerance = plan.tolerance > 0.0 ? plan.tolerance : info.default_tolerance;
  c.max_iterations = plan.max_iterations;
  if (mask != "none") c.mask_field = mask;
  c.adaptivity = parse_adaptivity(adapt);
  c.sketch_percent = plan.sketch;
  c.rng_seed = plan.seed;
  return c;
}

struct Task {
  std::size_t size;
  std::string mask;
  std::string adapt;
  int p;
};

} // namespace

ExperimentPlan parse_plan(std::istream& in) {
  ExperimentPlan plan;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (value.empty()) throw ParseError(line, "empty value for '" + key + "'");

    if (key == "problem") {
      plan.problem = value;
    } else if (key == "sizes" || key == "size") {
      plan.sizes.clear();
      for (const auto& t : split_list(value)) plan.sizes.push_back(parse_int<std::size_t>(t, line));
    } else if (key == "masks" || key == "mask") {
      plan.masks = split_list(value);
    } else if (key == "adapts" || key == "adapt") {
      plan.adapts = split_list(value);
    } else if (key == "p" || key == "alternations") {
      plan.alternations.clear();
      for (const auto& t : split_list(value)) plan.alternations.push_back(parse_int<int>(t, line));
    } else if (key == "m" || key == "window") {
      plan.window = parse_int<int>(value, line);
    } else if (key == "sketch") {
      plan.sketch = parse_double(value, line);
    } else if (key == "tol" || key == "tolerance") {
      plan.tolerance = parse_double(value, line);
    } else if (key == "max_iterations" || key == "max_iter") {
      plan.max_iterations = parse_int<int>(value, line);
    } else if (key == "seed") {
      plan.seed = parse_int<std::uint64_t>(value, line);
    } else if (key == "repetitions") {
      plan.repetitions = parse_int<int>(value, line);
    } else if (key == "out") {
      plan.out = value;
    } else if (key == "timing") {
      plan.timing = parse_bool(value, line);
    } else if (key == "threads") {
      plan.threads = parse_int<int>(value, line);
    } else if (key == "mode") {
      plan.mode = value;
    } else if (key == "traces") {
      plan.traces = parse_bool(value, line);
    } else if (key == "init") {
      if (value == "zero")
        plan.init = PLaplaceInit::Zero;
      else if (value == "poisson")
        plan.init = PLaplaceInit::Poisson;
      else
        throw ParseError(line, "init must be zero or poisson");
    } else {
      throw ParseError(line, "unknown key '" + key + "'");
    }
  }
  return plan;
}

void apply_mode(ExperimentPlan& plan) {
  if (plan.mode == "custom") return;
  const ProblemInfo& info = problem_info(plan.problem);
  const bool masks = plan.mode == "mask" || plan.mode == "best";
  const bool adapts = plan.mode == "adapt" || plan.mode == "best";
  if (!masks && !adapts) throw InvalidConfig("unknown mode '" + plan.mode + "'");
  if (masks) {
    plan.masks = {"none"};
    plan.masks.insert(plan.masks.end(), info.fields.begin(), info.fields.end());
  }
  if (adapts) plan.adapts = {"none", "sub-pow", "sub-const", "rand-pow", "rand-const"};
  if (plan.mode == "best") {
    plan.alternations.clear();
    for (int p = 1; p <= info.max_alternation; ++p) plan.alternations.push_back(p);
  }
}

void validate_plan(const ExperimentPlan& plan) {
  const ProblemInfo& info = problem_info(plan.problem);
  if (plan.sizes.empty()) throw InvalidConfig("plan has no sizes");
  if (plan.masks.empty() || plan.adapts.empty() || plan.alternations.empty())
    throw InvalidConfig("plan has an empty config matrix");
  for (auto s : plan.sizes)
    if (s < 3) throw InvalidConfig("size " + std::to_string(s) + " is too small");
  for (const auto& m : plan.masks)
    if (m != "none" && std::find(info.fields.begin(), info.fields.end(), m) == info.fields.end())
      throw InvalidConfig("problem '" + plan.problem + "' has no field '" + m + "'");
  for (const auto& a : plan.adapts) parse_adaptivity(a);
  for (int p : plan.alternations)
    if (p < 1) throw InvalidConfig("alternation must be >= 1");
  if (plan.repetitions < 1) throw InvalidConfig("repetitions must be >= 1");
  if (plan.window < 0) throw InvalidConfig("window must be >= 0");
  if (plan.max_iterations < 1) throw InvalidConfig("max_iterations must be >= 1");
  if (!(plan.sketch > 0.0 && plan.sketch <= 100.0)) throw InvalidConfig("sketch must be in (0, 100]");
  if (plan.tolerance < 0.0) throw InvalidConfig("tolerance must be >= 0");
  if (plan.threads < 0) throw InvalidConfig("threads must be >= 0");
  if (plan.timing && plan.threads > 1) throw InvalidConfig("timing runs are single-threaded");
  if (plan.out.empty()) throw InvalidConfig("plan has no output path");
}

RunRecord run_single(const RunOptions& options, std::ostream* trace, bool timed) {
  RunRecord r;
  r.problem = options.problem;
  r.size = options.size;
  r.mask = options.config.mask_field.value_or("none");
  r.adapt = to_string(options.config.adaptivity);
  r.p = options.config.alternation;
  r.m = options.config.window;
  r.sketch = options.config.sketch_percent;
  r.seed = options.seed;

  const FixedPointProblem problem = make_problem(options.problem, options.size, options.seed, options.init);
  r.n = problem.dimension();

  std::optional<TraceWriter> writer;
  if (trace) writer.emplace(*trace, make_trace_header(problem, options.config));

  auto fill = [&](const SolveReport& rep) {
    r.converged = rep.converged;
    r.iterations = rep.iterations;
    r.ls_solves = rep.ls_solves;
    r.accepted_masks =
        static_cast<int>(std::count_if(rep.mask_trace.begin(), rep.mask_trace.end(), [](auto& s) { return s.accepted; }));
    r.final_residual = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
    if (timed) r.time_s = rep.wall_time_seconds;
  };
  try {
    fill(solve(problem, options.config, writer ? &*writer : nullptr));
  } catch (const SolveBreakdown& e) {
    fill(e.partial_report());
    r.converged = false;
    r.final_residual = std::numeric_limits<double>::infinity();
  }
  return r;
}

std::vector<RunRecord> run_experiment(const ExperimentPlan& plan) {
  validate_plan(plan);
  const ProblemInfo& info = problem_info(plan.problem);

  std::vector<Task> tasks;
  for (auto size : plan.sizes)
    for (const auto& mask : plan.masks)
      for (const auto& adapt : plan.adapts)
        for (int p : plan.alternations) tasks.push_back({size, mask, adapt, p});

  std::filesystem::path trace_dir;
  if (plan.traces) {
    trace_dir = plan.out + ".traces";
    std::filesystem::create_directories(trace_dir);
  }

  std::vector<RunRecord> rows(tasks.size());
  auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    RunOptions opt{plan.problem, task.size, config_for(plan, info, task.mask, task.adapt, task.p), plan.seed,
                   plan.init};
    RunRecord& row = rows[t];
    try {
      double total = 0.0;
      for (int rep = 0; rep < plan.repetitions; ++rep) {
        std::ofstream trace_file;
        if (plan.traces && rep == 0) {
          std::ostringstream name;
          name << plan.problem << '-' << task.size << '-' << task.mask << '-' << task.adapt << "-p" << task.p
               << ".trace";
          trace_file.open(trace_dir / name.str());
        }
        row = run_single(opt, trace_file.is_open() ? &trace_file : nullptr, plan.timing);
        if (row.time_s) total += *row.time_s;
      }
      if (plan.timing) row.time_s = total / plan.repetitions;
    } catch (const std::exception&) {
      // Construction failures (e.g. a size over the resource limit) still get a row.
      row = RunRecord{};
      row.problem = plan.problem;
      row.size = task.size;
      row.mask = task.mask;
      row.adapt = task.adapt;
      row.p = task.p;
      row.m = opt.config.window;
      row.sketch = plan.sketch;
      row.seed = plan.seed;
      row.final_residual = std::numeric_limits<double>::infinity();
    }
  };

  if (plan.timing) {
    pin_to_single_cpu();
    Eigen::setNbThreads(1);
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    const int threads = plan.threads > 0 ? plan.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  }
  return rows;
}

std::vector<RunRecord> best_per_size(const std::vector<RunRecord>& rows) {
  std::vector<std::size_t> sizes;
  std::map<std::size_t, const RunRecord*> best;
  auto better = [](const RunRecord& a, const RunRecord& b) {
    if (a.time_s && b.time_s) return *a.time_s < *b.time_s;
    return a.iterations < b.iterations;
  };
  for (const auto& r : rows) {
    if (std::find(sizes.begin(), sizes.end(), r.size) == sizes.end()) sizes.push_back(r.size);
    if (!r.converged) continue;
    auto& slot = best[r.size];
    if (!slot || better(r, *slot)) slot = &r;
  }
  std::vector<RunRecord> out;
  for (auto s : sizes)
    if (auto it = best.find(s); it != best.end() && it->second) out.push_back(*it->second);
  return out;
}

void write_plan_metadata(std::ostream& out, const ExperimentPlan& plan) {
  out << "problem = " << plan.problem << '\n'
      << "sizes = " << join(plan.sizes) << '\n'
      << "masks = " << join(plan.masks) << '\n'
      << "adapts = " << join(plan.adapts) << '\n'
      << "p = " << join(plan.alternations) << '\n'
      << "window = " << plan.window << '\n'
      << "sketch = " << format_double(plan.sketch) << '\n'
      << "tolerance = " << format_double(plan.tolerance) << '\n'
      << "max_iterations = " << plan.max_iterations << '\n'
      << "seed = " << plan.seed << '\n'
      << "repetitions = " << plan.repetitions << '\n'
      << "mode = " << plan.mode << '\n'
      << "timing = " << (plan.timing ? "true" : "false") << '\n'
      << "threads = " << plan.threads << '\n'
      << "init = " << (plan.init == PLaplaceInit::Poisson ? "poisson" : "zero") << '\n'
      << "compiler = " << __VERSION__ << '\n'
      << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
#ifdef NDEBUG
      << "assertions = off\n";
#else
      << "assertions = on\n";
#endif
}

} // namespace aap::bench
