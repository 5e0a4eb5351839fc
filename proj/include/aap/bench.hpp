#pragma once

#include "aap/problems.hpp"
#include "aap/solver.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aap::bench {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text, std::size_t line);

// ---- result tables ---------------------------------------------------------

struct RunRecord {
  std::string problem;
  std::size_t size = 0;
  std::size_t n = 0;
  std::string mask = "none";
  std::string adapt = "none";
  int p = 1;
  int m = 10;
  double sketch = 30.0;
  std::uint64_t seed = 0;
  bool converged = false;
  int iterations = 0;
  int ls_solves = 0;
  int accepted_masks = 0;
  double final_residual = 0.0;
  std::optional<double> time_s;  // empty when timing is off

  bool operator==(const RunRecord&) const = default;
};

extern const char* const kTableHeader;

std::string to_csv_row(const RunRecord& r);
RunRecord parse_csv_row(const std::string& row, std::size_t line);

void write_table(std::ostream& out, const std::vector<RunRecord>& rows);
/// Throws ParseError on a bad header or row.
std::vector<RunRecord> read_table(std::istream& in);

// ---- traces ----------------------------------------------------------------

struct TraceHeader {
  std::string problem;
  std::size_t n = 0;
  std::size_t l1 = 0;
  double omega = 1.0;
  int window = 10;
  int alternation = 1;
  std::string adapt = "none";
  double eta_exponent = 1.1;
  bool strict = false;
};

/// Everything recorded about one mixing step.
struct TraceStep {
  int iteration = 0;
  std::size_t columns = 0;
  std::string status;
  bool accepted = false;
  double sigma_hat = 0.0;
  double lipschitz = 0.0;
  double eps_lhs = 0.0;
  double eps_rhs = 0.0;
  double eta_sum = 0.0;
  std::vector<double> dx_norms;              // per column
  std::vector<double> f;                     // restricted residual, length l1
  std::vector<std::vector<double>> increments;  // columns, each length l1
  std::optional<std::vector<std::size_t>> mask;  // nullopt: all rows
  std::optional<std::vector<double>> alpha;      // nullopt: LS fell back to Picard
};

struct Trace {
  TraceHeader header;
  std::vector<TraceStep> steps;
};

/// Streams one record per mixing step while a solve runs.
class TraceWriter : public SolveObserver {
public:
  TraceWriter(std::ostream& out, const TraceHeader& header);
  void on_mixing_step(const MixingStepView& step) override;

private:
  std::ostream& out_;
};

/// Throws ParseError with the offending line number.
Trace parse_trace(std::istream& in);

/// Header for a solve of `problem` under `config`; l1 comes from the static mask.
TraceHeader make_trace_header(const FixedPointProblem& problem, const SolverConfig& config);

// ---- trace verification ----------------------------------------------------

struct StepCheck {
  int iteration = 0;
  bool masked = false;
  bool fallback = false;
  double delta = 0.0;        // perturbation norm
  double bound = 0.0;        // C = sum of eta_j
  double sigma_min = 0.0;    // exact, of the restricted matrix
  double lipschitz = 0.0;    // max(recorded L, observed column ratios)
  double epsilon = 0.0;      // recomputed eps_RHS
  bool hypotheses = false;   // both hypotheses verified for every column
  bool bound_holds = true;
  std::string problem;       // empty when the step is consistent
};

struct VerificationReport {
  std::vector<StepCheck> steps;
  std::size_t hypothesis_steps = 0;
  std::size_t failures = 0;

  bool passed() const noexcept { return failures == 0; }
};

inline constexpr double kBoundSlack = 1e-10;

VerificationReport verify_theorem_trace(const Trace& trace);

// ---- experiments -----------------------------------------------------------

struct ExperimentPlan {
  std::string problem;
  std::vector<std::size_t> sizes;
  std::vector<std::string> masks = {"none"};
  std::vector<std::string> adapts = {"none"};
  std::vector<int> alternations = {1};
  int window = 0;          // 0: problem default
  double sketch = 30.0;
  double tolerance = 0.0;  // 0: problem default
  int max_iterations = 1000;
  std::uint64_t seed = 0;
  int repetitions = 1;
  std::string out;
  bool timing = false;
  int threads = 0;         // 0: OpenMP default
  std::string mode = "custom";  // mask | adapt | best | custom
  bool traces = true;      // one trace file per run under <out>.traces/
  PLaplaceInit init = PLaplaceInit::Zero;
};

/// Plain-text `key = value` plan; `#` starts a comment. Throws ParseError.
/// Mode presets are applied afterwards by apply_mode.
ExperimentPlan parse_plan(std::istream& in);

/// Fills the config matrix for the mask, adapt and best templates:
///   mask:  masks = none + every field
///   adapt: adapts = all five strategies
///   best:  both, and p = 1 .. the problem's largest alternation
/// Throws InvalidConfig for an unknown mode or problem.
void apply_mode(ExperimentPlan& plan);

/// Throws InvalidConfig for unknown problems, masks or strategies.
void validate_plan(const ExperimentPlan& plan);

struct RunOptions {
  std::string problem;
  std::size_t size = 0;
  SolverConfig config;
  std::uint64_t seed = 0;
  PLaplaceInit init = PLaplaceInit::Zero;
};

/// One solve wrapped as a table row. A numerical breakdown becomes a
/// non-converged row. `trace` receives the mixing-step trace when non-null.
RunRecord run_single(const RunOptions& options, std::ostream* trace = nullptr, bool timed = true);

/// One row per (size, mask, adapt, p), in that nesting order.
std::vector<RunRecord> run_experiment(const ExperimentPlan& plan);

/// Per size, the converged row with the lowest time (timing on) or the
/// fewest iterations.
std::vector<RunRecord> best_per_size(const std::vector<RunRecord>& rows);

void write_plan_metadata(std::ostream& out, const ExperimentPlan& plan);

// ---- masked kernel benchmark -----------------------------------------------

struct KernelBenchOptions {
  std::size_t min_n = 1u << 10;
  std::size_t max_n = 1u << 18;
  std::size_t columns = 50;
  std::vector<double> retentions = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0};
  int max_reps = 10000;
  double tolerance = 1e-5;  // relative change of the running average
  std::uint64_t seed = 0;
  bool pin_cpu = true;
};

struct BenchRecord {
  std::size_t n = 0;
  std::size_t columns = 0;
  double retention = 1.0;
  std::string op;  // "matvec" or "qr"
  double masked_s = 0.0;
  double full_s = 0.0;
  int reps = 0;
};

struct ThresholdRecord {
  std::size_t n = 0;
  std::string op;
  double threshold = 0.0;  // largest retention below 1 with masked < full; 0 if none
};

std::vector<BenchRecord> bench_masked_kernels(const KernelBenchOptions& options);
/// Restricts the calling thread to one CPU. False if the OS refused.
bool pin_to_single_cpu();

std::vector<ThresholdRecord> summarize_thresholds(const std::vector<BenchRecord>& records);

void write_bench_records(std::ostream& out, const std::vector<BenchRecord>& records);
void write_thresholds(std::ostream& out, const std::vector<ThresholdRecord>& thresholds);

// ---- CLI -------------------------------------------------------------------

enum ExitCode : int { kOk = 0, kNotConverged = 1, kInvalidInput = 2, kVerificationFailed = 3 };

int run_cli(int argc, char** argv);

} // namespace aap::bench
