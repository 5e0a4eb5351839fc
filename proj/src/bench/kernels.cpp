#include "aap/bench.hpp"
#include "aap/errors.hpp"
#include "aap/lsq.hpp"
#include "aap/sketching.hpp"

#include <sched.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

namespace aap::bench {

namespace {

volatile double g_sink = 0.0;  // keeps the timed kernels from being optimised out

constexpr int kMinReps = 3;

// Times `kernel` until the running mean moves by less than `tol` relative,
// or `cap` repetitions. Returns {mean seconds, reps}.
template <class Kernel>
std::pair<double, int> time_kernel(Kernel&& kernel, double tol, int cap) {
  using clock = std::chrono::steady_clock;
  double mean = 0.0;
  int reps = 0;
  while (reps < cap) {
    const auto t0 = clock::now();
    kernel();
    const double dt = std::chrono::duration<double>(clock::now() - t0).count();
    ++reps;
    const double next = mean + (dt - mean) / reps;
    const bool settled = reps >= kMinReps && mean > 0.0 && std::abs(next - mean) < tol * mean;
    mean = next;
    if (settled) break;
  }
  return {mean, reps};
}

void matvec_full(const DenseMatrix& F, std::span<const double> v, std::span<double> out) {
  for (std::size_t j = 0; j < F.cols(); ++j) out[j] = dot(F.col(j), v);
}

void matvec_masked(const DenseMatrix& F, std::span<const double> v, std::span<const std::size_t> rows,
                   std::span<double> out) {
  for (std::size_t j = 0; j < F.cols(); ++j) {
    const double* c = F.col(j).data();
    double s = 0.0;
    for (auto i : rows) s += c[i] * v[i];
    out[j] = s;
  }
}

} // namespace

bool pin_to_single_cpu() {
  const int cpu = sched_getcpu();
  if (cpu < 0) return false;
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(cpu, &set);
  return sched_setaffinity(0, sizeof(set), &set) == 0;
}

std::vector<BenchRecord> bench_masked_kernels(const KernelBenchOptions& o) {
  if (o.min_n == 0 || o.min_n > o.max_n) throw InvalidConfig("need 0 < min_n <= max_n");
  if (o.columns == 0) throw InvalidConfig("need at least one column");
  if (o.max_reps < 1) throw InvalidConfig("max_reps must be >= 1");
  for (double r : o.retentions)
    if (!(r > 0.0 && r <= 1.0)) throw InvalidConfig("retention must be in (0, 1]");
  if (o.pin_cpu) pin_to_single_cpu();

  Rng rng(o.seed);
  std::normal_distribution<double> normal;
  std::vector<BenchRecord> out;

  for (std::size_t n = o.min_n; n <= o.max_n; n *= 2) {
    DenseMatrix F(n, o.columns);
    for (std::size_t j = 0; j < o.columns; ++j)
      for (auto& x : F.col(j)) x = normal(rng);
    std::vector<double> v(n), y(o.columns), qr(n * o.columns), rhs;
    for (auto& x : v) x = normal(rng);

    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    std::vector<std::size_t> pool = all;

    for (double r : o.retentions) {
      const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(r * n)), 1, n);
      std::vector<std::size_t> rows(k);
      if (k == n)
        rows = all;
      else
        select_randomized(pool, k, rng, rows);

      BenchRecord mv{n, o.columns, r, "matvec"};
      auto [mm, mreps] = time_kernel(
          [&] {
            matvec_masked(F, v, rows, y);
            g_sink = g_sink + y[0];
          },
          o.tolerance, o.max_reps);
      auto [mf, freps] = time_kernel(
          [&] {
            matvec_full(F, v, y);
            g_sink = g_sink + y[0];
          },
          o.tolerance, o.max_reps);
      mv.masked_s = mm;
      mv.full_s = mf;
      mv.reps = std::max(mreps, freps);
      out.push_back(mv);

      // Both QR variants include the copy into the factorisation buffer.
      BenchRecord q{n, o.columns, r, "qr"};
      auto [qm, qmreps] = time_kernel(
          [&] {
            double* dst = qr.data();
            for (std::size_t j = 0; j < o.columns; ++j) {
              const double* c = F.col(j).data();
              for (auto i : rows) *dst++ = c[i];
            }
            householder_factor(std::span<double>(qr).first(k * o.columns), k, o.columns, rhs);
            g_sink = g_sink + qr[0];
          },
          o.tolerance, o.max_reps);
      auto [qf, qfreps] = time_kernel(
          [&] {
            std::copy(F.data(), F.data() + n * o.columns, qr.data());
            householder_factor(qr, n, o.columns, rhs);
            g_sink = g_sink + qr[0];
          },
          o.tolerance, o.max_reps);
      q.masked_s = qm;
      q.full_s = qf;
      q.reps = std::max(qmreps, qfreps);
      out.push_back(q);
    }
  }
  return out;
}

std::vector<ThresholdRecord> summarize_thresholds(const std::vector<BenchRecord>& records) {
  std::vector<ThresholdRecord> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](auto& t) { return t.n == r.n && t.op == r.op; });
    if (it == out.end()) {
      out.push_back({r.n, r.op, 0.0});
      it = out.end() - 1;
    }
    if (r.retention < 1.0 && r.masked_s < r.full_s) it->threshold = std::max(it->threshold, r.retention);
  }
  return out;
}

void write_bench_records(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "n,columns,retention,op,masked_s,full_s,ratio,reps\n";
  for (const auto& r : records)
    out << r.n << ',' << r.columns << ',' << format_double(r.retention) << ',' << r.op << ','
        << format_double(r.masked_s) << ',' << format_double(r.full_s) << ','
        << format_double(r.full_s > 0.0 ? r.masked_s / r.full_s : 0.0) << ',' << r.reps << '\n';
}

void write_thresholds(std::ostream& out, const std::vector<ThresholdRecord>& thresholds) {
  out << "n,op,threshold\n";
  for (const auto& t : thresholds) out << t.n << ',' << t.op << ',' << format_double(t.threshold) << '\n';
}

} // namespace aap::bench
