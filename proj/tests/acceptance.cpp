// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "rssloc/rssloc.hpp"

using namespace rssloc;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("[%s] %s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned worker_count() { return std::clamp(std::thread::hardware_concurrency(), 4u, 8u); }

ExperimentSpec operating_point() {
  ExperimentSpec spec;
  spec.threads = worker_count();
  return spec;
}

double saa_rmse(const SweepResult& r) { return r.method(kMethodOblSaa)->rmse; }

double mean_rss(const PathLossParams& p, Position a, Position x) {
  return p.p0 - 10.0 * p.gamma * std::log10(std::hypot(x.x1 - a.x1, x.x2 - a.x2) / p.d0);
}

// Central-difference Hessian of the expected negative log-likelihood at the truth.
FisherInfo finite_difference_fim(const Scenario& s, Position truth) {
  const double h = 1e-4;
  auto nll = [&](Position x) {
    double sum = 0.0;
    for (const Position& a : s.anchors) {
      const double r = mean_rss(s.params, a, truth) - mean_rss(s.params, a, x);
      sum += r * r;
    }
    return sum / (2.0 * s.params.sigma * s.params.sigma);
  };
  const double f0 = nll(truth);
  FisherInfo f;
  f.m11 = (nll({truth.x1 + h, truth.x2}) - 2 * f0 + nll({truth.x1 - h, truth.x2})) / (h * h);
  f.m22 = (nll({truth.x1, truth.x2 + h}) - 2 * f0 + nll({truth.x1, truth.x2 - h})) / (h * h);
  f.m12 = (nll({truth.x1 + h, truth.x2 + h}) - nll({truth.x1 + h, truth.x2 - h}) -
           nll({truth.x1 - h, truth.x2 + h}) + nll({truth.x1 - h, truth.x2 - h})) /
          (4 * h * h);
  return f;
}

void c1_operating_point(const SweepResult& r) {
  const double e = saa_rmse(r);
  const double ms = r.method(kMethodOblSaa)->mean_runtime * 1e3;
  report("C1", e >= 1.5 && e <= 2.3 && ms <= 50.0,
         fmt("operating point RMSE %.4f m in [1.5, 2.3], mean localize %.3f ms <= 50", e, ms));
}

void c2_n_max() {
  const auto rows = run_tuning(operating_point(), TuneParameter::NMax, {200, 500, 800});
  const double e200 = saa_rmse(rows[0]), e500 = saa_rmse(rows[1]), e800 = saa_rmse(rows[2]);
  report("C2", e200 - e500 >= 0.15 && std::abs(e800 - e500) <= 0.1,
         fmt("RMSE n_max 200/500/800 = %.4f/%.4f/%.4f; drop %.4f >= 0.15, |800-500| %.4f <= 0.1", e200, e500, e800,
             e200 - e500, std::abs(e800 - e500)));
}

void c3_epsilon() {
  const auto rows = run_tuning(operating_point(), TuneParameter::Epsilon);
  double lo = 1e300, hi = -1e300;
  std::string values;
  for (const auto& r : rows) {
    lo = std::min(lo, saa_rmse(r));
    hi = std::max(hi, saa_rmse(r));
    values += fmt("%s%.4f", values.empty() ? "" : "/", saa_rmse(r));
  }
  report("C3", hi - lo <= 0.15, fmt("RMSE over epsilon 0.2..0.95 = %s; spread %.4f <= 0.15", values.c_str(), hi - lo));
}

bool monotone(const std::vector<SweepResult>& rows, bool increasing, std::string& values) {
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values += fmt("%s%.4f", i ? "/" : "", saa_rmse(rows[i]));
    if (i == 0) continue;
    const double d = saa_rmse(rows[i]) - saa_rmse(rows[i - 1]);
    if (increasing ? d < 0 : d > 0) ok = false;
  }
  return ok;
}

std::vector<SweepResult> sigma_sweep(unsigned threads) {
  ExperimentSpec spec = operating_point();
  spec.sigma = {1, 2, 3, 4, 5, 6};
  spec.threads = threads;
  return run_sweep(spec);
}

void c4_trends(const std::vector<SweepResult>& by_sigma) {
  ExperimentSpec spec = operating_point();
  spec.n_anchors = {6, 8, 10, 12, 14};
  const auto by_n = run_sweep(spec);
  std::string vs, vn;
  const bool ok_s = monotone(by_sigma, true, vs);
  const bool ok_n = monotone(by_n, false, vn);
  report("C4", ok_s && ok_n,
         fmt("RMSE vs sigma 1..6 = %s (non-decreasing: %s); vs N 6..14 = %s (non-increasing: %s)", vs.c_str(),
             ok_s ? "yes" : "no", vn.c_str(), ok_n ? "yes" : "no"));
}

void c5_crlb(const SweepResult& r) {
  const double ratio = saa_rmse(r) / *r.mean_crlb;
  report("C5", ratio >= 0.8 && ratio <= 1.35,
         fmt("RMSE %.4f / mean CRLB %.4f = %.4f in [0.8, 1.35]", saa_rmse(r), *r.mean_crlb, ratio));
}

void c6_oracle() {
  ExperimentSpec spec = operating_point();
  spec.trials = 200;
  spec.grid = {0.4, 2};
  spec.comparators.grid_oracle = true;
  const auto records = run_trials(spec, spec.settings().front());
  std::size_t within = 0;
  for (const auto& t : records) {
    if (t.cost <= 1.05 * *t.oracle_cost) ++within;
  }
  const double frac = static_cast<double>(within) / static_cast<double>(records.size());
  report("C6", frac >= 0.9, fmt("cost <= 1.05 x grid oracle in %zu/%zu trials (%.3f >= 0.9)", within, records.size(), frac));
}

void c7_fisher() {
  Stream rng(20240607);
  const Bounds box;
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Scenario s;
    s.params.sigma = 2.0;
    for (int i = 0; i < 10; ++i) s.anchors.push_back(random_initial(box, rng));
    const Position truth = random_initial(box, rng);
    const FisherInfo a = fisher_information(s, truth);
    const FisherInfo fd = finite_difference_fim(s, truth);
    const double scale = std::max(std::abs(a.m11), std::abs(a.m22));
    worst = std::max({worst, std::abs(fd.m11 - a.m11) / scale, std::abs(fd.m12 - a.m12) / scale,
                      std::abs(fd.m22 - a.m22) / scale});
  }
  Scenario corner;
  corner.anchors = {{0, 0}, {40, 0}, {0, 40}, {40, 40}};
  corner.params.sigma = 2.0;
  const double bound = crlb_rmse(corner, {20, 20});
  const double expected = std::sqrt(800.0) * std::numbers::ln10 / 15.0;
  const double rel = std::abs(bound - expected) / expected;
  report("C7", worst <= 1e-3 && rel <= 1e-3 && std::abs(bound - 4.342) / 4.342 <= 1e-3,
         fmt("worst FIM relative deviation %.2e <= 1e-3 over 50 geometries; corner CRLB %.6f m (closed form %.6f)",
             worst, bound, expected));
}

void c8_zero_noise() {
  ExperimentSpec spec = operating_point();
  spec.sigma = {0.0};
  spec.trials = 500;
  spec.comparators.lls = true;
  const auto records = run_trials(spec, spec.settings().front());
  std::vector<double> err;
  double lls_max = 0.0;
  for (const auto& t : records) {
    err.push_back(t.error);
    lls_max = std::max(lls_max, *t.lls_error);
  }
  std::sort(err.begin(), err.end());
  const double median = 0.5 * (err[err.size() / 2 - 1] + err[err.size() / 2]);
  report("C8", median <= 0.5 && lls_max <= 1e-6,
         fmt("sigma=0: median localize error %.3e m <= 0.5, LLS max error %.3e m <= 1e-6", median, lls_max));
}

void c9_opposition(const SweepResult& r) {
  const double frac = static_cast<double>(r.opposing_wins) / static_cast<double>(r.trials);
  report("C9", frac >= 0.05,
         fmt("opposing branch strictly better in %zu/%zu trials (%.3f >= 0.05)", r.opposing_wins, r.trials, frac));
}

void c10_determinism(const std::vector<SweepResult>& parallel) {
  const auto serial = sigma_sweep(1);
  const auto again = sigma_sweep(std::max(2u, worker_count() / 2));
  bool same = serial.size() == parallel.size() && again.size() == parallel.size();
  for (std::size_t i = 0; same && i < serial.size(); ++i) {
    for (std::size_t m = 0; m < serial[i].methods.size(); ++m) {
      same = same && serial[i].methods[m].rmse == parallel[i].methods[m].rmse &&
             again[i].methods[m].rmse == parallel[i].methods[m].rmse;
    }
    same = same && serial[i].mean_crlb == parallel[i].mean_crlb && serial[i].opposing_wins == parallel[i].opposing_wins;
  }
  report("C10", same,
         fmt("sigma sweep RMSE bitwise identical with 1, %u and %u threads", std::max(2u, worker_count() / 2),
             worker_count()));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ExperimentSpec spec = operating_point();
    spec.comparators.crlb = true;
    const SweepResult op = run_sweep(spec).front();
    c1_operating_point(op);
    c2_n_max();
    c3_epsilon();
    const auto by_sigma = sigma_sweep(worker_count());
    c4_trends(by_sigma);
    c5_crlb(op);
    c6_oracle();
    c7_fisher();
    c8_zero_noise();
    c9_opposition(op);
    c10_determinism(by_sigma);
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d failure(s), %.1f s\n", failures, s);
  return failures == 0 ? 0 : 1;
}
