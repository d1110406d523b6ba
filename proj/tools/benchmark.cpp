// Benchmark of the parallel kernels against their serial reference paths.
// Also asserts bitwise agreement of the draw-statistics kernel.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <string>

#include <omp.h>

#include "equibin/equivtest.hpp"
#include "equibin/rng.hpp"

using namespace equibin;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

FittedModel synthetic_normal_model(std::size_t draws, double mu, double sigma,
                                   double spread, std::uint64_t seed) {
  FittedModel m;
  m.metric_id = "bench";
  m.family = Family::normal;
  m.sign = 1;
  m.draw_count = draws;
  m.parameter_names = param_names(Family::normal);
  Rng rng(seed);
  m.draws.reserve(draws * 2);
  for (std::size_t s = 0; s < draws; ++s) {
    m.draws.push_back(mu + spread * rng.normal());
    m.draws.push_back(sigma * std::exp(0.5 * spread * rng.normal()));
  }
  m.rhat = {1.0, 1.0};
  m.ess = {double(draws), double(draws)};
  m.converged = true;
  return m;
}

MetricDataset synthetic_reference(std::size_t n, std::uint64_t seed) {
  MetricDataset d;
  d.metric_id = "bench";
  d.role = Role::reference;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    WeightedSample s;
    s.value = rng.normal();
    s.weight = 1.0;
    s.outcome = 0.02 * rng.uniform();
    d.samples.push_back(s);
  }
  return d;
}

struct BenchRow {
  std::string name;
  double serial_ms;
  double parallel_ms;
};

void print_row(const BenchRow& r) {
  std::cout << r.name << ": serial " << r.serial_ms << " ms, parallel "
            << r.parallel_ms << " ms, speedup "
            << (r.parallel_ms > 0 ? r.serial_ms / r.parallel_ms : 0.0) << "x\n";
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t pairs = 20000;
  std::size_t n_ref = 2000;
  int repeats = 3;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--pairs") && i + 1 < argc)
      pairs = std::stoul(argv[++i]);
    else if (!std::strcmp(argv[i], "--ref") && i + 1 < argc)
      n_ref = std::stoul(argv[++i]);
    else if (!std::strcmp(argv[i], "--repeats") && i + 1 < argc)
      repeats = std::stoi(argv[++i]);
    else {
      std::cerr << "usage: equibin_bench [--pairs N] [--ref N] [--repeats N]\n";
      return 1;
    }
  }

  const int max_threads = omp_get_max_threads();
  std::cout << "threads available: " << max_threads << "\n";
  std::cout << "draw pairs: " << pairs << ", reference rows: " << n_ref << "\n\n";

  const FittedModel ref = synthetic_normal_model(pairs, 0.0, 1.0, 0.05, 11);
  const FittedModel syn = synthetic_normal_model(pairs, 0.1, 1.0, 0.05, 12);
  const MetricDataset data = synthetic_reference(n_ref, 13);
  const BinWeightConfig bw;

  // draw-statistics kernel: explicit serial path vs OpenMP path
  {
    DrawStatistics serial_out, parallel_out;
    double t_serial = 0.0, t_parallel = 0.0;
    for (int r = 0; r < repeats; ++r) {
      const double t0 = now_ms();
      serial_out = compute_draw_statistics_serial(ref, syn, data, 5, bw);
      const double t1 = now_ms();
      parallel_out = compute_draw_statistics(ref, syn, data, 5, bw, true);
      const double t2 = now_ms();
      t_serial += t1 - t0;
      t_parallel += t2 - t1;
    }
    const bool identical = serial_out.theta == parallel_out.theta &&
                           serial_out.big_theta == parallel_out.big_theta &&
                           serial_out.rel_contrib == parallel_out.rel_contrib &&
                           serial_out.abs_contrib == parallel_out.abs_contrib;
    print_row({"draw statistics", t_serial / repeats, t_parallel / repeats});
    std::cout << "  serial/parallel bitwise identical: "
              << (identical ? "yes" : "NO") << "\n";
    if (!identical) return 1;
  }

  // posterior fit: serial chains vs parallel chains
  {
    SamplerConfig cfg;
    cfg.seed = 99;
    cfg.chains = 4;
    cfg.warmup = 1000;
    cfg.draws = 1000;
    double t_serial = 0.0, t_parallel = 0.0;
    FittedModel serial_fit, parallel_fit;
    for (int r = 0; r < repeats; ++r) {
      cfg.parallel_chains = false;
      const double t0 = now_ms();
      serial_fit = fit_posterior(Family::normal, data, cfg);
      const double t1 = now_ms();
      cfg.parallel_chains = true;
      parallel_fit = fit_posterior(Family::normal, data, cfg);
      const double t2 = now_ms();
      t_serial += t1 - t0;
      t_parallel += t2 - t1;
    }
    print_row({"posterior fit (4 chains)", t_serial / repeats, t_parallel / repeats});
    std::cout << "  serial/parallel draws identical: "
              << (serial_fit.draws == parallel_fit.draws ? "yes" : "NO") << "\n";
    if (serial_fit.draws != parallel_fit.draws) return 1;
  }

  return 0;
}
