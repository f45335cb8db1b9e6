#include "tcode/analytics.hpp"

#include <cmath>
#include <string>

#include "tcode/errors.hpp"

namespace tcode::analytics {

void AnalyticalParams::validate() const {
  if (!(lambda > 0.0) || !(mu > 0.0) || !(c > 0.0) || !(gamma > 0.0)) {
    throw ParameterError("lambda, mu, c and gamma must all be positive");
  }
}

AnalyticalParams AnalyticalParams::at_load(double rho, double gamma) {
  AnalyticalParams p;
  p.gamma = gamma;
  p.lambda = rho * p.mu * p.c;
  return p;
}

double channel_load(const AnalyticalParams& params) {
  if (!(params.mu > 0.0) || !(params.c > 0.0)) {
    throw ParameterError("mu and c must be positive");
  }
  if (params.lambda < 0.0) throw ParameterError("lambda must be non-negative");
  return params.lambda / (params.mu * params.c);
}

double mean_packet_delay(const AnalyticalParams& params, double load_arg) {
  if (!(load_arg >= 0.0)) throw ParameterError("load must be non-negative");
  if (load_arg >= 1.0 - kBoundaryMargin) {
    throw SaturationError("load " + std::to_string(load_arg) + " saturates the channel");
  }
  return params.prefactor() / (1.0 - load_arg);
}

double harmonic_partial(int lo, int hi) {
  if (lo < 1 || lo > hi) {
    throw ParameterError("harmonic_partial needs 1 <= lo <= hi, got lo=" + std::to_string(lo) +
                         " hi=" + std::to_string(hi));
  }
  double sum = 0.0;
  for (int i = lo; i <= hi; ++i) sum += 1.0 / static_cast<double>(i);
  return sum;
}

double expected_uncoded_delay(const AnalyticalParams& params, int k) {
  if (k < 1) throw ParameterError("k must be at least 1");
  return mean_packet_delay(params, channel_load(params)) * harmonic_partial(1, k);
}

double expected_coded_delay(const AnalyticalParams& params, const CodeConfig& code) {
  code.validate();
  const double rho = channel_load(params);
  const double rate = code.rate();
  if (rho >= rate - kBoundaryMargin) {
    throw SaturationError("coded load infeasible: rho=" + std::to_string(rho) +
                          " >= R=" + std::to_string(rate));
  }
  return mean_packet_delay(params, rho / rate) * harmonic_partial(code.n - code.k + 1, code.n);
}

bool feasible(double rho, int k, int n) {
  const double rate = static_cast<double>(k) / static_cast<double>(n);
  return rho >= 0.0 && rho < 1.0 - kBoundaryMargin && rho < rate - kBoundaryMargin;
}

double gain(double rho, int k, int n) {
  CodeConfig{k, n}.validate();
  if (!(rho >= 0.0)) throw ParameterError("rho must be non-negative");
  if (!feasible(rho, k, n)) {
    throw SaturationError("load " + std::to_string(rho) + " infeasible for k=" +
                          std::to_string(k) + " n=" + std::to_string(n));
  }
  const double rate = static_cast<double>(k) / static_cast<double>(n);
  const double congestion = (1.0 - rho / rate) / (1.0 - rho);
  return congestion * harmonic_partial(1, k) / harmonic_partial(n - k + 1, n);
}

RedundancyOptimum optimal_redundancy(double rho, int k, int n_max) {
  if (n_max < k) throw ParameterError("n_max must be >= k");
  RedundancyOptimum best;
  for (int n = k; n <= n_max; ++n) {
    if (!feasible(rho, k, n)) continue;
    const double f = gain(rho, k, n);
    if (best.n == 0 || f > best.f) best = {n, f};
  }
  if (best.n == 0) {
    throw SaturationError("no feasible redundancy at rho=" + std::to_string(rho));
  }
  return best;
}

std::vector<GainRow> gain_curve(const AnalyticalParams& params, int k, int n_max) {
  if (n_max < k) throw ParameterError("n_max must be >= k");
  const double rho = channel_load(params);
  std::vector<GainRow> rows;
  for (int n = k; n <= n_max; ++n) {
    GainRow row;
    row.n = n;
    row.rate = static_cast<double>(k) / static_cast<double>(n);
    row.feasible = feasible(rho, k, n);
    if (row.feasible) {
      row.uncoded_delay = expected_uncoded_delay(params, k);
      row.coded_delay = expected_coded_delay(params, CodeConfig{k, n});
      row.f = gain(rho, k, n);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tcode::analytics
