#pragma once

#include <vector>

#include "tcode/transport.hpp"

namespace tcode::analytics {

/// Loads within this distance of a feasibility boundary count as infeasible.
inline constexpr double kBoundaryMargin = 1e-9;
inline constexpr double kDefaultGamma = 1000.0;

/// Single-channel Kleinrock parameters: packet arrival rate lambda (1/s),
/// service parameter mu (per capacity unit), capacity c, and the
/// normalization factor gamma (1/s). The delay prefactor lambda/(mu c gamma)
/// is in seconds.
struct AnalyticalParams {
  double lambda = 0.0;
  double mu = 1e-3;
  double c = 10e6;
  double gamma = kDefaultGamma;

  /// Throws ParameterError unless every field is strictly positive.
  void validate() const;
  double prefactor() const { return lambda / (mu * c * gamma); }

  /// 1000-bit packets on a 10 Mb/s channel (mu c = 10^4 packets/s) at the given load.
  static AnalyticalParams at_load(double rho, double gamma = kDefaultGamma);
};

/// rho = lambda / (mu c). lambda = 0 yields the degenerate load 0.
double channel_load(const AnalyticalParams& params);

/// a / (1 - load_arg) with the prefactor a fixed by `params`; the prefactor
/// does not follow an inflated argument. Throws SaturationError when load_arg
/// is within kBoundaryMargin of 1 or beyond.
double mean_packet_delay(const AnalyticalParams& params, double load_arg);

/// Sum of 1/i for i in [lo, hi], ascending.
double harmonic_partial(int lo, int hi);

/// Expected maximum of k exponential packet delays at the channel load.
double expected_uncoded_delay(const AnalyticalParams& params, int k);

/// Expected k-th smallest of n packet delays at the inflated load rho/R.
/// Throws SaturationError when rho >= R.
double expected_coded_delay(const AnalyticalParams& params, const CodeConfig& code);

/// Uncoded over coded expected delay. Independent of lambda, mu, c and gamma
/// once rho is fixed.
double gain(double rho, int k, int n);

/// True when both the uncoded and the (k, n) coded loads are below their poles.
bool feasible(double rho, int k, int n);

struct RedundancyOptimum {
  int n = 0;
  double f = 0.0;
};

/// Exhaustive argmax of gain over n in [k, n_max]. Ties go to the smaller n.
/// Throws SaturationError when no n is feasible.
RedundancyOptimum optimal_redundancy(double rho, int k, int n_max);

struct GainRow {
  int n = 0;
  double rate = 0.0;
  bool feasible = false;
  double uncoded_delay = 0.0;
  double coded_delay = 0.0;
  double f = 0.0;
};

/// One row per n in [k, n_max]; infeasible rows carry feasible=false and zero delays.
std::vector<GainRow> gain_curve(const AnalyticalParams& params, int k, int n_max);
inline std::vector<GainRow> gain_curve(double rho, int k, int n_max) {
  return gain_curve(AnalyticalParams::at_load(rho), k, n_max);
}

}  // namespace tcode::analytics
