#include "tcode/report.hpp"

#include <cstdio>
#include <ostream>

namespace tcode::report {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("NA"); }

void write_pairs_row(std::ostream& out, double rate, int k, int n, const AggregateMetrics& m) {
  const RunMetrics& p = m.pooled;
  out << fmt(rate) << ',' << k << ',' << n << ',' << fmt(static_cast<double>(k) / n) << ','
      << (n == k ? "uncoded" : "coded") << ',' << m.replications << ',' << fmt(p.delay_mean) << ','
      << fmt(p.delay_variance) << ',' << fmt(p.violation_probability) << ','
      << fmt(p.total_throughput) << ',' << fmt(p.delivered_throughput) << ',' << p.packets_dropped
      << ',' << p.messages_unfinished << ',' << fmt(p.rho_est) << '\n';
}

void write_pairs(std::ostream& out, const std::vector<PairedResult>& results) {
  out << kPairsHeader << '\n';
  for (const auto& r : results) {
    write_pairs_row(out, r.rate, r.k, r.k, r.uncoded);
    write_pairs_row(out, r.rate, r.k, r.n, r.coded);
  }
}

void write_ratios(std::ostream& out, const std::vector<PairedResult>& results) {
  out << kRatiosHeader << '\n';
  for (const auto& r : results) {
    out << fmt(r.rate) << ',' << r.k << ',' << r.n << ',' << fmt(static_cast<double>(r.k) / r.n)
        << ',' << fmt(r.delay_gain) << ',' << fmt(r.variance_ratio) << ','
        << fmt(r.violation_ratio) << ',' << fmt(r.throughput_ratio) << ','
        << fmt(r.total_throughput_ratio) << ',' << fmt(r.uncoded.delay_mean_half_width) << ','
        << fmt(r.coded.delay_mean_half_width) << ',' << (r.saturated ? 1 : 0) << '\n';
  }
}

void write_rate_sweep(std::ostream& out, const RateSweep& sweep) {
  out << kRateSweepHeader << '\n';
  for (const auto& row : sweep.rows) {
    const RunMetrics& p = row.coded.pooled;
    out << row.n << ',' << fmt(row.rate) << ',' << fmt(row.empirical_f) << ','
        << fmt(row.analytical_f) << ',' << fmt(row.rho_est) << ',' << fmt(p.delay_mean) << ','
        << fmt(p.delay_variance) << ',' << fmt(p.violation_probability) << '\n';
  }
}

void write_message_rows(std::ostream& out, double rate, int n, int replication,
                        const std::vector<MessageRecord>& records) {
  for (const auto& r : records) {
    out << fmt(rate) << ',' << n << ',' << replication << ',' << r.message_id << ','
        << fmt(r.created_at) << ',' << fmt(r.completed_at) << ',' << fmt(r.delay) << ','
        << (r.violated ? 1 : 0) << ',' << (r.failed ? 1 : 0) << ',' << r.hops_of_kth << '\n';
  }
}

void write_analysis(std::ostream& out, const std::vector<analytics::GainRow>& rows,
                    const std::optional<analytics::RedundancyOptimum>& best) {
  out << kAnalysisHeader << '\n';
  for (const auto& row : rows) {
    out << row.n << ',' << fmt(row.rate) << ',';
    if (row.feasible) {
      out << fmt(row.uncoded_delay) << ',' << fmt(row.coded_delay) << ',' << fmt(row.f) << ",1\n";
    } else {
      out << "NA,NA,NA,0\n";
    }
  }
  if (best) out << "# n_star=" << best->n << ",f_star=" << fmt(best->f) << '\n';
}

}  // namespace tcode::report
