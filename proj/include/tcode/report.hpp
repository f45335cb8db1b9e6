#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcode/analytics.hpp"
#include "tcode/harness.hpp"

namespace tcode::report {

inline constexpr const char* kPairsHeader =
    "rate_msgs_s,k,n,R,arm,replications,delay_mean_s,delay_var_s2,violation_prob,"
    "throughput_bps,throughput_info_bps,drops,unfinished,rho_est";
inline constexpr const char* kRatiosHeader =
    "rate_msgs_s,k,n,R,delay_gain,variance_ratio,violation_ratio,throughput_ratio,"
    "total_throughput_ratio,half_width_uncoded_s,half_width_coded_s,saturated";
inline constexpr const char* kMessagesHeader =
    "rate_msgs_s,n,replication,message_id,created_at_s,completed_at_s,delay_s,violated,failed,"
    "hops_of_kth";
inline constexpr const char* kRateSweepHeader =
    "n,R,f_empirical,f_analytic,rho_est,delay_mean_s,delay_var_s2,violation_prob";
inline constexpr const char* kAnalysisHeader = "n,R,T_unc_s,T_cod_s,f,feasible";

/// 9 significant digits, '.' separator.
std::string fmt(double v);
/// fmt(v), or "NA" when undefined.
std::string fmt(const std::optional<double>& v);

void write_pairs_row(std::ostream& out, double rate, int k, int n, const AggregateMetrics& m);
void write_pairs(std::ostream& out, const std::vector<PairedResult>& results);
void write_ratios(std::ostream& out, const std::vector<PairedResult>& results);
void write_rate_sweep(std::ostream& out, const RateSweep& sweep);
void write_message_rows(std::ostream& out, double rate, int n, int replication,
                        const std::vector<MessageRecord>& records);
/// Gain table plus a trailing `# n_star=...,f_star=...` comment line when an
/// optimum exists.
void write_analysis(std::ostream& out, const std::vector<analytics::GainRow>& rows,
                    const std::optional<analytics::RedundancyOptimum>& best);

}  // namespace tcode::report
