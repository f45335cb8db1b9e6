// Acceptance checks for criteria 1 to 10. Each selected criterion prints one
// verdict line `criterion <id> PASS|FAIL: ...`, optionally preceded by
// indented diagnostic lines. Exit status is non-zero if any verdict is FAIL.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tcode/analytics.hpp"
#include "tcode/cli.hpp"
#include "tcode/harness.hpp"

using namespace tcode;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void note(const char* format, ...) __attribute__((format(printf, 1, 2)));
void note(const char* format, ...) {
  std::va_list args;
  va_start(args, format);
  std::fputs("    ", stdout);
  std::vfprintf(stdout, format, args);
  std::fputc('\n', stdout);
  va_end(args);
  std::fflush(stdout);
}

bool verdict(const std::string& id, bool pass, const std::string& detail) {
  std::printf("criterion %s %s: %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string f3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double harmonic(int lo, int hi) {
  double s = 0.0;
  for (int i = lo; i <= hi; ++i) s += 1.0 / i;
  return s;
}

/// 4x4 grid, 20% of edges removed, uniform forwarding with a hop limit high
/// enough that no packet is ever dropped.
ExperimentConfig reference_scenario() {
  ExperimentConfig c;
  c.topology.rows = 4;
  c.topology.cols = 4;
  c.topology.removal_fraction = 0.2;
  c.routing = RoutingKind::UniformRandom;
  c.ttl = 100'000;
  c.k = 8;
  c.n = 12;
  c.deadline = 0.3;
  c.horizon = 200.0;
  c.warmup_fraction = 0.1;
  c.replications = 5;
  c.seed = 1;
  return c;
}

constexpr double kHighLoadRate = 110.0;
constexpr double kMediumHighRate = 80.0;

// ---------------------------------------------------------------------------

bool criterion1() {
  const auto start = Clock::now();
  double worst_identity = 0.0;
  for (double rho = 0.0; rho < 0.999; rho += 0.037) {
    for (int k = 1; k <= 64; ++k) worst_identity = std::max(worst_identity, std::abs(analytics::gain(rho, k, k) - 1.0));
  }

  RngStream s("acceptance/c1", 1);
  double worst_ratio = 0.0;
  int triples = 0;
  while (triples < 1000) {
    const int k = 1 + static_cast<int>(s.uniform_index(32));
    const int n = k + static_cast<int>(s.uniform_index(32));
    const double rho = s.uniform01() * std::min(1.0, static_cast<double>(k) / n);
    if (rho == 0.0 || !analytics::feasible(rho, k, n)) continue;
    const auto p = analytics::AnalyticalParams::at_load(rho);
    const double ratio = analytics::expected_uncoded_delay(p, k) / analytics::expected_coded_delay(p, {k, n});
    const double g = analytics::gain(rho, k, n);
    worst_ratio = std::max(worst_ratio, std::abs(g - ratio) / ratio);
    ++triples;
  }

  double worst_prefactor = 0.0;
  const analytics::AnalyticalParams base = analytics::AnalyticalParams::at_load(0.35);
  analytics::AnalyticalParams other;
  other.mu = 0.25;
  other.c = 4000.0;
  other.gamma = 3.5;
  other.lambda = 0.35 * other.mu * other.c;
  for (int n = 8; n <= 22; ++n) {
    const double a = analytics::expected_uncoded_delay(base, 8) / analytics::expected_coded_delay(base, {8, n});
    const double b = analytics::expected_uncoded_delay(other, 8) / analytics::expected_coded_delay(other, {8, n});
    worst_prefactor = std::max(worst_prefactor, std::abs(a - b) / a);
  }
  const double elapsed = seconds_since(start);
  note("max |f(n=k) - 1| = %.3g, max relative |f - T_unc/T_cod| = %.3g over %d triples", worst_identity, worst_ratio, triples);
  note("max relative spread across (lambda, mu, c, gamma) at fixed rho = %.3g; runtime %.3f s", worst_prefactor, elapsed);
  const bool pass = worst_identity <= 1e-12 && worst_ratio <= 1e-12 && worst_prefactor <= 1e-12 && elapsed < 1.0;
  return verdict("1", pass, "analytical identities hold to 1e-12 (runtime " + f3(elapsed) + " s)");
}

bool criterion2() {
  struct Pair { int k; int n; };
  double worst = 0.0;
  for (Pair p : {Pair{1, 1}, Pair{2, 3}, Pair{4, 4}, Pair{4, 6}, Pair{8, 12}}) {
    RngStream s("acceptance/c2/" + std::to_string(p.k) + "-" + std::to_string(p.n), 1);
    const double mc = monte_carlo_kth_order_statistic(p.k, p.n, 1.0, 1'000'000, s);
    const double exact = harmonic(p.n - p.k + 1, p.n);
    const double err = std::abs(mc - exact) / exact;
    worst = std::max(worst, err);
    note("(k=%d, n=%d): Monte Carlo %.6f vs closed form %.6f (rel err %.3g)", p.k, p.n, mc, exact, err);
  }
  return verdict("2", worst <= 0.01, "k-th order statistic within 1% (worst " + f3(100 * worst) + "%)");
}

bool criterion3() {
  const auto start = Clock::now();
  const double mu = 1e4;
  double worst = 0.0;
  bool fifo = true;
  for (double rho : {0.3, 0.5, 0.8}) {
    const auto r = simulate_isolated_node(rho * mu, 1.0 / mu, 1'000'000, 1);
    const double expected = 1.0 / (mu - rho * mu);
    const double err = std::abs(r.sojourn.mean() - expected) / expected;
    worst = std::max(worst, err);
    fifo = fifo && r.fifo_order_held;
    note("rho=%.1f: mean sojourn %.6g s vs 1/(mu-lambda) %.6g s (rel err %.3g, %llu packets)", rho,
         r.sojourn.mean(), expected, err, static_cast<unsigned long long>(r.packets));
  }
  const double elapsed = seconds_since(start);
  return verdict("3", worst <= 0.03 && fifo && elapsed < 60.0,
                 "M/M/1 sojourn within 3% (worst " + f3(100 * worst) + "%, runtime " + f3(elapsed) + " s)");
}

bool criterion4() {
  ExperimentConfig c = reference_scenario();
  c.routing = RoutingKind::RandomShortestPath;
  c.ttl = 0;
  c.k = 1;
  c.n = 1;
  c.rates = {20.0};
  c.horizon = 5600.0;
  c.replications = 1;
  const Topology topo = build_topology(c);
  const int hops = topo.hop_distance(topo.source(), topo.sink());
  const RunMetrics m = Simulation(c, topo, 0).run();
  const double expected = hops * (c.service_mean + c.link.mean_delay_s);
  const double err = std::abs(m.delay_mean - expected) / expected;
  note("grid 4x4 (removal 0.2): H=%d, %llu messages, mean delay %.6g s vs H x 2.1 ms = %.6g s", hops,
       static_cast<unsigned long long>(m.delay_samples), m.delay_mean, expected);
  return verdict("4", err <= 0.05 && m.delay_samples >= 100'000,
                 "no-queue path delay within 5% (rel err " + f3(100 * err) + "%)");
}


const PairedResult& reference_pair() {
  static const PairedResult result = [] {
    ExperimentConfig c = reference_scenario();
    c.rates = {kHighLoadRate};
    const auto start = Clock::now();
    PairedResult r = run_paired(c);
    const RunMetrics& u = r.uncoded.pooled;
    const RunMetrics& k = r.coded.pooled;
    note("reference scenario: rate %.0f msg/s, %d replications x %.0f s, uniform forwarding", kHighLoadRate,
         c.replications, c.horizon);
    note("bottleneck utilization: uncoded %.3f, coded %.3f; saturated flag %s; dropped packets %llu/%llu",
         u.rho_est, k.rho_est, r.saturated ? "yes" : "no", static_cast<unsigned long long>(u.packets_dropped),
         static_cast<unsigned long long>(k.packets_dropped));
    note("uncoded: delay %.4g s +/- %.2g, var %.4g s^2, violation %.4g, unfinished %llu", u.delay_mean,
         r.uncoded.delay_mean_half_width, u.delay_variance, u.violation_probability,
         static_cast<unsigned long long>(u.messages_unfinished));
    note("coded:   delay %.4g s +/- %.2g, var %.4g s^2, violation %.4g, unfinished %llu", k.delay_mean,
         r.coded.delay_mean_half_width, k.delay_variance, k.violation_probability,
         static_cast<unsigned long long>(k.messages_unfinished));
    note("runtime %.1f s", seconds_since(start));
    return r;
  }();
  return result;
}

bool below_coded_saturation(const PairedResult& r) {
  return !r.saturated && r.coded.pooled.rho_est < 1.0 && r.coded.pooled.rho_est >= 0.85;
}

bool criterion5() {
  const PairedResult& r = reference_pair();
  const double reduction = 1.0 - r.coded.pooled.delay_mean / r.uncoded.pooled.delay_mean;
  const bool pass = below_coded_saturation(r) && reduction >= 0.05 && reduction <= 0.15;
  return verdict("5", pass, "coded mean delay " + f3(100 * reduction) +
                                "% below uncoded (band 5-15%), delay_gain " + f3(*r.delay_gain));
}

bool criterion6() {
  const PairedResult& r = reference_pair();
  const double reduction = 1.0 - r.coded.pooled.delay_variance / r.uncoded.pooled.delay_variance;
  const bool pass = below_coded_saturation(r) && reduction >= 0.15;
  return verdict("6", pass, "coded delay variance " + f3(100 * reduction) + "% below uncoded (need >= 15%)");
}

bool criterion7() {
  const PairedResult& r = reference_pair();
  const bool defined = r.violation_ratio.has_value();
  const double ratio = defined ? *r.violation_ratio : 0.0;
  const bool pass = below_coded_saturation(r) && defined && ratio >= 1.5;
  return verdict("7", pass,
                 "violation probability " + f3(r.uncoded.pooled.violation_probability) + " -> " +
                     f3(r.coded.pooled.violation_probability) + ", ratio " + (defined ? f3(ratio) : "NA") +
                     " (need >= 1.5)");
}

bool criterion8() {
  ExperimentConfig c = reference_scenario();
  c.replications = 2;
  c.horizon = 50.0;
  std::vector<double> rates;
  for (double r = 20.0; r <= 240.0; r += 20.0) rates.push_back(r);
  const auto start = Clock::now();
  const auto sweep = load_sweep(c, rates);
  double unc_info = 0.0;
  double cod_info = 0.0;
  double unc_total = 0.0;
  double cod_total = 0.0;
  for (const auto& p : sweep) {
    const RunMetrics& u = p.uncoded.pooled;
    const RunMetrics& k = p.coded.pooled;
    note("rate %5.0f msg/s (%.2f Mbps offered info): info bps %.4g / %.4g, total bps %.4g / %.4g, rho %.3f / %.3f%s",
         p.rate, p.rate * c.k * c.packet_size_bits / 1e6, u.delivered_throughput, k.delivered_throughput,
         u.total_throughput, k.total_throughput, u.rho_est, k.rho_est, p.saturated ? " [saturated]" : "");
    unc_info = std::max(unc_info, u.delivered_throughput);
    cod_info = std::max(cod_info, k.delivered_throughput);
    unc_total = std::max(unc_total, u.total_throughput);
    cod_total = std::max(cod_total, k.total_throughput);
  }
  note("saturation (peak) information throughput: uncoded %.4g bps, coded %.4g bps, ratio %.4f", unc_info, cod_info,
       cod_info / unc_info);
  note("saturation (peak) total delivered bits: uncoded %.4g bps, coded %.4g bps, ratio %.4f", unc_total, cod_total,
       cod_total / unc_total);
  note("reference-grid saturation %.3g Mbps vs the 8.5-10 Mbps band: %s", unc_info / 1e6,
       unc_info >= 8.5e6 && unc_info <= 10e6 ? "inside" : "outside");
  note("runtime %.1f s", seconds_since(start));
  const double gap = std::abs(cod_info / unc_info - 1.0);
  return verdict("8", gap <= 0.08,
                 "coded vs uncoded saturation information throughput differ by " + f3(100 * gap) + "% (need <= 8%)");
}

bool criterion9() {
  ExperimentConfig c = reference_scenario();
  c.rates = {kMediumHighRate};
  c.replications = 3;
  c.horizon = 100.0;
  std::vector<int> n_values;
  for (int n = 8; n <= 20; ++n) n_values.push_back(n);
  const auto start = Clock::now();
  const RateSweep sweep = rate_sweep(c, n_values);
  note("rate %.0f msg/s, uncoded bottleneck utilization %.3f, %d replications x %.0f s", kMediumHighRate,
       sweep.uncoded.pooled.rho_est, c.replications, c.horizon);

  std::vector<double> f;
  for (const auto& row : sweep.rows) {
    f.push_back(row.empirical_f.value_or(0.0));
    note("n=%2d R=%.3f f_empirical=%s f_analytic=%s coded rho %.3f", row.n, row.rate,
         row.empirical_f ? f3(*row.empirical_f).c_str() : "NA",
         row.analytical_f ? f3(*row.analytical_f).c_str() : "NA", row.rho_est);
  }
  note("runtime %.1f s", seconds_since(start));

  const auto peak = std::max_element(f.begin(), f.end());
  const std::size_t peak_i = static_cast<std::size_t>(peak - f.begin());
  const double peak_rate = sweep.rows[peak_i].rate;
  bool above_one = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = sweep.rows[i].rate;
    if (r >= 0.4 && r <= 0.9 && f[i] > 1.0) above_one = true;
  }
  bool declines = peak_i + 1 < f.size();
  for (std::size_t i = peak_i + 1; i < f.size(); ++i) declines = declines && f[i] <= f[i - 1];

  const bool peak_in_band = *peak >= 1.03 && *peak <= 1.2;
  note("f > 1 for some R in [0.4, 0.9]: %s; peak in [1.03, 1.2]: %s; declines beyond peak: %s",
       above_one ? "yes" : "no", peak_in_band ? "yes" : "no", declines ? "yes" : "no");
  return verdict("9", above_one && peak_in_band && declines,
                 "peak empirical f " + f3(*peak) + " at R=" + f3(peak_rate) + " (n=" +
                     std::to_string(sweep.rows[peak_i].n) + ")");
}

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int invoke(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"tcode"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) note("tcode exited %d: %s", code, err.str().c_str());
  return code;
}

bool criterion10() {
  const fs::path root = fs::temp_directory_path() / "tcode-acceptance-c10";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream conf(root / "c10.conf");
    conf << "[topology]\nrouting = uniform\nttl = 100000\n"
            "[traffic]\nrates = 40, 110\n"
            "[code]\nk = 8\nn = 12\nn_values = 8, 10, 12\n"
            "[run]\nhorizon_s = 8\nreplications = 2\nrecord_messages = true\n";
  }

  bool identical = true;
  for (const std::string cmd : {"simulate", "pair", "sweep-load", "sweep-rate"}) {
    for (const char* run : {"a", "b"}) {
      if (invoke({cmd, "--config", (root / "c10.conf").string(), "--out", (root / cmd / run).string(), "--quiet"}) != 0) {
        identical = false;
      }
    }
    for (const auto& entry : fs::directory_iterator(root / cmd / "a")) {
      const fs::path twin = root / cmd / "b" / entry.path().filename();
      const bool same = fs::exists(twin) && read_file(entry.path()) == read_file(twin);
      if (!same) note("%s/%s differs between reruns", cmd.c_str(), entry.path().filename().string().c_str());
      identical = identical && same;
    }
  }

  std::uint64_t runs = 0;
  std::uint64_t events = 0;
  std::string failure;
  for (RoutingKind kind : {RoutingKind::UniformRandom, RoutingKind::RandomWalkNoBacktrack, RoutingKind::RandomShortestPath}) {
    for (int n : {8, 12, 20}) {
      for (double rate : {40.0, 110.0, 400.0}) {
        ExperimentConfig c = reference_scenario();
        c.routing = kind;
        c.ttl = kind == RoutingKind::UniformRandom ? 100'000 : 0;
        c.n = n;
        c.rates = {rate};
        c.horizon = 4.0;
        const Topology topo = build_topology(c);
        Simulation sim(c, topo, 0);
        sim.enable_audit();
        std::map<MessageId, std::set<std::uint32_t>> distinct;
        sim.observe_deliveries([&](const Packet& p, SimTime) { distinct[p.message_id].insert(p.index); });
        try {
          const RunMetrics m = sim.run();
          std::uint64_t completions = 0;
          for (const auto& rec : sim.records()) {
            const auto it = distinct.find(rec.message_id);
            const std::size_t got = it == distinct.end() ? 0 : it->second.size();
            const bool should_complete = got >= static_cast<std::size_t>(c.k);
            if (should_complete != rec.completed_at.has_value()) failure = "completion does not match distinct arrivals";
            if (rec.completed_at) ++completions;
          }
          if (completions != m.messages_completed) failure = "completion count mismatch";
          if (m.messages_generated != m.messages_completed + m.messages_unfinished) failure = "message conservation";
          if (m.packets_generated != static_cast<std::uint64_t>(n) * m.messages_generated) failure = "packet count";
        } catch (const std::exception& e) {
          failure = e.what();
        }
        events += sim.events_dispatched();
        ++runs;
      }
    }
  }
  note("byte-identical reruns of simulate, pair, sweep-load, sweep-rate: %s", identical ? "yes" : "no");
  note("audited %llu runs (%llu events): %s", static_cast<unsigned long long>(runs),
       static_cast<unsigned long long>(events), failure.empty() ? "no violations" : failure.c_str());
  fs::remove_all(root);
  return verdict("10", identical && failure.empty(), "determinism and conservation");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks; prints one verdict line per criterion"};
  std::vector<std::string> selection;
  app.add_option("criteria", selection, "Criteria to run, e.g. 1 4 5-7 (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::function<bool()>> checks{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};

  std::set<int> chosen;
  for (const auto& item : selection) {
    const auto dash = item.find('-');
    const int lo = std::stoi(item.substr(0, dash));
    const int hi = dash == std::string::npos ? lo : std::stoi(item.substr(dash + 1));
    for (int i = lo; i <= hi; ++i) {
      if (!checks.count(i)) {
        std::fprintf(stderr, "unknown criterion %d\n", i);
        return 2;
      }
      chosen.insert(i);
    }
  }
  if (chosen.empty()) {
    for (const auto& [id, fn] : checks) chosen.insert(id);
  }

  int failed = 0;
  for (int id : chosen) {
    if (!checks.at(id)()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
