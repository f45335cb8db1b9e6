#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "tcode/errors.hpp"
#include "tcode/metrics.hpp"
#include "tcode/network.hpp"

using namespace tcode;

namespace {

MessageRecord completed(MessageId id, double created, double delay) {
  MessageRecord r;
  r.message_id = id;
  r.created_at = created;
  r.completed_at = created + delay;
  r.delay = delay;
  r.violated = delay > 0.3;
  return r;
}

MessageRecord unfinished(MessageId id, double created) {
  MessageRecord r;
  r.message_id = id;
  r.created_at = created;
  return r;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("streaming moment examples") {
    StreamingMoments same;
    for (int i = 0; i < 3; ++i) same.add(1.0);
    CHECK(same.mean() == 1.0);
    CHECK(same.variance() == 0.0);

    StreamingMoments two;
    two.add(1.0);
    two.add(3.0);
    CHECK(two.mean() == 2.0);
    CHECK(two.variance() == 2.0);

    StreamingMoments empty;
    CHECK(empty.count() == 0);
    CHECK(empty.variance() == 0.0);
  }

  TEST_CASE("exponential sample moments") {
    RngStream s("metrics/exp", 3);
    StreamingMoments m;
    for (int i = 0; i < 1'000'000; ++i) m.add(s.exponential(0.25));
    CHECK(std::abs(m.mean() - 0.25) / 0.25 < 0.01);
    CHECK(std::abs(m.variance() - 0.0625) / 0.0625 < 0.03);
  }

  TEST_CASE("streaming moments match a two-pass reference over six decades") {
    RngStream s("metrics/wide", 5);
    std::vector<double> xs(1'000'000);
    for (double& x : xs) x = 1e3 * std::pow(10.0, -6.0 * s.uniform01()) + 1e3;
    StreamingMoments m;
    for (double x : xs) m.add(x);

    long double sum = 0.0L;
    for (double x : xs) sum += x;
    const long double mean = sum / xs.size();
    long double ss = 0.0L;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = static_cast<double>(ss / (xs.size() - 1));
    CHECK(std::abs(m.mean() - static_cast<double>(mean)) <= 1e-9 * static_cast<double>(mean));
    CHECK(std::abs(m.variance() - var) <= 1e-9 * var);

    // Halves merged with the parallel update give the same answer.
    StreamingMoments lo;
    StreamingMoments hi;
    for (std::size_t i = 0; i < xs.size(); ++i) (i < xs.size() / 3 ? lo : hi).add(xs[i]);
    lo.merge(hi);
    CHECK(lo.count() == xs.size());
    CHECK(std::abs(lo.mean() - m.mean()) <= 1e-12 * m.mean());
    CHECK(std::abs(lo.variance() - var) <= 1e-9 * var);
  }

  TEST_CASE("delivered throughput arithmetic") {
    CHECK(delivered_throughput(1000, 8, 1000.0, 1.0) == 8e6);
    CHECK(delivered_throughput(0, 8, 1000.0, 1.0) == 0.0);
    CHECK_THROWS_AS(delivered_throughput(10, 8, 1000.0, 0.0), ParameterError);
  }

  TEST_CASE("warmup exclusion and violation window") {
    MeasurementWindow w;
    w.warmup_end = 10.0;
    w.horizon = 100.0;
    w.deadline = 0.3;
    w.k = 2;
    w.packet_size_bits = 1000.0;
    MetricsAccumulator acc(w);
    acc.record(completed(0, 5.0, 0.1));     // warmup, excluded
    acc.record(completed(1, 20.0, 0.1));    // on time
    acc.record(completed(2, 30.0, 0.31));   // late
    acc.record(unfinished(3, 40.0));        // never finished, counts as late
    acc.record(completed(4, 99.8, 0.1));    // censored from violation stats
    acc.record(unfinished(5, 99.9));        // censored
    acc.note_packet_delivered(5.0, 1000.0);
    acc.note_packet_delivered(50.0, 1000.0);
    acc.note_packet_delivered(60.0, 1000.0);

    const RunMetrics m = acc.finalize({});
    CHECK(m.messages_generated == 6);
    CHECK(m.messages_completed == 4);
    CHECK(m.messages_unfinished == 2);
    CHECK(m.messages_generated == m.messages_completed + m.messages_unfinished);
    CHECK(m.warmup_excluded == 1);
    CHECK(m.delay_samples == 3);
    CHECK(m.delay_mean == doctest::Approx((0.1 + 0.31 + 0.1) / 3.0));
    CHECK(m.violation_samples == 3);
    CHECK(m.violations == 2);
    CHECK(m.violation_probability == 2.0 / 3.0);
    CHECK(m.measured_interval == 90.0);
    CHECK(m.delivered_throughput == doctest::Approx(3 * 2 * 1000.0 / 90.0));
    CHECK(m.total_throughput == doctest::Approx(2000.0 / 90.0));
  }

  TEST_CASE("violation at the exact deadline is not a violation") {
    MeasurementWindow w;
    w.horizon = 10.0;
    MetricsAccumulator acc(w);
    acc.record(completed(0, 1.0, 0.3));
    const RunMetrics m = acc.finalize({});
    CHECK(m.violations == 0);
    CHECK(m.violation_samples == 1);
  }

  TEST_CASE("merge of a single run reproduces it") {
    RunMetrics r;
    r.replication = 0;
    r.messages_generated = 100;
    r.messages_completed = 90;
    r.messages_unfinished = 10;
    r.delay_samples = 90;
    r.delay_mean = 0.25;
    r.delay_variance = 0.01;
    r.violation_samples = 80;
    r.violations = 8;
    r.violation_probability = 0.1;
    r.delivered_throughput = 5e6;
    r.total_throughput = 7e6;
    const AggregateMetrics a = merge(std::span<const RunMetrics>(&r, 1));
    CHECK(a.replications == 1);
    CHECK(a.pooled.delay_mean == 0.25);
    CHECK(a.pooled.delay_variance == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(a.pooled.violation_probability == 0.1);
    CHECK(a.pooled.delivered_throughput == 5e6);
    CHECK(a.pooled.messages_generated == 100);
    CHECK(a.delay_mean_half_width ==
          doctest::Approx(1.959963984540054 * std::sqrt(0.01 / 90.0)).epsilon(1e-12));
  }

  TEST_CASE("merge of identical runs keeps the common mean") {
    RunMetrics r;
    r.delay_samples = 50;
    r.delay_mean = 0.2;
    r.delay_variance = 0.04;
    std::vector<RunMetrics> runs(4, r);
    for (int i = 0; i < 4; ++i) runs[i].replication = i;
    const AggregateMetrics a = merge(runs);
    CHECK(a.pooled.delay_mean == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(a.pooled.delay_samples == 200);
    CHECK(a.delay_mean_half_width == 0.0);
    CHECK_THROWS_AS(merge(std::span<const RunMetrics>{}), ParameterError);
  }

  TEST_CASE("merge is independent of input order") {
    RngStream s("metrics/merge", 1);
    std::vector<RunMetrics> runs(7);
    for (int i = 0; i < 7; ++i) {
      runs[i].replication = i;
      runs[i].delay_samples = 100 + s.uniform_index(1000);
      runs[i].delay_mean = s.uniform01();
      runs[i].delay_variance = s.uniform01() * 0.1;
      runs[i].delivered_throughput = s.uniform01() * 1e7;
    }
    const AggregateMetrics ref = merge(runs);
    std::vector<RunMetrics> shuffled = runs;
    std::reverse(shuffled.begin(), shuffled.end());
    std::swap(shuffled[1], shuffled[4]);
    const AggregateMetrics got = merge(shuffled);
    CHECK(bit_equal(got.pooled.delay_mean, ref.pooled.delay_mean));
    CHECK(bit_equal(got.pooled.delay_variance, ref.pooled.delay_variance));
    CHECK(bit_equal(got.pooled.delivered_throughput, ref.pooled.delivered_throughput));
    CHECK(bit_equal(got.delay_mean_half_width, ref.delay_mean_half_width));
  }

  TEST_CASE("replication confidence interval covers the M/M/1 sojourn") {
    const double mu = 1e4;
    const double lambda = 0.5 * mu;
    const double truth = 1.0 / (mu - lambda);
    int covered = 0;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<RunMetrics> reps;
      for (int rep = 0; rep < 10; ++rep) {
        const auto r = simulate_isolated_node(lambda, 1.0 / mu, 100'000,
                                              1000 + static_cast<std::uint64_t>(trial * 10 + rep));
        RunMetrics m;
        m.replication = rep;
        m.delay_samples = r.sojourn.count();
        m.delay_mean = r.sojourn.mean();
        m.delay_variance = r.sojourn.variance();
        reps.push_back(m);
      }
      const AggregateMetrics a = merge(reps);
      if (std::abs(a.pooled.delay_mean - truth) <= a.delay_mean_half_width) ++covered;
    }
    CHECK(covered >= 8);
  }
}
