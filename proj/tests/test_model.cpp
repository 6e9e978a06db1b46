/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "model.hpp"
#include "oracles.hpp"

using namespace nctcp;
using namespace nctcp::model;
using doctest::Approx;

namespace {

TcpConfig table_tcp() {
  TcpConfig t;
  t.rtt = 0.8;
  t.w_max = 90;
  t.to_rounds = 3.75;
  t.packet_bits = 8000;
  t.retransmission_extra_rounds = 2.0;
  return t;
}

NcConfig table_nc(double srtt) {
  NcConfig n;
  n.redundancy_r = 1.25;
  n.w1 = 1.0;
  n.srtt_override = srtt;
  return n;
}

}  // namespace

TEST_SUITE("types") {
  TEST_CASE("path loss from per-link loss") {
    const auto e = ErasureParams::from_links(0.015, 4);
    CHECK(e.p == 1.0 - std::pow(0.985, 4.0));
    CHECK(e.q.value() == 0.015);
    CHECK(e.links.value() == 4u);
    CHECK_THROWS_AS(ErasureParams::from_links(1.0, 4), std::domain_error);
    CHECK_THROWS_AS(ErasureParams::from_links(0.1, 0), std::domain_error);
  }

  TEST_CASE("validation") {
    CHECK_NOTHROW(ErasureParams{0.0, 0.0, {}, {}}.validate());
    CHECK_THROWS_AS((ErasureParams{1.0, 0.0, {}, {}}.validate()), std::domain_error);
    CHECK_THROWS_AS((ErasureParams{0.1, 1.0, {}, {}}.validate()), std::domain_error);
    TcpConfig t;
    t.beta = 2;
    CHECK_THROWS_AS(t.validate(), std::domain_error);
    t.beta = 1;
    t.w_max = 0;
    CHECK_THROWS_AS(t.validate(), std::domain_error);
    NcConfig n;
    n.redundancy_r = 0.9;
    CHECK_THROWS_AS(n.validate(), std::domain_error);
  }

  TEST_CASE("redundancy coverage is advisory") {
    NcConfig n;
    n.redundancy_r = 1.25;
    CHECK(n.redundancy_covers(0.2));
    CHECK_FALSE(n.redundancy_covers(0.25 + 1e-6));
    n.redundancy_r = 1.0;
    CHECK_NOTHROW(n.validate());
    CHECK_FALSE(n.redundancy_covers(0.1));
  }

  TEST_CASE("report units") {
    const auto r = ThroughputReport::from_pkts(77.5, 8000);
    CHECK(r.mbps == Approx(0.62).epsilon(1e-15));
  }
}

TEST_SUITE("tcp model") {
  TEST_CASE("effective loss") {
    CHECK(oracle::same_sig_figs(effective_loss(0.015, 4), 0.0587, 3));
    CHECK(effective_loss(0.0, 4) == 0.0);
    CHECK(oracle::same_sig_figs(effective_loss(0.05, 4), 0.1855, 4));
    CHECK_THROWS_AS(effective_loss(1.0, 4), std::domain_error);
    CHECK_THROWS_AS(effective_loss(-0.1, 4), std::domain_error);
  }

  TEST_CASE("packets between losses") {
    CHECK(tcp_expected_td_packets(0.5) == 1.0);
    for (double p : {0.0587, 0.1855, 0.3}) {
      CHECK(tcp_expected_td_packets(p) == Approx(oracle::td_packets_by_series(p)).epsilon(1e-9));
    }
    CHECK(oracle::same_sig_figs(tcp_expected_td_packets(0.0587), 16.036, 5));
    CHECK(oracle::same_sig_figs(tcp_expected_td_packets(0.1855), 4.3908, 5));
    CHECK_THROWS_AS(tcp_expected_td_packets(0.0), std::domain_error);
  }

  TEST_CASE("rounds per cycle against bisection") {
    for (double p : {0.0587, 0.1855, 0.001, 0.5, 0.9}) {
      CHECK(tcp_expected_rounds(p) == Approx(oracle::rounds_by_bisection(p)).epsilon(1e-9));
    }
    // The quoted examples (3.9273, 2.3614) sit 5e-4 and 1e-4 from the root.
    CHECK(tcp_expected_rounds(0.0587) == Approx(3.9273).epsilon(2e-4));
    CHECK(tcp_expected_rounds(0.1855) == Approx(2.3614).epsilon(2e-4));
    CHECK(oracle::same_sig_figs(tcp_expected_rounds(0.0587), 3.9278, 5));
    CHECK(oracle::same_sig_figs(tcp_expected_rounds(0.1855), 2.3613, 5));
    CHECK(tcp_expected_rounds(12.0 / 13.0) == Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK_THROWS_AS(tcp_expected_rounds(0.95), std::domain_error);
  }

  TEST_CASE("quadratic residual over a log grid") {
    const double lo = std::log(0.001);
    const double hi = std::log(12.0 / 13.0);
    for (int k = 1; k <= 100; ++k) {
      const double p = std::exp(lo + (hi - lo) * k / 100.0);
      const double r = tcp_expected_rounds(p);
      CHECK(std::abs(oracle::quad_residual(r, p)) < 1e-9);
    }
  }

  TEST_CASE("mean window") {
    CHECK(tcp_expected_window(0.0587) == Approx(4.891).epsilon(2e-4));
    CHECK(oracle::same_sig_figs(tcp_expected_window(0.1855), 2.542, 4));
    CHECK(tcp_expected_window(12.0 / 13.0) == Approx(0.0).epsilon(1e-6));
    const double r = oracle::rounds_by_bisection(0.0587);
    CHECK(tcp_expected_window(0.0587) == Approx(((r - 0.5) + 2.0 * (r - 0.75)) / 2.0));
  }

  TEST_CASE("triple-duplicate throughput") {
    const auto t = table_tcp();
    const auto r = tcp_td_throughput(0.0587, t);
    CHECK(oracle::same_sig_figs(r.pkts_per_sec, 4.068, 4));

    // Square-root law with an o(1/sqrt(p)) remainder: the relative gap
    // shrinks like sqrt(p), about (5/3) sqrt(3p/2).
    TcpConfig big = t;
    big.w_max = 4000000000u;
    double prev_gap = INFINITY;
    for (double p : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8}) {
      const double sqrt_law = std::sqrt(3.0 / (2.0 * p)) / big.rtt;
      const double gap = std::abs(tcp_td_throughput(p, big).pkts_per_sec / sqrt_law - 1.0);
      CHECK(gap < prev_gap);
      CHECK(gap < 2.0 * std::sqrt(1.5 * p));
      prev_gap = gap;
    }
    CHECK(std::abs(tcp_td_throughput(1e-5, big).pkts_per_sec /
                       (std::sqrt(3.0 / 2e-5) / big.rtt) - 1.0) < 0.02);

    TcpConfig small = t;
    small.w_max = 2;
    CHECK(tcp_td_throughput(0.0587, small).pkts_per_sec == 2.0 / 0.8);
  }

  TEST_CASE("timeout probability") {
    for (double p : {0.01, 0.3, 0.9}) CHECK(tcp_timeout_prob(2.0, p) == 1.0);
    CHECK(tcp_timeout_prob(3.0, 0.5) == Approx(0.875).epsilon(1e-15));
    for (unsigned w = 3; w <= 12; ++w) {
      for (double p : {0.05, 0.2, 0.6}) {
        CHECK(tcp_timeout_prob(w, p) ==
              Approx(oracle::timeout_prob_by_enumeration(w, p)).epsilon(1e-12));
      }
    }
    CHECK(oracle::same_sig_figs(tcp_timeout_prob(4.891, 0.0587), 2.4e-3, 2));
    for (double w = 1.0; w <= 40.0; w += 0.37) {
      for (double p = 0.01; p < 1.0; p += 0.07) {
        const double v = tcp_timeout_prob(w, p);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (w < 3.0) CHECK(v == 1.0);
      }
    }
    CHECK_THROWS_AS(tcp_timeout_prob(0.5, 0.1), std::domain_error);
  }

  TEST_CASE("timeout duration against the backoff series") {
    CHECK(tcp_timeout_duration(0.0, 3.75) == 0.0);
    for (double p : {0.0587, 0.1855, 0.5}) {
      CHECK(tcp_timeout_duration(p, 3.75) ==
            Approx(oracle::timeout_duration_by_series(p, 3.75)).epsilon(1e-9));
    }
    // Quoted as 1.106 and 0.245; the series itself gives 1.1053 and 0.2494.
    CHECK(oracle::same_sig_figs(tcp_timeout_duration(0.1855, 3.75), 1.105, 4));
    CHECK(oracle::same_sig_figs(tcp_timeout_duration(0.0587, 3.75), 0.249, 3));
    CHECK(tcp_timeout_duration(0.0587, 3.75) == Approx(0.245).epsilon(0.02));
  }

  TEST_CASE("average throughput, reported rows") {
    const auto t = table_tcp();
    CHECK(tcp_avg_throughput(0.0587, t).mbps == Approx(0.0231).epsilon(0.03));
    CHECK(tcp_avg_throughput(0.0963, t).mbps == Approx(0.0150).epsilon(0.03));
    const double row3 = tcp_avg_throughput(0.1855, t).mbps;
    CHECK(row3 >= 0.0045);
    CHECK(row3 <= 0.0085);
  }

  TEST_CASE("average throughput without the timer correction") {
    auto t = table_tcp();
    t.retransmission_extra_rounds = 0.0;
    const double p = 0.0963;
    const double r = oracle::rounds_by_bisection(p);
    const double w = ((r - 0.5) + 2.0 * (r - 0.75)) / 2.0;
    const double pto = std::pow(p, w) + w * std::pow(p, w - 1) * (1 - p) +
                       w * (w - 1) / 2 * std::pow(p, w - 2) * (1 - p) * (1 - p);
    const double expected = ((1 - p) / p) /
                            (t.rtt * (r + 1 + pto * oracle::timeout_duration_by_series(p, 3.75)));
    CHECK(tcp_avg_throughput(p, t).pkts_per_sec == Approx(expected).epsilon(1e-9));
  }

  TEST_CASE("non-increasing in p") {
    const auto t = table_tcp();
    double prev = INFINITY;
    for (int k = 1; k <= 50; ++k) {
      const double v = tcp_avg_throughput(k / 100.0, t).pkts_per_sec;
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_SUITE("e2e model") {
  TEST_CASE("expected window") {
    CHECK(e2e_expected_window(0, 0.3, 90, 7.0) == 7.0);
    CHECK(e2e_expected_window(66, 0.1, 90, 30) < 90.0);
    CHECK(e2e_expected_window(67, 0.1, 90, 30) == 90.0);
    double w = 1.0;
    for (int i = 0; i < 10; ++i) w += 1.0 - 0.0587;
    CHECK(e2e_expected_window(10, 0.0587, 90, 1) == Approx(w).epsilon(1e-12));
    CHECK(oracle::same_sig_figs(e2e_expected_window(10, 0.0587, 90, 1), 10.413, 5));
    for (double p : {0.0, 0.1, 0.5, 0.99}) {
      double prev = 0.0;
      for (std::uint64_t i = 0; i < 500; ++i) {
        const double v = e2e_expected_window(i, p, 90, 1);
        CHECK(v >= prev);
        prev = v;
      }
    }
  }

  TEST_CASE("transmissions to grow the window") {
    CHECK(e2e_expected_transmissions(1, 0.3) == 0.0);
    CHECK(e2e_expected_transmissions(90, 0.0) == 4005.0);
    CHECK(e2e_expected_transmissions(5, 0.2) == Approx(12.5).epsilon(1e-15));
    CHECK(oracle::transmissions_by_fundamental_matrix(5, 0.2) == Approx(12.5).epsilon(1e-12));
  }

  TEST_CASE("transmissions against the fundamental matrix") {
    for (double p : {0.0, 0.1, 0.3, 0.5}) {
      for (unsigned w = 1; w <= 12; ++w) {
        CHECK(std::abs(e2e_expected_transmissions(w, p) -
                       oracle::transmissions_by_fundamental_matrix(w, p)) < 1e-9);
      }
    }
  }

  TEST_CASE("effective rtt") {
    CHECK(e2e_srtt(0.8, 0.008, 0.0) == 0.8);
    for (double p : {0.1855, 0.5, 0.9}) {
      CHECK(e2e_srtt(0.8, 0.008, p) == Approx(oracle::srtt_by_series(0.8, 0.008, p)).epsilon(1e-12));
    }
    CHECK(oracle::same_sig_figs(e2e_srtt(0.8, 0.008, 0.1855), 0.80182, 5));
    CHECK(e2e_srtt(0.8, 0.008, 0.5) == Approx(0.808).epsilon(1e-15));
  }

  TEST_CASE("per-round throughput") {
    NcConfig lossless;
    lossless.redundancy_r = 1.0;
    lossless.t_p = 0.008;
    CHECK(e2e_round_throughput(1000, 0.0, lossless, 90, 0.8) == Approx(90.0 / 0.8));
    const auto nc = table_nc(0.8396);
    const double direct = (1.0 - 0.0587) * 90.0 / (1.25 * 0.8396);
    CHECK(e2e_round_throughput(1000, 0.0587, nc, 90, 0.8) == Approx(direct).epsilon(1e-14));
    CHECK(e2e_round_throughput(1000, 0.0587, nc, 90, 0.8) == Approx(80.73).epsilon(2e-4));
    const auto sat = static_cast<std::uint64_t>(std::ceil(89.0 / (1.0 - 0.0587)));
    CHECK(e2e_round_throughput(sat, 0.0587, nc, 90, 0.8) ==
          e2e_round_throughput(sat + 500, 0.0587, nc, 90, 0.8));
  }

  TEST_CASE("window sum against the loop") {
    // Before saturation the closed form is the plain sum.
    CHECK(e2e_window_sum(50, 0.0, 90, 1) == Approx(oracle::window_sum_by_loop(50, 0.0, 90, 1)));
    CHECK(e2e_window_sum(94, 0.0587, 90, 1) ==
          Approx(oracle::window_sum_by_loop(94, 0.0587, 90, 1)).epsilon(1e-12));
    // After it, the saturated branch carries r*(r*-1)/2, which is the
    // direct sum less (1-p) r* = w_max - w1 when r* is an integer.
    CHECK(oracle::window_sum_by_loop(500, 0.0, 90, 1) - e2e_window_sum(500, 0.0, 90, 1) ==
          Approx(89.0));
    CHECK(oracle::window_sum_by_loop(500, 0.5, 11, 1) - e2e_window_sum(500, 0.5, 11, 1) ==
          Approx(10.0));
    for (std::uint64_t n : {95u, 400u, 1191u}) {
      const double gap =
          oracle::window_sum_by_loop(n, 0.0587, 90, 1) - e2e_window_sum(n, 0.0587, 90, 1);
      CHECK(gap >= 0.0);
      CHECK(gap < 90.0);
    }
  }

  TEST_CASE("average throughput, reported rows") {
    const double srtt[] = {0.8396, 0.8434, 0.8540};
    const double p[] = {0.0587, 0.0963, 0.1855};
    const double mbps[] = {0.6202, 0.5917, 0.5243};
    for (int i = 0; i < 3; ++i) {
      const auto n = horizon_rounds(1000.0, srtt[i]);
      const auto r = e2e_avg_throughput(n, p[i], table_nc(srtt[i]), 90, 8000, 0.8);
      CHECK(r.mbps == Approx(mbps[i]).epsilon(0.01));
    }
    CHECK(horizon_rounds(1000.0, 0.8396) == 1191u);
    CHECK(horizon_rounds(1000.0, 0.8540) == 1170u);
  }

  TEST_CASE("average throughput limits") {
    NcConfig nc;
    nc.redundancy_r = 1.0;
    nc.w1 = 90;
    nc.t_p = 0.008;
    const auto r = e2e_avg_throughput(10000000, 0.0, nc, 90, 8000, 0.8);
    CHECK(r.pkts_per_sec == Approx(90.0 / 0.8).epsilon(1e-12));

    const auto far = e2e_avg_throughput(100000000, 0.1, table_nc(0.85), 90, 8000, 0.8);
    CHECK(far.pkts_per_sec == Approx(0.9 * 90 / (1.25 * 0.85)).epsilon(1e-5));
    CHECK_THROWS_AS(e2e_avg_throughput(0, 0.1, table_nc(0.85), 90, 8000, 0.8), std::domain_error);
  }

  TEST_CASE("average throughput matches mean of per-round values") {
    NcConfig nc = table_nc(0.9);
    for (double p : {0.0, 0.5}) {
      for (std::uint64_t n : {1u, 5u, 88u}) {
        double sum = 0.0;
        for (std::uint64_t i = 1; i <= n; ++i) sum += e2e_round_throughput(i, p, nc, 90, 0.8);
        const auto r = e2e_avg_throughput(n, p, nc, 90, 8000, 0.8);
        CHECK(r.pkts_per_sec == Approx(sum / n).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("non-increasing in p") {
    NcConfig nc;
    double prev = INFINITY;
    for (int k = 1; k <= 50; ++k) {
      const double p = k / 100.0;
      const double v = e2e_avg_throughput(1250, p, nc, 90, 8000, 0.8).pkts_per_sec;
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_SUITE("up/down path") {
  TEST_CASE("run lengths") {
    const auto half = downstate_expectations(0.5);
    CHECK(half.up == 1.0);
    CHECK(half.down == 1.0);
    std::mt19937_64 rng(20240601);
    for (double pd : {0.1, 0.9}) {
      const auto e = downstate_expectations(pd);
      // Up runs end on a down round and vice versa.
      CHECK(e.up == Approx(oracle::mean_run_length(pd, 1000000, rng)).epsilon(0.01));
      CHECK(e.down == Approx(oracle::mean_run_length(1.0 - pd, 1000000, rng)).epsilon(0.01));
    }
    CHECK(oracle::same_sig_figs(downstate_expectations(0.1).down, 0.1111, 4));
    CHECK_THROWS_AS(downstate_expectations(0.0), std::domain_error);
    CHECK_THROWS_AS(downstate_expectations(1.0), std::domain_error);
  }

  TEST_CASE("up fraction against a long simulated path") {
    std::mt19937_64 rng(7);
    std::bernoulli_distribution down(0.3);
    int up = 0;
    const int rounds = 2000000;
    for (int i = 0; i < rounds; ++i) up += down(rng) ? 0 : 1;
    CHECK(up_fraction(0.3) == Approx(static_cast<double>(up) / rounds).epsilon(0.005));
  }

  TEST_CASE("combined throughput scales by the up fraction") {
    ModelInputs in;
    in.tcp = table_tcp();
    in.nc = table_nc(0.8396);
    in.rounds = 1191;
    in.erasure.p = 0.0587;
    for (auto kind : {Protocol::tcp, Protocol::e2e}) {
      in.erasure.p_d = 0.0;
      const double base = combined_throughput(kind, in).pkts_per_sec;
      const double up_only = kind == Protocol::tcp
                                 ? tcp_avg_throughput(0.0587, in.tcp).pkts_per_sec
                                 : e2e_avg_throughput(1191, 0.0587, in.nc, 90, 8000, 0.8).pkts_per_sec;
      CHECK(base == up_only);
      in.erasure.p_d = 0.5;
      CHECK(combined_throughput(kind, in).pkts_per_sec == base * 0.5);
      in.erasure.p_d = 0.1;
      CHECK(combined_throughput(kind, in).pkts_per_sec == Approx(0.9 * base).epsilon(1e-9));
      for (double x = 0.01; x < 1.0; x += 0.049) {
        in.erasure.p_d = x;
        CHECK(combined_throughput(kind, in).pkts_per_sec == base * (1.0 - x));
      }
    }
  }
}
