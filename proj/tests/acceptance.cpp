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


// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "coding.hpp"
#include "model.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "sim.hpp"

using namespace nctcp;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Runs `body` `reps` times and returns the mean wall time per run in seconds.
double timed(int reps, const std::function<void()>& body) {
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) body();
  return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

TcpConfig table_tcp() {
  TcpConfig t;
  t.rtt = 0.8;
  t.w_max = 90;
  t.to_rounds = 3.75;
  t.packet_bits = 8000;
  t.retransmission_extra_rounds = 2.0;
  return t;
}

NcConfig table_nc() {
  NcConfig nc;
  nc.redundancy_r = 1.25;
  nc.t_p = 0.008;
  nc.w1 = 1.0;
  return nc;
}

Verdict e2e_analysis_rows() {
  Verdict v;
  const double p[] = {0.0587, 0.0963, 0.1855};
  const double srtt[] = {0.8396, 0.8434, 0.8540};
  const double want[] = {0.6202, 0.5917, 0.5243};
  double got[3] = {};
  const double secs = timed(100, [&] {
    for (int i = 0; i < 3; ++i) {
      auto nc = table_nc();
      nc.srtt_override = srtt[i];
      const auto n = model::horizon_rounds(1000.0, srtt[i]);
      got[i] = model::e2e_avg_throughput(n, p[i], nc, 90, 8000, 0.8).mbps;
    }
  });
  for (int i = 0; i < 3; ++i) {
    v.require(rel(got[i], want[i]) <= 0.01, fmt("p=%.4f %.5f Mbps vs %.4f", p[i], got[i], want[i]));
  }
  v.require(secs < 1e-3, fmt("%.2g s", secs));
  return v;
}

Verdict tcp_analysis_rows() {
  Verdict v;
  const double p[] = {0.0587, 0.0963, 0.1855};
  double got[3] = {};
  const double secs = timed(100, [&] {
    for (int i = 0; i < 3; ++i) got[i] = model::tcp_avg_throughput(p[i], table_tcp()).mbps;
  });
  v.require(rel(got[0], 0.0231) <= 0.03, fmt("p=0.0587 %.5f Mbps vs 0.0231", got[0]));
  v.require(rel(got[1], 0.0150) <= 0.03, fmt("p=0.0963 %.5f Mbps vs 0.0150", got[1]));
  v.require(got[2] >= 0.0045 && got[2] <= 0.0085, fmt("p=0.1855 %.5f Mbps in [0.0045, 0.0085]", got[2]));
  v.require(secs < 1e-3, fmt("%.2g s", secs));
  return v;
}

Verdict markov_oracle() {
  Verdict v;
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (double p : {0.0, 0.1, 0.3, 0.5}) {
    for (unsigned w = 1; w <= 12; ++w) {
      const double closed = model::e2e_expected_transmissions(w, p);
      const double chain = oracle::transmissions_by_fundamental_matrix(w, p);
      worst = std::max(worst, std::abs(closed - chain));
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  v.require(worst <= 1e-9, fmt("max abs error %.3g", worst));
  v.require(secs < 1.0, fmt("%.3g s", secs));
  return v;
}

Verdict quadratic_residual() {
  Verdict v;
  const double lo = 0.001, hi = 12.0 / 13.0;
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double p = lo * std::pow(hi / lo, i / 100.0);
    worst = std::max(worst, std::abs(oracle::quad_residual(model::tcp_expected_rounds(p), p)));
  }
  v.require(worst < 1e-9, fmt("max residual %.3g over 100 points", worst));
  return v;
}

Verdict e2e_simulation() {
  Verdict v;
  const double p = model::effective_loss(0.015, 4);
  const auto rounds = static_cast<std::uint64_t>(std::floor(300.0 / 0.8));
  double sum = 0.0;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    sim::ChannelModel ch;
    ch.p = p;
    ch.seed = seed;
    sum += sim::run_e2e(table_tcp(), table_nc(), ch, rounds).report.mbps;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const double mean = sum / 10.0;
  v.require(rel(mean, 0.62) <= 0.10, fmt("mean %.4f Mbps vs 0.62", mean));
  v.require(secs < 10.0, fmt("%.3g s", secs));
  return v;
}

Verdict window_slope() {
  Verdict v;
  for (double p : {0.0587, 0.1}) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      sim::ChannelModel ch;
      ch.p = p;
      ch.seed = seed;
      const auto res = sim::run_e2e(table_tcp(), table_nc(), ch, 300);
      std::vector<double> x, y;
      for (const auto& r : res.trace) {
        if (r.window >= 90.0) break;
        x.push_back(static_cast<double>(r.round));
        y.push_back(r.window);
      }
      total += oracle::ls_slope(x, y);
    }
    const double slope = total / 10.0;
    v.require(std::abs(slope - (1.0 - p)) <= 0.05, fmt("p=%.4f slope %.4f vs %.4f", p, slope, 1.0 - p));
  }
  return v;
}

Verdict replay_divergence() {
  Verdict v;
  std::vector<std::uint8_t> pattern(20000, 0);
  pattern[2] = 1;  // third packet of a 6-packet window
  NcConfig nc = table_nc();
  nc.redundancy_r = 1.0;
  const auto run = [&](model::Protocol proto) {
    return sim::replay_loss_pattern(proto, pattern, table_tcp(), nc, 10, 6.0);
  };
  const auto tcp = run(model::Protocol::tcp);
  const auto e2e = run(model::Protocol::e2e);
  const auto csv = [](const sim::SimResult& r) {
    std::ostringstream os;
    sim::write_trace_csv(os, r.trace);
    return os.str();
  };
  v.require(tcp.stats.td_events >= 1, "TCP TD events " + std::to_string(tcp.stats.td_events));
  v.require(e2e.stats.td_events + e2e.stats.to_events == 0,
            "E2E TD+TO events " + std::to_string(e2e.stats.td_events + e2e.stats.to_events));
  v.require(csv(tcp) == csv(run(model::Protocol::tcp)) && csv(e2e) == csv(run(model::Protocol::e2e)),
            "replays identical");
  return v;
}

Verdict coding_round_trip() {
  Verdict v;
  std::uint64_t received = 0, dependent = 0;
  bool exact = true;
  for (std::size_t k : {1u, 8u, 64u}) {
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
      Rng rng(trial * 131 + k, Stream::coefficients);
      std::vector<coding::Bytes> originals(k, coding::Bytes(1000));
      for (auto& pkt : originals) {
        for (auto& b : pkt) b = rng.byte();
      }
      coding::Decoder dec(1000);
      while (dec.dof() < k) {
        ++received;
        if (!dec.receive(coding::encode(0, originals, rng)).innovative) ++dependent;
      }
      const auto got = dec.decode();
      if (got.size() != k) exact = false;
      for (std::size_t i = 0; i < got.size() && exact; ++i) {
        exact = got[i].index == i && got[i].payload == originals[i];
      }
    }
  }
  const double rate = static_cast<double>(dependent) / static_cast<double>(received);
  v.require(exact, "300 trials bit-exact");
  v.require(rate <= 0.008, fmt("non-innovative rate %.4g", rate));
  return v;
}

Verdict monotonicity() {
  Verdict v;
  bool tcp_ok = true, e2e_ok = true, win_ok = true, scale_ok = true;
  double prev_tcp = 1e300, prev_e2e = 1e300;
  for (int i = 0; i <= 400; ++i) {
    const double p = 1e-4 * std::pow(0.9 / 1e-4, i / 400.0);
    const double t = model::tcp_avg_throughput(p, table_tcp()).pkts_per_sec;
    tcp_ok = tcp_ok && t <= prev_tcp;
    prev_tcp = t;
  }
  for (int i = 0; i <= 400; ++i) {
    const double p = 0.9 * i / 400.0;
    const auto n = model::horizon_rounds(1000.0, model::e2e_srtt(0.8, 0.008, p));
    const double e = model::e2e_avg_throughput(n, p, table_nc(), 90, 8000, 0.8).pkts_per_sec;
    e2e_ok = e2e_ok && e <= prev_e2e;
    prev_e2e = e;
  }
  for (double p : {0.0, 0.0587, 0.3, 0.9}) {
    double prev = 0.0;
    for (std::uint64_t r = 1; r <= 2000; ++r) {
      const double w = model::e2e_expected_window(r, p, 90.0, 1.0);
      win_ok = win_ok && w >= prev;
      prev = w;
    }
  }
  for (auto kind : {model::Protocol::tcp, model::Protocol::e2e}) {
    for (double p : {0.0587, 0.0963, 0.1855}) {
      for (double p_d : {0.05, 0.1, 0.5}) {
        model::ModelInputs in;
        in.erasure.p = p;
        in.tcp = table_tcp();
        in.nc = table_nc();
        in.rounds = 1000;
        const double base = model::combined_throughput(kind, in).pkts_per_sec;
        in.erasure.p_d = p_d;
        const double down = model::combined_throughput(kind, in).pkts_per_sec;
        scale_ok = scale_ok && down == (1.0 - p_d) * base;
      }
    }
  }
  v.require(tcp_ok, "TCP non-increasing in p");
  v.require(e2e_ok, "E2E non-increasing in p");
  v.require(win_ok, "E[W_i] non-decreasing in i");
  v.require(scale_ok, "combined = (1-p_d) x up-state, exactly");
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*check)();
  };
  const Criterion criteria[] = {
      {"E2E analysis rows", e2e_analysis_rows},
      {"TCP analysis rows", tcp_analysis_rows},
      {"fundamental-matrix oracle", markov_oracle},
      {"quadratic residual", quadratic_residual},
      {"E2E simulation vs analysis", e2e_simulation},
      {"window slope", window_slope},
      {"replay divergence", replay_divergence},
      {"coding round trip", coding_round_trip},
      {"monotonicity", monotonicity},
  };
  int failed = 0;
  int index = 1;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d %s: %s (%s)\n", index++, v.pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str());
    if (!v.pass) ++failed;
  }
  return failed;
}
