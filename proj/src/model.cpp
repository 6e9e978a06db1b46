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

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nctcp::model {

namespace {

void require_loss_open(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error(std::string(what) + ": p must lie in (0,1), got " +
                            std::to_string(p));
  }
}

void require_loss_halfopen(double p, const char* what) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::domain_error(std::string(what) + ": p must lie in [0,1), got " +
                            std::to_string(p));
  }
}

}  // namespace

double effective_loss(double q, unsigned links) {
  return ErasureParams::from_links(q, links).p;
}

double tcp_expected_td_packets(double p) {
  require_loss_open(p, "tcp_expected_td_packets");
  return (1.0 - p) / p;
}

double tcp_expected_rounds(double p) {
  require_loss_open(p, "tcp_expected_rounds");
  const double radicand = -1.0 / 18.0 + (2.0 / 3.0) * (1.0 - p) / p;
  // Rounding at exactly p = 12/13 can leave a tiny negative radicand.
  if (radicand < 0.0) {
    if (radicand > -1e-12) return 2.0 / 3.0;
    throw std::domain_error("tcp_expected_rounds: no real root for p > 12/13, got p = " +
                            std::to_string(p));
  }
  return 2.0 / 3.0 + std::sqrt(radicand);
}

double tcp_expected_window(double p) {
  const double r = tcp_expected_rounds(p);
  const double start = r - 0.5;          // window right after the halving
  const double end = 2.0 * (r - 0.75);   // window when the next loss hits
  return (start + end) / 2.0;
}

ThroughputReport tcp_td_throughput(double p, const TcpConfig& tcp) {
  tcp.validate();
  const double packets = tcp_expected_td_packets(p);
  const double cycle = tcp.rtt * (tcp_expected_rounds(p) + 1.0);
  const double clamp = static_cast<double>(tcp.w_max) / tcp.rtt;

  auto report = ThroughputReport::from_pkts(std::min(clamp, packets / cycle), tcp.packet_bits);
  report.erasure.p = p;
  report.tcp = tcp;
  return report;
}

double tcp_timeout_prob(double w, double p) {
  if (!(w >= 1.0)) throw std::domain_error("tcp_timeout_prob: window must be >= 1");
  require_loss_open(p, "tcp_timeout_prob");
  if (w < 3.0) return 1.0;

  const double q = 1.0 - p;
  const double c1 = w;
  const double c2 = w * (w - 1.0) / 2.0;
  const double prob = std::pow(p, w) + c1 * std::pow(p, w - 1.0) * q +
                      c2 * std::pow(p, w - 2.0) * q * q;
  return std::clamp(prob, 0.0, 1.0);
}

double tcp_timeout_duration(double p, double to_rounds) {
  require_loss_halfopen(p, "tcp_timeout_duration");
  if (!(to_rounds > 0.0)) throw std::domain_error("tcp_timeout_duration: T_o must be positive");
  if (p == 0.0) return 0.0;

  const double q = 1.0 - p;
  const double p2 = p * p;
  const double p3 = p2 * p;
  const double p4 = p3 * p;
  const double p5 = p4 * p;
  const double p6 = p5 * p;
  const double p7 = p6 * p;
  // Backoff doubles after each further loss of the single probe packet and
  // stays at 64 T_o from the seventh loss on.
  const double bracket = p + 3.0 * p2 + 7.0 * p3 + 15.0 * p4 + 31.0 * p5 + 63.0 * p6 / q +
                         64.0 * p7 / (q * q);
  return q * to_rounds * bracket;
}

ThroughputReport tcp_avg_throughput(double p, const TcpConfig& tcp) {
  tcp.validate();
  const double packets = tcp_expected_td_packets(p);
  const double rounds = tcp_expected_rounds(p);
  const double extra = tcp.retransmission_extra_rounds;
  const double p_to = tcp_timeout_prob(std::max(1.0, tcp_expected_window(p)), p);
  const double to_len = tcp_timeout_duration(p, tcp.to_rounds);

  const double cycle = tcp.rtt * (rounds + 1.0 + extra + p_to * (to_len + extra));
  const double clamp = static_cast<double>(tcp.w_max) / tcp.rtt;

  auto report = ThroughputReport::from_pkts(std::min(clamp, packets / cycle), tcp.packet_bits);
  report.erasure.p = p;
  report.tcp = tcp;
  return report;
}

double e2e_expected_window(std::uint64_t round, double p, double w_max, double w1) {
  require_loss_halfopen(p, "e2e_expected_window");
  if (!(w1 >= 1.0)) throw std::domain_error("e2e_expected_window: w1 must be >= 1");
  return std::min(w_max, w1 + static_cast<double>(round) * (1.0 - p));
}

double e2e_expected_transmissions(double w, double p) {
  require_loss_halfopen(p, "e2e_expected_transmissions");
  if (!(w >= 1.0)) throw std::domain_error("e2e_expected_transmissions: w must be >= 1");
  return w * (w - 1.0) / (2.0 * (1.0 - p));
}

double e2e_srtt(double rtt, double t_p, double p) {
  require_loss_halfopen(p, "e2e_srtt");
  if (!(rtt > 0.0)) throw std::domain_error("e2e_srtt: rtt must be positive");
  if (!(t_p >= 0.0)) throw std::domain_error("e2e_srtt: t_p must be non-negative");
  return rtt + t_p * p / (1.0 - p);
}

double e2e_effective_srtt(const NcConfig& nc, double rtt, double p) {
  if (nc.srtt_override) return *nc.srtt_override;
  return e2e_srtt(rtt, nc.t_p, p);
}

double e2e_round_throughput(std::uint64_t round, double p, const NcConfig& nc,
                            unsigned w_max, double rtt) {
  nc.validate();
  const double srtt = e2e_effective_srtt(nc, rtt, p);
  const double w = e2e_expected_window(round, p, static_cast<double>(w_max), nc.w1);
  return (1.0 - p) * w / (nc.redundancy_r * srtt);
}

double e2e_window_sum(std::uint64_t n, double p, double w_max, double w1) {
  require_loss_halfopen(p, "e2e_window_sum");
  const double q = 1.0 - p;
  const double nn = static_cast<double>(n);
  const double saturation = (w_max - w1) / q;  // r*
  if (nn <= saturation) {
    return nn * w1 + q * nn * (nn + 1.0) / 2.0;
  }
  return nn * w_max - saturation * (w_max - w1) + q * saturation * (saturation - 1.0) / 2.0;
}

ThroughputReport e2e_avg_throughput(std::uint64_t n, double p, const NcConfig& nc,
                                    unsigned w_max, unsigned packet_bits, double rtt) {
  if (n < 1) throw std::domain_error("e2e_avg_throughput: n must be >= 1");
  nc.validate();
  const double srtt = e2e_effective_srtt(nc, rtt, p);
  const double sum = e2e_window_sum(n, p, static_cast<double>(w_max), nc.w1);
  const double pkts = (1.0 - p) * sum / (static_cast<double>(n) * nc.redundancy_r * srtt);

  auto report = ThroughputReport::from_pkts(pkts, packet_bits);
  report.erasure.p = p;
  report.nc = nc;
  report.rounds = static_cast<double>(n);
  return report;
}

std::uint64_t horizon_rounds(double horizon_seconds, double srtt) {
  if (!(horizon_seconds > 0.0) || !(srtt > 0.0)) {
    throw std::domain_error("horizon_rounds: horizon and srtt must be positive");
  }
  return static_cast<std::uint64_t>(std::floor(horizon_seconds / srtt));
}

RunLengths downstate_expectations(double p_d) {
  if (!(p_d > 0.0 && p_d < 1.0)) {
    throw std::domain_error("downstate_expectations: p_d must lie in (0,1), got " +
                            std::to_string(p_d));
  }
  return {(1.0 - p_d) / p_d, p_d / (1.0 - p_d)};
}

double up_fraction(double p_d) {
  if (!(p_d >= 0.0 && p_d < 1.0)) {
    throw std::domain_error("up_fraction: p_d must lie in [0,1), got " + std::to_string(p_d));
  }
  // Equals (E[r_up]+1) / (E[r_up]+1 + E[r_down]+1) for p_d > 0.
  return 1.0 - p_d;
}

ThroughputReport combined_throughput(Protocol kind, const ModelInputs& in) {
  in.erasure.validate();
  ThroughputReport up;
  if (kind == Protocol::tcp) {
    up = tcp_avg_throughput(in.erasure.p, in.tcp);
  } else {
    up = e2e_avg_throughput(in.rounds, in.erasure.p, in.nc, in.tcp.w_max, in.tcp.packet_bits,
                            in.tcp.rtt);
    up.tcp = in.tcp;
  }
  const double frac = up_fraction(in.erasure.p_d);
  auto report = ThroughputReport::from_pkts(up.pkts_per_sec * frac, up.packet_bits);
  report.erasure = in.erasure;
  report.tcp = up.tcp;
  report.nc = up.nc;
  report.rounds = up.rounds;
  return report;
}

}  // namespace nctcp::model
