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

#ifndef NCTCP_MODEL_HPP
#define NCTCP_MODEL_HPP

// Closed-form throughput models for Reno-style TCP with Go-Back-N receivers
// and for end-to-end network coded TCP over an i.i.d. erasure path.
//
// Every function is pure. Arguments outside a formula's validity range raise
// std::domain_error.

#include <cstdint>

#include "types.hpp"

namespace nctcp::model {

enum class Protocol { tcp, e2e };

/// Path loss seen end to end when every one of `links` hops drops with q.
double effective_loss(double q, unsigned links);

// ---- TCP ------------------------------------------------------------------

/// Expected number of packets delivered between two loss indications,
/// (1-p)/p. Requires 0 < p < 1.
double tcp_expected_td_packets(double p);

/// Expected number of rounds in a triple-duplicate cycle. This is the
/// positive root of 3/2 (r-1)^2 + (r - 3/4) = (1-p)/p, which only exists for
/// p <= 12/13.
double tcp_expected_rounds(double p);

/// Steady-state mean congestion window, 3/2 E[r] - 1.
double tcp_expected_window(double p);

/// Throughput counting triple-duplicate events only, clamped at w_max/rtt.
ThroughputReport tcp_td_throughput(double p, const TcpConfig& tcp);

/// Probability that a loss in a window of (real-valued) size w ends in a
/// timeout rather than a triple duplicate. Non-integer windows use the
/// polynomial extension of the binomial coefficients.
double tcp_timeout_prob(double w, double p);

/// Expected length of a timeout period in rounds, including exponential
/// backoff capped at 64 T_o.
double tcp_timeout_duration(double p, double to_rounds);

/// Long-run TCP throughput with triple-duplicate and timeout events.
/// tcp.retransmission_extra_rounds is added to both the cycle length and the
/// timeout duration.
ThroughputReport tcp_avg_throughput(double p, const TcpConfig& tcp);

// ---- E2E network coded TCP ----------------------------------------------

/// E[W_i] = min(w_max, w1 + i(1-p)).
double e2e_expected_window(std::uint64_t round, double p, double w_max, double w1);

/// Expected transmissions needed to grow the window from 1 to w,
/// w(w-1) / (2(1-p)).
double e2e_expected_transmissions(double w, double p);

/// Effective round-trip time when each lost packet is replaced by the next
/// one on the wire: rtt + t_p p/(1-p).
double e2e_srtt(double rtt, double t_p, double p);

/// SRTT used by the E2E formulas: nc.srtt_override if set, else e2e_srtt().
double e2e_effective_srtt(const NcConfig& nc, double rtt, double p);

/// Per-round throughput (1-p) E[W_i] / (R SRTT), packets per second.
double e2e_round_throughput(std::uint64_t round, double p, const NcConfig& nc,
                            unsigned w_max, double rtt);

/// Average of e2e_round_throughput over rounds 1..n (closed form).
ThroughputReport e2e_avg_throughput(std::uint64_t n, double p, const NcConfig& nc,
                                    unsigned w_max, unsigned packet_bits, double rtt);

/// Sum of E[W_i] for i = 1..n, the piecewise f(n).
double e2e_window_sum(std::uint64_t n, double p, double w_max, double w1);

/// Number of rounds that fit in `horizon_seconds` at one round per srtt.
std::uint64_t horizon_rounds(double horizon_seconds, double srtt);

// ---- Up/down path ---------------------------------------------------------

struct RunLengths {
  double up = 0.0;    // E[r_up]   = (1-p_d)/p_d
  double down = 0.0;  // E[r_down] = p_d/(1-p_d)
};

/// Expected up- and down-state run lengths for an i.i.d. per-round down
/// probability. Requires 0 < p_d < 1.
RunLengths downstate_expectations(double p_d);

/// Fraction of rounds spent in the up-state. The run lengths above count
/// from zero; a realised run has at least one round, so each is shifted by
/// one before weighting, which gives exactly 1 - p_d.
double up_fraction(double p_d);

struct ModelInputs {
  ErasureParams erasure;
  TcpConfig tcp;
  NcConfig nc;
  std::uint64_t rounds = 0;  // E2E horizon n, must be >= 1 for Protocol::e2e
};

/// Up-state throughput of the chosen protocol weighted by the up-state time
/// fraction. Down rounds contribute nothing.
ThroughputReport combined_throughput(Protocol kind, const ModelInputs& in);

}  // namespace nctcp::model

#endif  // NCTCP_MODEL_HPP
