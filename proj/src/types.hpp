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

#ifndef NCTCP_TYPES_HPP
#define NCTCP_TYPES_HPP

#include <cstdint>
#include <optional>

namespace nctcp {

// Loss description of a path. p is the per-packet loss probability while the
// path is up; p_d the probability that a whole round is in the down-state.
struct ErasureParams {
  double p = 0.0;
  double p_d = 0.0;
  // Set when p was derived from a per-link loss over a number of hops.
  std::optional<double> q;
  std::optional<unsigned> links;

  // Builds the path loss from a per-link loss q over `links` hops.
  static ErasureParams from_links(double q, unsigned links, double p_d = 0.0);

  // Throws std::domain_error unless 0 <= p < 1 and 0 <= p_d < 1.
  void validate() const;
};

struct TcpConfig {
  double rtt = 0.8;           // seconds
  unsigned w_max = 90;        // packets
  double to_rounds = 3.75;    // T_o, in rounds
  unsigned packet_bits = 8000;
  // Idle rounds spent waiting for the retransmission timer around every TD
  // or TO event. 0 gives the uncorrected steady-state formula.
  double retransmission_extra_rounds = 2.0;
  // ACKs per packet; only 1 is modelled.
  unsigned beta = 1;

  void validate() const;
};

struct NcConfig {
  double redundancy_r = 1.25;
  double t_p = 0.008;  // seconds to put one packet on the wire
  double w1 = 1.0;     // initial expected window
  std::optional<double> srtt_override;  // seconds

  void validate() const;
  // True when R >= 1/(1-p), i.e. redundancy fully covers the losses.
  bool redundancy_covers(double p) const;
};

// Throughput in packets/s and Mbps, with the inputs that produced it.
struct ThroughputReport {
  double pkts_per_sec = 0.0;
  double mbps = 0.0;
  unsigned packet_bits = 0;

  ErasureParams erasure;
  std::optional<TcpConfig> tcp;
  std::optional<NcConfig> nc;
  std::optional<double> rounds;  // horizon in rounds, when one applies

  static ThroughputReport from_pkts(double pkts_per_sec, unsigned packet_bits);
};

}  // namespace nctcp

#endif  // NCTCP_TYPES_HPP
