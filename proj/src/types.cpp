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

#include "types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nctcp {

ErasureParams ErasureParams::from_links(double q, unsigned links, double p_d) {
  if (!(q >= 0.0 && q < 1.0)) {
    throw std::domain_error("per-link loss q must lie in [0,1), got " + std::to_string(q));
  }
  if (links == 0) {
    throw std::domain_error("link count must be positive");
  }
  ErasureParams e;
  e.p = 1.0 - std::pow(1.0 - q, static_cast<double>(links));
  e.p_d = p_d;
  e.q = q;
  e.links = links;
  e.validate();
  return e;
}

void ErasureParams::validate() const {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::domain_error("loss probability p must lie in [0,1), got " + std::to_string(p));
  }
  if (!(p_d >= 0.0 && p_d < 1.0)) {
    throw std::domain_error("down-state probability must lie in [0,1), got " +
                            std::to_string(p_d));
  }
}

void TcpConfig::validate() const {
  if (!(rtt > 0.0)) throw std::domain_error("rtt must be positive");
  if (w_max < 1) throw std::domain_error("w_max must be at least 1");
  if (!(to_rounds > 0.0)) throw std::domain_error("T_o must be positive");
  if (packet_bits == 0) throw std::domain_error("packet_bits must be positive");
  if (!(retransmission_extra_rounds >= 0.0)) {
    throw std::domain_error("retransmission_extra_rounds must be non-negative");
  }
  if (beta != 1) throw std::domain_error("only beta = 1 is supported");
}

void NcConfig::validate() const {
  if (!(redundancy_r >= 1.0)) throw std::domain_error("redundancy factor must be >= 1");
  if (!(t_p >= 0.0)) throw std::domain_error("t_p must be non-negative");
  if (!(w1 >= 1.0)) throw std::domain_error("initial window must be >= 1");
  if (srtt_override && !(*srtt_override > 0.0)) {
    throw std::domain_error("srtt override must be positive");
  }
}

bool NcConfig::redundancy_covers(double p) const {
  return redundancy_r * (1.0 - p) >= 1.0 - 1e-12;
}

ThroughputReport ThroughputReport::from_pkts(double pkts_per_sec, unsigned packet_bits) {
  ThroughputReport r;
  r.pkts_per_sec = pkts_per_sec;
  r.packet_bits = packet_bits;
  r.mbps = pkts_per_sec * static_cast<double>(packet_bits) / 1e6;
  return r;
}

}  // namespace nctcp
