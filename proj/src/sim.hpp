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

#ifndef NCTCP_SIM_HPP
#define NCTCP_SIM_HPP

// Round-based simulation of Go-Back-N TCP and end-to-end network coded TCP
// over an erasure path.
//
// A round lasts one RTT. At its start the sender puts floor(W) packets on the
// wire back to back; the receiver answers every arrival; the ACKs are
// processed together at the end of the round. Window growth is
// W <- W + a/W for a newly acknowledged units. Triple duplicates halve W and
// trigger go-back-N. A timeout (T_o * backoff rounds without progress) resets
// W to 1 and doubles the backoff up to 64.
//
// For the coded protocol the window counts coded transmissions. Every
// arrival earns 1/R of a new original, except a dependent mix that leaves the
// seen front short of the admitted packets. The sender admits an original
// into the coding buffer whenever a whole one is earned, so originals enter
// at rate (1-p)/R per transmission. Each arrival is acknowledged with the
// receiver's seen front.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "model.hpp"
#include "types.hpp"

namespace nctcp::sim {

enum class Event { none, td, to, down };

std::string_view event_name(Event e);

struct ChannelModel {
  double p = 0.0;
  double p_d = 0.0;
  bool ack_loss_enabled = false;  // ACKs dropped with the same p when set
  std::uint64_t seed = 1;

  void validate() const;
};

struct RoundRecord {
  std::uint64_t round = 0;
  double window = 0.0;        // window at the start of the round
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;  // in-order packets handed to the application
  std::uint64_t ack_front = 0;  // cumulative ACK / seen front known to the sender
  Event event = Event::none;
  unsigned backoff = 1;       // timeout multiplier in force during the round
  bool down = false;
};

using WindowTrace = std::vector<RoundRecord>;

struct AckSample {
  double sent_at = 0.0;
  double acked_at = 0.0;
};

struct SimOptions {
  double initial_window = 1.0;    // TCP only; the coded sender starts at nc.w1
  std::size_t payload_bytes = 16; // coded protocol payload size
  double t_p = 0.0;               // TCP transmit time, only used for RTT samples
  bool record_ack_samples = false;
};

struct RunStats {
  std::uint64_t rounds = 0;
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_received = 0;
  std::uint64_t innovative = 0;  // coded protocol; equals received for TCP in-order
  std::uint64_t delivered = 0;
  std::uint64_t td_events = 0;
  std::uint64_t to_events = 0;
  std::uint64_t down_rounds = 0;
  double srtt = 0.0;       // final smoothed RTT, 0 without samples
  double mean_srtt = 0.0;  // average of the smoothed RTT over all samples
  double mean_window = 0.0;
};

struct SimResult {
  WindowTrace trace;
  ThroughputReport report;
  RunStats stats;
  std::vector<AckSample> ack_samples;  // filled when record_ack_samples is set
};

/// Go-Back-N TCP. Throws std::invalid_argument for rounds == 0.
SimResult run_tcp(const TcpConfig& tcp, const ChannelModel& ch, std::uint64_t rounds,
                  const SimOptions& opts = {});

/// End-to-end network coded TCP with a real RLNC layer.
SimResult run_e2e(const TcpConfig& tcp, const NcConfig& nc, const ChannelModel& ch,
                  std::uint64_t rounds, const SimOptions& opts = {});

/// Replays an explicit per-transmission loss pattern (nonzero = lost) from
/// a window of `initial_window`. Throws std::out_of_range when the pattern
/// runs out before `rounds` rounds are complete.
SimResult replay_loss_pattern(model::Protocol protocol, std::span<const std::uint8_t> pattern,
                              const TcpConfig& tcp, const NcConfig& nc, std::uint64_t rounds,
                              double initial_window);

/// Smoothed RTT with gain 1/8.
class SrttEstimator {
 public:
  void update(double sample);
  bool empty() const { return count_ == 0; }
  double value() const { return srtt_; }
  double mean() const { return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_); }

 private:
  double srtt_ = 0.0;
  double sum_ = 0.0;
  std::uint64_t count_ = 0;
};

/// Final smoothed estimate of (acked_at - sent_at). Throws
/// std::invalid_argument when there are no samples.
double measure_srtt(std::span<const AckSample> samples);

/// CSV with header round,window,sent,delivered,ack_front,event.
void write_trace_csv(std::ostream& os, const WindowTrace& trace);

}  // namespace nctcp::sim

#endif  // NCTCP_SIM_HPP
