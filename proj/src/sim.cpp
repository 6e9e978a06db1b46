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

#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "coding.hpp"
#include "rng.hpp"

namespace nctcp::sim {

namespace {

constexpr unsigned kMaxBackoff = 64;

// Source of loss decisions for one run.
class LossProcess {
 public:
  virtual ~LossProcess() = default;
  virtual bool round_down() = 0;
  virtual bool data_lost() = 0;
  virtual bool ack_lost() = 0;
};

// Independent streams per direction, so toggling ACK loss leaves the data
// loss realisation untouched.
class RandomLoss final : public LossProcess {
 public:
  explicit RandomLoss(const ChannelModel& ch)
      : ch_(ch),
        data_(ch.seed, Stream::data_loss),
        ack_(ch.seed, Stream::ack_loss),
        down_(ch.seed, Stream::down_state) {}

  bool round_down() override { return ch_.p_d > 0.0 && down_.bernoulli(ch_.p_d); }
  bool data_lost() override { return data_.bernoulli(ch_.p); }
  bool ack_lost() override { return ch_.ack_loss_enabled && ack_.bernoulli(ch_.p); }

 private:
  ChannelModel ch_;
  Rng data_;
  Rng ack_;
  Rng down_;
};

class PatternLoss final : public LossProcess {
 public:
  explicit PatternLoss(std::span<const std::uint8_t> pattern) : pattern_(pattern) {}

  bool round_down() override { return false; }
  bool data_lost() override {
    if (next_ >= pattern_.size()) throw std::out_of_range("loss pattern exhausted");
    return pattern_[next_++] != 0;
  }
  bool ack_lost() override { return false; }

 private:
  std::span<const std::uint8_t> pattern_;
  std::size_t next_ = 0;
};

struct Timeout {
  std::uint64_t silent = 0;
  unsigned backoff = 1;

  void heard() {
    silent = 0;
    backoff = 1;
  }
  // Counts a silent round; true when the timer expires.
  bool tick(double to_rounds) {
    ++silent;
    return static_cast<double>(silent) >= to_rounds * backoff;
  }
  void fire() {
    silent = 0;
    backoff = std::min(kMaxBackoff, backoff * 2);
  }
};

ThroughputReport make_report(std::uint64_t delivered, std::uint64_t rounds, const TcpConfig& tcp,
                             const ChannelModel& ch) {
  const double seconds = static_cast<double>(rounds) * tcp.rtt;
  auto r = ThroughputReport::from_pkts(static_cast<double>(delivered) / seconds, tcp.packet_bits);
  r.erasure.p = ch.p;
  r.erasure.p_d = ch.p_d;
  r.tcp = tcp;
  r.rounds = static_cast<double>(rounds);
  return r;
}

std::uint64_t idle_rounds(const TcpConfig& tcp) {
  return static_cast<std::uint64_t>(std::ceil(tcp.retransmission_extra_rounds - 1e-9));
}

SimResult tcp_loop(const TcpConfig& tcp, const ChannelModel& ch, std::uint64_t rounds,
                   const SimOptions& opts, LossProcess& loss) {
  SimResult res;
  res.trace.reserve(rounds);

  double w = std::clamp(opts.initial_window, 1.0, static_cast<double>(tcp.w_max));
  std::uint64_t cum_ack = 0;    // sender: next in-order packet the receiver wants
  std::uint64_t next_seq = 0;   // sender: next packet to put on the wire
  std::uint64_t expected = 0;   // receiver
  unsigned dup_acks = 0;
  std::uint64_t idle_left = 0;
  Timeout timer;
  SrttEstimator srtt;
  double window_sum = 0.0;
  std::vector<std::uint64_t> acks;

  for (std::uint64_t round = 0; round < rounds; ++round) {
    RoundRecord rec;
    rec.round = round;
    rec.window = w;
    rec.backoff = timer.backoff;
    window_sum += w;

    if (idle_left > 0) {
      // Waiting out the retransmission timer; nothing on the wire.
      --idle_left;
      rec.ack_front = cum_ack;
      res.trace.push_back(rec);
      continue;
    }

    const bool down = loss.round_down();
    rec.down = down;
    if (down) ++res.stats.down_rounds;

    next_seq = std::max(next_seq, cum_ack);
    const std::uint64_t limit = cum_ack + static_cast<std::uint64_t>(std::floor(w));
    const double round_start = static_cast<double>(round) * tcp.rtt;
    acks.clear();
    for (std::uint64_t k = 0; next_seq < limit; ++next_seq, ++k) {
      ++rec.sent;
      if (down || loss.data_lost()) continue;
      ++res.stats.packets_received;
      if (next_seq == expected) {
        ++expected;
        ++rec.delivered;
        const double sent_at = round_start + static_cast<double>(k) * opts.t_p;
        const double acked_at = sent_at + opts.t_p + tcp.rtt;
        srtt.update(acked_at - sent_at);
        if (opts.record_ack_samples) res.ack_samples.push_back({sent_at, acked_at});
      }
      // Out-of-order arrivals are discarded and re-ACK the hole.
      if (!loss.ack_lost()) acks.push_back(expected);
    }

    std::uint64_t newly_acked = 0;
    bool triple_dup = false;
    for (const auto a : acks) {
      if (a > cum_ack) {
        newly_acked += a - cum_ack;
        cum_ack = a;
        dup_acks = 0;
      } else if (++dup_acks >= 3) {
        triple_dup = true;
        dup_acks = 3;
      }
    }

    if (newly_acked > 0) {
      timer.heard();
    }

    if (triple_dup) {
      rec.event = Event::td;
      ++res.stats.td_events;
      w = std::max(1.0, w / 2.0);
      next_seq = cum_ack;
      dup_acks = 0;
      idle_left = idle_rounds(tcp);
    } else {
      w = std::min(static_cast<double>(tcp.w_max),
                   w + static_cast<double>(newly_acked) / w);
      if (newly_acked == 0 && next_seq > cum_ack && timer.tick(tcp.to_rounds)) {
        rec.event = Event::to;
        ++res.stats.to_events;
        timer.fire();
        w = 1.0;
        next_seq = cum_ack;
        dup_acks = 0;
        idle_left = idle_rounds(tcp);
      }
    }
    if (rec.event == Event::none && down) rec.event = Event::down;

    rec.ack_front = cum_ack;
    res.stats.packets_sent += rec.sent;
    res.stats.delivered += rec.delivered;
    res.trace.push_back(rec);
  }

  res.stats.rounds = rounds;
  res.stats.innovative = res.stats.delivered;
  res.stats.srtt = srtt.value();
  res.stats.mean_srtt = srtt.mean();
  res.stats.mean_window = window_sum / static_cast<double>(rounds);
  res.report = make_report(res.stats.delivered, rounds, tcp, ch);
  return res;
}

coding::Bytes original_payload(std::uint64_t index, std::size_t len) {
  coding::Bytes out(len);
  std::uint64_t word = 0;
  for (std::size_t j = 0; j < len; ++j) {
    if (j % 8 == 0) word = mix64(index * 0x100000001B3ull + j / 8);
    out[j] = static_cast<std::uint8_t>(word >> (8 * (j % 8)));
  }
  return out;
}

SimResult e2e_loop(const TcpConfig& tcp, const NcConfig& nc, const ChannelModel& ch,
                   std::uint64_t rounds, const SimOptions& opts, double initial_window,
                   LossProcess& loss) {
  if (opts.payload_bytes == 0) throw std::invalid_argument("payload_bytes must be positive");
  SimResult res;
  res.trace.reserve(rounds);

  Rng coeff_rng(ch.seed, Stream::coefficients);
  coding::Decoder decoder(opts.payload_bytes);
  std::vector<coding::Bytes> buffer;  // originals [ack_front, admitted)

  double w = std::clamp(initial_window, 1.0, static_cast<double>(tcp.w_max));
  std::uint64_t ack_front = 0;
  std::uint64_t admitted = 0;
  double credit = 1.0;  // originals the sender may still admit
  std::uint64_t idle_left = 0;
  Timeout timer;
  SrttEstimator srtt;
  double window_sum = 0.0;
  std::vector<bool> arrived;
  std::vector<std::uint64_t> next_arrival;

  for (std::uint64_t round = 0; round < rounds; ++round) {
    RoundRecord rec;
    rec.round = round;
    rec.window = w;
    rec.backoff = timer.backoff;
    window_sum += w;

    if (idle_left > 0) {
      --idle_left;
      rec.ack_front = ack_front;
      res.trace.push_back(rec);
      continue;
    }

    const bool down = loss.round_down();
    rec.down = down;
    if (down) ++res.stats.down_rounds;

    const auto slots = static_cast<std::uint64_t>(std::floor(w));
    std::uint64_t acks = 0;
    std::uint64_t best_front = ack_front;
    arrived.assign(slots, false);

    for (std::uint64_t k = 0; k < slots; ++k) {
      // Something must be on the wire even when every admitted packet is seen.
      if (credit >= 1.0 - 1e-9 || buffer.empty()) {
        buffer.push_back(original_payload(admitted, opts.payload_bytes));
        ++admitted;
        credit = std::max(0.0, credit - 1.0);
      }
      const auto pkt =
          coding::encode(static_cast<std::uint32_t>(ack_front), buffer, coeff_rng);
      ++rec.sent;

      if (down || loss.data_lost()) continue;
      arrived[k] = true;
      ++res.stats.packets_received;
      const bool caught_up = decoder.seen_front() >= admitted;
      const auto r = decoder.receive(pkt);
      if (r.innovative) ++res.stats.innovative;
      // A dependent mix repeats a seen front that lags the admitted packets;
      // it earns nothing, so the next slot mixes the same buffer again.
      if (r.innovative || caught_up) credit += 1.0 / nc.redundancy_r;
      if (!loss.ack_lost()) {
        ++acks;
        best_front = std::max<std::uint64_t>(best_front, r.seen_front);
      }
    }

    for (const auto& payload : decoder.take_in_order()) {
      if (payload != original_payload(res.stats.delivered + rec.delivered, opts.payload_bytes)) {
        throw std::logic_error("decoded payload does not match the original");
      }
      ++rec.delivered;
    }

    // A lost transmission is covered by the next arrival on the wire, so its
    // sample is stretched by the transmissions in between. Slots after the
    // last arrival of the round give no sample.
    const double round_start = static_cast<double>(round) * tcp.rtt;
    next_arrival.assign(slots, slots);
    for (std::uint64_t k = slots, next = slots; k-- > 0;) {
      if (arrived[k]) next = k;
      next_arrival[k] = next;
    }
    for (std::uint64_t k = 0; k < slots && next_arrival[k] < slots; ++k) {
      const double sample = tcp.rtt + static_cast<double>(next_arrival[k] - k + 1) * nc.t_p;
      srtt.update(sample);
      if (opts.record_ack_samples) {
        const double sent_at = round_start + static_cast<double>(k) * nc.t_p;
        res.ack_samples.push_back({sent_at, sent_at + sample});
      }
    }

    if (best_front > ack_front) {
      buffer.erase(buffer.begin(),
                   buffer.begin() + static_cast<std::ptrdiff_t>(best_front - ack_front));
      ack_front = best_front;
    }

    if (acks > 0) {
      timer.heard();
      w = std::min(static_cast<double>(tcp.w_max), w + static_cast<double>(acks) / w);
    } else if (timer.tick(tcp.to_rounds)) {
      rec.event = Event::to;
      ++res.stats.to_events;
      timer.fire();
      w = 1.0;
      idle_left = idle_rounds(tcp);
    }
    if (rec.event == Event::none && down) rec.event = Event::down;

    rec.ack_front = ack_front;
    res.stats.packets_sent += rec.sent;
    res.stats.delivered += rec.delivered;
    res.trace.push_back(rec);
  }

  res.stats.rounds = rounds;
  res.stats.srtt = srtt.value();
  res.stats.mean_srtt = srtt.mean();
  res.stats.mean_window = window_sum / static_cast<double>(rounds);
  res.report = make_report(res.stats.delivered, rounds, tcp, ch);
  res.report.nc = nc;
  return res;
}

}  // namespace

std::string_view event_name(Event e) {
  switch (e) {
    case Event::none: return "none";
    case Event::td: return "TD";
    case Event::to: return "TO";
    case Event::down: return "DOWN";
  }
  return "none";
}

void ChannelModel::validate() const {
  ErasureParams{p, p_d, {}, {}}.validate();
}

void SrttEstimator::update(double sample) {
  srtt_ = count_ == 0 ? sample : srtt_ + (sample - srtt_) / 8.0;
  sum_ += srtt_;
  ++count_;
}

double measure_srtt(std::span<const AckSample> samples) {
  if (samples.empty()) throw std::invalid_argument("measure_srtt: no samples");
  SrttEstimator est;
  for (const auto& s : samples) est.update(s.acked_at - s.sent_at);
  return est.value();
}

SimResult run_tcp(const TcpConfig& tcp, const ChannelModel& ch, std::uint64_t rounds,
                  const SimOptions& opts) {
  if (rounds == 0) throw std::invalid_argument("run_tcp: rounds must be >= 1");
  tcp.validate();
  ch.validate();
  RandomLoss loss(ch);
  return tcp_loop(tcp, ch, rounds, opts, loss);
}

SimResult run_e2e(const TcpConfig& tcp, const NcConfig& nc, const ChannelModel& ch,
                  std::uint64_t rounds, const SimOptions& opts) {
  if (rounds == 0) throw std::invalid_argument("run_e2e: rounds must be >= 1");
  tcp.validate();
  nc.validate();
  ch.validate();
  RandomLoss loss(ch);
  return e2e_loop(tcp, nc, ch, rounds, opts, nc.w1, loss);
}

SimResult replay_loss_pattern(model::Protocol protocol, std::span<const std::uint8_t> pattern,
                              const TcpConfig& tcp, const NcConfig& nc, std::uint64_t rounds,
                              double initial_window) {
  if (rounds == 0) throw std::invalid_argument("replay_loss_pattern: rounds must be >= 1");
  tcp.validate();
  nc.validate();
  PatternLoss loss(pattern);
  ChannelModel ch;
  SimOptions opts;
  opts.initial_window = initial_window;
  if (protocol == model::Protocol::tcp) return tcp_loop(tcp, ch, rounds, opts, loss);
  return e2e_loop(tcp, nc, ch, rounds, opts, initial_window, loss);
}

void write_trace_csv(std::ostream& os, const WindowTrace& trace) {
  os << "round,window,sent,delivered,ack_front,event\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%llu,%.6f,%llu,%llu,%llu,",
                  static_cast<unsigned long long>(r.round), r.window,
                  static_cast<unsigned long long>(r.sent),
                  static_cast<unsigned long long>(r.delivered),
                  static_cast<unsigned long long>(r.ack_front));
    os << buf << event_name(r.event) << '\n';
  }
}

}  // namespace nctcp::sim
