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

#include "nctcp/nctcp.h"

#include <cstring>
#include <fstream>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include "coding.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "sim.hpp"

struct nctcp_rng {
  nctcp::Rng rng;
};

struct nctcp_decoder {
  nctcp::coding::Decoder dec;
};

struct nctcp_run {
  nctcp::sim::SimResult result;
};

namespace {

thread_local std::string g_last_error;

nctcp_status fail(nctcp_status code, const char* what) {
  g_last_error = what;
  return code;
}

// Runs fn and maps exceptions onto status codes.
template <typename F>
nctcp_status guarded(F&& fn) {
  try {
    fn();
    return NCTCP_OK;
  } catch (const std::domain_error& e) {
    return fail(NCTCP_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(NCTCP_ERR_INVALID, e.what());
  } catch (const std::out_of_range& e) {
    return fail(NCTCP_ERR_EXHAUSTED, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NCTCP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NCTCP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NCTCP_ERR_INTERNAL, "unknown error");
  }
}

#define NCTCP_REQUIRE(ptr)                                                   \
  do {                                                                       \
    if ((ptr) == nullptr) return fail(NCTCP_ERR_INVALID, #ptr " is NULL");   \
  } while (0)

nctcp::TcpConfig to_tcp(const nctcp_tcp_config* c) {
  nctcp::TcpConfig t;
  if (c != nullptr) {
    t.rtt = c->rtt;
    t.w_max = c->w_max;
    t.to_rounds = c->to_rounds;
    t.packet_bits = c->packet_bits;
    t.retransmission_extra_rounds = c->retransmission_extra_rounds;
  }
  return t;
}

nctcp::NcConfig to_nc(const nctcp_nc_config* c) {
  nctcp::NcConfig n;
  if (c != nullptr) {
    n.redundancy_r = c->redundancy;
    n.t_p = c->t_p;
    n.w1 = c->w1;
    if (c->srtt_override > 0.0) n.srtt_override = c->srtt_override;
  }
  return n;
}

nctcp::sim::ChannelModel to_channel(const nctcp_channel* c) {
  nctcp::sim::ChannelModel ch;
  ch.p = c->p;
  ch.p_d = c->p_d;
  ch.ack_loss_enabled = c->ack_loss != 0;
  ch.seed = c->seed;
  return ch;
}

nctcp::sim::SimOptions to_options(const nctcp_sim_options* o) {
  nctcp::sim::SimOptions s;
  if (o != nullptr) {
    s.initial_window = o->initial_window;
    s.payload_bytes = o->payload_bytes;
    s.t_p = o->t_p;
    s.record_ack_samples = o->record_ack_samples != 0;
  }
  return s;
}

void put(const nctcp::ThroughputReport& r, nctcp_throughput* out) {
  out->pkts_per_sec = r.pkts_per_sec;
  out->mbps = r.mbps;
}

nctcp::model::Protocol to_protocol(nctcp_protocol p) {
  switch (p) {
    case NCTCP_PROTO_TCP: return nctcp::model::Protocol::tcp;
    case NCTCP_PROTO_E2E: return nctcp::model::Protocol::e2e;
  }
  throw std::invalid_argument("unknown protocol");
}

nctcp_event to_event(nctcp::sim::Event e) {
  switch (e) {
    case nctcp::sim::Event::none: return NCTCP_EVENT_NONE;
    case nctcp::sim::Event::td: return NCTCP_EVENT_TD;
    case nctcp::sim::Event::to: return NCTCP_EVENT_TO;
    case nctcp::sim::Event::down: return NCTCP_EVENT_DOWN;
  }
  return NCTCP_EVENT_NONE;
}

}  // namespace

extern "C" {

const char* nctcp_version(void) { return "1.0.0"; }

const char* nctcp_status_name(nctcp_status status) {
  switch (status) {
    case NCTCP_OK: return "ok";
    case NCTCP_ERR_DOMAIN: return "domain error";
    case NCTCP_ERR_INVALID: return "invalid argument";
    case NCTCP_ERR_EXHAUSTED: return "pattern exhausted";
    case NCTCP_ERR_NOT_FOUND: return "not found";
    case NCTCP_ERR_BUFFER: return "buffer too small";
    case NCTCP_ERR_IO: return "i/o error";
    case NCTCP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* nctcp_last_error(void) { return g_last_error.c_str(); }

void nctcp_tcp_config_default(nctcp_tcp_config* cfg) {
  if (cfg == nullptr) return;
  const nctcp::TcpConfig t;
  cfg->rtt = t.rtt;
  cfg->w_max = t.w_max;
  cfg->to_rounds = t.to_rounds;
  cfg->packet_bits = t.packet_bits;
  cfg->retransmission_extra_rounds = t.retransmission_extra_rounds;
}

void nctcp_nc_config_default(nctcp_nc_config* cfg) {
  if (cfg == nullptr) return;
  const nctcp::NcConfig n;
  cfg->redundancy = n.redundancy_r;
  cfg->t_p = n.t_p;
  cfg->w1 = n.w1;
  cfg->srtt_override = 0.0;
}

// ---- model ----------------------------------------------------------------

nctcp_status nctcp_effective_loss(double q, unsigned links, double* p) {
  NCTCP_REQUIRE(p);
  return guarded([&] { *p = nctcp::model::effective_loss(q, links); });
}

nctcp_status nctcp_tcp_expected_td_packets(double p, double* packets) {
  NCTCP_REQUIRE(packets);
  return guarded([&] { *packets = nctcp::model::tcp_expected_td_packets(p); });
}

nctcp_status nctcp_tcp_expected_rounds(double p, double* rounds) {
  NCTCP_REQUIRE(rounds);
  return guarded([&] { *rounds = nctcp::model::tcp_expected_rounds(p); });
}

nctcp_status nctcp_tcp_expected_window(double p, double* window) {
  NCTCP_REQUIRE(window);
  return guarded([&] { *window = nctcp::model::tcp_expected_window(p); });
}

nctcp_status nctcp_tcp_td_throughput(double p, const nctcp_tcp_config* tcp,
                                     nctcp_throughput* out) {
  NCTCP_REQUIRE(tcp);
  NCTCP_REQUIRE(out);
  return guarded([&] { put(nctcp::model::tcp_td_throughput(p, to_tcp(tcp)), out); });
}

nctcp_status nctcp_tcp_timeout_prob(double w, double p, double* prob) {
  NCTCP_REQUIRE(prob);
  return guarded([&] { *prob = nctcp::model::tcp_timeout_prob(w, p); });
}

nctcp_status nctcp_tcp_timeout_duration(double p, double to_rounds, double* rounds) {
  NCTCP_REQUIRE(rounds);
  return guarded([&] { *rounds = nctcp::model::tcp_timeout_duration(p, to_rounds); });
}

nctcp_status nctcp_tcp_avg_throughput(double p, const nctcp_tcp_config* tcp,
                                      nctcp_throughput* out) {
  NCTCP_REQUIRE(tcp);
  NCTCP_REQUIRE(out);
  return guarded([&] { put(nctcp::model::tcp_avg_throughput(p, to_tcp(tcp)), out); });
}

nctcp_status nctcp_e2e_expected_window(uint64_t round, double p, double w_max, double w1,
                                       double* window) {
  NCTCP_REQUIRE(window);
  return guarded([&] { *window = nctcp::model::e2e_expected_window(round, p, w_max, w1); });
}

nctcp_status nctcp_e2e_expected_transmissions(double w, double p, double* count) {
  NCTCP_REQUIRE(count);
  return guarded([&] { *count = nctcp::model::e2e_expected_transmissions(w, p); });
}

nctcp_status nctcp_e2e_srtt(double rtt, double t_p, double p, double* srtt) {
  NCTCP_REQUIRE(srtt);
  return guarded([&] { *srtt = nctcp::model::e2e_srtt(rtt, t_p, p); });
}

nctcp_status nctcp_e2e_round_throughput(uint64_t round, double p, const nctcp_nc_config* nc,
                                        unsigned w_max, double rtt, double* pkts_per_sec) {
  NCTCP_REQUIRE(nc);
  NCTCP_REQUIRE(pkts_per_sec);
  return guarded([&] {
    *pkts_per_sec = nctcp::model::e2e_round_throughput(round, p, to_nc(nc), w_max, rtt);
  });
}

nctcp_status nctcp_e2e_avg_throughput(uint64_t n, double p, const nctcp_nc_config* nc,
                                      unsigned w_max, unsigned packet_bits, double rtt,
                                      nctcp_throughput* out) {
  NCTCP_REQUIRE(nc);
  NCTCP_REQUIRE(out);
  return guarded([&] {
    put(nctcp::model::e2e_avg_throughput(n, p, to_nc(nc), w_max, packet_bits, rtt), out);
  });
}

nctcp_status nctcp_horizon_rounds(double horizon_seconds, double srtt, uint64_t* rounds) {
  NCTCP_REQUIRE(rounds);
  return guarded([&] { *rounds = nctcp::model::horizon_rounds(horizon_seconds, srtt); });
}

nctcp_status nctcp_downstate_expectations(double p_d, double* up_rounds, double* down_rounds) {
  NCTCP_REQUIRE(up_rounds);
  NCTCP_REQUIRE(down_rounds);
  return guarded([&] {
    const auto r = nctcp::model::downstate_expectations(p_d);
    *up_rounds = r.up;
    *down_rounds = r.down;
  });
}

nctcp_status nctcp_combined_throughput(nctcp_protocol protocol, double p, double p_d,
                                       const nctcp_tcp_config* tcp, const nctcp_nc_config* nc,
                                       uint64_t rounds, nctcp_throughput* out) {
  NCTCP_REQUIRE(tcp);
  NCTCP_REQUIRE(out);
  return guarded([&] {
    nctcp::model::ModelInputs in;
    in.erasure.p = p;
    in.erasure.p_d = p_d;
    in.tcp = to_tcp(tcp);
    in.nc = to_nc(nc);
    in.rounds = rounds;
    put(nctcp::model::combined_throughput(to_protocol(protocol), in), out);
  });
}

// ---- coding ---------------------------------------------------------------

nctcp_status nctcp_rng_create(uint64_t seed, nctcp_rng** out) {
  NCTCP_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new nctcp_rng{nctcp::Rng(seed, nctcp::Stream::coefficients)}; });
}

void nctcp_rng_destroy(nctcp_rng* rng) { delete rng; }

size_t nctcp_coded_size(size_t window_packets, size_t payload_len) {
  return 6 + window_packets + payload_len;
}

nctcp_status nctcp_encode(uint32_t base_index, const uint8_t* payloads, size_t count,
                          size_t payload_len, nctcp_rng* rng, const uint8_t* coeffs,
                          uint8_t* wire, size_t wire_cap, size_t* wire_len) {
  NCTCP_REQUIRE(payloads);
  NCTCP_REQUIRE(wire);
  NCTCP_REQUIRE(wire_len);
  if (coeffs == nullptr && rng == nullptr) {
    return fail(NCTCP_ERR_INVALID, "either rng or coeffs must be given");
  }
  const size_t need = nctcp_coded_size(count, payload_len);
  *wire_len = need;
  if (wire_cap < need) return fail(NCTCP_ERR_BUFFER, "wire buffer too small");
  return guarded([&] {
    std::vector<nctcp::coding::Bytes> window(count);
    for (size_t k = 0; k < count; ++k) {
      window[k].assign(payloads + k * payload_len, payloads + (k + 1) * payload_len);
    }
    const auto pkt = coeffs != nullptr
                         ? nctcp::coding::encode_with(base_index, window, {coeffs, count})
                         : nctcp::coding::encode(base_index, window, rng->rng);
    const auto bytes = nctcp::coding::serialize(pkt);
    std::memcpy(wire, bytes.data(), bytes.size());
  });
}

nctcp_status nctcp_decoder_create(size_t payload_len, nctcp_decoder** out) {
  NCTCP_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { *out = new nctcp_decoder{nctcp::coding::Decoder(payload_len)}; });
}

void nctcp_decoder_destroy(nctcp_decoder* dec) { delete dec; }

nctcp_status nctcp_decoder_receive(nctcp_decoder* dec, const uint8_t* wire, size_t wire_len,
                                   int* innovative, uint32_t* seen_front) {
  NCTCP_REQUIRE(dec);
  NCTCP_REQUIRE(wire);
  return guarded([&] {
    const auto r = dec->dec.receive(nctcp::coding::parse({wire, wire_len}));
    if (innovative != nullptr) *innovative = r.innovative ? 1 : 0;
    if (seen_front != nullptr) *seen_front = r.seen_front;
  });
}

nctcp_status nctcp_decoder_info(const nctcp_decoder* dec, uint32_t* seen_front,
                                uint32_t* decoded_front, size_t* dof) {
  NCTCP_REQUIRE(dec);
  if (seen_front != nullptr) *seen_front = dec->dec.seen_front();
  if (decoded_front != nullptr) *decoded_front = dec->dec.decoded_front();
  if (dof != nullptr) *dof = dec->dec.dof();
  return NCTCP_OK;
}

nctcp_status nctcp_decoder_get(const nctcp_decoder* dec, uint32_t index, uint8_t* out,
                               size_t out_cap) {
  NCTCP_REQUIRE(dec);
  NCTCP_REQUIRE(out);
  if (out_cap < dec->dec.payload_len()) return fail(NCTCP_ERR_BUFFER, "output buffer too small");
  nctcp_status st = NCTCP_ERR_NOT_FOUND;
  const nctcp_status g = guarded([&] {
    for (const auto& d : dec->dec.decode()) {
      if (d.index != index) continue;
      std::memcpy(out, d.payload.data(), d.payload.size());
      st = NCTCP_OK;
      return;
    }
  });
  if (g != NCTCP_OK) return g;
  if (st != NCTCP_OK) return fail(st, "packet not decoded or already taken");
  return NCTCP_OK;
}

nctcp_status nctcp_decoder_take(nctcp_decoder* dec, uint8_t* out, size_t max_packets,
                                size_t* taken) {
  NCTCP_REQUIRE(dec);
  NCTCP_REQUIRE(taken);
  *taken = 0;
  if (max_packets > 0 && out == nullptr) return fail(NCTCP_ERR_INVALID, "out is NULL");
  return guarded([&] {
    const auto pkts = dec->dec.take_in_order(max_packets);
    for (const auto& p : pkts) {
      std::memcpy(out + *taken * p.size(), p.data(), p.size());
      ++*taken;
    }
  });
}

// ---- simulation -----------------------------------------------------------

void nctcp_sim_options_default(nctcp_sim_options* opts) {
  if (opts == nullptr) return;
  const nctcp::sim::SimOptions s;
  opts->initial_window = s.initial_window;
  opts->payload_bytes = s.payload_bytes;
  opts->t_p = s.t_p;
  opts->record_ack_samples = s.record_ack_samples ? 1 : 0;
}

nctcp_status nctcp_run_tcp(const nctcp_tcp_config* tcp, const nctcp_channel* ch,
                           uint64_t rounds, const nctcp_sim_options* opts, nctcp_run** out) {
  NCTCP_REQUIRE(tcp);
  NCTCP_REQUIRE(ch);
  NCTCP_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new nctcp_run{
        nctcp::sim::run_tcp(to_tcp(tcp), to_channel(ch), rounds, to_options(opts))};
  });
}

nctcp_status nctcp_run_e2e(const nctcp_tcp_config* tcp, const nctcp_nc_config* nc,
                           const nctcp_channel* ch, uint64_t rounds,
                           const nctcp_sim_options* opts, nctcp_run** out) {
  NCTCP_REQUIRE(tcp);
  NCTCP_REQUIRE(nc);
  NCTCP_REQUIRE(ch);
  NCTCP_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new nctcp_run{nctcp::sim::run_e2e(to_tcp(tcp), to_nc(nc), to_channel(ch), rounds,
                                             to_options(opts))};
  });
}

nctcp_status nctcp_replay_loss_pattern(nctcp_protocol protocol, const uint8_t* pattern,
                                       size_t pattern_len, const nctcp_tcp_config* tcp,
                                       const nctcp_nc_config* nc, uint64_t rounds,
                                       double initial_window, nctcp_run** out) {
  NCTCP_REQUIRE(tcp);
  NCTCP_REQUIRE(out);
  if (pattern == nullptr && pattern_len > 0) return fail(NCTCP_ERR_INVALID, "pattern is NULL");
  *out = nullptr;
  return guarded([&] {
    *out = new nctcp_run{nctcp::sim::replay_loss_pattern(
        to_protocol(protocol), {pattern, pattern_len}, to_tcp(tcp), to_nc(nc), rounds,
        initial_window)};
  });
}

void nctcp_run_destroy(nctcp_run* run) { delete run; }

size_t nctcp_run_round_count(const nctcp_run* run) {
  return run == nullptr ? 0 : run->result.trace.size();
}

nctcp_status nctcp_run_round(const nctcp_run* run, size_t index, nctcp_round* out) {
  NCTCP_REQUIRE(run);
  NCTCP_REQUIRE(out);
  if (index >= run->result.trace.size()) return fail(NCTCP_ERR_NOT_FOUND, "round out of range");
  const auto& r = run->result.trace[index];
  out->round = r.round;
  out->window = r.window;
  out->sent = r.sent;
  out->delivered = r.delivered;
  out->ack_front = r.ack_front;
  out->event = to_event(r.event);
  out->backoff = r.backoff;
  out->down = r.down ? 1 : 0;
  return NCTCP_OK;
}

nctcp_status nctcp_run_stats_get(const nctcp_run* run, nctcp_run_stats* out) {
  NCTCP_REQUIRE(run);
  NCTCP_REQUIRE(out);
  const auto& s = run->result.stats;
  out->rounds = s.rounds;
  out->packets_sent = s.packets_sent;
  out->packets_received = s.packets_received;
  out->innovative = s.innovative;
  out->delivered = s.delivered;
  out->td_events = s.td_events;
  out->to_events = s.to_events;
  out->down_rounds = s.down_rounds;
  out->srtt = s.srtt;
  out->mean_srtt = s.mean_srtt;
  out->mean_window = s.mean_window;
  return NCTCP_OK;
}

nctcp_status nctcp_run_throughput(const nctcp_run* run, nctcp_throughput* out) {
  NCTCP_REQUIRE(run);
  NCTCP_REQUIRE(out);
  put(run->result.report, out);
  return NCTCP_OK;
}

size_t nctcp_run_ack_sample_count(const nctcp_run* run) {
  return run == nullptr ? 0 : run->result.ack_samples.size();
}

nctcp_status nctcp_run_ack_samples(const nctcp_run* run, double* sent_at, double* acked_at,
                                   size_t cap) {
  NCTCP_REQUIRE(run);
  NCTCP_REQUIRE(sent_at);
  NCTCP_REQUIRE(acked_at);
  const auto& samples = run->result.ack_samples;
  if (cap < samples.size()) return fail(NCTCP_ERR_BUFFER, "sample buffers too small");
  for (size_t i = 0; i < samples.size(); ++i) {
    sent_at[i] = samples[i].sent_at;
    acked_at[i] = samples[i].acked_at;
  }
  return NCTCP_OK;
}

nctcp_status nctcp_run_write_trace_csv(const nctcp_run* run, const char* path) {
  NCTCP_REQUIRE(run);
  NCTCP_REQUIRE(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) return fail(NCTCP_ERR_IO, (std::string("cannot open ") + path).c_str());
  nctcp::sim::write_trace_csv(os, run->result.trace);
  os.flush();
  if (!os) return fail(NCTCP_ERR_IO, (std::string("write failed: ") + path).c_str());
  return NCTCP_OK;
}

nctcp_status nctcp_measure_srtt(const double* sent_at, const double* acked_at, size_t n,
                                double* srtt) {
  NCTCP_REQUIRE(srtt);
  if (n > 0 && (sent_at == nullptr || acked_at == nullptr)) {
    return fail(NCTCP_ERR_INVALID, "sample arrays are NULL");
  }
  return guarded([&] {
    std::vector<nctcp::sim::AckSample> samples(n);
    for (size_t i = 0; i < n; ++i) samples[i] = {sent_at[i], acked_at[i]};
    *srtt = nctcp::sim::measure_srtt(samples);
  });
}

}  // extern "C"
