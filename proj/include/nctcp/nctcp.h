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

#ifndef NCTCP_H
#define NCTCP_H

/*
 * C interface to the nctcp library: closed-form throughput models for TCP
 * and network coded TCP over lossy paths, an RLNC codec, and a round-based
 * protocol simulator.
 *
 * Every call returns an nctcp_status. On failure, nctcp_last_error() gives a
 * message for the calling thread that stays valid until the next failing
 * call on that thread. Handles are opaque; each *_create or run function has
 * a matching *_destroy, which accepts NULL.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NCTCP_BUILDING)
#    define NCTCP_API __declspec(dllexport)
#  else
#    define NCTCP_API __declspec(dllimport)
#  endif
#else
#  define NCTCP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nctcp_status {
  NCTCP_OK = 0,
  NCTCP_ERR_DOMAIN = 1,     /* argument outside a formula's validity range */
  NCTCP_ERR_INVALID = 2,    /* malformed argument or NULL pointer */
  NCTCP_ERR_EXHAUSTED = 3,  /* a replayed loss pattern ran out */
  NCTCP_ERR_NOT_FOUND = 4,  /* packet not decoded (yet) or released */
  NCTCP_ERR_BUFFER = 5,     /* caller buffer too small */
  NCTCP_ERR_IO = 6,
  NCTCP_ERR_INTERNAL = 7
} nctcp_status;

typedef enum nctcp_protocol { NCTCP_PROTO_TCP = 0, NCTCP_PROTO_E2E = 1 } nctcp_protocol;

typedef enum nctcp_event {
  NCTCP_EVENT_NONE = 0,
  NCTCP_EVENT_TD = 1,
  NCTCP_EVENT_TO = 2,
  NCTCP_EVENT_DOWN = 3
} nctcp_event;

NCTCP_API const char* nctcp_version(void);
NCTCP_API const char* nctcp_status_name(nctcp_status status);
NCTCP_API const char* nctcp_last_error(void);

/* ---- parameters -------------------------------------------------------- */

typedef struct nctcp_tcp_config {
  double rtt;                         /* seconds */
  unsigned w_max;                     /* packets */
  double to_rounds;                   /* T_o in rounds */
  unsigned packet_bits;
  double retransmission_extra_rounds; /* idle rounds per TD/TO, default 2 */
} nctcp_tcp_config;

typedef struct nctcp_nc_config {
  double redundancy;    /* R >= 1 */
  double t_p;           /* seconds per packet transmission */
  double w1;            /* initial window */
  double srtt_override; /* seconds; <= 0 means "use rtt + t_p p/(1-p)" */
} nctcp_nc_config;

typedef struct nctcp_throughput {
  double pkts_per_sec;
  double mbps;
} nctcp_throughput;

/* rtt 0.8 s, w_max 90, T_o 3.75, 8000-bit packets, 2 extra rounds */
NCTCP_API void nctcp_tcp_config_default(nctcp_tcp_config* cfg);
/* R 1.25, t_p 8 ms, w1 1, no SRTT override */
NCTCP_API void nctcp_nc_config_default(nctcp_nc_config* cfg);

/* ---- analytical model -------------------------------------------------- */

NCTCP_API nctcp_status nctcp_effective_loss(double q, unsigned links, double* p);

NCTCP_API nctcp_status nctcp_tcp_expected_td_packets(double p, double* packets);
NCTCP_API nctcp_status nctcp_tcp_expected_rounds(double p, double* rounds);
NCTCP_API nctcp_status nctcp_tcp_expected_window(double p, double* window);
NCTCP_API nctcp_status nctcp_tcp_td_throughput(double p, const nctcp_tcp_config* tcp,
                                               nctcp_throughput* out);
NCTCP_API nctcp_status nctcp_tcp_timeout_prob(double w, double p, double* prob);
NCTCP_API nctcp_status nctcp_tcp_timeout_duration(double p, double to_rounds, double* rounds);
NCTCP_API nctcp_status nctcp_tcp_avg_throughput(double p, const nctcp_tcp_config* tcp,
                                                nctcp_throughput* out);

NCTCP_API nctcp_status nctcp_e2e_expected_window(uint64_t round, double p, double w_max,
                                                 double w1, double* window);
NCTCP_API nctcp_status nctcp_e2e_expected_transmissions(double w, double p, double* count);
NCTCP_API nctcp_status nctcp_e2e_srtt(double rtt, double t_p, double p, double* srtt);
NCTCP_API nctcp_status nctcp_e2e_round_throughput(uint64_t round, double p,
                                                  const nctcp_nc_config* nc, unsigned w_max,
                                                  double rtt, double* pkts_per_sec);
NCTCP_API nctcp_status nctcp_e2e_avg_throughput(uint64_t n, double p, const nctcp_nc_config* nc,
                                                unsigned w_max, unsigned packet_bits, double rtt,
                                                nctcp_throughput* out);
NCTCP_API nctcp_status nctcp_horizon_rounds(double horizon_seconds, double srtt,
                                            uint64_t* rounds);

NCTCP_API nctcp_status nctcp_downstate_expectations(double p_d, double* up_rounds,
                                                    double* down_rounds);
/* Up-state throughput times the up-state fraction. `rounds` is the E2E
 * horizon n and is ignored for TCP. */
NCTCP_API nctcp_status nctcp_combined_throughput(nctcp_protocol protocol, double p, double p_d,
                                                 const nctcp_tcp_config* tcp,
                                                 const nctcp_nc_config* nc, uint64_t rounds,
                                                 nctcp_throughput* out);

/* ---- coding -------------------------------------------------------------- */

typedef struct nctcp_rng nctcp_rng;
typedef struct nctcp_decoder nctcp_decoder;

NCTCP_API nctcp_status nctcp_rng_create(uint64_t seed, nctcp_rng** out);
NCTCP_API void nctcp_rng_destroy(nctcp_rng* rng);

/* Size of a serialized coded packet. */
NCTCP_API size_t nctcp_coded_size(size_t window_packets, size_t payload_len);

/* Encodes `count` packets of `payload_len` bytes laid out back to back in
 * `payloads`. With `coeffs` NULL the coefficients come from `rng`. Writes the
 * wire form (u32 BE base, u16 BE count, coefficients, payload). */
NCTCP_API nctcp_status nctcp_encode(uint32_t base_index, const uint8_t* payloads, size_t count,
                                    size_t payload_len, nctcp_rng* rng, const uint8_t* coeffs,
                                    uint8_t* wire, size_t wire_cap, size_t* wire_len);

NCTCP_API nctcp_status nctcp_decoder_create(size_t payload_len, nctcp_decoder** out);
NCTCP_API void nctcp_decoder_destroy(nctcp_decoder* dec);
NCTCP_API nctcp_status nctcp_decoder_receive(nctcp_decoder* dec, const uint8_t* wire,
                                             size_t wire_len, int* innovative,
                                             uint32_t* seen_front);
NCTCP_API nctcp_status nctcp_decoder_info(const nctcp_decoder* dec, uint32_t* seen_front,
                                          uint32_t* decoded_front, size_t* dof);
/* Copies decoded packet `index` (not yet taken) into `out`. */
NCTCP_API nctcp_status nctcp_decoder_get(const nctcp_decoder* dec, uint32_t index, uint8_t* out,
                                         size_t out_cap);
/* Moves up to `max_packets` in-order decoded packets into `out`. */
NCTCP_API nctcp_status nctcp_decoder_take(nctcp_decoder* dec, uint8_t* out, size_t max_packets,
                                          size_t* taken);

/* ---- simulation ---------------------------------------------------------- */

typedef struct nctcp_channel {
  double p;
  double p_d;
  int ack_loss;   /* nonzero: ACKs are lost with probability p too */
  uint64_t seed;
} nctcp_channel;

typedef struct nctcp_sim_options {
  double initial_window; /* TCP only */
  size_t payload_bytes;  /* coded payload size */
  double t_p;            /* TCP transmit time for RTT samples */
  int record_ack_samples;
} nctcp_sim_options;

typedef struct nctcp_round {
  uint64_t round;
  double window;
  uint64_t sent;
  uint64_t delivered;
  uint64_t ack_front;
  nctcp_event event;
  unsigned backoff;
  int down;
} nctcp_round;

typedef struct nctcp_run_stats {
  uint64_t rounds;
  uint64_t packets_sent;
  uint64_t packets_received;
  uint64_t innovative;
  uint64_t delivered;
  uint64_t td_events;
  uint64_t to_events;
  uint64_t down_rounds;
  double srtt;
  double mean_srtt;
  double mean_window;
} nctcp_run_stats;

typedef struct nctcp_run nctcp_run;

NCTCP_API void nctcp_sim_options_default(nctcp_sim_options* opts);

/* `opts` may be NULL for defaults. */
NCTCP_API nctcp_status nctcp_run_tcp(const nctcp_tcp_config* tcp, const nctcp_channel* ch,
                                     uint64_t rounds, const nctcp_sim_options* opts,
                                     nctcp_run** out);
NCTCP_API nctcp_status nctcp_run_e2e(const nctcp_tcp_config* tcp, const nctcp_nc_config* nc,
                                     const nctcp_channel* ch, uint64_t rounds,
                                     const nctcp_sim_options* opts, nctcp_run** out);
/* pattern[i] != 0 drops the i-th transmission. */
NCTCP_API nctcp_status nctcp_replay_loss_pattern(nctcp_protocol protocol, const uint8_t* pattern,
                                                 size_t pattern_len, const nctcp_tcp_config* tcp,
                                                 const nctcp_nc_config* nc, uint64_t rounds,
                                                 double initial_window, nctcp_run** out);
NCTCP_API void nctcp_run_destroy(nctcp_run* run);

NCTCP_API size_t nctcp_run_round_count(const nctcp_run* run);
NCTCP_API nctcp_status nctcp_run_round(const nctcp_run* run, size_t index, nctcp_round* out);
NCTCP_API nctcp_status nctcp_run_stats_get(const nctcp_run* run, nctcp_run_stats* out);
NCTCP_API nctcp_status nctcp_run_throughput(const nctcp_run* run, nctcp_throughput* out);
NCTCP_API size_t nctcp_run_ack_sample_count(const nctcp_run* run);
NCTCP_API nctcp_status nctcp_run_ack_samples(const nctcp_run* run, double* sent_at,
                                             double* acked_at, size_t cap);
/* Writes round,window,sent,delivered,ack_front,event. */
NCTCP_API nctcp_status nctcp_run_write_trace_csv(const nctcp_run* run, const char* path);

NCTCP_API nctcp_status nctcp_measure_srtt(const double* sent_at, const double* acked_at,
                                          size_t n, double* srtt);

#ifdef __cplusplus
}
#endif

#endif /* NCTCP_H */
