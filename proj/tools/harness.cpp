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

#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "nctcp/nctcp.h"

namespace nctcp::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Library failure as an exception carrying the thread's last error.
struct ApiError : std::runtime_error {
  ApiError(nctcp_status st, const std::string& what)
      : std::runtime_error(what + ": " + nctcp_status_name(st) + " (" + nctcp_last_error() + ")"),
        status(st) {}
  nctcp_status status;
};

void check(nctcp_status st, const char* what) {
  if (st != NCTCP_OK) throw ApiError(st, what);
}

// Owns an nctcp_run.
struct RunHandle {
  nctcp_run* run = nullptr;
  RunHandle() = default;
  RunHandle(const RunHandle&) = delete;
  RunHandle& operator=(const RunHandle&) = delete;
  ~RunHandle() { nctcp_run_destroy(run); }
};

nctcp_tcp_config tcp_config(const ExperimentSpec& s) {
  nctcp_tcp_config c;
  nctcp_tcp_config_default(&c);
  c.rtt = s.rtt;
  c.w_max = s.w_max;
  c.to_rounds = s.to_rounds;
  c.packet_bits = s.packet_bits;
  c.retransmission_extra_rounds = s.extra_rounds;
  return c;
}

nctcp_nc_config nc_config(const ExperimentSpec& s, double srtt_override = 0.0) {
  nctcp_nc_config c;
  nctcp_nc_config_default(&c);
  c.redundancy = s.redundancy;
  c.t_p = s.t_p;
  c.w1 = s.w1;
  c.srtt_override = srtt_override;
  return c;
}

void run_protocol(const std::string& proto, const ExperimentSpec& s, double p,
                  std::uint64_t seed, std::uint64_t rounds, RunHandle& h) {
  const auto tcp = tcp_config(s);
  const auto nc = nc_config(s);
  nctcp_channel ch{p, s.p_d, 0, seed};
  nctcp_sim_options opts;
  nctcp_sim_options_default(&opts);
  opts.t_p = s.t_p;
  if (proto == "tcp") {
    check(nctcp_run_tcp(&tcp, &ch, rounds, &opts, &h.run), "tcp simulation");
  } else {
    check(nctcp_run_e2e(&tcp, &nc, &ch, rounds, &opts, &h.run), "e2e simulation");
  }
}

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw RuntimeError("cannot open " + path + " for writing");
  return os;
}

void finish(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw RuntimeError("write failed: " + path);
}

std::vector<double> parse_list(const std::vector<std::string>& tokens, const char* flag) {
  std::vector<double> out;
  for (const auto& tok : tokens) {
    std::stringstream ss(tok);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw UsageError(std::string(flag) + ": not a number: " + item);
      }
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string output_dir(const ExperimentSpec& s) {
  std::string dir = s.out;
  if (dir.empty()) {
    const char* env = std::getenv("NCTCP_OUT");
    dir = (env != nullptr && *env != '\0') ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

}  // namespace

// ---- spec -----------------------------------------------------------------

void ExperimentSpec::validate() const {
  if (protocol != "tcp" && protocol != "e2e" && protocol != "both") {
    throw UsageError("protocol must be tcp, e2e or both");
  }
  if (!q.empty() && !p.empty()) throw UsageError("give either a q-list or a p-list, not both");
  if (q.empty() && p.empty()) throw UsageError("empty loss grid: give a q-list or a p-list");
  for (double v : q) {
    if (!(v >= 0.0 && v < 1.0)) throw UsageError("q values must lie in [0,1)");
  }
  for (double v : p) {
    if (!(v >= 0.0 && v < 1.0)) throw UsageError("p values must lie in [0,1)");
  }
  if (links < 1) throw UsageError("links must be >= 1");
  if (!(rtt > 0.0)) throw UsageError("rtt must be positive");
  if (w_max < 1) throw UsageError("wmax must be >= 1");
  if (!(to_rounds > 0.0)) throw UsageError("to must be positive");
  if (!(redundancy >= 1.0)) throw UsageError("redundancy must be >= 1");
  if (!(t_p >= 0.0)) throw UsageError("tp must be >= 0");
  if (!(w1 >= 1.0)) throw UsageError("w1 must be >= 1");
  if (packet_bits < 1) throw UsageError("packet-bits must be >= 1");
  if (!(extra_rounds >= 0.0)) throw UsageError("extra-rounds must be >= 0");
  if (!(p_d >= 0.0 && p_d < 1.0)) throw UsageError("pd must lie in [0,1)");
  if (!(horizon > 0.0)) throw UsageError("horizon must be positive");
  if (trials < 1) throw UsageError("trials must be >= 1");
  if (!srtt.empty() && srtt.size() != grid_size()) {
    throw UsageError("srtt list has " + std::to_string(srtt.size()) + " entries for a grid of " +
                     std::to_string(grid_size()));
  }
  for (double v : srtt) {
    if (!(v > 0.0)) throw UsageError("srtt values must be positive");
  }
}

std::vector<std::string> ExperimentSpec::protocols() const {
  if (protocol == "both") return {"tcp", "e2e"};
  return {protocol};
}

double ExperimentSpec::path_loss(std::size_t i) const {
  if (q.empty()) return p.at(i);
  double out = 0.0;
  check(nctcp_effective_loss(q.at(i), links, &out), "effective loss");
  return out;
}

std::optional<double> ExperimentSpec::link_loss(std::size_t i) const {
  if (q.empty()) return std::nullopt;
  return q.at(i);
}

void apply_config_json(ExperimentSpec& spec, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      if (k == "protocol") spec.protocol = v.get<std::string>();
      else if (k == "q") spec.q = v.get<std::vector<double>>();
      else if (k == "p") spec.p = v.get<std::vector<double>>();
      else if (k == "links") spec.links = v.get<unsigned>();
      else if (k == "rtt") spec.rtt = v.get<double>();
      else if (k == "w_max") spec.w_max = v.get<unsigned>();
      else if (k == "to_rounds") spec.to_rounds = v.get<double>();
      else if (k == "redundancy") spec.redundancy = v.get<double>();
      else if (k == "t_p") spec.t_p = v.get<double>();
      else if (k == "w1") spec.w1 = v.get<double>();
      else if (k == "packet_bits") spec.packet_bits = v.get<unsigned>();
      else if (k == "extra_rounds") spec.extra_rounds = v.get<double>();
      else if (k == "p_d") spec.p_d = v.get<double>();
      else if (k == "horizon") spec.horizon = v.get<double>();
      else if (k == "trials") spec.trials = v.get<unsigned>();
      else if (k == "seed") spec.seed = v.get<std::uint64_t>();
      else if (k == "out") spec.out = v.get<std::string>();
      else if (k == "srtt") spec.srtt = v.get<std::vector<double>>();
      else if (k == "srtt_source") {
        const auto s = v.get<std::string>();
        if (s == "measured") spec.srtt_source = SrttSource::measured;
        else if (s == "model") spec.srtt_source = SrttSource::model;
        else throw UsageError("srtt_source must be measured or model");
      } else if (k == "jobs") spec.jobs = v.get<unsigned>();
      else if (k == "traces") spec.traces = v.get<bool>();
      else throw UsageError("unknown config key: " + k);
    }
  } catch (const json::type_error& e) {
    throw UsageError(std::string("config value has the wrong type: ") + e.what());
  }
}

// ---- analysis -------------------------------------------------------------

std::vector<AnalysisRow> analyze(const ExperimentSpec& spec, const std::vector<double>& srtt) {
  const auto tcp = tcp_config(spec);
  std::vector<AnalysisRow> rows;
  for (std::size_t i = 0; i < spec.grid_size(); ++i) {
    for (const auto& proto : spec.protocols()) {
      AnalysisRow row;
      row.q = spec.link_loss(i);
      row.protocol = proto;
      try {
        row.p = spec.path_loss(i);
        const double p = row.p;
        if (proto == "tcp") {
          row.srtt = spec.rtt;
          if (p == 0.0) {
            // Lossless path: the window sits at w_max.
            row.pkts_per_sec = spec.w_max / spec.rtt * (1.0 - spec.p_d);
            row.mbps = row.pkts_per_sec * spec.packet_bits / 1e6;
            row.expected_window = spec.w_max;
            row.p_timeout = 0.0;
          } else {
            nctcp_throughput t{};
            check(nctcp_combined_throughput(NCTCP_PROTO_TCP, p, spec.p_d, &tcp, nullptr, 0, &t),
                  "tcp throughput");
            row.pkts_per_sec = t.pkts_per_sec;
            row.mbps = t.mbps;
            double r = 0.0, w = 0.0, pto = 0.0;
            check(nctcp_tcp_expected_rounds(p, &r), "expected rounds");
            check(nctcp_tcp_expected_window(p, &w), "expected window");
            check(nctcp_tcp_timeout_prob(std::max(w, 1.0), p, &pto), "timeout probability");
            row.expected_rounds = r;
            row.expected_window = w;
            row.p_timeout = pto;
          }
        } else {
          double s = 0.0;
          if (!srtt.empty()) s = srtt.at(i);
          else if (!spec.srtt.empty()) s = spec.srtt.at(i);
          else check(nctcp_e2e_srtt(spec.rtt, spec.t_p, p, &s), "srtt");
          row.srtt = s;
          check(nctcp_horizon_rounds(spec.horizon, s, &row.rounds), "horizon rounds");
          const auto nc = nc_config(spec, s);
          nctcp_throughput t{};
          check(nctcp_combined_throughput(NCTCP_PROTO_E2E, p, spec.p_d, &tcp, &nc, row.rounds,
                                          &t),
                "e2e throughput");
          row.pkts_per_sec = t.pkts_per_sec;
          row.mbps = t.mbps;
          double sum = 0.0;
          for (std::uint64_t k = 1; k <= row.rounds; ++k) {
            double w = 0.0;
            check(nctcp_e2e_expected_window(k, p, spec.w_max, spec.w1, &w), "expected window");
            sum += w;
          }
          row.expected_window = sum / static_cast<double>(row.rounds);
        }
      } catch (const ApiError& e) {
        row.status = std::string(e.status == NCTCP_ERR_DOMAIN ? "domain_error: " : "error: ") +
                     nctcp_last_error();
        row.pkts_per_sec = row.mbps = row.expected_window = row.srtt = std::nan("");
        row.expected_rounds.reset();
        row.p_timeout.reset();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---- simulation -----------------------------------------------------------

Campaign simulate(const ExperimentSpec& spec) {
  std::uint64_t rounds = 0;
  check(nctcp_horizon_rounds(spec.horizon, spec.rtt, &rounds), "simulation rounds");
  if (rounds == 0) throw UsageError("horizon shorter than one rtt");

  const auto protos = spec.protocols();
  std::vector<double> losses(spec.grid_size());
  for (std::size_t i = 0; i < losses.size(); ++i) losses[i] = spec.path_loss(i);

  std::string trace_dir;
  if (spec.traces) {
    trace_dir = output_dir(spec) + "/traces";
    std::error_code ec;
    fs::create_directories(trace_dir, ec);
    if (ec) throw RuntimeError("cannot create " + trace_dir + ": " + ec.message());
  }

  const std::size_t per_point = protos.size() * spec.trials;
  const std::size_t total = losses.size() * per_point;
  std::vector<TrialResult> results(total);
  std::vector<std::string> errors(total);

  auto work = [&](std::size_t idx) {
    const std::size_t i = idx / per_point;
    const std::string& proto = protos[(idx % per_point) / spec.trials];
    const auto t = static_cast<unsigned>(idx % spec.trials);
    TrialResult& r = results[idx];
    r.protocol = proto;
    r.q = spec.link_loss(i);
    r.p = losses[i];
    r.trial = t;
    r.seed = spec.seed + t;
    r.rounds = rounds;
    RunHandle h;
    run_protocol(proto, spec, r.p, r.seed, rounds, h);
    nctcp_throughput tp{};
    nctcp_run_stats st{};
    check(nctcp_run_throughput(h.run, &tp), "throughput");
    check(nctcp_run_stats_get(h.run, &st), "stats");
    r.pkts_per_sec = tp.pkts_per_sec;
    r.mbps = tp.mbps;
    r.delivered = st.delivered;
    r.packets_sent = st.packets_sent;
    r.td_events = st.td_events;
    r.to_events = st.to_events;
    r.mean_window = st.mean_window;
    r.srtt = st.mean_srtt;
    if (spec.traces) {
      const std::string path = trace_dir + "/trace_" + proto + "_" + std::to_string(i) +
                               "_seed" + std::to_string(r.seed) + ".csv";
      check(nctcp_run_write_trace_csv(h.run, path.c_str()), "trace export");
    }
  };

  unsigned jobs = spec.jobs != 0 ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, total));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      try {
        work(idx);
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw RuntimeError(e);
  }

  Campaign c;
  c.trials = std::move(results);
  for (std::size_t i = 0; i < losses.size(); ++i) {
    for (std::size_t k = 0; k < protos.size(); ++k) {
      const std::size_t first = i * per_point + k * spec.trials;
      std::vector<double> mbps, srtt;
      for (std::size_t t = 0; t < spec.trials; ++t) {
        mbps.push_back(c.trials[first + t].mbps);
        srtt.push_back(c.trials[first + t].srtt);
      }
      SimSummary s;
      s.protocol = protos[k];
      s.q = spec.link_loss(i);
      s.p = losses[i];
      s.trials = spec.trials;
      s.rounds = rounds;
      s.mean_mbps = mean_of(mbps);
      s.stddev_mbps = sample_stddev(mbps);
      s.mean_srtt = mean_of(srtt);
      c.summary.push_back(s);
    }
  }
  return c;
}

// ---- comparison -----------------------------------------------------------

std::vector<ComparisonRow> compare(const ExperimentSpec& spec, const Campaign& campaign) {
  std::vector<double> srtt = spec.srtt;
  if (srtt.empty() && spec.srtt_source == SrttSource::measured) {
    for (std::size_t i = 0; i < spec.grid_size(); ++i) {
      for (const auto& s : campaign.summary) {
        if (s.protocol == "e2e" && s.p == spec.path_loss(i) && s.mean_srtt > 0.0) {
          srtt.push_back(s.mean_srtt);
          break;
        }
      }
    }
    if (srtt.size() != spec.grid_size()) srtt.clear();
  }
  const auto analysis = analyze(spec, srtt);
  if (analysis.size() != campaign.summary.size()) {
    throw UsageError("simulation and analysis grids differ");
  }

  std::vector<ComparisonRow> rows;
  for (std::size_t k = 0; k < analysis.size(); ++k) {
    const auto& a = analysis[k];
    const auto& s = campaign.summary[k];
    if (a.protocol != s.protocol || a.p != s.p) {
      throw UsageError("simulation and analysis grids differ");
    }
    ComparisonRow r;
    r.q = a.q;
    r.p = a.p;
    r.protocol = a.protocol;
    r.measured_mbps = s.mean_mbps;
    r.measured_stddev = s.stddev_mbps;
    r.analytical_mbps = a.mbps;
    r.srtt = a.protocol == "e2e" ? a.srtt : s.mean_srtt;
    r.status = a.status;
    if (a.status == "ok" && a.mbps > 0.0) {
      r.rel_error = std::abs(s.mean_mbps - a.mbps) / a.mbps;
    }
    rows.push_back(r);
  }
  return rows;
}

// ---- output ---------------------------------------------------------------

void write_analysis_csv(const std::string& path, const std::vector<AnalysisRow>& rows) {
  auto os = open_out(path);
  os << "q,p,protocol,throughput_pkts,throughput_mbps,expected_window,expected_rounds,"
        "p_timeout,srtt,rounds,status\n";
  for (const auto& r : rows) {
    os << num(r.q) << ',' << num(r.p) << ',' << r.protocol << ',' << num(r.pkts_per_sec) << ','
       << num(r.mbps) << ',' << num(r.expected_window) << ',' << num(r.expected_rounds) << ','
       << num(r.p_timeout) << ',' << num(r.srtt) << ','
       << (r.protocol == "e2e" && r.status == "ok" ? std::to_string(r.rounds) : "") << ','
       << csv_field(r.status) << '\n';
  }
  finish(os, path);
}

void write_trials_csv(const std::string& path, const std::vector<TrialResult>& rows) {
  auto os = open_out(path);
  os << "protocol,q,p,trial,seed,rounds,throughput_pkts,throughput_mbps,delivered,"
        "packets_sent,td_events,to_events,mean_window,srtt\n";
  for (const auto& r : rows) {
    os << r.protocol << ',' << num(r.q) << ',' << num(r.p) << ',' << r.trial << ',' << r.seed
       << ',' << r.rounds << ',' << num(r.pkts_per_sec) << ',' << num(r.mbps) << ','
       << r.delivered << ',' << r.packets_sent << ',' << r.td_events << ',' << r.to_events << ','
       << num(r.mean_window) << ',' << num(r.srtt) << '\n';
  }
  finish(os, path);
}

void write_summary_json(const std::string& path, const ExperimentSpec& spec,
                        const std::vector<SimSummary>& rows) {
  json j;
  j["spec"] = {{"protocol", spec.protocol}, {"q", spec.q},
               {"p", spec.p},               {"links", spec.links},
               {"rtt", spec.rtt},           {"w_max", spec.w_max},
               {"to_rounds", spec.to_rounds}, {"redundancy", spec.redundancy},
               {"t_p", spec.t_p},           {"w1", spec.w1},
               {"packet_bits", spec.packet_bits}, {"extra_rounds", spec.extra_rounds},
               {"p_d", spec.p_d},           {"horizon", spec.horizon},
               {"trials", spec.trials},     {"seed", spec.seed}};
  j["results"] = json::array();
  for (const auto& r : rows) {
    json e = {{"protocol", r.protocol}, {"p", r.p},
              {"trials", r.trials},     {"rounds", r.rounds},
              {"mean_mbps", r.mean_mbps}, {"stddev_mbps", r.stddev_mbps},
              {"mean_srtt", r.mean_srtt}};
    e["q"] = r.q ? json(*r.q) : json(nullptr);
    j["results"].push_back(e);
  }
  auto os = open_out(path);
  os << j.dump(2) << '\n';
  finish(os, path);
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
  auto os = open_out(path);
  os << "q,p,protocol,sim_mean_mbps,sim_stddev_mbps,analysis_mbps,rel_error,srtt,status\n";
  for (const auto& r : rows) {
    os << num(r.q) << ',' << num(r.p) << ',' << r.protocol << ',' << num(r.measured_mbps) << ','
       << num(r.measured_stddev) << ',' << num(r.analytical_mbps) << ',' << num(r.rel_error)
       << ',' << num(r.srtt) << ',' << csv_field(r.status) << '\n';
  }
  finish(os, path);
}

void write_window_csv(const std::string& path, const ExperimentSpec& spec) {
  std::uint64_t rounds = 0;
  check(nctcp_horizon_rounds(spec.horizon, spec.rtt, &rounds), "simulation rounds");
  auto os = open_out(path);
  os << "protocol,q,p,seed,round,window,model_window,event\n";
  static const char* const kEvents[] = {"none", "TD", "TO", "DOWN"};
  for (std::size_t i = 0; i < spec.grid_size(); ++i) {
    const double p = spec.path_loss(i);
    for (const auto& proto : spec.protocols()) {
      RunHandle h;
      run_protocol(proto, spec, p, spec.seed, rounds, h);
      double tcp_w = std::nan("");
      if (proto == "tcp" && p > 0.0 && nctcp_tcp_expected_window(p, &tcp_w) != NCTCP_OK) {
        tcp_w = std::nan("");
      }
      const std::size_t n = nctcp_run_round_count(h.run);
      for (std::size_t k = 0; k < n; ++k) {
        nctcp_round r{};
        check(nctcp_run_round(h.run, k, &r), "trace");
        double model_w = tcp_w;
        if (proto == "e2e") {
          check(nctcp_e2e_expected_window(r.round, p, spec.w_max, spec.w1, &model_w),
                "expected window");
        }
        os << proto << ',' << num(spec.link_loss(i)) << ',' << num(p) << ',' << spec.seed << ','
           << r.round << ',' << num(r.window) << ',' << num(model_w) << ','
           << kEvents[static_cast<int>(r.event)] << '\n';
      }
    }
  }
  finish(os, path);
}

void print_report(std::ostream& os, const ExperimentSpec& spec,
                  const std::vector<ComparisonRow>& rows) {
  const auto find = [&](std::size_t i, const char* proto) -> const ComparisonRow* {
    const double p = spec.path_loss(i);
    for (const auto& r : rows) {
      if (r.p == p && r.protocol == proto) return &r;
    }
    return nullptr;
  };
  const auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  char line[256];
  os << "Average long-term throughput (Mbps), " << spec.trials << " runs, horizon "
     << spec.horizon << " s\n";
  std::snprintf(line, sizeof line, "%-8s %-8s %-18s %-12s %-18s %-12s %-8s\n", "q", "p",
                "TCP sim", "TCP analysis", "E2E sim", "E2E analysis", "SRTT");
  os << line;
  for (std::size_t i = 0; i < spec.grid_size(); ++i) {
    const auto* t = find(i, "tcp");
    const auto* e = find(i, "e2e");
    const auto sim = [&](const ComparisonRow* r) {
      return r ? cell(r->measured_mbps) + " +/- " + cell(r->measured_stddev) : std::string("-");
    };
    const auto ana = [&](const ComparisonRow* r) {
      if (!r) return std::string("-");
      return r->status == "ok" ? cell(r->analytical_mbps) : std::string("n/a");
    };
    const auto q = spec.link_loss(i);
    std::snprintf(line, sizeof line, "%-8s %-8s %-18s %-12s %-18s %-12s %-8s\n",
                  q ? num(*q).c_str() : "-", cell(spec.path_loss(i)).c_str(), sim(t).c_str(),
                  ana(t).c_str(), sim(e).c_str(), ana(e).c_str(),
                  e ? cell(e->srtt).c_str() : "-");
    os << line;
  }
}

// ---- command line -----------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Throughput models and simulation for TCP and network coded TCP", "nctcp"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, protocol, out_dir, srtt_source;
  std::vector<std::string> q_list, p_list, srtt_list;
  unsigned links = 0, w_max = 0, packet_bits = 0, trials = 0, jobs = 0;
  double rtt = 0, to = 0, redundancy = 0, tp = 0, w1 = 0, extra = 0, pd = 0, horizon = 0;
  std::uint64_t seed = 0;
  bool traces = false;

  app.add_option("--config", config, "JSON config file; flags override its values");
  app.add_option("--protocol", protocol, "tcp, e2e or both")
      ->check(CLI::IsMember({"tcp", "e2e", "both"}));
  app.add_option("--q", q_list, "per-link loss list (comma or space separated)")
      ->expected(0, CLI::detail::expected_max_vector_size);
  app.add_option("--p", p_list, "path loss list")
      ->expected(0, CLI::detail::expected_max_vector_size);
  app.add_option("--links", links, "hops per path");
  app.add_option("--rtt", rtt, "round trip time, seconds");
  app.add_option("--wmax", w_max, "maximum window, packets");
  app.add_option("--to", to, "timeout length T_o, rounds");
  app.add_option("--redundancy", redundancy, "redundancy factor R");
  app.add_option("--tp", tp, "packet transmission time, seconds");
  app.add_option("--w1", w1, "initial E2E window");
  app.add_option("--packet-bits", packet_bits, "packet size, bits");
  app.add_option("--extra-rounds", extra, "idle rounds per TD/TO event");
  app.add_option("--pd", pd, "down-state probability per round");
  app.add_option("--horizon", horizon, "experiment length, seconds");
  app.add_option("--trials", trials, "independent runs per grid point");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--out", out_dir, "output directory (default $NCTCP_OUT, then .)");
  app.add_option("--srtt", srtt_list, "SRTT per grid point for the E2E analysis")
      ->expected(0, CLI::detail::expected_max_vector_size);
  app.add_option("--srtt-source", srtt_source, "measured or model")
      ->check(CLI::IsMember({"measured", "model"}));
  app.add_option("--jobs", jobs, "worker threads (0: all cores)");
  app.add_flag("--traces", traces, "write per-trial window traces");

  auto* analyze_cmd = app.add_subcommand("analyze", "analytical throughput sweep");
  auto* simulate_cmd = app.add_subcommand("simulate", "seeded simulation campaign");
  auto* compare_cmd = app.add_subcommand("compare", "simulation against analysis");
  for (auto* sc : {analyze_cmd, simulate_cmd, compare_cmd}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "nctcp: " << e.what() << '\n';
    return 2;
  }

  try {
    ExperimentSpec spec;
    if (!config.empty()) {
      std::ifstream is(config, std::ios::binary);
      if (!is) throw UsageError("cannot read config " + config);
      std::stringstream ss;
      ss << is.rdbuf();
      apply_config_json(spec, ss.str());
    }
    const auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--q") || given("--p")) {
      spec.q = parse_list(q_list, "--q");
      spec.p = parse_list(p_list, "--p");
      if (given("--q") && given("--p")) throw UsageError("give either --q or --p, not both");
      if (spec.q.empty() && spec.p.empty()) throw UsageError("empty loss list");
    }
    if (given("--protocol")) spec.protocol = protocol;
    if (given("--links")) spec.links = links;
    if (given("--rtt")) spec.rtt = rtt;
    if (given("--wmax")) spec.w_max = w_max;
    if (given("--to")) spec.to_rounds = to;
    if (given("--redundancy")) spec.redundancy = redundancy;
    if (given("--tp")) spec.t_p = tp;
    if (given("--w1")) spec.w1 = w1;
    if (given("--packet-bits")) spec.packet_bits = packet_bits;
    if (given("--extra-rounds")) spec.extra_rounds = extra;
    if (given("--pd")) spec.p_d = pd;
    if (given("--horizon")) spec.horizon = horizon;
    if (given("--trials")) spec.trials = trials;
    if (given("--seed")) spec.seed = seed;
    if (given("--out")) spec.out = out_dir;
    if (given("--srtt")) spec.srtt = parse_list(srtt_list, "--srtt");
    if (given("--srtt-source")) {
      spec.srtt_source = srtt_source == "model" ? SrttSource::model : SrttSource::measured;
    }
    if (given("--jobs")) spec.jobs = jobs;
    if (traces) spec.traces = true;
    spec.validate();

    const std::string dir = output_dir(spec);
    if (analyze_cmd->parsed()) {
      const auto rows = analyze(spec);
      write_analysis_csv(dir + "/analysis.csv", rows);
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.status == "ok" ? 0 : 1;
      out << "wrote " << dir << "/analysis.csv (" << rows.size() << " rows, " << failed
          << " failed)\n";
    } else if (simulate_cmd->parsed()) {
      const auto c = simulate(spec);
      write_trials_csv(dir + "/trials.csv", c.trials);
      write_summary_json(dir + "/summary.json", spec, c.summary);
      for (const auto& s : c.summary) {
        char line[160];
        std::snprintf(line, sizeof line, "%-4s p=%.4f  %.4f +/- %.4f Mbps\n", s.protocol.c_str(),
                      s.p, s.mean_mbps, s.stddev_mbps);
        out << line;
      }
    } else {
      const auto c = simulate(spec);
      const auto rows = compare(spec, c);
      write_trials_csv(dir + "/trials.csv", c.trials);
      write_summary_json(dir + "/summary.json", spec, c.summary);
      write_comparison_csv(dir + "/throughput_vs_q.csv", rows);
      write_window_csv(dir + "/window_vs_round.csv", spec);
      print_report(out, spec, rows);
    }
    return 0;
  } catch (const UsageError& e) {
    err << "nctcp: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "nctcp: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nctcp::harness
