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

#ifndef NCTCP_HARNESS_HPP
#define NCTCP_HARNESS_HPP

// Experiment driver behind the `nctcp` command line: analytical sweeps,
// seeded simulation campaigns and the analysis-vs-simulation report.
// Everything here goes through the public C API.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nctcp::harness {

// Bad flags, bad config, inconsistent sweep grids. Exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failures while running (I/O, library errors). Exit code 1.
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SrttSource { measured, model };

struct ExperimentSpec {
  std::string protocol = "both";  // tcp | e2e | both
  std::vector<double> q;          // per-link loss, or
  std::vector<double> p;          // path loss; exactly one list is non-empty
  unsigned links = 4;
  double rtt = 0.8;
  unsigned w_max = 90;
  double to_rounds = 3.75;
  double redundancy = 1.25;
  double t_p = 0.008;
  double w1 = 1.0;
  unsigned packet_bits = 8000;
  double extra_rounds = 2.0;
  double p_d = 0.0;
  double horizon = 1000.0;  // seconds
  unsigned trials = 30;
  std::uint64_t seed = 1;
  std::string out;
  // Per-grid-point SRTT for the E2E analysis. Empty means srtt_source decides.
  std::vector<double> srtt;
  SrttSource srtt_source = SrttSource::measured;
  unsigned jobs = 0;  // 0: hardware concurrency
  bool traces = false;

  // Throws UsageError.
  void validate() const;
  std::vector<std::string> protocols() const;
  std::size_t grid_size() const { return q.empty() ? p.size() : q.size(); }
  // Path loss of grid point i.
  double path_loss(std::size_t i) const;
  std::optional<double> link_loss(std::size_t i) const;
};

// Applies a flat JSON object (field names as in ExperimentSpec) on top of
// `spec`. Throws UsageError on unknown keys or wrong types.
void apply_config_json(ExperimentSpec& spec, const std::string& text);

struct AnalysisRow {
  std::optional<double> q;
  double p = 0.0;
  std::string protocol;
  double pkts_per_sec = 0.0;
  double mbps = 0.0;
  double expected_window = 0.0;
  std::optional<double> expected_rounds;  // TCP only
  std::optional<double> p_timeout;        // TCP only
  double srtt = 0.0;
  std::uint64_t rounds = 0;  // E2E horizon n
  std::string status = "ok";
};

// `srtt` overrides, per grid point, the SRTT of the E2E rows (the
// measured-SRTT path of compare).
std::vector<AnalysisRow> analyze(const ExperimentSpec& spec,
                                 const std::vector<double>& srtt = {});

struct TrialResult {
  std::string protocol;
  std::optional<double> q;
  double p = 0.0;
  unsigned trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  double pkts_per_sec = 0.0;
  double mbps = 0.0;
  std::uint64_t delivered = 0;
  std::uint64_t packets_sent = 0;
  std::uint64_t td_events = 0;
  std::uint64_t to_events = 0;
  double mean_window = 0.0;
  double srtt = 0.0;  // long-run mean of the smoothed RTT
};

struct SimSummary {
  std::string protocol;
  std::optional<double> q;
  double p = 0.0;
  unsigned trials = 0;
  std::uint64_t rounds = 0;
  double mean_mbps = 0.0;
  double stddev_mbps = 0.0;
  double mean_srtt = 0.0;
};

struct Campaign {
  std::vector<TrialResult> trials;  // grid point, protocol, trial order
  std::vector<SimSummary> summary;
};

// Seeds seed .. seed+trials-1, rounds = floor(horizon / rtt). Writes traces
// to <out>/traces when spec.traces is set.
Campaign simulate(const ExperimentSpec& spec);

struct ComparisonRow {
  std::optional<double> q;
  double p = 0.0;
  std::string protocol;
  double measured_mbps = 0.0;
  double measured_stddev = 0.0;
  double analytical_mbps = 0.0;
  std::optional<double> rel_error;  // when analytical > 0
  double srtt = 0.0;
  std::string status = "ok";
};

std::vector<ComparisonRow> compare(const ExperimentSpec& spec, const Campaign& campaign);

void write_analysis_csv(const std::string& path, const std::vector<AnalysisRow>& rows);
void write_trials_csv(const std::string& path, const std::vector<TrialResult>& rows);
void write_summary_json(const std::string& path, const ExperimentSpec& spec,
                        const std::vector<SimSummary>& rows);
void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);
void write_window_csv(const std::string& path, const ExperimentSpec& spec);
void print_report(std::ostream& os, const ExperimentSpec& spec,
                  const std::vector<ComparisonRow>& rows);

// Full command line. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nctcp::harness

#endif  // NCTCP_HARNESS_HPP
