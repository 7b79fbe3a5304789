#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ppse/scenario.hpp"

namespace ppse {

inline constexpr const char* kVersion = "1.0.0";

// Offsets of the conditioned-on-critical-event series, relative to each trial's
// first post-handshake critical event.
inline constexpr int kEventOffsetMin = -10;
inline constexpr int kEventOffsetMax = 50;

struct TrialResult {
  Eigen::VectorXd user_sq_err;
  Eigen::VectorXd eve_sq_err;
  Eigen::VectorXd kf_gap;          // zero-sized unless requested
  Eigen::VectorXd user_cov_trace;  // tr of the user filter covariance; zeros for ssc
  Eigen::VectorXd user_err_capture;  // zero-sized unless capture_step >= 0
  int critical_event_time = -1;
  int eve_diverged_at = -1;
  std::vector<std::uint8_t> gamma_trace;    // physical reception, user channel
  std::vector<std::uint8_t> gamma_e_trace;  // physical reception, wiretap channel
};

struct MseSummary {
  int horizon = 0;
  int trials = 0;
  std::uint64_t digest = 0;
  std::string label;
  Eigen::VectorXd user_mse;
  Eigen::VectorXd eve_mse;
  Eigen::VectorXd kf_gap;          // zeros when not requested
  Eigen::VectorXd user_cov_trace;  // per-step mean tr of the user filter covariance
  // Conditioned series indexed by offset - kEventOffsetMin.
  Eigen::VectorXd event_user;
  Eigen::VectorXd event_eve;
  std::vector<int> event_count;
};

struct ExperimentResult {
  MseSummary summary;
  std::vector<TrialResult> trials;
};

// Conditioned growth statistics: trials with event time t0 >= 1 and t0 + 30 < horizon;
// pre_level = conditioned mean one step before the event; ratio(j), j = 1..30, is the
// conditioned mean j steps after the event over pre_level.
struct EventGrowth {
  int n = 0;
  double pre_level = 0.0;
  Eigen::VectorXd ratio;  // size 30

  double at(int j) const { return ratio(j - 1); }
  double max_within(int j_max) const { return ratio.head(j_max).maxCoeff(); }
};

// capture_step >= 0 records the user estimation-error vector at that step.
TrialResult run_trial(const ScenarioConfig& cfg, int trial_index, bool want_kf_gap,
                      std::ostream* trace = nullptr, int capture_step = -1);

ExperimentResult run_monte_carlo(const ScenarioConfig& cfg);

// Common-random-number comparison: all scenarios must agree on system, channels,
// horizon, trials, and seed; they may differ only in mechanism.
std::vector<ExperimentResult> compare_mechanisms(const std::vector<LoadedScenario>& scenarios);

EventGrowth event_growth(const std::vector<TrialResult>& trials, int horizon);

MseSummary summarize(const ScenarioConfig& cfg, const std::vector<TrialResult>& trials,
                     std::uint64_t digest);

void write_csv(const MseSummary& s, const std::string& path);
void write_events_csv(const MseSummary& s, const std::string& path);
void write_manifest(const LoadedScenario& scenario, const std::vector<std::string>& outputs,
                    const std::string& path);

}  // namespace ppse
