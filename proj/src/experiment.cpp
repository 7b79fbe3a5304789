#include "ppse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "ppse/codec.hpp"
#include "ppse/estimator.hpp"

namespace ppse {

namespace {

constexpr double kStateCap = 1e30;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct TrialRngs {
  Rng process;
  Rng measurement;
  Rng init;
  Rng chan_user;
  Rng chan_eve;
  Rng quantizer;
  Rng withholding;

  TrialRngs(std::uint64_t base_seed, int trial_index)
      : process(stream_seed(trial_seed(base_seed, trial_index), stream::kProcessNoise)),
        measurement(stream_seed(trial_seed(base_seed, trial_index), stream::kMeasurementNoise)),
        init(stream_seed(trial_seed(base_seed, trial_index), stream::kInitialState)),
        chan_user(stream_seed(trial_seed(base_seed, trial_index), stream::kUserChannel)),
        chan_eve(stream_seed(trial_seed(base_seed, trial_index), stream::kWiretapChannel)),
        quantizer(stream_seed(trial_seed(base_seed, trial_index), stream::kQuantizer)),
        withholding(stream_seed(trial_seed(base_seed, trial_index), stream::kWithholding)) {}
};

bool state_ok(const FilterState& fs) {
  return fs.x_hat.allFinite() && fs.x_hat.norm() <= kStateCap && fs.P.allFinite();
}

int thread_count(int trials) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("PPSE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = std::min<long>(n, v);
  }
  return std::max(1, std::min(n, trials));
}

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

TrialResult run_trial(const ScenarioConfig& cfg, int trial_index, bool want_kf_gap,
                      std::ostream* trace, int capture_step) {
  const SystemModel& m = cfg.system;
  const NumericsConfig ncfg;
  cfg.channel_user.validate(ncfg);
  cfg.channel_eve.validate(ncfg);

  const int T = cfg.horizon;
  const Eigen::Index dy = m.ny();
  const MechanismKind kind = cfg.mechanism.kind;
  const PpmParams& p = cfg.mechanism.ppm;
  const bool innovation_filter =
      kind == MechanismKind::Ppm || kind == MechanismKind::None || kind == MechanismKind::SmFsmc;

  TrialRngs rngs(cfg.seed, trial_index);
  Plant plant(m, ncfg);
  ChannelSim ch_user(cfg.channel_user, ncfg);
  ChannelSim ch_eve(cfg.channel_eve, ncfg);

  TrialResult res;
  res.user_sq_err = Eigen::VectorXd::Zero(T);
  res.eve_sq_err = Eigen::VectorXd::Zero(T);
  res.user_cov_trace = Eigen::VectorXd::Zero(T);
  if (want_kf_gap) res.kf_gap = Eigen::VectorXd::Zero(T);
  res.gamma_trace.assign(static_cast<std::size_t>(T), 0);
  res.gamma_e_trace.assign(static_cast<std::size_t>(T), 0);

  SystemState st = plant.init_state(rngs.init);

  // Innovation-filter mechanisms: user and eavesdropper each run the gated filter.
  FilterState fs_user = initial_filter_state(m);
  FilterState fs_eve = initial_filter_state(m);
  FilterState fs_kf = initial_filter_state(m);
  const Eigen::MatrixXd Re = decode_error_cov_bound(p, dy);
  const Eigen::MatrixXd Re_zero = Eigen::MatrixXd::Zero(dy, dy);
  ReferenceChain chain_user, chain_eve;

  // State-forwarding mechanisms: sensor-side filter plus open-loop decoders.
  FilterState fs_sensor = initial_filter_state(m);
  Eigen::VectorXd x_user = m.x0_mean;
  Eigen::VectorXd x_eve = m.x0_mean;
  StateChain schain_user, schain_eve;
  SscParams sp;
  if (kind == MechanismKind::Ssc1 || kind == MechanismKind::Ssc2) {
    sp.L = ssc_weight(kind == MechanismKind::Ssc1 ? SscVariant::I : SscVariant::II, m.A,
                      m.process_noise_cov(), ncfg);
    sp.compensate_input = kind == MechanismKind::Ssc1;
  }
  const Eigen::VectorXd drift = m.input_drift();

  int established = 0;
  bool eve_frozen = false;
  const auto freeze_eve = [&](int step) {
    eve_frozen = true;
    if (res.eve_diverged_at < 0) res.eve_diverged_at = step;
  };

  for (int k = 0; k < T; ++k) {
    st = plant.step(st, rngs.process);
    const Eigen::VectorXd y = plant.measure(st, rngs.measurement);

    const bool g = ch_user.next(rngs.chan_user);
    const bool ge = cfg.channel_eve.shared_state
                        ? ch_eve.next_with_state(ch_user.state(), rngs.chan_eve)
                        : ch_eve.next(rngs.chan_eve);
    res.gamma_trace[static_cast<std::size_t>(k)] = g ? 1 : 0;
    res.gamma_e_trace[static_cast<std::size_t>(k)] = ge ? 1 : 0;

    const bool sent = kind == MechanismKind::SmFsmc
                          ? smfsmc_sends(cfg.mechanism.lambda_hat, rngs.withholding)
                          : true;
    // Session establishment rides the first two delivered packets in the clear, so
    // secrecy is measured on the chained regime, not on the initial-state handoff.
    const bool grant = sent && g && established < 2;
    if (grant) ++established;
    const bool gee = ge || grant;

    if (innovation_filter) {
      const PredictedState ps_user = predict(m, fs_user, ncfg);
      const Eigen::VectorXd eps = y - m.C * ps_user.x_pred;

      if (kind == MechanismKind::Ppm) {
        const EncodedPacket pkt = encode(eps, chain_user, p, k, rngs.quantizer);
        const Eigen::VectorXd eps_bar_user = decode(pkt, chain_user, p, k);
        const Eigen::VectorXd ref_eve =
            chain_eve.initialized()
                ? Eigen::VectorXd(power_gap(p.a, k - chain_eve.t_ref) * chain_eve.eps_ref)
                : Eigen::VectorXd::Zero(dy);
        const Eigen::VectorXd eps_bar_eve = pkt.values() * p.s + ref_eve;

        fs_user = update(m, ps_user, g,
                         g ? std::optional<Eigen::VectorXd>(eps_bar_user) : std::nullopt, Re,
                         p.s, k, ncfg);

        if (!eve_frozen) {
          const bool upd_e = g && gee;
          try {
            const PredictedState ps_eve = predict(m, fs_eve, ncfg);
            FilterState cand =
                update(m, ps_eve, upd_e,
                       upd_e ? std::optional<Eigen::VectorXd>(eps_bar_eve) : std::nullopt, Re,
                       p.s, k, ncfg);
            if (state_ok(cand))
              fs_eve = cand;
            else
              freeze_eve(k);
          } catch (const Overflow&) {
            freeze_eve(k);
          }
        }

        if (g) {
          if (!gee && res.critical_event_time < 0) res.critical_event_time = k;
          update_reference(chain_eve, true, gee ? eps_bar_eve : ref_eve, k);
          update_reference(chain_user, true, eps_bar_user, k);
        }
      } else {
        const bool upd_u = kind == MechanismKind::SmFsmc ? (sent && g) : g;
        const bool upd_e = kind == MechanismKind::SmFsmc ? (sent && gee) : (g && gee);
        fs_user = update(m, ps_user, upd_u,
                         upd_u ? std::optional<Eigen::VectorXd>(eps) : std::nullopt, Re_zero,
                         1.0, k, ncfg);
        if (!eve_frozen) {
          try {
            const PredictedState ps_eve = predict(m, fs_eve, ncfg);
            const Eigen::VectorXd eps_eve = y - m.C * ps_eve.x_pred;
            FilterState cand =
                update(m, ps_eve, upd_e,
                       upd_e ? std::optional<Eigen::VectorXd>(eps_eve) : std::nullopt, Re_zero,
                       1.0, k, ncfg);
            if (state_ok(cand))
              fs_eve = cand;
            else
              freeze_eve(k);
          } catch (const Overflow&) {
            freeze_eve(k);
          }
        }
        const bool event = kind == MechanismKind::SmFsmc ? (sent && g && !gee) : (g && !gee);
        if (event && res.critical_event_time < 0) res.critical_event_time = k;
      }

      if (want_kf_gap) {
        const PredictedState ps_kf = predict(m, fs_kf, ncfg);
        res.kf_gap(k) = (ps_user.x_pred - ps_kf.x_pred).squaredNorm();
        const bool upd_u = kind == MechanismKind::SmFsmc ? (sent && g) : g;
        fs_kf = upd_u ? kf_reference_update(m, ps_kf, y, k, ncfg)
                      : FilterState{k, ps_kf.x_pred, ps_kf.P_pred};
      }

      res.user_sq_err(k) = (st.x - fs_user.x_hat).squaredNorm();
      res.eve_sq_err(k) = (st.x - fs_eve.x_hat).squaredNorm();
      res.user_cov_trace(k) = fs_user.P.trace();
      if (k == capture_step) res.user_err_capture = st.x - fs_user.x_hat;
    } else {
      const PredictedState ps_sensor = predict(m, fs_sensor, ncfg);
      fs_sensor = kf_reference_update(m, ps_sensor, y, k, ncfg);

      const Eigen::VectorXd z = ssc_encode(fs_sensor.x_hat, schain_user, sp, drift, k);
      const Eigen::VectorXd dec_user = ssc_decode(z, schain_user, sp, drift, k);

      if (g)
        x_user = dec_user;
      else
        x_user = m.A * x_user + drift;

      if (!eve_frozen) {
        const Eigen::VectorXd prev = x_eve;
        try {
          if (gee)
            x_eve = ssc_decode(z, schain_eve, sp, drift, k);
          else
            x_eve = m.A * x_eve + drift;
          if (!x_eve.allFinite() || x_eve.norm() > kStateCap) {
            x_eve = prev;
            freeze_eve(k);
          }
        } catch (const Overflow&) {
          x_eve = prev;
          freeze_eve(k);
        }
      }

      if (g) {
        if (!gee && res.critical_event_time < 0) res.critical_event_time = k;
        Eigen::VectorXd new_eve_ref;
        if (!schain_eve.initialized())
          new_eve_ref = z;
        else if (gee)
          new_eve_ref = ssc_decode(z, schain_eve, sp, drift, k);
        else
          new_eve_ref = ssc_decode(Eigen::VectorXd::Zero(m.nx()), schain_eve, sp, drift, k);
        ssc_update_reference(schain_eve, true, new_eve_ref, k);
        ssc_update_reference(schain_user, true, dec_user, k);
      }

      res.user_sq_err(k) = (st.x - x_user).squaredNorm();
      res.eve_sq_err(k) = (st.x - x_eve).squaredNorm();
      if (k == capture_step) res.user_err_capture = st.x - x_user;
    }

    if (trace != nullptr) {
      nlohmann::json line{{"trial", trial_index},
                          {"k", k},
                          {"gamma", g ? 1 : 0},
                          {"gamma_e", ge ? 1 : 0},
                          {"sent", sent ? 1 : 0},
                          {"grant", grant ? 1 : 0},
                          {"user_sq_err", res.user_sq_err(k)},
                          {"eve_sq_err", res.eve_sq_err(k)}};
      (*trace) << line.dump() << '\n';
    }
  }

  return res;
}

MseSummary summarize(const ScenarioConfig& cfg, const std::vector<TrialResult>& trials,
                     std::uint64_t digest) {
  const int T = cfg.horizon;
  const int n = static_cast<int>(trials.size());
  MseSummary s;
  s.horizon = T;
  s.trials = n;
  s.digest = digest;
  s.label = mechanism_name(cfg.mechanism.kind);
  s.user_mse = Eigen::VectorXd::Zero(T);
  s.eve_mse = Eigen::VectorXd::Zero(T);
  s.kf_gap = Eigen::VectorXd::Zero(T);
  s.user_cov_trace = Eigen::VectorXd::Zero(T);

  for (const TrialResult& tr : trials) {
    s.user_mse += tr.user_sq_err;
    s.eve_mse += tr.eve_sq_err;
    if (tr.kf_gap.size() == T) s.kf_gap += tr.kf_gap;
    if (tr.user_cov_trace.size() == T) s.user_cov_trace += tr.user_cov_trace;
  }
  if (n > 0) {
    s.user_mse /= n;
    s.eve_mse /= n;
    s.kf_gap /= n;
    s.user_cov_trace /= n;
  }

  const int span = kEventOffsetMax - kEventOffsetMin + 1;
  s.event_user = Eigen::VectorXd::Zero(span);
  s.event_eve = Eigen::VectorXd::Zero(span);
  s.event_count.assign(static_cast<std::size_t>(span), 0);
  for (const TrialResult& tr : trials) {
    if (tr.critical_event_time < 0) continue;
    for (int j = kEventOffsetMin; j <= kEventOffsetMax; ++j) {
      const int idx = tr.critical_event_time + j;
      if (idx < 0 || idx >= T) continue;
      const int slot = j - kEventOffsetMin;
      s.event_user(slot) += tr.user_sq_err(idx);
      s.event_eve(slot) += tr.eve_sq_err(idx);
      ++s.event_count[static_cast<std::size_t>(slot)];
    }
  }
  for (int slot = 0; slot < span; ++slot) {
    const int c = s.event_count[static_cast<std::size_t>(slot)];
    if (c > 0) {
      s.event_user(slot) /= c;
      s.event_eve(slot) /= c;
    } else {
      s.event_user(slot) = kNan;
      s.event_eve(slot) = kNan;
    }
  }
  return s;
}

ExperimentResult run_monte_carlo(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  const bool want_kf =
      cfg.wants("kf_gap") &&
      (cfg.mechanism.kind == MechanismKind::Ppm || cfg.mechanism.kind == MechanismKind::None);

  std::vector<TrialResult> trials(static_cast<std::size_t>(cfg.trials));
  const int workers = thread_count(cfg.trials);
  if (workers <= 1) {
    for (int i = 0; i < cfg.trials; ++i)
      trials[static_cast<std::size_t>(i)] = run_trial(cfg, i, want_kf);
  } else {
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= cfg.trials) return;
        try {
          trials[static_cast<std::size_t>(i)] = run_trial(cfg, i, want_kf);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(cfg.trials);
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  ExperimentResult result;
  result.summary = summarize(cfg, trials, 0);
  result.trials = std::move(trials);
  return result;
}

std::vector<ExperimentResult> compare_mechanisms(const std::vector<LoadedScenario>& scenarios) {
  if (scenarios.empty()) throw ConfigError("compare: no scenarios given");
  const char* shared_keys[] = {"system", "channel_user", "channel_eve",
                               "horizon", "trials",       "seed"};
  const nlohmann::json& base = scenarios.front().doc;
  for (std::size_t i = 1; i < scenarios.size(); ++i) {
    const nlohmann::json& doc = scenarios[i].doc;
    for (const char* key : shared_keys) {
      const std::string a = base.contains(key) ? canonical_dump(base.at(key)) : "";
      const std::string b = doc.contains(key) ? canonical_dump(doc.at(key)) : "";
      if (a != b)
        throw ConfigMismatch(std::string("compare: scenarios disagree on '") + key + "' (" +
                             scenarios.front().path + " vs " + scenarios[i].path + ")");
    }
  }

  std::vector<ExperimentResult> results;
  results.reserve(scenarios.size());
  std::vector<std::string> used_labels;
  for (const LoadedScenario& ls : scenarios) {
    ExperimentResult r = run_monte_carlo(ls.config);
    r.summary.digest = config_digest(ls.doc);
    std::string label = mechanism_name(ls.config.mechanism.kind);
    int dup = 1;
    std::string candidate = label;
    while (std::find(used_labels.begin(), used_labels.end(), candidate) != used_labels.end())
      candidate = label + "_" + std::to_string(++dup);
    used_labels.push_back(candidate);
    r.summary.label = candidate;
    results.push_back(std::move(r));
  }
  return results;
}

EventGrowth event_growth(const std::vector<TrialResult>& trials, int horizon) {
  EventGrowth g;
  g.ratio = Eigen::VectorXd::Constant(30, kNan);
  g.pre_level = kNan;

  std::vector<const TrialResult*> ok;
  for (const TrialResult& tr : trials)
    if (tr.critical_event_time >= 1 && tr.critical_event_time + 30 < horizon)
      ok.push_back(&tr);
  g.n = static_cast<int>(ok.size());
  if (g.n == 0) return g;

  double pre = 0.0;
  for (const TrialResult* tr : ok) pre += tr->eve_sq_err(tr->critical_event_time - 1);
  pre /= g.n;
  g.pre_level = pre;
  const double denom = std::max(pre, 1e-300);
  for (int j = 1; j <= 30; ++j) {
    double level = 0.0;
    for (const TrialResult* tr : ok) level += tr->eve_sq_err(tr->critical_event_time + j);
    g.ratio(j - 1) = (level / g.n) / denom;
  }
  return g;
}

void write_csv(const MseSummary& s, const std::string& path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(s.horizon) * 96 + 64);
  out += "step,user_mse,eve_mse,eve_mse_log10sat,kf_gap,n_trials\n";
  for (int k = 0; k < s.horizon; ++k) {
    out += std::to_string(k + 1);
    out += ',';
    format_double(out, s.user_mse(k));
    out += ',';
    format_double(out, s.eve_mse(k));
    out += ',';
    const double sat = std::log10(std::min(std::max(s.eve_mse(k), 1e-300), 1e30));
    format_double(out, sat);
    out += ',';
    format_double(out, s.kf_gap(k));
    out += ',';
    out += std::to_string(s.trials);
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << out;
  if (!f) throw ConfigError("failed writing output file: " + path);
}

void write_events_csv(const MseSummary& s, const std::string& path) {
  std::string out = "offset,user_mse_cond,eve_mse_cond,n_events\n";
  for (int j = kEventOffsetMin; j <= kEventOffsetMax; ++j) {
    const int slot = j - kEventOffsetMin;
    out += std::to_string(j);
    out += ',';
    format_double(out, s.event_user(slot));
    out += ',';
    format_double(out, s.event_eve(slot));
    out += ',';
    out += std::to_string(s.event_count[static_cast<std::size_t>(slot)]);
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << out;
  if (!f) throw ConfigError("failed writing output file: " + path);
}

void write_manifest(const LoadedScenario& scenario, const std::vector<std::string>& outputs,
                    const std::string& path) {
  char digest_hex[20];
  std::snprintf(digest_hex, sizeof(digest_hex), "%016llx",
                static_cast<unsigned long long>(config_digest(scenario.doc)));
  nlohmann::json j{{"version", kVersion},
                   {"config_digest", digest_hex},
                   {"seed", scenario.config.seed},
                   {"trials", scenario.config.trials},
                   {"horizon", scenario.config.horizon},
                   {"mechanism", mechanism_name(scenario.config.mechanism.kind)},
                   {"scenario_path", scenario.path},
                   {"outputs", outputs},
                   {"scenario", scenario.doc}};
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file: " + path);
  f << j.dump(2) << '\n';
  if (!f) throw ConfigError("failed writing output file: " + path);
}

}  // namespace ppse
