// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "opinion_loom/commands.hpp"
#include "opinion_loom/dynamics.hpp"
#include "opinion_loom/estimation.hpp"
#include "opinion_loom/fixtures.hpp"
#include "opinion_loom/io.hpp"
#include "opinion_loom/prompts.hpp"
#include "opinion_loom/simplex_ls.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/prompt_literals.hpp"
#include "support/temp_dir.hpp"

using namespace opinion_loom;
namespace fs = std::filesystem;

// Every outgoing connection in this process lands here and is refused.
namespace {
std::atomic<int> g_connect_calls{0};
}

extern "C" int connect(int, const struct sockaddr*, socklen_t) {
  ++g_connect_calls;
  errno = ECONNREFUSED;
  return -1;
}

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << " [" << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

bool run(int id, const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail << " exception: " << e.what();
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  if (elapsed > budget_s) {
    out.ok = false;
    out.detail << " [over budget " << budget_s << " s]";
  }
  std::printf("%s  %d  %-34s %10.6f s %s\n", out.ok ? "PASS" : "FAIL", id, name.c_str(), elapsed,
              out.detail.str().c_str());
  std::fflush(stdout);
  return out.ok;
}

double max_abs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

oracle::Mat rounds_of(const OpinionTrajectory& traj) {
  oracle::Mat out;
  for (std::size_t t = 0; t < traj.rounds(); ++t) out.push_back(oracle::to_vec(traj.at(t).values()));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

void dg_reproduction(Outcome& out) {
  const auto fitted = fixtures::published_dg_fitted();
  const auto run = dynamics::free_run(ModelVariant::DG, fixtures::published_dg_matrix(), std::nullopt, fitted.at(0), 20);
  const double dev = max_abs(run.matrix(), fitted.matrix());
  double limit_dev = 0.0;
  for (std::size_t t = 10; t < 20; ++t) {
    limit_dev = std::max(limit_dev, (run.at(t).values().array() - fixtures::kPublishedDgConsensus).abs().maxCoeff());
  }
  out.detail << "max dev " << dev << ", consensus dev from round 11 " << limit_dev;
  out.require(dev <= 1e-3, "per-entry 1e-3");
  out.require(limit_dev <= 1e-4, "consensus 1e-4");
}

void fj_reproduction(Outcome& out) {
  const auto fitted = fixtures::published_fj_fitted();
  const auto run = dynamics::free_run(ModelVariant::FJ, fixtures::published_fj_matrix(),
                                      fixtures::published_fj_susceptibility(), fitted.at(0), 20);
  const double dev = max_abs(run.matrix(), fitted.matrix());
  const double anchors[] = {0.108336, 0.118638, 0.109696, 0.104669, 0.120201};
  double anchor_dev = 0.0;
  for (std::size_t i = 0; i < 5; ++i) anchor_dev = std::max(anchor_dev, std::abs(run.at(19)[i] - anchors[i]));
  out.detail << "max dev " << dev << ", round-20 dev " << anchor_dev;
  out.require(dev <= 1e-3, "per-entry 1e-3");
  out.require(anchor_dev <= 1e-4, "round-20 1e-4");
}

void dg_estimator(Outcome& out) {
  const auto observed = fixtures::published_dg_observed();
  const auto fit = estimation::estimate_dg(observed);
  const double dev = max_abs(fit.w_hat.entries(), fixtures::published_dg_matrix().entries());
  const double published =
      oracle::residual_dg(oracle::to_mat(fixtures::published_dg_matrix().entries()), rounds_of(observed));
  out.detail << "W dev " << dev << ", residual " << fit.residual_sum << " vs " << published;
  out.require(dev <= 0.02, "W within 0.02");
  out.require(fit.residual_sum <= published + 1e-6, "residual parity");
}

void fj_estimator(Outcome& out) {
  const auto observed = fixtures::published_fj_observed();
  const auto fit = estimation::estimate_fj(observed);
  const double published = oracle::residual_fj(oracle::to_mat(fixtures::published_fj_matrix().entries()),
                                               oracle::to_vec(fixtures::published_fj_susceptibility().values()),
                                               rounds_of(observed));
  out.detail << "residual " << fit.residual_sum << " vs " << published;
  out.require(fit.residual_sum <= published + 1e-6, "residual parity");
}

void synthetic_recovery(Outcome& out) {
  gen::Rng rng(5150);
  std::vector<double> errors;
  double clean_worst = 0.0;
  int instances = 0;
  int rejected = 0;
  while (instances < 50) {
    config::SynthParams p;
    p.w = gen::permutation_mix(5, rng, 0.7);
    p.x1 = gen::opinions(5, rng);
    p.rounds = 20;
    const auto clean = commands::synthesize(p);
    if (!gen::full_rank(clean.matrix())) {
      ++rejected;
      continue;
    }
    ++instances;
    clean_worst = std::max(clean_worst, max_abs(estimation::estimate_dg(clean).w_hat.entries(), p.w));
    p.sigma = 0.01;
    p.seed = static_cast<std::uint64_t>(instances);
    const Eigen::MatrixXd err = (estimation::estimate_dg(commands::synthesize(p)).w_hat.entries() - p.w).cwiseAbs();
    errors.insert(errors.end(), err.data(), err.data() + err.size());
  }
  const double med = median(errors);
  out.detail << "sigma 0 worst " << clean_worst << ", sigma 0.01 pooled median " << med << " (" << rejected
             << " rank-deficient draws skipped)";
  out.require(clean_worst <= 1e-6, "noise-free 1e-6");
  out.require(med < 0.05, "noisy median 0.05");
}

void simplex_vs_grid(Outcome& out) {
  gen::Rng rng(77);
  double worst = -1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.index(3);
    const std::size_t rows = 1 + rng.index(6);
    Eigen::MatrixXd a(rows, m);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.uniform();
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.5, 1.5);
    const auto r = estimation::simplex_ls_row(a, b);
    const auto grid = oracle::simplex_grid_min(oracle::to_mat(a), oracle::to_vec(b), 0.01);
    worst = std::max(worst, r.objective - grid.objective);
  }
  out.detail << "max (solver - grid) objective " << worst;
  out.require(worst <= 1e-6, "solver within 1e-6 of grid");
}

std::vector<std::string> texts(const Transcript& t) {
  std::vector<std::string> out;
  for (const auto& round : t.rounds)
    for (const auto& m : round) out.push_back(m.agent_id + ":" + std::to_string(m.round) + ":" + m.text);
  return out;
}

std::vector<std::string> prompts(const Transcript& t) {
  std::vector<std::string> out;
  for (const auto& p : t.provenance) {
    std::string s = p.agent_id + ":" + std::to_string(p.round) + ":" + p.system;
    for (const auto& turn : p.history) s += "|" + std::to_string(static_cast<int>(turn.role)) + ":" + turn.text;
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void invariants(Outcome& out) {
  gen::Rng rng(31337);
  bool stochastic = true, contraction = true, monotone = true, s_one = true, s_zero = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(5);
    const auto topo = gen::topology(n, rng.uniform(0.3, 1.0), rng);
    const auto w = validate_influence_matrix(gen::stochastic_on(topo, rng), topo);
    const SusceptibilityProfile s(gen::susceptibilities(n, rng));
    const OpinionVector x1(gen::opinions(n, rng));
    const auto dg = dynamics::free_run(ModelVariant::DG, w, std::nullopt, x1, 15);
    for (std::size_t t = 1; t < dg.rounds(); ++t) {
      contraction &= dg.at(t).values().maxCoeff() <= dg.at(t - 1).values().maxCoeff() + 1e-15 &&
                     dg.at(t).values().minCoeff() >= dg.at(t - 1).values().minCoeff() - 1e-15;
    }
    const auto ones = dynamics::free_run(ModelVariant::FJ, w, SusceptibilityProfile::constant(n, 1.0), x1, 15);
    const auto zeros = dynamics::free_run(ModelVariant::FJ, w, SusceptibilityProfile::constant(n, 0.0), x1, 15);
    s_one &= max_abs(ones.matrix(), dg.matrix()) <= 1e-15;
    for (std::size_t t = 0; t < 15; ++t) s_zero &= zeros.at(t) == x1;

    Eigen::MatrixXd data = dynamics::free_run(ModelVariant::FJ, w, s, x1, 12).matrix();
    for (Eigen::Index i = 0; i < data.size(); ++i) data(i) = std::clamp(data(i) + rng.normal(0.02), 0.0, 1.0);
    const auto noisy = OpinionTrajectory::from_matrix(data);
    estimation::FitOptions options;
    options.support = topo;
    const auto dg_fit = estimation::estimate_dg(noisy, options);
    estimation::FjFitTrace trace;
    const auto fj_fit = estimation::estimate_fj(noisy, options, &trace);
    for (const auto* fit : {&dg_fit, &fj_fit}) {
      const auto& e = fit->w_hat.entries();
      stochastic &= e.minCoeff() >= 0.0 && (e.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (!topo.has_edge(i, j)) stochastic &= e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0.0;
    }
    for (std::size_t k = 1; k < trace.objective_history.size(); ++k)
      monotone &= trace.objective_history[k] <= trace.objective_history[k - 1] + 1e-12;
  }
  out.require(stochastic, "row-stochastic estimates on support");
  out.require(contraction, "DG hull contraction");
  out.require(monotone, "FJ objective monotone");
  out.require(s_one, "FJ with S=I equals DG");
  out.require(s_zero, "FJ with S=0 stays at x1");

  using namespace prompt_literals;
  out.require(dialog::build_system_prompt(dialog::kDefaultTopic) == kSystemNoah, "system prompt literal");
  out.require(dialog::build_starter_prompt(dialog::kDefaultTopic, Stance::strongly_positive) ==
                  kStarterStronglyPositive,
              "starter prompt literal");
  out.require(dialog::build_turn_prompt(dialog::kDefaultTopic, {{"bob", "Noah is rude.", std::nullopt},
                                                                 {"ann", "Noah is kind.", std::nullopt}}) ==
                  kTurnTwoPeers,
              "turn prompt literal");

  auto config = config::load_run_config(testing_support::source_dir() / "configs/ground_truth_dg.toml");
  config.rounds = 6;
  for (auto variant : {ModelVariant::DG, ModelVariant::FJ}) {
    config.variant = variant;
    config.options.parallel = false;
    const auto reference = dialog::run_discussion(config, commands::make_backends(config, ""));
    bool same = true;
    for (int trial = 0; trial < 5; ++trial) {
      const auto order = gen::permutation(config.n_agents(), rng);
      const auto other = dialog::run_discussion(config, commands::make_backends(config, ""), order);
      same &= texts(other) == texts(reference) && prompts(other) == prompts(reference);
    }
    auto parallel = config;
    parallel.options.parallel = true;
    const auto concurrent = dialog::run_discussion(parallel, commands::make_backends(parallel, ""));
    same &= texts(concurrent) == texts(reference) && prompts(concurrent) == prompts(reference);
    out.require(same, std::string("generation-order invariance ") + std::string(to_string(variant)));
  }

  // The offline pipeline must not open a single connection.
  testing_support::TempDir dir;
  const int before = g_connect_calls.load();
  commands::cmd_report(testing_support::source_dir() / "configs/scripted_pair.toml", dir / "scripted");
  commands::cmd_report(testing_support::source_dir() / "configs/ground_truth_dg.toml", dir / "truth");
  commands::cmd_synth(testing_support::source_dir() / "fixtures/published/synth_dg.toml", dir / "synth");
  const int offline = g_connect_calls.load() - before;
  out.require(offline == 0, "no network in the offline pipeline");

  // The hook itself is live: an HTTP backend does reach connect().
  dialog::LlmSettings settings;
  settings.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  dialog::RetryPolicy retry;
  retry.max_attempts = 1;
  dialog::OpenAiChatBackend probe(settings, "", retry);
  try {
    probe.generate({"a", 1, "s", {}});
  } catch (const Error&) {
  }
  out.require(g_connect_calls.load() - before > 0, "connect hook active");
  out.detail << "100 random instances, 3 prompt literals, 2 variants x 6 orders, " << offline << " connections";
}

void end_to_end(Outcome& out) {
  testing_support::TempDir dir;
  const fs::path config_path = testing_support::source_dir() / "configs/ground_truth_dg.toml";
  commands::ReportOptions options;
  options.variants = {ModelVariant::DG};
  const auto artifacts = commands::cmd_report(config_path, dir.path(), options);
  const auto fit = io::fit_report_from_json(io::read_text_file(artifacts.fit_reports.at(ModelVariant::DG)));
  const auto latent = config::load_run_config(config_path).latent->w;
  const double dev = max_abs(fit.w_hat.entries(), latent);
  out.detail << "W dev " << dev;
  out.require(dev <= 0.1, "W within 0.1");
}

}  // namespace

int main() {
  ::setenv("OPINION_LOOM_SIDECAR_URL", "http://127.0.0.1:9", 1);
  ::unsetenv("OPINION_LOOM_API_KEY");
  bool all = true;
  all &= run(1, "DG free-run reproduction", 1e-3, dg_reproduction);
  all &= run(2, "FJ free-run reproduction", 1e-3, fj_reproduction);
  all &= run(3, "DG estimator on published data", 1.0, dg_estimator);
  all &= run(4, "FJ estimator residual parity", 5.0, fj_estimator);
  all &= run(5, "synthetic recovery (50 instances)", 30.0, synthetic_recovery);
  all &= run(6, "simplex LS vs brute-force grid", 60.0, simplex_vs_grid);
  all &= run(7, "invariant suite", 60.0, invariants);
  all &= run(8, "end-to-end ground truth", 10.0, end_to_end);
  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
