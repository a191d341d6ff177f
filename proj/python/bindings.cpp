#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "opinion_loom/commands.hpp"
#include "opinion_loom/dynamics.hpp"
#include "opinion_loom/estimation.hpp"
#include "opinion_loom/fixtures.hpp"
#include "opinion_loom/io.hpp"
#include "opinion_loom/prompts.hpp"
#include "opinion_loom/sentiment.hpp"
#include "opinion_loom/simplex_ls.hpp"

namespace py = pybind11;
using namespace opinion_loom;

namespace {

// Python side uses (rounds, agents) arrays.
Eigen::MatrixXd to_array(const OpinionTrajectory& traj) { return traj.matrix().transpose(); }

OpinionTrajectory from_array(const Eigen::MatrixXd& data, std::vector<std::string> ids) {
  return OpinionTrajectory::from_matrix(data.transpose(), std::move(ids));
}

std::optional<SusceptibilityProfile> profile(const std::optional<Eigen::VectorXd>& s) {
  if (!s) return std::nullopt;
  return SusceptibilityProfile(*s);
}

py::dict report_dict(const FitReport& report) {
  py::dict out;
  out["variant"] = std::string(to_string(report.variant));
  out["w_hat"] = report.w_hat.entries();
  out["s_hat"] = report.s_hat ? py::cast(report.s_hat->values()) : py::none();
  out["residual_sum"] = report.residual_sum;
  out["self_trust"] = report.self_trust_index;
  out["avg_susceptibility"] = report.avg_susceptibility ? py::cast(*report.avg_susceptibility) : py::none();
  out["fitted"] = to_array(report.fitted_trajectory);
  out["agent_ids"] = report.fitted_trajectory.agent_ids();
  return out;
}

py::dict artifacts_dict(const commands::RunArtifacts& a) {
  py::dict out;
  out["out_dir"] = a.out_dir.string();
  if (a.config_snapshot) out["config"] = a.config_snapshot->string();
  if (a.transcript) out["transcript"] = a.transcript->string();
  if (a.trajectory) out["trajectory"] = a.trajectory->string();
  py::dict fits;
  for (const auto& [variant, path] : a.fit_reports) fits[py::str(std::string(to_string(variant)))] = path.string();
  py::dict plots;
  for (const auto& [variant, path] : a.plots) plots[py::str(std::string(to_string(variant)))] = path.string();
  out["fit_reports"] = fits;
  out["plots"] = plots;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Opinion dynamics among dialog agents.";

  static py::exception<Error> error_type(m, "OpinionLoomError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object kind = py::str(std::string(to_string(e.kind())));
      PyErr_SetObject(error_type.ptr(), py::make_tuple(py::str(e.what()), kind).ptr());
    }
  });

  m.def(
      "free_run",
      [](const std::string& variant, const Eigen::MatrixXd& w, const Eigen::VectorXd& x1, std::size_t rounds,
         std::optional<Eigen::VectorXd> s) {
        return to_array(dynamics::free_run(parse_variant(variant), validate_influence_matrix(w), profile(s),
                                           OpinionVector(x1), rounds));
      },
      py::arg("variant"), py::arg("w"), py::arg("x1"), py::arg("rounds"), py::arg("s") = py::none(),
      "Iterate the model from x1; returns an array of shape (rounds, agents).");

  m.def(
      "dg_step",
      [](const Eigen::MatrixXd& w, const Eigen::VectorXd& x) {
        return dynamics::dg_step(validate_influence_matrix(w), OpinionVector(x)).values();
      },
      py::arg("w"), py::arg("x"));

  m.def(
      "fj_step",
      [](const Eigen::MatrixXd& w, const Eigen::VectorXd& s, const Eigen::VectorXd& x, const Eigen::VectorXd& x1) {
        return dynamics::fj_step(validate_influence_matrix(w), SusceptibilityProfile(s), OpinionVector(x),
                                 OpinionVector(x1))
            .values();
      },
      py::arg("w"), py::arg("s"), py::arg("x"), py::arg("x1"));

  m.def(
      "consensus_check",
      [](const Eigen::MatrixXd& traj, double tol) {
        const auto report = dynamics::consensus_check(from_array(traj, {}), tol);
        py::dict out;
        out["reached"] = report.reached;
        out["round"] = report.round ? py::cast(*report.round) : py::none();
        out["spread"] = report.spread;
        out["limit_value"] = report.limit_value ? py::cast(*report.limit_value) : py::none();
        return out;
      },
      py::arg("trajectory"), py::arg("tol") = dynamics::kDefaultConsensusTolerance);

  m.def(
      "estimate",
      [](const Eigen::MatrixXd& traj, const std::string& variant, std::vector<std::string> agent_ids,
         std::optional<std::vector<std::vector<bool>>> support) {
        estimation::FitOptions options;
        if (support) options.support = Topology::from_adjacency(*support);
        const auto trajectory = from_array(traj, std::move(agent_ids));
        return report_dict(parse_variant(variant) == ModelVariant::DG ? estimation::estimate_dg(trajectory, options)
                                                                      : estimation::estimate_fj(trajectory, options));
      },
      py::arg("trajectory"), py::arg("variant") = "dg", py::arg("agent_ids") = std::vector<std::string>{},
      py::arg("support") = py::none(), "Fit DG or FJ to an array of shape (rounds, agents).");

  m.def(
      "residual_sum",
      [](const std::string& variant, const Eigen::MatrixXd& w, const Eigen::MatrixXd& traj,
         std::optional<Eigen::VectorXd> s) {
        return estimation::residual_sum(parse_variant(variant), validate_influence_matrix(w), profile(s),
                                        from_array(traj, {}));
      },
      py::arg("variant"), py::arg("w"), py::arg("trajectory"), py::arg("s") = py::none());

  m.def(
      "simplex_ls_row",
      [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
        const auto result = estimation::simplex_ls_row(a, b);
        return py::make_tuple(result.weights, result.objective);
      },
      py::arg("a"), py::arg("b"), "argmin ||a w - b||^2 over the probability simplex; returns (w, objective).");

  m.def("project_to_simplex", &estimation::project_to_simplex, py::arg("v"));

  m.def(
      "small_world",
      [](std::size_t n, std::size_t k, double p, std::uint64_t seed) {
        return topology_small_world(n, k, p, seed).adjacency();
      },
      py::arg("n"), py::arg("k"), py::arg("p"), py::arg("seed"));

  m.def(
      "lexicon_score",
      [](const std::string& text) {
        const auto s = sentiment::LexiconScorer().score(text);
        return py::make_tuple(s.p_negative, s.p_neutral, s.p_positive, s.scalar);
      },
      py::arg("text"), "Returns (p_negative, p_neutral, p_positive, scalar).");

  m.def(
      "compose",
      [](double target, std::uint64_t seed) { return sentiment::LexiconScorer().compose(target, seed); },
      py::arg("target"), py::arg("seed") = 0);

  m.def("system_prompt", [](const std::string& topic) { return dialog::build_system_prompt(topic); },
        py::arg("topic") = std::string(dialog::kDefaultTopic));
  m.def(
      "starter_prompt",
      [](const std::string& topic, const std::string& stance) {
        return dialog::build_starter_prompt(topic, parse_stance(stance));
      },
      py::arg("topic"), py::arg("stance"));
  m.def(
      "turn_prompt",
      [](const std::string& topic, const std::vector<std::pair<std::string, std::string>>& others) {
        std::vector<dialog::PeerMessage> peers;
        for (const auto& [id, text] : others) peers.push_back({id, text, std::nullopt});
        return dialog::build_turn_prompt(topic, std::move(peers));
      },
      py::arg("topic"), py::arg("others"));

  py::module_ fx = m.def_submodule("fixtures", "Published five-agent run.");
  fx.def("agent_ids", &fixtures::published_agent_ids);
  fx.def("dg_observed", [] { return to_array(fixtures::published_dg_observed()); });
  fx.def("dg_fitted", [] { return to_array(fixtures::published_dg_fitted()); });
  fx.def("fj_observed", [] { return to_array(fixtures::published_fj_observed()); });
  fx.def("fj_fitted", [] { return to_array(fixtures::published_fj_fitted()); });
  fx.def("dg_w", [] { return fixtures::published_dg_matrix().entries(); });
  fx.def("fj_w", [] { return fixtures::published_fj_matrix().entries(); });
  fx.def("fj_s", [] { return fixtures::published_fj_susceptibility().values(); });
  fx.attr("DG_CONSENSUS") = fixtures::kPublishedDgConsensus;

  m.def(
      "load_trajectory",
      [](const std::filesystem::path& path) {
        const auto table = io::load_trajectory(path);
        return py::make_tuple(to_array(table.trajectory), table.trajectory.agent_ids());
      },
      py::arg("path"), "Returns (array of shape (rounds, agents), agent_ids).");

  m.def(
      "save_trajectory",
      [](const std::filesystem::path& path, const Eigen::MatrixXd& traj, std::vector<std::string> agent_ids) {
        io::save_trajectory(path, from_array(traj, std::move(agent_ids)));
      },
      py::arg("path"), py::arg("trajectory"), py::arg("agent_ids") = std::vector<std::string>{});

  m.def(
      "simulate",
      [](const std::filesystem::path& config, const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed) {
        commands::SimulateOptions options;
        options.seed = seed;
        options.api_key = dialog::api_key_from_env();
        commands::RunArtifacts artifacts;
        {
          py::gil_scoped_release release;
          artifacts = commands::cmd_simulate(config, out_dir, options);
        }
        return artifacts_dict(artifacts);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none());

  m.def(
      "report",
      [](const std::filesystem::path& config, const std::filesystem::path& out_dir, const std::string& backend,
         std::optional<std::uint64_t> seed) {
        commands::ReportOptions options;
        options.simulate.seed = seed;
        options.simulate.api_key = dialog::api_key_from_env();
        options.backend = commands::parse_score_backend(backend);
        commands::RunArtifacts artifacts;
        {
          py::gil_scoped_release release;
          artifacts = commands::cmd_report(config, out_dir, options);
        }
        return artifacts_dict(artifacts);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("backend") = "lexicon", py::arg("seed") = py::none(),
      "simulate, score and fit both variants into out_dir.");
}
