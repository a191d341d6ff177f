#include <doctest.h>

#include "opinion_loom/core.hpp"
#include "opinion_loom/fixtures.hpp"
#include "support/checks.hpp"
#include "support/generators.hpp"

using namespace opinion_loom;
using EK = ErrorKind;

TEST_CASE("identity matrix is accepted on the full topology") {
  const auto w = validate_influence_matrix(Eigen::MatrixXd::Identity(4, 4), Topology::fully_connected(4));
  CHECK(w.entries() == Eigen::MatrixXd::Identity(4, 4));
  CHECK(w.trace() == 4.0);
}

TEST_CASE("row summing to 1.1 is a row sum violation") {
  Eigen::MatrixXd w(2, 2);
  w << 0.5, 0.6, 0.5, 0.5;
  CHECK_KIND(validate_influence_matrix(w), EK::RowSumViolation);
}

TEST_CASE("row sum tolerance is 1e-9") {
  Eigen::MatrixXd w(2, 2);
  w << 0.5, 0.5 + 0.9e-9, 0.5, 0.5;
  CHECK_NOTHROW(validate_influence_matrix(w));
  w(0, 1) = 0.5 + 1.1e-9;
  CHECK_KIND(validate_influence_matrix(w), EK::RowSumViolation);
}

TEST_CASE("negative and non-finite entries are rejected") {
  Eigen::MatrixXd w(2, 2);
  w << 1.2, -0.2, 0.5, 0.5;
  CHECK_KIND(validate_influence_matrix(w), EK::NegativeEntry);
  w << std::nan(""), 1.0, 0.5, 0.5;
  CHECK_KIND(validate_influence_matrix(w), EK::NonFiniteInput);
}

TEST_CASE("weight on a non-edge is a support violation") {
  const auto topo = Topology::from_adjacency({{true, false}, {true, true}});
  Eigen::MatrixXd w(2, 2);
  w << 0.5, 0.5, 0.5, 0.5;
  CHECK_KIND(validate_influence_matrix(w, topo), EK::SupportViolation);
  w << 1.0, 0.0, 0.5, 0.5;
  CHECK_NOTHROW(validate_influence_matrix(w, topo));
}

TEST_CASE("shape mismatches") {
  CHECK_KIND(validate_influence_matrix(Eigen::MatrixXd::Ones(2, 3) / 3.0), EK::DimensionMismatch);
  CHECK_KIND(validate_influence_matrix(Eigen::MatrixXd::Identity(3, 3), Topology::fully_connected(2)),
             EK::DimensionMismatch);
}

TEST_CASE("published DG row for the first agent validates") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(5, 5);
  w.row(0) << 0.0, 0.0, 0.7558, 0.2442, 0.0;
  const auto v = validate_influence_matrix(w);
  CHECK(v(0, 2) == 0.7558);
  CHECK_NOTHROW(fixtures::published_dg_matrix());
  CHECK_NOTHROW(fixtures::published_fj_matrix());
}

TEST_CASE("renormalized published matrices stay within 5e-5 of the printed values") {
  const Eigen::MatrixXd dg = fixtures::published_dg_matrix().entries() - fixtures::published_dg_weights_printed();
  const Eigen::MatrixXd fj = fixtures::published_fj_matrix().entries() - fixtures::published_fj_weights_printed();
  CHECK(dg.cwiseAbs().maxCoeff() <= 5e-5);
  CHECK(fj.cwiseAbs().maxCoeff() <= 5e-5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(std::abs(fixtures::published_dg_matrix().entries().row(i).sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("validation is involutive and does not touch its input") {
  gen::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd raw = gen::stochastic_matrix(2 + rng.index(6), rng);
    const Eigen::MatrixXd copy = raw;
    const auto once = validate_influence_matrix(raw);
    const auto twice = validate_influence_matrix(once.entries());
    CHECK(raw == copy);
    CHECK(once == twice);
    CHECK(once.entries().minCoeff() >= 0.0);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) CHECK(std::abs(once.entries().row(i).sum() - 1.0) <= 1e-9);
  }
}

TEST_CASE("small world p = 0 is the ring lattice") {
  const auto t = topology_small_world(6, 2, 0.0, 123);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(t.row_degree(i) == 3);
    CHECK(t.has_edge(i, i));
    CHECK(t.has_edge(i, (i + 1) % 6));
    CHECK(t.has_edge(i, (i + 5) % 6));
  }
}

TEST_CASE("small world k = n - 1 saturates") {
  CHECK(topology_small_world(5, 4, 0.0, 1).is_fully_connected());
  CHECK(topology_small_world(5, 4, 1.0, 9).is_fully_connected());
}

TEST_CASE("small world full rewiring keeps row degree") {
  const auto t = topology_small_world(6, 2, 1.0, 42);
  for (std::size_t i = 0; i < 6; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < 6; ++j) count += t.has_edge(i, j) ? 1 : 0;
    CHECK(count == 3);
    CHECK(t.has_edge(i, i));
  }
}

TEST_CASE("small world is pure in its arguments") {
  gen::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng.index(10);
    const std::size_t k = 2 * (1 + rng.index((n - 1) / 2));
    if (k >= n) continue;
    const double p = rng.uniform();
    const auto seed = static_cast<std::uint64_t>(rng.index(1000));
    const auto a = topology_small_world(n, k, p, seed);
    CHECK(a == topology_small_world(n, k, p, seed));
    for (std::size_t i = 0; i < n; ++i) CHECK(a.row_degree(i) == k + 1);
  }
}

TEST_CASE("small world rejects bad degrees and probabilities") {
  CHECK_KIND(topology_small_world(6, 3, 0.1, 1), EK::InvalidDegree);
  CHECK_KIND(topology_small_world(6, 6, 0.1, 1), EK::InvalidDegree);
  CHECK_KIND(topology_small_world(6, 0, 0.1, 1), EK::InvalidDegree);
  CHECK_KIND(topology_small_world(6, 2, 1.5, 1), EK::InvalidArgument);
}

TEST_CASE("topology forces self loops") {
  const auto t = Topology::from_adjacency({{false, true}, {false, false}});
  CHECK(t.has_edge(0, 0));
  CHECK(t.has_edge(1, 1));
  CHECK(t.visible_peers(0) == std::vector<std::size_t>{1});
  CHECK(t.visible_peers(1).empty());
}

TEST_CASE("opinion vectors live in [0,1]") {
  CHECK_NOTHROW(OpinionVector{0.0, 1.0});
  CHECK_KIND(OpinionVector({0.5, 1.01}), EK::OpinionOutOfRange);
  CHECK_KIND(OpinionVector({-0.2, 0.5}), EK::OpinionOutOfRange);
  CHECK_KIND(OpinionVector({std::nan(""), 0.5}), EK::NonFiniteInput);
}

TEST_CASE("trajectory shape checks") {
  CHECK_KIND(OpinionTrajectory({OpinionVector{0.1, 0.2}, OpinionVector{0.1, 0.2, 0.3}}), EK::DimensionMismatch);
  CHECK_KIND(OpinionTrajectory(std::vector<OpinionVector>{}), EK::TooFewRounds);
  CHECK_KIND(OpinionTrajectory({OpinionVector{0.1, 0.2}}, {"a", "a"}), EK::InvalidArgument);
  const OpinionTrajectory t({OpinionVector{0.1, 0.2}, OpinionVector{0.3, 0.4}});
  CHECK(t.agent_ids() == std::vector<std::string>{"a1", "a2"});
  CHECK(t.matrix()(1, 0) == 0.2);
  CHECK(t.prefix(1).rounds() == 1);
}

TEST_CASE("susceptibility range") {
  CHECK_NOTHROW(SusceptibilityProfile{0.0, 1.0});
  CHECK_KIND(SusceptibilityProfile({0.5, 1.5}), EK::SusceptibilityOutOfRange);
  CHECK_KIND(SusceptibilityProfile({-0.1, 0.5}), EK::SusceptibilityOutOfRange);
}

TEST_CASE("word counts and the soft limit") {
  CHECK(count_words("") == 0);
  CHECK(count_words("  one\ttwo\nthree  ") == 3);
  std::string long_text;
  for (int i = 0; i < 101; ++i) long_text += "word ";
  const auto m = Message::make("a", 2, long_text);
  CHECK(m.word_count == 101);
  CHECK_FALSE(m.within_word_limit());
  CHECK(m.text == long_text);
  CHECK(Message::make("a", 1, "short text").within_word_limit());
  CHECK_KIND(Message::make("a", 0, "x"), EK::InvalidArgument);
}

TEST_CASE("stance and variant parsing") {
  CHECK(parse_stance("strongly_positive") == Stance::strongly_positive);
  CHECK(parse_stance("strongly negative") == Stance::strongly_negative);
  CHECK(stance_phrase(Stance::strongly_positive) == "strongly positive");
  CHECK(parse_variant("FJ") == ModelVariant::FJ);
  CHECK(parse_variant("dg") == ModelVariant::DG);
  CHECK_KIND(parse_stance("lukewarm"), EK::InvalidArgument);
  CHECK_KIND(parse_variant("hk"), EK::InvalidArgument);
}

TEST_CASE("transcript completeness") {
  Transcript t;
  t.agent_specs = {{"a", BackendKind::scripted, Stance::neutral, {}}, {"b", BackendKind::scripted, Stance::neutral, {}}};
  t.rounds = {{Message::make("a", 1, "x"), Message::make("b", 1, "y")}};
  CHECK_NOTHROW(t.check_complete());
  CHECK(t.message_count() == 2);
  t.rounds.push_back({Message::make("a", 2, "x")});
  CHECK_KIND(t.check_complete(), EK::InvalidArgument);
  t.rounds.back().push_back(Message::make("b", 2, "y"));
  t.complete = false;
  CHECK_KIND(t.check_complete(), EK::InvalidArgument);
}
