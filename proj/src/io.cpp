#include "opinion_loom/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace opinion_loom::io {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& message) { throw Error(ErrorKind::ParseError, message); }

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = eol + 1;
  }
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

int parse_round(std::string_view text, std::size_t line_no) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
    parse_error("line " + std::to_string(line_no) + ": bad round '" + std::string(text) + "'");
  }
  return value;
}

void check_agent_id(std::string_view id, std::size_t line_no) {
  if (id.empty() || id.find_first_of(",\"\n") != std::string_view::npos) {
    parse_error("line " + std::to_string(line_no) + ": bad agent id '" + std::string(id) + "'");
  }
}

/// Rows keyed by (round, agent) into a dense round-major table.
template <typename Row>
struct Grid {
  std::vector<std::string> agents;
  std::map<std::string, std::size_t> agent_index;
  std::map<int, std::map<std::size_t, Row>> rows;

  void add(int round, std::string_view agent, Row row, std::size_t line_no) {
    auto [it, inserted] = agent_index.emplace(std::string(agent), agents.size());
    if (inserted) agents.emplace_back(agent);
    if (!rows[round].emplace(it->second, std::move(row)).second) {
      parse_error("line " + std::to_string(line_no) + ": duplicate row for round " + std::to_string(round) +
                  ", agent " + std::string(agent));
    }
  }

  /// rows()[r][i], checking rounds 1..T are contiguous and complete.
  std::vector<std::vector<Row>> dense() const {
    if (rows.empty()) parse_error("no data rows");
    std::vector<std::vector<Row>> out;
    int expected = 1;
    for (const auto& [round, by_agent] : rows) {
      if (round != expected) parse_error("round " + std::to_string(expected) + " is missing");
      if (by_agent.size() != agents.size()) parse_error("round " + std::to_string(round) + " is missing agents");
      std::vector<Row> line;
      for (const auto& [index, row] : by_agent) line.push_back(row);
      out.push_back(std::move(line));
      ++expected;
    }
    return out;
  }
};

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) parse_error("empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) parse_error("ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "cannot format number");
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    parse_error("bad number '" + std::string(text) + "'");
  }
  return value;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------

std::string transcript_to_jsonl(const Transcript& transcript) {
  std::string out;
  for (const auto& round : transcript.rounds) {
    for (const auto& m : round) {
      const nlohmann::ordered_json record{{"round", m.round},
                        {"agent_id", m.agent_id},
                        {"text", m.text},
                        {"prompt_sha256", m.prompt_sha256},
                        {"ts", m.timestamp}};
      out += record.dump();
      out += '\n';
    }
  }
  return out;
}

std::vector<std::vector<Message>> transcript_from_jsonl(std::string_view content) {
  std::map<int, std::vector<Message>> by_round;
  std::size_t line_no = 0;
  for (const auto line : split_lines(content)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      const json record = json::parse(line);
      if (!record.is_object() || record.size() != 5) parse_error("expected exactly five fields");
      const int round = record.at("round").get<int>();
      if (round < 1) parse_error("round must be >= 1");
      by_round[round].push_back(Message::make(record.at("agent_id").get<std::string>(), round,
                                              record.at("text").get<std::string>(),
                                              record.at("prompt_sha256").get<std::string>(),
                                              record.at("ts").get<std::string>()));
    } catch (const json::exception& e) {
      parse_error("transcript line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ParseError) throw;
      parse_error("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<std::vector<Message>> rounds;
  int expected = 1;
  for (auto& [round, messages] : by_round) {
    if (round != expected) parse_error("transcript is missing round " + std::to_string(expected));
    rounds.push_back(std::move(messages));
    ++expected;
  }
  return rounds;
}

std::string transcript_meta_json(const Transcript& transcript) {
  nlohmann::ordered_json agents = json::array();
  for (const auto& spec : transcript.agent_specs) {
    agents.push_back({{"id", spec.agent_id},
                      {"backend", std::string(to_string(spec.backend))},
                      {"stance", std::string(stance_id(spec.stance))},
                      {"params", spec.backend_params}});
  }
  json adjacency = json::array();
  for (const auto& row : transcript.topology.adjacency()) {
    json r = json::array();
    for (bool edge : row) r.push_back(edge ? 1 : 0);
    adjacency.push_back(std::move(r));
  }
  const nlohmann::ordered_json meta{{"topic", transcript.topic},
                  {"variant", std::string(to_string(transcript.variant))},
                  {"agents", agents},
                  {"topology", adjacency},
                  {"rounds", transcript.rounds.size()},
                  {"incomplete", !transcript.complete}};
  return meta.dump(2) + "\n";
}

Transcript transcript_from_meta_json(std::string_view content) {
  Transcript transcript;
  try {
    const json meta = json::parse(content);
    transcript.topic = meta.at("topic").get<std::string>();
    transcript.variant = parse_variant(meta.at("variant").get<std::string>());
    for (const auto& a : meta.at("agents")) {
      AgentSpec spec;
      spec.agent_id = a.at("id").get<std::string>();
      spec.backend = parse_backend_kind(a.at("backend").get<std::string>());
      spec.stance = parse_stance(a.at("stance").get<std::string>());
      spec.backend_params = a.at("params").get<std::map<std::string, std::string>>();
      transcript.agent_specs.push_back(std::move(spec));
    }
    std::vector<std::vector<bool>> adjacency;
    for (const auto& row : meta.at("topology")) {
      std::vector<bool> r;
      for (const auto& v : row) r.push_back(v.get<int>() != 0);
      adjacency.push_back(std::move(r));
    }
    transcript.topology = Topology::from_adjacency(adjacency);
    transcript.complete = !meta.at("incomplete").get<bool>();
  } catch (const json::exception& e) {
    parse_error(std::string("transcript meta: ") + e.what());
  }
  return transcript;
}

std::filesystem::path transcript_meta_path(const std::filesystem::path& jsonl_path) {
  std::filesystem::path meta = jsonl_path;
  meta.replace_extension(".meta.json");
  return meta;
}

void save_transcript(const std::filesystem::path& jsonl_path, const Transcript& transcript) {
  write_text_file(jsonl_path, transcript_to_jsonl(transcript));
  write_text_file(transcript_meta_path(jsonl_path), transcript_meta_json(transcript));
}

Transcript load_transcript(const std::filesystem::path& jsonl_path) {
  auto rounds = transcript_from_jsonl(read_text_file(jsonl_path));
  const auto meta_path = transcript_meta_path(jsonl_path);
  Transcript transcript;
  if (std::filesystem::exists(meta_path)) {
    transcript = transcript_from_meta_json(read_text_file(meta_path));
  } else {
    std::vector<std::string> ids;
    for (const auto& round : rounds) {
      for (const auto& m : round) {
        if (std::find(ids.begin(), ids.end(), m.agent_id) == ids.end()) ids.push_back(m.agent_id);
      }
    }
    for (const auto& id : ids) transcript.agent_specs.push_back(AgentSpec{id, BackendKind::scripted, Stance::neutral, {}});
    if (ids.size() >= 2) transcript.topology = Topology::fully_connected(ids.size());
  }
  // Records within a round follow the agent order of the meta file.
  const auto ids = transcript.agent_ids();
  for (auto& round : rounds) {
    std::vector<Message> ordered;
    for (const auto& id : ids) {
      for (auto& m : round) {
        if (m.agent_id == id) ordered.push_back(std::move(m));
      }
    }
    if (ordered.size() != round.size()) {
      parse_error(jsonl_path.string() + ": records name agents that are not in the transcript metadata");
    }
    round = std::move(ordered);
  }
  transcript.rounds = std::move(rounds);
  return transcript;
}

bool same_persisted_content(const Transcript& a, const Transcript& b) {
  return a.topic == b.topic && a.variant == b.variant && a.agent_specs == b.agent_specs &&
         a.topology == b.topology && a.rounds == b.rounds && a.complete == b.complete;
}

// ---------------------------------------------------------------------------

std::string trajectory_to_csv(const OpinionTrajectory& trajectory,
                              const std::vector<std::vector<sentiment::ValenceScore>>* scores) {
  if (scores) {
    if (scores->size() != trajectory.rounds()) throw Error(ErrorKind::DimensionMismatch, "scores do not cover every round");
    for (const auto& round : *scores) {
      if (round.size() != trajectory.agents()) throw Error(ErrorKind::DimensionMismatch, "scores do not cover every agent");
    }
  }
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (std::size_t t = 0; t < trajectory.rounds(); ++t) {
    for (std::size_t i = 0; i < trajectory.agents(); ++i) {
      out += std::to_string(t + 1);
      out += ',';
      out += trajectory.agent_ids()[i];
      out += ',';
      out += format_double(trajectory.at(t)[i]);
      if (scores) {
        const auto& s = (*scores)[t][i];
        out += ',' + format_double(s.p_negative) + ',' + format_double(s.p_neutral) + ',' + format_double(s.p_positive);
      } else {
        out += ",,,";
      }
      out += '\n';
    }
  }
  return out;
}

TrajectoryTable trajectory_from_csv(std::string_view content) {
  struct Row {
    double score;
    std::optional<sentiment::ValenceScore> probabilities;
  };
  const auto lines = split_lines(content);
  if (lines.empty() || lines.front() != kTrajectoryHeader) {
    parse_error("trajectory CSV must start with header \"" + std::string(kTrajectoryHeader) + "\"");
  }
  Grid<Row> grid;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto fields = split_fields(lines[k]);
    if (fields.size() != 6) parse_error("line " + std::to_string(k + 1) + ": expected 6 fields");
    const int round = parse_round(fields[0], k + 1);
    check_agent_id(fields[1], k + 1);
    Row row{};
    try {
      row.score = parse_double(fields[2]);
      const bool any = !fields[3].empty() || !fields[4].empty() || !fields[5].empty();
      if (any) {
        row.probabilities = sentiment::ValenceScore::from_probabilities(
            parse_double(fields[3]), parse_double(fields[4]), parse_double(fields[5]));
        row.probabilities->scalar = row.score;
      }
    } catch (const Error& e) {
      parse_error("line " + std::to_string(k + 1) + ": " + e.what());
    }
    grid.add(round, fields[1], row, k + 1);
  }
  const auto dense = grid.dense();
  std::vector<OpinionVector> rounds;
  bool all_probabilities = true;
  std::vector<std::vector<sentiment::ValenceScore>> scores;
  for (const auto& line : dense) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(line.size()));
    std::vector<sentiment::ValenceScore> round_scores;
    for (std::size_t i = 0; i < line.size(); ++i) {
      x(static_cast<Eigen::Index>(i)) = line[i].score;
      if (line[i].probabilities) {
        round_scores.push_back(*line[i].probabilities);
      } else {
        all_probabilities = false;
      }
    }
    rounds.emplace_back(std::move(x));
    scores.push_back(std::move(round_scores));
  }
  TrajectoryTable table{OpinionTrajectory(std::move(rounds), grid.agents), std::nullopt};
  if (all_probabilities) table.scores = std::move(scores);
  return table;
}

void save_trajectory(const std::filesystem::path& path, const OpinionTrajectory& trajectory,
                     const std::vector<std::vector<sentiment::ValenceScore>>* scores) {
  write_text_file(path, trajectory_to_csv(trajectory, scores));
}

TrajectoryTable load_trajectory(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  try {
    return trajectory_from_csv(content);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string fit_report_to_json(const FitReport& report) {
  nlohmann::ordered_json out{{"variant", std::string(to_string(report.variant))},
           {"agent_ids", report.fitted_trajectory.agent_ids()},
           {"w_hat", to_json(report.w_hat.entries())},
           {"s_hat", report.s_hat ? to_json(report.s_hat->values()) : json(nullptr)},
           {"residual_sum", report.residual_sum},
           {"self_trust", report.self_trust_index},
           {"avg_susceptibility", report.avg_susceptibility ? json(*report.avg_susceptibility) : json(nullptr)}};
  json fitted = json::array();
  for (const auto& x : report.fitted_trajectory.series()) fitted.push_back(to_json(x.values()));
  out["fitted_trajectory"] = std::move(fitted);
  return out.dump(2) + "\n";
}

FitReport fit_report_from_json(std::string_view content) {
  try {
    const json in = json::parse(content);
    FitReport report;
    report.variant = parse_variant(in.at("variant").get<std::string>());
    report.w_hat = validate_influence_matrix(matrix_from_json(in.at("w_hat")));
    if (!in.at("s_hat").is_null()) report.s_hat = SusceptibilityProfile(vector_from_json(in.at("s_hat")));
    report.residual_sum = in.at("residual_sum").get<double>();
    report.self_trust_index = in.at("self_trust").get<double>();
    if (!in.at("avg_susceptibility").is_null()) report.avg_susceptibility = in.at("avg_susceptibility").get<double>();
    std::vector<OpinionVector> rounds;
    for (const auto& x : in.at("fitted_trajectory")) rounds.emplace_back(vector_from_json(x));
    report.fitted_trajectory = OpinionTrajectory(std::move(rounds), in.at("agent_ids").get<std::vector<std::string>>());
    return report;
  } catch (const json::exception& e) {
    parse_error(std::string("fit report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

std::string plot_to_csv(const OpinionTrajectory& observed, const OpinionTrajectory& fitted) {
  if (observed.rounds() != fitted.rounds() || observed.agent_ids() != fitted.agent_ids()) {
    throw Error(ErrorKind::DimensionMismatch, "observed and fitted trajectories differ in shape");
  }
  std::string out(kPlotHeader);
  out += '\n';
  for (std::size_t t = 0; t < observed.rounds(); ++t) {
    for (std::size_t i = 0; i < observed.agents(); ++i) {
      out += std::to_string(t + 1) + ',' + observed.agent_ids()[i] + ',' + format_double(observed.at(t)[i]) + ',' +
             format_double(fitted.at(t)[i]) + '\n';
    }
  }
  return out;
}

PlotData plot_from_csv(std::string_view content) {
  const auto lines = split_lines(content);
  if (lines.empty() || lines.front() != kPlotHeader) {
    parse_error("plot CSV must start with header \"" + std::string(kPlotHeader) + "\"");
  }
  Grid<std::pair<double, double>> grid;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto fields = split_fields(lines[k]);
    if (fields.size() != 4) parse_error("line " + std::to_string(k + 1) + ": expected 4 fields");
    const int round = parse_round(fields[0], k + 1);
    check_agent_id(fields[1], k + 1);
    grid.add(round, fields[1], {parse_double(fields[2]), parse_double(fields[3])}, k + 1);
  }
  std::vector<OpinionVector> observed;
  std::vector<OpinionVector> fitted;
  for (const auto& line : grid.dense()) {
    Eigen::VectorXd a(static_cast<Eigen::Index>(line.size()));
    Eigen::VectorXd b(static_cast<Eigen::Index>(line.size()));
    for (std::size_t i = 0; i < line.size(); ++i) {
      a(static_cast<Eigen::Index>(i)) = line[i].first;
      b(static_cast<Eigen::Index>(i)) = line[i].second;
    }
    observed.emplace_back(std::move(a));
    fitted.emplace_back(std::move(b));
  }
  return PlotData{OpinionTrajectory(std::move(observed), grid.agents), OpinionTrajectory(std::move(fitted), grid.agents)};
}

}  // namespace opinion_loom::io
