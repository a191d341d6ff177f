#include "opinion_loom/backends.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "opinion_loom/dynamics.hpp"

namespace opinion_loom::dialog {

ScriptedBackend::ScriptedBackend(std::vector<std::string> messages) : messages_(std::move(messages)) {}

std::vector<std::string> ScriptedBackend::parse_script(std::string_view content) {
  std::vector<std::string> messages;
  std::string current;
  bool have_content = false;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line == "---") {
      messages.push_back(current);
      current.clear();
      have_content = false;
    } else {
      if (have_content) current += '\n';
      current += line;
      have_content = true;
    }
    pos = eol + 1;
  }
  // A trailing newline leaves an empty final line rather than a message.
  while (!current.empty() && current.back() == '\n') current.pop_back();
  if (have_content && !current.empty()) messages.push_back(current);
  return messages;
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open script file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ScriptedBackend(parse_script(buffer.str()));
}

std::string ScriptedBackend::generate(const GenerationRequest& request) {
  if (request.round < 1 || static_cast<std::size_t>(request.round) > messages_.size()) {
    throw Error(ErrorKind::BackendFailure, "script for " + request.agent_id + " has no message for round " +
                                               std::to_string(request.round));
  }
  return messages_[static_cast<std::size_t>(request.round - 1)];
}

GroundTruthBackend::GroundTruthBackend(LatentDynamics latent, std::shared_ptr<const sentiment::LexiconScorer> lexicon,
                                       std::uint64_t seed)
    : latent_(std::move(latent)), lexicon_(std::move(lexicon)), seed_(seed) {
  if (!lexicon_) throw Error(ErrorKind::InvalidArgument, "ground-truth backend needs a lexicon scorer");
  if (latent_.agent_ids.empty()) latent_.agent_ids = default_agent_ids(latent_.x1.size());
  if (latent_.agent_ids.size() != latent_.w.size() || latent_.x1.size() != latent_.w.size()) {
    throw Error(ErrorKind::DimensionMismatch, "latent dynamics dimensions disagree");
  }
  // Validates the variant/profile pairing and dimensions once, up front.
  dynamics::free_run(latent_.variant, latent_.w, latent_.s, latent_.x1, 2);
}

std::size_t GroundTruthBackend::index_of(std::string_view agent_id) const {
  const auto it = std::find(latent_.agent_ids.begin(), latent_.agent_ids.end(), agent_id);
  if (it == latent_.agent_ids.end()) {
    throw Error(ErrorKind::BackendFailure, "agent " + std::string(agent_id) + " is not part of the latent dynamics");
  }
  return static_cast<std::size_t>(it - latent_.agent_ids.begin());
}

double GroundTruthBackend::target(std::string_view agent_id, int round) const {
  if (round < 1) throw Error(ErrorKind::InvalidArgument, "round must be >= 1");
  const std::size_t i = index_of(agent_id);
  const auto run = dynamics::free_run(latent_.variant, latent_.w, latent_.s, latent_.x1,
                                      static_cast<std::size_t>(round));
  return run.at(static_cast<std::size_t>(round - 1))[i];
}

std::string GroundTruthBackend::generate(const GenerationRequest& request) {
  const std::size_t i = index_of(request.agent_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(request.round)};
  std::uint32_t words[2];
  seq.generate(std::begin(words), std::end(words));
  const std::uint64_t text_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return lexicon_->compose(target(request.agent_id, request.round), text_seed);
}

std::shared_ptr<AgentBackend> ground_truth_backend(LatentDynamics latent,
                                                   std::shared_ptr<const sentiment::LexiconScorer> lexicon,
                                                   std::uint64_t seed) {
  return std::make_shared<GroundTruthBackend>(std::move(latent), std::move(lexicon), seed);
}

}  // namespace opinion_loom::dialog
