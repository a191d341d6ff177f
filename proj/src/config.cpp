#include "opinion_loom/config.hpp"

#include <limits>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "opinion_loom/io.hpp"

namespace opinion_loom::config {

namespace {

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::ConfigError, message); }

/// Typed access to one TOML table that rejects keys nobody asked for.
class Section {
 public:
  Section(const toml::table& table, std::string path) : table_(table), path_(std::move(path)) {}

  bool has(std::string_view key) const { return table_.contains(key); }

  const toml::node* node(std::string_view key) {
    seen_.insert(std::string(key));
    return table_.get(key);
  }

  std::string where(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  std::optional<std::string> string(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) config_error(where(key) + " must be a string");
    return n->value<std::string>();
  }

  std::optional<bool> boolean(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (!n->is_boolean()) config_error(where(key) + " must be true or false");
    return n->value<bool>();
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) config_error(where(key) + " must be an integer");
    return n->value<std::int64_t>();
  }

  std::optional<double> number(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (!n->is_number()) config_error(where(key) + " must be a number");
    return n->value<double>();
  }

  std::optional<Eigen::VectorXd> vector(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    return to_vector(*n, where(key));
  }

  std::optional<Eigen::MatrixXd> matrix(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    const auto* rows = n->as_array();
    if (!rows || rows->empty()) config_error(where(key) + " must be a non-empty array of arrays");
    Eigen::MatrixXd m;
    for (std::size_t i = 0; i < rows->size(); ++i) {
      const Eigen::VectorXd row = to_vector(*rows->get(i), where(key) + "[" + std::to_string(i) + "]");
      if (i == 0) m.resize(static_cast<Eigen::Index>(rows->size()), row.size());
      if (row.size() != m.cols()) config_error(where(key) + " rows differ in length");
      m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
  }

  const toml::table* table(std::string_view key) {
    const auto* n = node(key);
    if (!n) return nullptr;
    if (!n->is_table()) config_error(where(key) + " must be a table");
    return n->as_table();
  }

  void finish() const {
    for (const auto& [key, value] : table_) {
      if (!seen_.count(std::string(key.str()))) config_error("unknown key '" + where(key.str()) + "'");
    }
  }

 private:
  static Eigen::VectorXd to_vector(const toml::node& n, const std::string& where) {
    const auto* arr = n.as_array();
    if (!arr) config_error(where + " must be an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr->size()));
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto* item = arr->get(i);
      if (!item->is_number()) config_error(where + " must be an array of numbers");
      v(static_cast<Eigen::Index>(i)) = *item->value<double>();
    }
    return v;
  }

  const toml::table& table_;
  std::string path_;
  std::set<std::string> seen_;
};

toml::table parse_toml(std::string_view content) {
  try {
    return toml::parse(content);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ", column " << e.source().begin.column << ": "
        << e.description();
    config_error(msg.str());
  }
}

std::uint64_t to_seed(std::int64_t value, const std::string& where) {
  if (value < 0) config_error(where + " must be >= 0");
  return static_cast<std::uint64_t>(value);
}

int to_int(std::int64_t value, const std::string& where) {
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
    config_error(where + " is out of range");
  }
  return static_cast<int>(value);
}

template <typename F>
auto rethrow_as_config(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    config_error(where + ": " + e.what());
  }
}

// TOML writing --------------------------------------------------------------

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(c)));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

std::string number(double v) {
  std::string s = io::format_double(v);
  if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
      s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

std::string array(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += number(v(i));
  }
  return out + "]";
}

std::string array(const Eigen::MatrixXd& m) {
  std::string out = "[\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) out += "  " + array(Eigen::VectorXd(m.row(i).transpose())) + ",\n";
  return out + "]";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

// Per-agent keys stored in AgentSpec::backend_params.
constexpr std::string_view kStringParams[] = {"model", "endpoint", "script"};

}  // namespace

dialog::RunConfig parse_run_config(std::string_view content, const std::filesystem::path& base_dir) {
  const toml::table root_table = parse_toml(content);
  Section root(root_table, "");
  dialog::RunConfig config;

  if (auto v = root.string("topic")) config.topic = *v;
  if (auto v = root.integer("rounds")) config.rounds = to_int(*v, "rounds");
  if (auto v = root.string("variant")) config.variant = rethrow_as_config("variant", [&] { return parse_variant(*v); });
  if (auto v = root.integer("seed")) config.seed = to_seed(*v, "seed");
  if (auto v = root.boolean("weighted_prompts")) config.options.weighted_prompts = *v;
  if (auto v = root.boolean("full_history")) config.options.full_history = *v;
  if (auto v = root.boolean("sequential_updates")) config.options.sequential_updates = *v;
  if (auto v = root.boolean("parallel")) config.options.parallel = *v;
  config.prompt_weights = root.matrix("prompt_weights");

  const auto* agents_node = root.node("agents");
  if (!agents_node) config_error("at least two [[agents]] entries are required");
  const auto* agents = agents_node->as_array();
  if (!agents || !agents->is_array_of_tables()) config_error("agents must be an array of tables ([[agents]])");
  for (std::size_t k = 0; k < agents->size(); ++k) {
    Section a(*agents->get(k)->as_table(), "agents[" + std::to_string(k) + "]");
    AgentSpec spec;
    const auto id = a.string("id");
    if (!id) config_error(a.where("id") + " is required");
    spec.agent_id = *id;
    if (auto v = a.string("backend")) {
      spec.backend = rethrow_as_config(a.where("backend"), [&] { return parse_backend_kind(*v); });
    }
    if (auto v = a.string("stance")) spec.stance = rethrow_as_config(a.where("stance"), [&] { return parse_stance(*v); });
    for (const auto key : kStringParams) {
      if (auto v = a.string(key)) spec.backend_params[std::string(key)] = *v;
    }
    if (auto v = a.number("temperature")) spec.backend_params["temperature"] = io::format_double(*v);
    if (auto v = a.integer("max_tokens")) spec.backend_params["max_tokens"] = std::to_string(*v);
    a.finish();
    if (auto it = spec.backend_params.find("script"); it != spec.backend_params.end()) {
      std::filesystem::path script(it->second);
      if (script.is_relative() && !base_dir.empty()) it->second = (base_dir / script).lexically_normal().string();
    }
    if (spec.backend == BackendKind::scripted && !spec.backend_params.count("script")) {
      config_error(a.where("script") + " is required for scripted agents");
    }
    config.agent_specs.push_back(std::move(spec));
  }
  const std::size_t n = config.agent_specs.size();

  config.topology = Topology::fully_connected(std::max<std::size_t>(n, 2));
  if (const auto* t = root.table("topology")) {
    Section topo(*t, "topology");
    const std::string kind = topo.string("kind").value_or("full");
    if (kind == "full") {
      config.topology = Topology::fully_connected(std::max<std::size_t>(n, 2));
    } else if (kind == "small_world") {
      const auto k = topo.integer("k");
      const auto p = topo.number("p");
      if (!k || !p) config_error("topology.k and topology.p are required for small_world");
      if (*k < 0) config_error("topology.k must be >= 0");
      const std::uint64_t seed = topo.has("seed") ? to_seed(*topo.integer("seed"), "topology.seed") : config.seed;
      config.topology = rethrow_as_config("topology", [&] {
        return topology_small_world(n, static_cast<std::size_t>(*k), *p, seed);
      });
    } else if (kind == "explicit") {
      const auto adjacency = topo.matrix("adjacency");
      if (!adjacency) config_error("topology.adjacency is required for explicit topologies");
      if (adjacency->rows() != adjacency->cols()) config_error("topology.adjacency must be square");
      std::vector<std::vector<bool>> rows(static_cast<std::size_t>(adjacency->rows()));
      for (Eigen::Index i = 0; i < adjacency->rows(); ++i) {
        for (Eigen::Index j = 0; j < adjacency->cols(); ++j) {
          const double v = (*adjacency)(i, j);
          if (v != 0.0 && v != 1.0) config_error("topology.adjacency entries must be 0 or 1");
          rows[static_cast<std::size_t>(i)].push_back(v == 1.0);
        }
      }
      config.topology = Topology::from_adjacency(rows);
    } else {
      config_error("topology.kind must be full, small_world or explicit, got '" + kind + "'");
    }
    topo.finish();
  }

  if (const auto* l = root.table("llm")) {
    Section llm(*l, "llm");
    if (auto v = llm.string("endpoint")) config.llm.endpoint = *v;
    if (auto v = llm.string("model")) config.llm.model = *v;
    if (auto v = llm.number("temperature")) config.llm.temperature = *v;
    if (auto v = llm.integer("max_tokens")) config.llm.max_tokens = to_int(*v, "llm.max_tokens");
    if (auto v = llm.number("timeout_s")) config.llm.timeout_s = *v;
    if (auto v = llm.integer("max_retries")) config.llm.max_retries = to_int(*v, "llm.max_retries");
    llm.finish();
  }

  if (const auto* l = root.table("latent")) {
    Section lat(*l, "latent");
    dialog::LatentConfig latent;
    if (auto v = lat.string("variant")) latent.variant = rethrow_as_config("latent.variant", [&] { return parse_variant(*v); });
    auto w = lat.matrix("w");
    auto x1 = lat.vector("x1");
    if (!w || !x1) config_error("latent.w and latent.x1 are required");
    latent.w = *w;
    latent.x1 = *x1;
    latent.s = lat.vector("s");
    lat.finish();
    config.latent = std::move(latent);
  }
  root.finish();

  config.validate();
  return config;
}

dialog::RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string content = io::read_text_file(path);
  try {
    return parse_run_config(content, std::filesystem::absolute(path).parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_run_config(const dialog::RunConfig& config) {
  std::ostringstream out;
  out << "topic = " << quote(config.topic) << "\n";
  out << "rounds = " << config.rounds << "\n";
  out << "variant = " << quote(to_string(config.variant)) << "\n";
  out << "seed = " << config.seed << "\n";
  out << "weighted_prompts = " << boolean(config.options.weighted_prompts) << "\n";
  out << "full_history = " << boolean(config.options.full_history) << "\n";
  out << "sequential_updates = " << boolean(config.options.sequential_updates) << "\n";
  out << "parallel = " << boolean(config.options.parallel) << "\n";
  if (config.prompt_weights) out << "prompt_weights = " << array(*config.prompt_weights) << "\n";

  out << "\n[topology]\nkind = \"explicit\"\nadjacency = [\n";
  for (const auto& row : config.topology.adjacency()) {
    out << "  [";
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? ", " : "") << (row[j] ? 1 : 0);
    out << "],\n";
  }
  out << "]\n";

  out << "\n[llm]\n";
  out << "endpoint = " << quote(config.llm.endpoint) << "\n";
  out << "model = " << quote(config.llm.model) << "\n";
  out << "temperature = " << number(config.llm.temperature) << "\n";
  out << "max_tokens = " << config.llm.max_tokens << "\n";
  out << "timeout_s = " << number(config.llm.timeout_s) << "\n";
  out << "max_retries = " << config.llm.max_retries << "\n";

  if (config.latent) {
    out << "\n[latent]\n";
    out << "variant = " << quote(to_string(config.latent->variant)) << "\n";
    out << "w = " << array(config.latent->w) << "\n";
    if (config.latent->s) out << "s = " << array(*config.latent->s) << "\n";
    out << "x1 = " << array(config.latent->x1) << "\n";
  }

  for (const auto& spec : config.agent_specs) {
    out << "\n[[agents]]\n";
    out << "id = " << quote(spec.agent_id) << "\n";
    out << "backend = " << quote(to_string(spec.backend)) << "\n";
    out << "stance = " << quote(stance_id(spec.stance)) << "\n";
    for (const auto& [key, value] : spec.backend_params) {
      if (key == "temperature") {
        out << key << " = " << number(io::parse_double(value)) << "\n";
      } else if (key == "max_tokens") {
        out << key << " = " << value << "\n";
      } else {
        out << key << " = " << quote(value) << "\n";
      }
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------

void SynthParams::validate() const {
  if (rounds < 1) config_error("rounds must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) config_error("sigma must be a finite value >= 0");
  if (seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) config_error("seed must fit in int64");
  const auto n = static_cast<std::size_t>(x1.size());
  if (!agent_ids.empty() && agent_ids.size() != n) config_error("agent_ids must name every agent");
  if (s.has_value() != (variant == ModelVariant::FJ)) config_error("s must be given exactly when variant is fj");
  const auto w_checked = validate_influence_matrix(w);
  if (w_checked.size() != n) throw Error(ErrorKind::DimensionMismatch, "w and x1 differ in size");
  OpinionVector start(x1);
  if (s) {
    SusceptibilityProfile profile(*s);
    if (profile.size() != n) throw Error(ErrorKind::DimensionMismatch, "s and x1 differ in size");
  }
  if (!agent_ids.empty()) OpinionTrajectory({start}, agent_ids);
}

SynthParams parse_synth_params(std::string_view content) {
  const toml::table root_table = parse_toml(content);
  Section root(root_table, "");
  SynthParams params;
  if (auto v = root.string("variant")) params.variant = rethrow_as_config("variant", [&] { return parse_variant(*v); });
  if (auto v = root.integer("rounds")) params.rounds = to_int(*v, "rounds");
  if (auto v = root.number("sigma")) params.sigma = *v;
  if (auto v = root.integer("seed")) params.seed = to_seed(*v, "seed");
  auto w = root.matrix("w");
  auto x1 = root.vector("x1");
  if (!w || !x1) config_error("w and x1 are required");
  params.w = *w;
  params.x1 = *x1;
  params.s = root.vector("s");
  if (const auto* ids = root.node("agent_ids")) {
    const auto* arr = ids->as_array();
    if (!arr) config_error("agent_ids must be an array of strings");
    for (const auto& item : *arr) {
      if (!item.is_string()) config_error("agent_ids must be an array of strings");
      params.agent_ids.push_back(*item.value<std::string>());
    }
  }
  root.finish();
  params.validate();
  return params;
}

SynthParams load_synth_params(const std::filesystem::path& path) {
  const std::string content = io::read_text_file(path);
  try {
    return parse_synth_params(content);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string serialize_synth_params(const SynthParams& params) {
  std::ostringstream out;
  out << "variant = " << quote(to_string(params.variant)) << "\n";
  out << "rounds = " << params.rounds << "\n";
  out << "sigma = " << number(params.sigma) << "\n";
  out << "seed = " << params.seed << "\n";
  if (!params.agent_ids.empty()) {
    out << "agent_ids = [";
    for (std::size_t i = 0; i < params.agent_ids.size(); ++i) out << (i ? ", " : "") << quote(params.agent_ids[i]);
    out << "]\n";
  }
  out << "w = " << array(params.w) << "\n";
  if (params.s) out << "s = " << array(*params.s) << "\n";
  out << "x1 = " << array(params.x1) << "\n";
  return out.str();
}

}  // namespace opinion_loom::config
