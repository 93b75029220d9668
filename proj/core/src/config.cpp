#include "sgrd/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "sgrd/error.hpp"

namespace sgrd {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
  KvFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw FormatError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw FormatError(origin + ":" + std::to_string(line_no) + ": empty section name");
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    std::string full = section.empty() ? key : section + "." + key;
    if (kv.values_.count(full)) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": duplicate key " + full);
    }
    kv.values_[full] = value;
    kv.order_.push_back(full);
  }
  return kv;
}

bool KvFile::has(const std::string& section, const std::string& key) const {
  return values_.count(section + "." + key) > 0;
}

std::string KvFile::get(const std::string& section, const std::string& key) const {
  auto it = values_.find(section + "." + key);
  if (it == values_.end()) {
    throw ConfigError(origin_ + ": missing required key " + section + "." + key);
  }
  return it->second;
}

std::string KvFile::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  auto it = values_.find(section + "." + key);
  return it == values_.end() ? fallback : it->second;
}

long long KvFile::get_int_or(const std::string& section, const std::string& key,
                             long long fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  try {
    std::size_t used = 0;
    long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": " + section + "." + key + " must be an integer, got '" + v + "'");
  }
}

double KvFile::get_float_or(const std::string& section, const std::string& key,
                            double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": " + section + "." + key + " must be a number, got '" + v + "'");
  }
}

bool KvFile::get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get(section, key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(origin_ + ": " + section + "." + key + " must be true or false, got '" + v + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
  return from_kv(KvFile::parse_file(path));
}

RunConfig RunConfig::from_kv(const KvFile& kv) {
  static const std::set<std::string> known = {
      "run.env", "run.out", "run.data_seed", "run.var_seed", "run.rl_seed", "run.mode",
      "run.triplets",
      "sounds.train_per_intent", "sounds.test_per_intent",
      "var.latent_dim", "var.margin", "var.learning_rate", "var.batch_size", "var.epochs",
      "ppo.gamma", "ppo.gae_lambda", "ppo.clip_eps", "ppo.horizon", "ppo.num_envs", "ppo.epochs",
      "ppo.minibatches", "ppo.value_coef", "ppo.entropy_coef", "ppo.entropy_coef_final",
      "ppo.learning_rate", "ppo.anneal_lr",
      "ppo.max_grad_norm", "ppo.total_steps", "ppo.recurrent_width", "ppo.feedforward",
      "eval.episodes_per_intent",
      "finetune.shift_seed", "finetune.budgets", "finetune.var_epochs", "finetune.total_steps",
  };
  for (const std::string& key : kv.keys()) {
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);
  }

  RunConfig c;
  c.env = env_kind_from_string(kv.get_or("run", "env", "gridnav"));
  c.out = kv.get_or("run", "out", "run");
  c.data_seed = static_cast<std::uint64_t>(kv.get_int_or("run", "data_seed", 1));
  c.var_seed = static_cast<std::uint64_t>(kv.get_int_or("run", "var_seed", 2));
  c.rl_seed = static_cast<std::uint64_t>(kv.get_int_or("run", "rl_seed", 3));
  c.mode = train_mode_from_string(kv.get_or("run", "mode", "intrinsic"));
  c.triplets = static_cast<int>(kv.get_int_or("run", "triplets", 10000));

  c.train_per_intent = static_cast<int>(kv.get_int_or("sounds", "train_per_intent", 1000));
  c.test_per_intent = static_cast<int>(kv.get_int_or("sounds", "test_per_intent", 50));

  c.var.latent_dim = static_cast<int>(kv.get_int_or("var", "latent_dim", 3));
  c.var.margin = static_cast<float>(kv.get_float_or("var", "margin", 1.0));
  c.var.learning_rate = static_cast<float>(kv.get_float_or("var", "learning_rate", 1e-3));
  c.var.batch_size = static_cast<int>(kv.get_int_or("var", "batch_size", 32));
  c.var.epochs = static_cast<int>(kv.get_int_or("var", "epochs", 12));

  c.ppo.gamma = static_cast<float>(kv.get_float_or("ppo", "gamma", 0.99));
  c.ppo.gae_lambda = static_cast<float>(kv.get_float_or("ppo", "gae_lambda", 0.95));
  c.ppo.clip_eps = static_cast<float>(kv.get_float_or("ppo", "clip_eps", 0.2));
  c.ppo.horizon = static_cast<int>(kv.get_int_or("ppo", "horizon", 128));
  c.ppo.num_envs = static_cast<int>(kv.get_int_or("ppo", "num_envs", 8));
  c.ppo.epochs = static_cast<int>(kv.get_int_or("ppo", "epochs", 4));
  c.ppo.minibatches = static_cast<int>(kv.get_int_or("ppo", "minibatches", 4));
  c.ppo.value_coef = static_cast<float>(kv.get_float_or("ppo", "value_coef", 0.5));
  c.ppo.entropy_coef = static_cast<float>(kv.get_float_or("ppo", "entropy_coef", 0.01));
  c.ppo.entropy_coef_final =
      static_cast<float>(kv.get_float_or("ppo", "entropy_coef_final", -1.0));
  c.ppo.learning_rate = static_cast<float>(kv.get_float_or("ppo", "learning_rate", 3e-4));
  c.ppo.anneal_lr = kv.get_bool_or("ppo", "anneal_lr", false);
  c.ppo.max_grad_norm = static_cast<float>(kv.get_float_or("ppo", "max_grad_norm", 0.5));
  c.ppo.total_steps = kv.get_int_or("ppo", "total_steps", 300000);
  c.ppo.recurrent_width = static_cast<int>(kv.get_int_or("ppo", "recurrent_width", 64));
  c.ppo.feedforward = kv.get_bool_or("ppo", "feedforward", false);

  c.eval_episodes_per_intent = static_cast<int>(kv.get_int_or("eval", "episodes_per_intent", 50));

  c.shift_seed = static_cast<std::uint64_t>(kv.get_int_or("finetune", "shift_seed", 7));
  if (kv.has("finetune", "budgets")) {
    c.budgets.clear();
    std::istringstream bs(kv.get("finetune", "budgets"));
    std::string tok;
    while (std::getline(bs, tok, ',')) {
      tok.erase(std::remove_if(tok.begin(), tok.end(), [](char ch) { return ch == ' '; }), tok.end());
      if (tok.empty()) continue;
      try {
        c.budgets.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("finetune.budgets must be a comma-separated integer list");
      }
    }
    if (c.budgets.empty()) throw ConfigError("finetune.budgets is empty");
  }
  c.finetune_var_epochs = static_cast<int>(kv.get_int_or("finetune", "var_epochs", 4));
  c.finetune_total_steps = kv.get_int_or("finetune", "total_steps", 150000);
  return c;
}

void RunConfig::validate() const {
  if (out.empty()) throw ConfigError("run.out must not be empty");
  if (triplets < 1) throw ConfigError("run.triplets must be >= 1");
  if (train_per_intent < 1 || test_per_intent < 1) {
    throw ConfigError("sound dataset sizes must be >= 1");
  }
  if (eval_episodes_per_intent < 1) throw ConfigError("eval.episodes_per_intent must be >= 1");
  for (int b : budgets) {
    if (b < 1) throw ConfigError("finetune budgets must be >= 1");
  }
  if (finetune_var_epochs < 1) throw ConfigError("finetune.var_epochs must be >= 1");
  var.validate();
  ppo.validate();
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << "[run]\n";
  o << "env = " << to_string(env) << "\n";
  o << "out = " << out << "\n";
  o << "data_seed = " << data_seed << "\n";
  o << "var_seed = " << var_seed << "\n";
  o << "rl_seed = " << rl_seed << "\n";
  o << "mode = " << to_string(mode) << "\n";
  o << "triplets = " << triplets << "\n";
  o << "[sounds]\n";
  o << "train_per_intent = " << train_per_intent << "\n";
  o << "test_per_intent = " << test_per_intent << "\n";
  o << "[var]\n";
  o << "latent_dim = " << var.latent_dim << "\n";
  o << "margin = " << var.margin << "\n";
  o << "learning_rate = " << var.learning_rate << "\n";
  o << "batch_size = " << var.batch_size << "\n";
  o << "epochs = " << var.epochs << "\n";
  o << "[ppo]\n";
  o << "gamma = " << ppo.gamma << "\n";
  o << "gae_lambda = " << ppo.gae_lambda << "\n";
  o << "clip_eps = " << ppo.clip_eps << "\n";
  o << "horizon = " << ppo.horizon << "\n";
  o << "num_envs = " << ppo.num_envs << "\n";
  o << "epochs = " << ppo.epochs << "\n";
  o << "minibatches = " << ppo.minibatches << "\n";
  o << "value_coef = " << ppo.value_coef << "\n";
  o << "entropy_coef = " << ppo.entropy_coef << "\n";
  o << "entropy_coef_final = " << ppo.entropy_coef_final << "\n";
  o << "learning_rate = " << ppo.learning_rate << "\n";
  o << "anneal_lr = " << (ppo.anneal_lr ? "true" : "false") << "\n";
  o << "max_grad_norm = " << ppo.max_grad_norm << "\n";
  o << "total_steps = " << ppo.total_steps << "\n";
  o << "recurrent_width = " << ppo.recurrent_width << "\n";
  o << "feedforward = " << (ppo.feedforward ? "true" : "false") << "\n";
  o << "[eval]\n";
  o << "episodes_per_intent = " << eval_episodes_per_intent << "\n";
  o << "[finetune]\n";
  o << "shift_seed = " << shift_seed << "\n";
  o << "budgets = ";
  for (std::size_t i = 0; i < budgets.size(); ++i) o << (i ? "," : "") << budgets[i];
  o << "\n";
  o << "var_epochs = " << finetune_var_epochs << "\n";
  o << "total_steps = " << finetune_total_steps << "\n";
  return o.str();
}

}  // namespace sgrd
