#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgrd/envs.hpp"
#include "sgrd/ppo.hpp"
#include "sgrd/var.hpp"

namespace sgrd {

// Line-oriented "[section]" / "key = value" text. '#' starts a comment.
// Parsing is strict: unknown keys are configuration errors.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_text(const std::string& text, const std::string& origin = "<text>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  long long get_int_or(const std::string& section, const std::string& key, long long fallback) const;
  double get_float_or(const std::string& section, const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> value
  std::vector<std::string> order_;
  std::string origin_;
};

// Everything one pipeline run needs, stored alongside every artifact the run
// produces so results can be reproduced from the directory alone.
struct RunConfig {
  // run
  EnvKind env = EnvKind::gridnav;
  std::string out = "run";
  std::uint64_t data_seed = 1;
  std::uint64_t var_seed = 2;
  std::uint64_t rl_seed = 3;
  TrainMode mode = TrainMode::intrinsic;
  int triplets = 10000;

  // sounds
  int train_per_intent = 1000;
  int test_per_intent = 50;

  VarConfig var;
  PpoConfig ppo;

  // eval
  int eval_episodes_per_intent = 50;

  // finetune
  std::uint64_t shift_seed = 7;
  std::vector<int> budgets = {1000};
  int finetune_var_epochs = 4;
  long long finetune_total_steps = 150000;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_kv(const KvFile& kv);
  std::string to_text() const;
  void validate() const;

  std::string sounds_dir() const { return out + "/sounds"; }
  std::string triplets_path() const { return out + "/triplets.sgrd"; }
  std::string var_path() const { return out + "/var.sgrd"; }
  std::string policy_path() const { return out + "/policy.sgrd"; }
  std::string ledger_path() const { return out + "/ledger.txt"; }
};

}  // namespace sgrd
