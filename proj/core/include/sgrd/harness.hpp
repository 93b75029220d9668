#pragma once

#include <array>
#include <string>

#include "sgrd/config.hpp"
#include "sgrd/ledger.hpp"
#include "sgrd/ppo.hpp"

namespace sgrd {

// Label accounting split by pipeline phase; the on-disk ledger.txt travels
// with the run directory and every command updates its own phase only.
struct PhasedLedger {
  enum Phase { collection = 0, var_training = 1, rl = 2, eval = 3, kPhases = 4 };
  std::array<long long, kPhases> triplet_labels{};
  std::array<long long, kPhases> queries{};

  long long total() const;
  void add_phase(Phase phase, const LabelLedger& before, const LabelLedger& after);
  std::string to_text() const;

  static PhasedLedger load(const std::string& path);      // missing file -> zeros
  void save(const std::string& path) const;
};

const char* phase_name(PhasedLedger::Phase phase);

// Aggregated outcome of a pipeline run (assembled by cmd_eval / cmd_finetune).
struct RunReport {
  std::string env;
  std::string mode;
  EvalReport eval;
  PhasedLedger ledger;
  std::string curve_path;
  std::string separation_path;

  std::string to_text() const;
};

// Pipeline commands behind the CLI. Each persists its artifacts plus the
// exact RunConfig under config.out and returns through exceptions on error.
void cmd_make_sounds(const RunConfig& config);
void cmd_collect(const RunConfig& config);
void cmd_train_var(const RunConfig& config);
void cmd_train_rl(const RunConfig& config);
RunReport cmd_eval(const RunConfig& config);

struct FinetuneRunReport {
  int budget = 0;
  FinetuneReport result;
};
std::vector<FinetuneRunReport> cmd_finetune(const RunConfig& config);

// CSVs (documented in the README)
void write_curve_csv(const std::string& path, const TrainPolicyResult& result);
void write_eval_csv(const std::string& path, const EvalReport& report);

}  // namespace sgrd
