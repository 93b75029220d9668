#include "sgrd/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgrd/error.hpp"

namespace sgrd {

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

void persist_config(const RunConfig& config) {
  std::filesystem::create_directories(config.out);
  write_text(config.out + "/config.txt", config.to_text());
}

std::vector<LabeledSound> diagnostic_sounds(const MfccBank& bank, int per_class) {
  std::vector<LabeledSound> sounds;
  for (int intent = 0; intent < kIntentCount; ++intent) {
    int n = std::min<int>(per_class, static_cast<int>(bank.test[intent].size()));
    for (int s = 0; s < n; ++s) sounds.push_back({bank.test[intent][s], intent});
  }
  // the empty sound is a single point; weight it like a class of its own
  for (int s = 0; s < per_class; ++s) sounds.push_back({empty_mfcc(), kEmptyClass});
  return sounds;
}

}  // namespace

const char* phase_name(PhasedLedger::Phase phase) {
  switch (phase) {
    case PhasedLedger::collection: return "collection";
    case PhasedLedger::var_training: return "var";
    case PhasedLedger::rl: return "rl";
    case PhasedLedger::eval: return "eval";
    default: return "?";
  }
}

long long PhasedLedger::total() const {
  long long t = 0;
  for (int p = 0; p < kPhases; ++p) t += triplet_labels[p] + queries[p];
  return t;
}

void PhasedLedger::add_phase(Phase phase, const LabelLedger& before, const LabelLedger& after) {
  triplet_labels[phase] += after.triplet_labels - before.triplet_labels;
  queries[phase] += after.queries - before.queries;
}

std::string PhasedLedger::to_text() const {
  std::ostringstream o;
  for (int p = 0; p < kPhases; ++p) {
    o << phase_name(static_cast<Phase>(p)) << "_triplet_labels = " << triplet_labels[p] << "\n";
    o << phase_name(static_cast<Phase>(p)) << "_queries = " << queries[p] << "\n";
  }
  o << "total = " << total() << "\n";
  return o.str();
}

PhasedLedger PhasedLedger::load(const std::string& path) {
  PhasedLedger ledger;
  std::ifstream in(path);
  if (!in) return ledger;
  std::string line;
  long long stated_total = -1;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    long long value = 0;
    if (!(ls >> key >> eq >> value) || eq != "=") continue;
    if (key == "total") {
      stated_total = value;
      continue;
    }
    for (int p = 0; p < kPhases; ++p) {
      std::string name = phase_name(static_cast<Phase>(p));
      if (key == name + "_triplet_labels") ledger.triplet_labels[p] = value;
      if (key == name + "_queries") ledger.queries[p] = value;
    }
  }
  if (stated_total >= 0 && stated_total != ledger.total()) {
    throw FormatError(path + ": ledger total " + std::to_string(stated_total) +
                      " does not equal the sum of phase deltas " + std::to_string(ledger.total()));
  }
  return ledger;
}

void PhasedLedger::save(const std::string& path) const { write_text(path, to_text()); }

std::string RunReport::to_text() const {
  std::ostringstream o;
  o << "env = " << env << "\n";
  o << "mode = " << mode << "\n";
  o << eval.to_text();
  o << "curve = " << curve_path << "\n";
  o << "separation = " << separation_path << "\n";
  o << ledger.to_text();
  return o.str();
}

void write_curve_csv(const std::string& path, const TrainPolicyResult& result) {
  std::ostringstream o;
  o << "update,steps,mean_reward,success_rate,policy_loss,value_loss,entropy,clip_fraction,"
       "approx_kl,triplet_labels,queries\n";
  for (const UpdateLog& log : result.curve) {
    o << log.update << "," << log.env_steps << "," << log.mean_reward << "," << log.success_rate
      << "," << log.stats.policy_loss << "," << log.stats.value_loss << "," << log.stats.entropy
      << "," << log.stats.clip_fraction << "," << log.stats.approx_kl << ","
      << log.triplet_labels << "," << log.queries << "\n";
  }
  write_text(path, o.str());
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ostringstream o;
  o << "intent,episodes,successes,rate\n";
  for (std::size_t k = 0; k < report.per_intent.size(); ++k) {
    o << k << "," << report.episodes_per_intent << "," << report.successes[k] << ","
      << report.per_intent[k] << "\n";
  }
  o << "overall," << report.episodes_per_intent * report.per_intent.size() << ",,"
    << report.overall << "\n";
  write_text(path, o.str());
}

void cmd_make_sounds(const RunConfig& config) {
  config.validate();
  persist_config(config);
  SoundDataset dataset = make_dataset(config.train_per_intent, config.test_per_intent,
                                      config.data_seed);
  save_dataset(dataset, config.sounds_dir());
}

void cmd_collect(const RunConfig& config) {
  config.validate();
  persist_config(config);
  SoundDataset dataset = load_dataset(config.sounds_dir());
  MfccBank bank = build_mfcc_bank(dataset);

  std::unique_ptr<Env> env = make_env(config.env);
  Rng rng(config.data_seed, 0xc011);
  LabelLedger ledger;
  LabelLedger before = ledger;
  // identical-block rank discrimination needs a richer aligned-view mix;
  // both satisfy the >= 25% non-empty guarantee
  double nonempty_frac = config.env == EnvKind::armreach ? 0.45 : 0.25;
  std::vector<Triplet> triplets =
      collect_triplets(*env, config.triplets, rng, bank.train, ledger, nonempty_frac);
  save_triplets(triplets, config.triplets_path());

  PhasedLedger phased = PhasedLedger::load(config.ledger_path());
  phased.add_phase(PhasedLedger::collection, before, ledger);
  phased.save(config.ledger_path());

  int nonempty = 0;
  std::array<int, kIntentCount> per_intent{};
  for (const Triplet& t : triplets) {
    if (!t.positive.is_empty()) {
      ++nonempty;
      // positives carry no label; histogram by matching is diagnostics-free
    }
  }
  (void)per_intent;
  std::ostringstream report;
  report << "triplets = " << triplets.size() << "\n";
  report << "nonempty = " << nonempty << "\n";
  report << "nonempty_fraction = "
         << static_cast<double>(nonempty) / static_cast<double>(triplets.size()) << "\n";
  report << "ledger_delta = " << (ledger.total() - before.total()) << "\n";
  write_text(config.out + "/collect_report.txt", report.str());
}

void cmd_train_var(const RunConfig& config) {
  config.validate();
  persist_config(config);
  if (!std::filesystem::exists(config.triplets_path())) {
    throw IoError(config.triplets_path() + " not found (run collect first)");
  }
  std::vector<Triplet> triplets = load_triplets(config.triplets_path());

  VarModel model(config.var, config.var_seed);
  VarTrainResult train = train_var(model, triplets, config.var_seed);
  save_var(model, config.var_path());

  std::ostringstream loss_csv;
  loss_csv << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < train.epoch_mean_loss.size(); ++e) {
    loss_csv << e << "," << train.epoch_mean_loss[e] << "\n";
  }
  write_text(config.out + "/var_loss.csv", loss_csv.str());

  // clustering diagnostics on held-out data and fresh unambiguous renders
  SoundDataset dataset = load_dataset(config.sounds_dir());
  MfccBank bank = build_mfcc_bank(dataset);
  std::unique_ptr<Env> env = make_env(config.env);
  Rng diag_rng(config.var_seed, 0xd1a6);
  std::vector<LabeledImage> images = collect_diagnostic_images(*env, 40, diag_rng);
  std::vector<LabeledSound> sounds = diagnostic_sounds(bank, 40);
  SeparationReport separation = eval_separation(model, images, sounds);
  write_text(config.out + "/separation.txt", separation.to_text());
  dump_embeddings(model, images, sounds, config.out + "/embeddings.txt");

  PhasedLedger phased = PhasedLedger::load(config.ledger_path());
  // triplets were paid for at collection; training itself consumes nothing
  phased.add_phase(PhasedLedger::var_training, LabelLedger{}, LabelLedger{});
  phased.save(config.ledger_path());
}

void cmd_train_rl(const RunConfig& config) {
  config.validate();
  persist_config(config);
  if (!std::filesystem::exists(config.var_path())) {
    throw IoError(config.var_path() + " not found (run train-var first)");
  }
  VarModel var = load_var(config.var_path());
  SoundDataset dataset = load_dataset(config.sounds_dir());
  MfccBank bank = build_mfcc_bank(dataset);

  std::unique_ptr<Env> probe = make_env(config.env);
  PolicyNet policy(probe->action_count(), probe->state_dim(), var.config().latent_dim, config.ppo,
                   config.rl_seed);

  LabelLedger ledger;
  LabelLedger before = ledger;
  TrainPolicyResult result = train_policy(policy, var, config.env, config.mode, config.ppo, bank,
                                          RenderTheme::defaults(), ledger, config.rl_seed);
  policy.save(config.policy_path(), config.env);
  write_curve_csv(config.out + "/curve.csv", result);

  PhasedLedger phased = PhasedLedger::load(config.ledger_path());
  phased.add_phase(PhasedLedger::rl, before, ledger);
  phased.save(config.ledger_path());
}

RunReport cmd_eval(const RunConfig& config) {
  config.validate();
  persist_config(config);
  if (!std::filesystem::exists(config.policy_path())) {
    throw IoError(config.policy_path() + " not found (run train-rl first)");
  }
  EnvKind saved_kind = config.env;
  PolicyNet policy = PolicyNet::load(config.policy_path(), &saved_kind);
  VarModel var = load_var(config.var_path());
  SoundDataset dataset = load_dataset(config.sounds_dir());
  MfccBank bank = build_mfcc_bank(dataset);

  EvalReport eval = evaluate_policy(policy, var, saved_kind, bank, true,
                                    config.eval_episodes_per_intent, RenderTheme::defaults(),
                                    config.rl_seed);
  write_eval_csv(config.out + "/eval.csv", eval);

  PhasedLedger phased = PhasedLedger::load(config.ledger_path());
  // measurement, not supervision: evaluation charges nothing
  phased.add_phase(PhasedLedger::eval, LabelLedger{}, LabelLedger{});
  phased.save(config.ledger_path());

  RunReport report;
  report.env = to_string(saved_kind);
  report.mode = to_string(config.mode);
  report.eval = eval;
  report.ledger = phased;
  // run-relative so reports stay byte-identical across run directories
  report.curve_path = "curve.csv";
  report.separation_path = "separation.txt";
  write_text(config.out + "/report.txt", report.to_text());
  return report;
}

std::vector<FinetuneRunReport> cmd_finetune(const RunConfig& config) {
  config.validate();
  persist_config(config);
  if (!std::filesystem::exists(config.policy_path())) {
    throw IoError(config.policy_path() + " not found (run train-rl first)");
  }
  SoundDataset dataset = load_dataset(config.sounds_dir());
  MfccBank bank = build_mfcc_bank(dataset);

  PpoConfig rl = config.ppo;
  rl.total_steps = config.finetune_total_steps;

  std::vector<FinetuneRunReport> reports;
  std::ostringstream text;
  for (int budget : config.budgets) {
    // every budget starts from the same deployed artifacts
    EnvKind kind = config.env;
    PolicyNet policy = PolicyNet::load(config.policy_path(), &kind);
    VarModel var = load_var(config.var_path());

    LabelLedger ledger;
    LabelLedger before = ledger;
    FinetuneReport ft = finetune(policy, var, kind, config.shift_seed, budget, rl,
                                 config.finetune_var_epochs, bank, ledger,
                                 config.rl_seed ^ static_cast<std::uint64_t>(budget),
                                 config.eval_episodes_per_intent);
    PhasedLedger phased = PhasedLedger::load(config.ledger_path());
    LabelLedger collected;
    collected.triplet_labels = ft.ledger_triplet_delta;
    phased.add_phase(PhasedLedger::collection, LabelLedger{}, collected);
    LabelLedger rl_delta;
    rl_delta.queries = ft.ledger_query_delta;
    phased.add_phase(PhasedLedger::rl, LabelLedger{}, rl_delta);
    phased.save(config.ledger_path());
    (void)before;

    text << "budget = " << budget << "\n";
    text << "pre_shift_success = " << ft.pre_shift_success << "\n";
    text << "post_shift_success = " << ft.post_shift_success << "\n";
    text << "recovered_success = " << ft.recovered_success << "\n";
    text << "ledger_triplet_delta = " << ft.ledger_triplet_delta << "\n";
    text << "ledger_query_delta = " << ft.ledger_query_delta << "\n";
    reports.push_back({budget, ft});
  }
  write_text(config.out + "/finetune_report.txt", text.str());
  return reports;
}

}  // namespace sgrd
