#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sgrd/envs.hpp"
#include "sgrd/optim.hpp"
#include "sgrd/reward.hpp"

namespace sgrd {

// intrinsic: full two-term reward, zero label cost per step.
// image_only: first reward term only (fine-tuning without current sounds).
// sparse: 1 when the episode's task has been completed else 0, one
// ground-truth query charged per step.
enum class TrainMode { intrinsic, image_only, sparse };
const char* to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& s);

struct PpoConfig {
  float gamma = 0.99f;
  float gae_lambda = 0.95f;
  float clip_eps = 0.2f;
  int horizon = 128;
  int num_envs = 8;
  int epochs = 4;       // optimization epochs per update
  int minibatches = 4;  // env sequences are split across these
  float value_coef = 0.5f;
  float entropy_coef = 0.01f;
  // exploration bonus annealed linearly to this by the end of training;
  // negative means "hold entropy_coef constant"
  float entropy_coef_final = -1.0f;
  float learning_rate = 3e-4f;
  bool anneal_lr = false;  // linear decay of the learning rate to zero
  float max_grad_norm = 0.5f;
  long long total_steps = 300000;
  int recurrent_width = 64;
  bool feedforward = false;  // bypass the recurrent core

  void validate() const;
};

// Policy/value network: its own conv stack over I_t (separate from the
// frozen image encoder), a dense fusion of [conv features ++ f_I(I_t) ++
// f_S(S_g) ++ M_t ++ previous-action one-hot ++ f_I*f_S(S_g) interaction],
// a gated recurrent core over timesteps, and categorical policy + scalar
// value heads. VAR weights are never parameters here.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(int action_count, int robot_state_dim, int latent_dim, const PpoConfig& config,
            std::uint64_t seed);

  int action_count() const { return action_count_; }
  int robot_state_dim() const { return robot_state_dim_; }
  int latent_dim() const { return latent_dim_; }
  int core_width() const { return width_; }
  bool feedforward() const { return feedforward_; }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  struct StepOut {
    std::vector<float> logits;
    float value = 0.0f;
  };

  // Rollout-time forward for one timestep; `hidden` is carried between
  // steps and must be zeroed at episode starts.
  StepOut forward_step(const Tensor& image, const std::vector<float>& features,
                       std::vector<float>& hidden) const;

  // Training-time forward with capture for backward.
  struct StepCacheSet {
    NetCache conv, fuse, policy_head, value_head;
    GruCell::StepCache core;
    std::vector<float> hidden_out;
  };
  StepOut forward_step_cached(const Tensor& image, const std::vector<float>& features,
                              const std::vector<float>& hidden_in, StepCacheSet& cache) const;

  // BPTT over one stored sequence: per-step gradients w.r.t. logits and
  // value flow back through heads, core, fusion and conv stack.
  void backward_sequence(const std::vector<StepCacheSet>& caches,
                         const std::vector<std::vector<float>>& dlogits,
                         const std::vector<float>& dvalue, const std::vector<bool>& reset_before,
                         GradMap& grads) const;

  std::vector<float> zero_hidden() const { return std::vector<float>(width_, 0.0f); }

  void save(const std::string& path, EnvKind kind) const;
  static PolicyNet load(const std::string& path, EnvKind* kind_out = nullptr);

 private:
  int action_count_ = 0;
  int robot_state_dim_ = 0;
  int latent_dim_ = 0;
  int width_ = 64;
  bool feedforward_ = false;
  Net conv_net_, fuse_net_, policy_head_, value_head_;
  GruCell core_;
  ParamStore params_;

  std::vector<float> fused_input(const std::vector<float>& conv_out,
                                 const std::vector<float>& features) const;
};

// Fixed-horizon batch of transitions, organized [env][step].
struct RolloutBuffer {
  struct Entry {
    Tensor image;
    std::vector<float> features;  // concat(f_I, f_S(S_g), M_t)
    int action = 0;
    float logp = 0.0f;
    float reward = 0.0f;
    float value = 0.0f;
    bool done = false;  // transition ended the episode; hidden resets after it
  };
  int horizon = 0;
  int num_envs = 0;
  std::vector<std::vector<Entry>> env_steps;
  std::vector<std::vector<float>> initial_hidden;  // recurrent snapshot at rollout start
  std::vector<float> bootstrap_value;              // V(s_H) per env
  std::vector<std::vector<float>> advantages;      // filled by compute_gae
  std::vector<std::vector<float>> returns;

  double mean_reward = 0.0;
  int episodes_finished = 0;
  int episodes_succeeded = 0;

  int total_steps() const { return horizon * num_envs; }
};

// Steps a fleet of env instances with the current policy and the frozen VAR,
// computing rewards per the train mode. Owns per-env rng streams, episode
// goal embeddings and recurrent carry-over.
class RolloutCollector {
 public:
  RolloutCollector(std::vector<std::unique_ptr<Env>> envs, const VarModel& var, TrainMode mode,
                   const MfccBank& bank, bool use_test_split, const PpoConfig& config,
                   LabelLedger& ledger, std::uint64_t seed);

  RolloutBuffer collect(const PolicyNet& policy);
  const VarModel& var() const { return embedder_.var(); }

 private:
  std::vector<std::unique_ptr<Env>> envs_;
  SoundEmbedder embedder_;
  TrainMode mode_;
  const MfccBank* bank_;
  bool use_test_split_;
  PpoConfig config_;
  LabelLedger* ledger_;
  std::vector<Rng> env_rng_;
  std::vector<Observation> obs_;
  std::vector<Embedding> goal_;
  std::vector<std::vector<float>> hidden_;
  std::vector<int> prev_action_;
  bool started_ = false;

  void reset_env(int i);
  float reward_for(int i, const Observation& obs) const;
};

// Reverse-scan generalized advantage estimation with done masking;
// returns[t] = advantages[t] + values[t].
void compute_gae(RolloutBuffer& buffer, float gamma, float lambda);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;  // pre-clip, averaged over minibatches

  std::string to_string() const;
};

// Clipped-surrogate update: `epochs` passes over the buffer in
// sequence-aligned minibatches (whole env sequences, so recurrent segments
// never cross episode boundaries out of order). Advantages are normalized
// once per update. Gradient norm clipped at config.max_grad_norm.
PpoStats ppo_update(PolicyNet& policy, const RolloutBuffer& buffer, const PpoConfig& config,
                    Rng& rng);

struct UpdateLog {
  int update = 0;
  long long env_steps = 0;
  double mean_reward = 0.0;
  double success_rate = 0.0;  // over episodes finished in this buffer
  PpoStats stats;
  long long triplet_labels = 0;
  long long queries = 0;
};

struct TrainPolicyResult {
  std::vector<UpdateLog> curve;
};

// Alternates collect / GAE / update until total_steps env steps.
TrainPolicyResult train_policy(PolicyNet& policy, const VarModel& var, EnvKind kind,
                               TrainMode mode, const PpoConfig& config, const MfccBank& bank,
                               const RenderTheme& theme, LabelLedger& ledger, std::uint64_t seed);

struct EvalReport {
  std::vector<double> per_intent;  // success rate per intent
  std::vector<int> successes;      // raw counts
  int episodes_per_intent = 0;
  double overall = 0.0;

  std::string to_text() const;
};

// Greedy-action evaluation: `episodes_per_intent` episodes per intent with
// goal sounds drawn from the given split (tests use the held-out one).
EvalReport evaluate_policy(const PolicyNet& policy, const VarModel& var, EnvKind kind,
                           const MfccBank& bank, bool use_test_split, int episodes_per_intent,
                           const RenderTheme& theme, std::uint64_t seed);

struct FinetuneReport {
  double pre_shift_success = 0.0;
  double post_shift_success = 0.0;      // before any fine-tuning
  double recovered_success = 0.0;       // after triplets + image-only RL
  long long triplets_collected = 0;
  long long ledger_triplet_delta = 0;
  long long ledger_query_delta = 0;
};

// Post-deployment recovery: collect `budget` triplets in the shifted env
// (two labels each), fine-tune the VAR on them, then continue RL in
// image-only reward mode with zero further label cost.
FinetuneReport finetune(PolicyNet& policy, VarModel& var, EnvKind kind,
                        std::uint64_t shift_seed, int budget, const PpoConfig& rl_config,
                        int var_epochs, const MfccBank& bank, LabelLedger& ledger,
                        std::uint64_t seed, int eval_episodes_per_intent = 50);

}  // namespace sgrd
