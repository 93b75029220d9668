#include "sgrd/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sgrd/checkpoint.hpp"
#include "sgrd/error.hpp"

namespace sgrd {

const char* to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::intrinsic: return "intrinsic";
    case TrainMode::image_only: return "image-only";
    case TrainMode::sparse: return "sparse";
  }
  return "?";
}

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "intrinsic") return TrainMode::intrinsic;
  if (s == "image-only") return TrainMode::image_only;
  if (s == "sparse") return TrainMode::sparse;
  throw ConfigError("unknown mode: " + s + " (expected intrinsic, image-only or sparse)");
}

void PpoConfig::validate() const {
  if (!(gamma > 0.0f && gamma <= 1.0f)) throw ConfigError("gamma must be in (0, 1]");
  if (!(gae_lambda >= 0.0f && gae_lambda <= 1.0f)) throw ConfigError("gae_lambda must be in [0, 1]");
  if (!(clip_eps > 0.0f)) throw ConfigError("clip_eps must be > 0");
  if (horizon < 1 || num_envs < 1) throw ConfigError("horizon and num_envs must be >= 1");
  if (epochs < 1 || minibatches < 1) throw ConfigError("epochs and minibatches must be >= 1");
  if ((horizon * num_envs) % minibatches != 0) {
    throw ConfigError("horizon * num_envs must be divisible by minibatches");
  }
  if (num_envs % minibatches != 0) {
    throw ConfigError("num_envs must be divisible by minibatches (whole env sequences per minibatch)");
  }
  if (!(learning_rate > 0.0f)) throw ConfigError("learning_rate must be > 0");
  if (total_steps < horizon * num_envs) {
    throw ConfigError("total_steps below one rollout (" + std::to_string(horizon * num_envs) + ")");
  }
  if (recurrent_width < 1) throw ConfigError("recurrent_width must be >= 1");
}

namespace {

constexpr int kConvFeatures = 32 * 3 * 3;

std::vector<LayerSpec> policy_conv_layers() {
  return {LayerSpec::make_conv2d(kImageChannels, 8, 3, 2),  LayerSpec::make_relu(),
          LayerSpec::make_conv2d(8, 16, 3, 2),              LayerSpec::make_relu(),
          LayerSpec::make_conv2d(16, 32, 3, 2),             LayerSpec::make_relu()};
}

}  // namespace

PolicyNet::PolicyNet(int action_count, int robot_state_dim, int latent_dim,
                     const PpoConfig& config, std::uint64_t seed)
    : action_count_(action_count),
      robot_state_dim_(robot_state_dim),
      latent_dim_(latent_dim),
      width_(config.recurrent_width),
      feedforward_(config.feedforward) {
  // the fusion also sees the previous action (proprioception the recurrent
  // sweep counting leans on) and the elementwise product of the two
  // embeddings: the image-goal interaction the reward is built from
  int fuse_in = kConvFeatures + 3 * latent_dim + robot_state_dim + action_count;
  conv_net_ = Net("pc", policy_conv_layers());
  fuse_net_ = Net("pf", {LayerSpec::make_dense(fuse_in, width_), LayerSpec::make_relu()});
  policy_head_ = Net("pp", {LayerSpec::make_dense(width_, action_count, 0.01f)});
  value_head_ = Net("pv", {LayerSpec::make_dense(width_, 1)});
  core_ = GruCell(width_, width_, "pg");

  Rng rng(seed, 0x90);
  conv_net_.init_params(params_, rng);
  fuse_net_.init_params(params_, rng);
  if (!feedforward_) core_.init_params(params_, rng);
  policy_head_.init_params(params_, rng);
  value_head_.init_params(params_, rng);
}

std::vector<float> PolicyNet::fused_input(const std::vector<float>& conv_out,
                                          const std::vector<float>& features) const {
  std::vector<float> fused;
  fused.reserve(conv_out.size() + features.size() + latent_dim_);
  fused.insert(fused.end(), conv_out.begin(), conv_out.end());
  fused.insert(fused.end(), features.begin(), features.end());
  for (int i = 0; i < latent_dim_; ++i) {
    fused.push_back(features[i] * features[latent_dim_ + i]);
  }
  return fused;
}

PolicyNet::StepOut PolicyNet::forward_step(const Tensor& image, const std::vector<float>& features,
                                           std::vector<float>& hidden) const {
  Tensor conv_out = conv_net_.forward(params_, image);
  std::vector<float> fused = fused_input(conv_out.data, features);
  Tensor fuse_out = fuse_net_.forward(params_, Tensor({static_cast<int>(fused.size())}, fused));

  const std::vector<float>* h = &fuse_out.data;
  std::vector<float> h_new(width_);
  if (!feedforward_) {
    core_.forward(params_, fuse_out.data.data(), hidden.data(), h_new.data(), nullptr);
    hidden = h_new;
    h = &hidden;
  }
  Tensor ht({width_}, *h);
  StepOut out;
  out.logits = policy_head_.forward(params_, ht).data;
  out.value = value_head_.forward(params_, ht)[0];
  return out;
}

PolicyNet::StepOut PolicyNet::forward_step_cached(const Tensor& image,
                                                  const std::vector<float>& features,
                                                  const std::vector<float>& hidden_in,
                                                  StepCacheSet& cache) const {
  Tensor conv_out = conv_net_.forward(params_, image, &cache.conv);
  std::vector<float> fused = fused_input(conv_out.data, features);
  Tensor fuse_out =
      fuse_net_.forward(params_, Tensor({static_cast<int>(fused.size())}, fused), &cache.fuse);

  if (feedforward_) {
    cache.hidden_out = fuse_out.data;
  } else {
    cache.hidden_out.resize(width_);
    core_.forward(params_, fuse_out.data.data(), hidden_in.data(), cache.hidden_out.data(),
                  &cache.core);
  }
  Tensor ht({width_}, cache.hidden_out);
  StepOut out;
  out.logits = policy_head_.forward(params_, ht, &cache.policy_head).data;
  out.value = value_head_.forward(params_, ht, &cache.value_head)[0];
  return out;
}

void PolicyNet::backward_sequence(const std::vector<StepCacheSet>& caches,
                                  const std::vector<std::vector<float>>& dlogits,
                                  const std::vector<float>& dvalue,
                                  const std::vector<bool>& reset_before, GradMap& grads) const {
  int t_len = static_cast<int>(caches.size());
  std::vector<float> dh_carry(width_, 0.0f);
  std::vector<float> dfuse(width_), dh_prev(width_);
  for (int t = t_len - 1; t >= 0; --t) {
    Tensor dlog({action_count_}, dlogits[t]);
    Tensor dval({1});
    dval[0] = dvalue[t];
    Tensor dh_pol = policy_head_.backward(params_, caches[t].policy_head, dlog, grads);
    Tensor dh_val = value_head_.backward(params_, caches[t].value_head, dval, grads);
    std::vector<float> dh(width_);
    for (int i = 0; i < width_; ++i) dh[i] = dh_pol[i] + dh_val[i] + dh_carry[i];

    if (feedforward_) {
      dfuse = dh;
      std::fill(dh_carry.begin(), dh_carry.end(), 0.0f);
    } else {
      core_.backward(params_, caches[t].core, dh.data(), dfuse.data(), dh_prev.data(), grads);
      dh_carry = reset_before[t] ? std::vector<float>(width_, 0.0f) : dh_prev;
    }

    Tensor dfuse_t({width_}, dfuse);
    Tensor dfused_in = fuse_net_.backward(params_, caches[t].fuse, dfuse_t, grads);
    // conv features take their slice; VAR embeddings and robot state are
    // inputs, their gradient is dropped (the VAR stays frozen)
    Tensor dconv({32, 3, 3});
    std::copy(dfused_in.data.begin(), dfused_in.data.begin() + kConvFeatures, dconv.data.begin());
    conv_net_.backward(params_, caches[t].conv, dconv, grads);
  }
}

void PolicyNet::save(const std::string& path, EnvKind kind) const {
  std::vector<std::pair<std::string, Tensor>> tensors;
  auto scalar = [](float v) {
    Tensor t({1});
    t[0] = v;
    return t;
  };
  tensors.emplace_back("meta.action_count", scalar(static_cast<float>(action_count_)));
  tensors.emplace_back("meta.robot_state_dim", scalar(static_cast<float>(robot_state_dim_)));
  tensors.emplace_back("meta.latent_dim", scalar(static_cast<float>(latent_dim_)));
  tensors.emplace_back("meta.width", scalar(static_cast<float>(width_)));
  tensors.emplace_back("meta.feedforward", scalar(feedforward_ ? 1.0f : 0.0f));
  tensors.emplace_back("meta.env_kind", scalar(kind == EnvKind::gridnav ? 0.0f : 1.0f));
  for (const auto& [name, t] : params_.params) tensors.emplace_back(name, t);
  write_tensor_file(path, tensors);
}

PolicyNet PolicyNet::load(const std::string& path, EnvKind* kind_out) {
  std::map<std::string, Tensor> tensors = read_tensor_file(path);
  auto meta = [&](const std::string& key) -> float {
    auto it = tensors.find("meta." + key);
    if (it == tensors.end()) throw FormatError(path + ": missing meta." + key);
    return it->second[0];
  };
  PpoConfig cfg;
  cfg.recurrent_width = static_cast<int>(meta("width"));
  cfg.feedforward = meta("feedforward") != 0.0f;
  PolicyNet net(static_cast<int>(meta("action_count")), static_cast<int>(meta("robot_state_dim")),
                static_cast<int>(meta("latent_dim")), cfg, 0);
  for (auto& [name, t] : net.params_.params) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError(path + ": missing parameter " + name);
    if (it->second.shape != t.shape) {
      throw FormatError(path + ": parameter " + name + " shape mismatch");
    }
    t = it->second;
  }
  if (kind_out) *kind_out = meta("env_kind") == 0.0f ? EnvKind::gridnav : EnvKind::armreach;
  return net;
}

RolloutCollector::RolloutCollector(std::vector<std::unique_ptr<Env>> envs, const VarModel& var,
                                   TrainMode mode, const MfccBank& bank, bool use_test_split,
                                   const PpoConfig& config, LabelLedger& ledger, std::uint64_t seed)
    : envs_(std::move(envs)),
      embedder_(var),
      mode_(mode),
      bank_(&bank),
      use_test_split_(use_test_split),
      config_(config),
      ledger_(&ledger) {
  if (static_cast<int>(envs_.size()) != config_.num_envs) {
    throw ConfigError("collector: env count " + std::to_string(envs_.size()) +
                      " does not match config num_envs " + std::to_string(config_.num_envs));
  }
  Rng root(seed, 0xc0);
  for (std::size_t i = 0; i < envs_.size(); ++i) env_rng_.push_back(root.fork(i));
  obs_.resize(envs_.size());
  goal_.resize(envs_.size());
  hidden_.resize(envs_.size());
  prev_action_.assign(envs_.size(), -1);
}

void RolloutCollector::reset_env(int i) {
  const IntentSamples& split = bank_->split(use_test_split_);
  int goal_intent = env_rng_[i].uniform_int(kIntentCount);
  auto [obs, goal_sound] = envs_[i]->reset(env_rng_[i], goal_intent, &split);
  obs_[i] = std::move(obs);
  goal_[i] = embedder_.embed(goal_sound);  // episode-constant, memoized
  hidden_[i] = std::vector<float>(config_.recurrent_width, 0.0f);
  prev_action_[i] = -1;  // one-hot reads all-zero at episode start
}

float RolloutCollector::reward_for(int i, const Observation& obs) const {
  if (mode_ == TrainMode::sparse) {
    // completion check is a ground-truth simulator query
    ledger_->charge_query();
    return envs_[i]->success() ? 1.0f : 0.0f;
  }
  Embedding img = embedder_.var().encode_image(obs.image);
  if (mode_ == TrainMode::image_only) {
    return intrinsic_reward(img, goal_[i], goal_[i], RewardMode::image_only);
  }
  const Embedding& cur = embedder_.embed(obs.current_sound);
  return intrinsic_reward(img, cur, goal_[i], RewardMode::full);
}

RolloutBuffer RolloutCollector::collect(const PolicyNet& policy) {
  const IntentSamples& split = bank_->split(use_test_split_);
  if (!started_) {
    for (std::size_t i = 0; i < envs_.size(); ++i) reset_env(static_cast<int>(i));
    started_ = true;
  }

  RolloutBuffer buffer;
  buffer.horizon = config_.horizon;
  buffer.num_envs = config_.num_envs;
  buffer.env_steps.assign(envs_.size(), {});
  for (auto& v : buffer.env_steps) v.reserve(config_.horizon);
  buffer.initial_hidden = hidden_;

  double reward_sum = 0.0;
  for (int t = 0; t < config_.horizon; ++t) {
    for (std::size_t e = 0; e < envs_.size(); ++e) {
      Observation& obs = obs_[e];
      Embedding img = embedder_.var().encode_image(obs.image);
      RolloutBuffer::Entry entry;
      int acount = envs_[e]->action_count();
      entry.features.reserve(img.v.size() + goal_[e].v.size() + obs.state.size() + acount);
      entry.features.insert(entry.features.end(), img.v.begin(), img.v.end());
      entry.features.insert(entry.features.end(), goal_[e].v.begin(), goal_[e].v.end());
      entry.features.insert(entry.features.end(), obs.state.begin(), obs.state.end());
      for (int a = 0; a < acount; ++a) {
        entry.features.push_back(a == prev_action_[e] ? 1.0f : 0.0f);
      }

      PolicyNet::StepOut out = policy.forward_step(obs.image, entry.features, hidden_[e]);

      // categorical sample
      double mx = out.logits[0];
      for (float l : out.logits) mx = std::max(mx, static_cast<double>(l));
      std::vector<double> p(out.logits.size());
      double z = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a) {
        p[a] = std::exp(out.logits[a] - mx);
        z += p[a];
      }
      double u = env_rng_[e].uniform() * z;
      int action = 0;
      double acc = 0.0;
      for (std::size_t a = 0; a < p.size(); ++a) {
        acc += p[a];
        if (u < acc) {
          action = static_cast<int>(a);
          break;
        }
        action = static_cast<int>(a);
      }
      entry.action = action;
      entry.logp = static_cast<float>(std::log(p[action] / z));
      entry.value = out.value;

      StepResult sr = envs_[e]->step(action, env_rng_[e], &split);
      entry.reward = reward_for(static_cast<int>(e), sr.obs);
      entry.done = sr.done;
      entry.image = std::move(obs.image);
      reward_sum += entry.reward;

      if (sr.done) {
        buffer.episodes_finished += 1;
        buffer.episodes_succeeded += envs_[e]->success() ? 1 : 0;
        reset_env(static_cast<int>(e));
      } else {
        obs_[e] = std::move(sr.obs);
        prev_action_[e] = action;
      }
      buffer.env_steps[e].push_back(std::move(entry));
    }
  }

  // bootstrap values for the post-horizon states (hidden state untouched)
  buffer.bootstrap_value.resize(envs_.size());
  for (std::size_t e = 0; e < envs_.size(); ++e) {
    Embedding img = embedder_.var().encode_image(obs_[e].image);
    std::vector<float> features;
    features.insert(features.end(), img.v.begin(), img.v.end());
    features.insert(features.end(), goal_[e].v.begin(), goal_[e].v.end());
    features.insert(features.end(), obs_[e].state.begin(), obs_[e].state.end());
    for (int a = 0; a < envs_[e]->action_count(); ++a) {
      features.push_back(a == prev_action_[e] ? 1.0f : 0.0f);
    }
    std::vector<float> h = hidden_[e];
    buffer.bootstrap_value[e] = policy.forward_step(obs_[e].image, features, h).value;
  }

  buffer.mean_reward = reward_sum / buffer.total_steps();
  return buffer;
}

void compute_gae(RolloutBuffer& buffer, float gamma, float lambda) {
  buffer.advantages.assign(buffer.num_envs, std::vector<float>(buffer.horizon, 0.0f));
  buffer.returns.assign(buffer.num_envs, std::vector<float>(buffer.horizon, 0.0f));
  for (int e = 0; e < buffer.num_envs; ++e) {
    const auto& steps = buffer.env_steps[e];
    float gae = 0.0f;
    for (int t = buffer.horizon - 1; t >= 0; --t) {
      float nonterminal = steps[t].done ? 0.0f : 1.0f;
      float next_value = t == buffer.horizon - 1 ? buffer.bootstrap_value[e] : steps[t + 1].value;
      float delta = steps[t].reward + gamma * next_value * nonterminal - steps[t].value;
      gae = delta + gamma * lambda * nonterminal * gae;
      buffer.advantages[e][t] = gae;
      buffer.returns[e][t] = gae + steps[t].value;
    }
  }
}

std::string PpoStats::to_string() const {
  std::ostringstream out;
  out << "policy_loss=" << policy_loss << " value_loss=" << value_loss << " entropy=" << entropy
      << " clip_fraction=" << clip_fraction << " approx_kl=" << approx_kl
      << " grad_norm=" << grad_norm;
  return out.str();
}

PpoStats ppo_update(PolicyNet& policy, const RolloutBuffer& buffer, const PpoConfig& config,
                    Rng& rng) {
  if (buffer.advantages.empty()) throw UsageError("ppo_update: advantages not computed");

  // whole-buffer advantage normalization, once per update
  double mean = 0.0;
  for (const auto& env_adv : buffer.advantages) {
    for (float a : env_adv) mean += a;
  }
  mean /= buffer.total_steps();
  double var_acc = 0.0;
  for (const auto& env_adv : buffer.advantages) {
    for (float a : env_adv) var_acc += (a - mean) * (a - mean);
  }
  double stddev = std::sqrt(var_acc / buffer.total_steps());
  float inv_std = static_cast<float>(1.0 / (stddev + 1e-8));

  std::vector<std::vector<float>> norm_adv(buffer.num_envs,
                                           std::vector<float>(buffer.horizon, 0.0f));
  for (int e = 0; e < buffer.num_envs; ++e) {
    for (int t = 0; t < buffer.horizon; ++t) {
      norm_adv[e][t] = static_cast<float>((buffer.advantages[e][t] - mean)) * inv_std;
    }
  }

  AdamConfig adam;
  adam.lr = config.learning_rate;

  const int envs_per_mb = config.num_envs / config.minibatches;
  const int mb_count = envs_per_mb * config.horizon;
  std::vector<int> env_order(config.num_envs);
  std::iota(env_order.begin(), env_order.end(), 0);

  PpoStats totals;
  long long stat_batches = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (int i = config.num_envs - 1; i > 0; --i) {
      std::swap(env_order[i], env_order[rng.uniform_int(i + 1)]);
    }
    for (int mb = 0; mb < config.minibatches; ++mb) {
      GradMap grads;
      PpoStats stats;
      double pg_sum = 0.0, v_sum = 0.0, ent_sum = 0.0, clip_sum = 0.0, kl_sum = 0.0;

      for (int k = 0; k < envs_per_mb; ++k) {
        int e = env_order[mb * envs_per_mb + k];
        const auto& steps = buffer.env_steps[e];

        // replay forward with caches, resetting the recurrent state exactly
        // where the rollout did
        std::vector<PolicyNet::StepCacheSet> caches(config.horizon);
        std::vector<std::vector<float>> dlogits(config.horizon);
        std::vector<float> dvalue(config.horizon, 0.0f);
        std::vector<bool> reset_before(config.horizon, false);

        std::vector<float> h = buffer.initial_hidden[e];
        for (int t = 0; t < config.horizon; ++t) {
          if (t > 0 && steps[t - 1].done) {
            std::fill(h.begin(), h.end(), 0.0f);
            reset_before[t] = true;
          }
          PolicyNet::StepOut out =
              policy.forward_step_cached(steps[t].image, steps[t].features, h, caches[t]);
          h = caches[t].hidden_out;

          // softmax in double for stable logp/entropy
          int acount = policy.action_count();
          double mx = out.logits[0];
          for (float l : out.logits) mx = std::max(mx, static_cast<double>(l));
          std::vector<double> p(acount);
          double z = 0.0;
          for (int a = 0; a < acount; ++a) {
            p[a] = std::exp(out.logits[a] - mx);
            z += p[a];
          }
          for (int a = 0; a < acount; ++a) p[a] /= z;

          int action = steps[t].action;
          double logp_new = std::log(p[action]);
          double logratio = logp_new - steps[t].logp;
          double ratio = std::exp(logratio);
          double adv = norm_adv[e][t];

          double pg1 = -adv * ratio;
          double pg2 = -adv * std::clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps);
          double pg = std::max(pg1, pg2);

          double entropy = 0.0;
          for (int a = 0; a < acount; ++a) {
            if (p[a] > 1e-12) entropy -= p[a] * std::log(p[a]);
          }
          double vdiff = out.value - buffer.returns[e][t];

          pg_sum += pg;
          v_sum += vdiff * vdiff;
          ent_sum += entropy;
          clip_sum += std::abs(ratio - 1.0) > config.clip_eps ? 1.0 : 0.0;
          kl_sum += (ratio - 1.0) - logratio;

          // d loss / d logits and d loss / d value, mean over the minibatch
          double inv_n = 1.0 / mb_count;
          double dlogp = pg1 >= pg2 ? -adv * ratio : 0.0;
          dlogits[t].assign(acount, 0.0f);
          for (int a = 0; a < acount; ++a) {
            double g = dlogp * ((a == action ? 1.0 : 0.0) - p[a]);
            g += config.entropy_coef * p[a] * (std::log(std::max(p[a], 1e-12)) + entropy);
            dlogits[t][a] = static_cast<float>(g * inv_n);
          }
          dvalue[t] = static_cast<float>(config.value_coef * 2.0 * vdiff * inv_n);
        }
        policy.backward_sequence(caches, dlogits, dvalue, reset_before, grads);
      }

      stats.policy_loss = pg_sum / mb_count;
      stats.value_loss = config.value_coef * v_sum / mb_count;
      stats.entropy = ent_sum / mb_count;
      stats.clip_fraction = clip_sum / mb_count;
      stats.approx_kl = kl_sum / mb_count;
      double loss = stats.policy_loss + stats.value_loss - config.entropy_coef * stats.entropy;
      if (!std::isfinite(loss)) {
        throw NumericError("ppo_update: non-finite loss, aborting update [" + stats.to_string() +
                           "]");
      }

      stats.grad_norm = clip_grad_norm(grads, config.max_grad_norm);
      adam_step(policy.params(), grads, adam);

      totals.policy_loss += stats.policy_loss;
      totals.grad_norm += stats.grad_norm;
      totals.value_loss += stats.value_loss;
      totals.entropy += stats.entropy;
      totals.clip_fraction += stats.clip_fraction;
      totals.approx_kl += stats.approx_kl;
      stat_batches += 1;
    }
  }

  totals.policy_loss /= stat_batches;
  totals.grad_norm /= stat_batches;
  totals.value_loss /= stat_batches;
  totals.entropy /= stat_batches;
  totals.clip_fraction /= stat_batches;
  totals.approx_kl /= stat_batches;
  return totals;
}

TrainPolicyResult train_policy(PolicyNet& policy, const VarModel& var, EnvKind kind,
                               TrainMode mode, const PpoConfig& config, const MfccBank& bank,
                               const RenderTheme& theme, LabelLedger& ledger, std::uint64_t seed) {
  config.validate();
  std::vector<std::unique_ptr<Env>> envs;
  for (int i = 0; i < config.num_envs; ++i) {
    envs.push_back(make_env(kind));
    envs.back()->set_theme(theme);
  }
  RolloutCollector collector(std::move(envs), var, mode, bank, false, config, ledger, seed);
  Rng update_rng(seed, 0xbb);

  TrainPolicyResult result;
  long long steps = 0;
  int update = 0;
  while (steps < config.total_steps) {
    RolloutBuffer buffer = collector.collect(policy);
    steps += buffer.total_steps();
    compute_gae(buffer, config.gamma, config.gae_lambda);
    float frac = static_cast<float>(static_cast<double>(steps) / config.total_steps);
    PpoConfig scheduled = config;
    if (config.entropy_coef_final >= 0.0f) {
      scheduled.entropy_coef =
          config.entropy_coef + (config.entropy_coef_final - config.entropy_coef) * frac;
    }
    if (config.anneal_lr) {
      scheduled.learning_rate = config.learning_rate * std::max(0.05f, 1.0f - frac);
    }
    PpoStats stats = ppo_update(policy, buffer, scheduled, update_rng);

    UpdateLog log;
    log.update = ++update;
    log.env_steps = steps;
    log.mean_reward = buffer.mean_reward;
    log.success_rate = buffer.episodes_finished > 0
                           ? static_cast<double>(buffer.episodes_succeeded) / buffer.episodes_finished
                           : 0.0;
    log.stats = stats;
    log.triplet_labels = ledger.triplet_labels;
    log.queries = ledger.queries;
    result.curve.push_back(log);
  }
  return result;
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  for (std::size_t k = 0; k < per_intent.size(); ++k) {
    out << "success_intent" << k << " = " << per_intent[k] << "\n";
  }
  out << "episodes_per_intent = " << episodes_per_intent << "\n";
  out << "success_overall = " << overall << "\n";
  return out.str();
}

EvalReport evaluate_policy(const PolicyNet& policy, const VarModel& var, EnvKind kind,
                           const MfccBank& bank, bool use_test_split, int episodes_per_intent,
                           const RenderTheme& theme, std::uint64_t seed) {
  if (episodes_per_intent < 1) throw ConfigError("episodes_per_intent must be >= 1");
  const IntentSamples& split = bank.split(use_test_split);
  SoundEmbedder embedder(var);
  std::unique_ptr<Env> env = make_env(kind);
  env->set_theme(theme);

  EvalReport report;
  report.episodes_per_intent = episodes_per_intent;
  Rng root(seed, 0xe7);
  int total_success = 0;
  for (int intent = 0; intent < kIntentCount; ++intent) {
    int wins = 0;
    for (int ep = 0; ep < episodes_per_intent; ++ep) {
      Rng rng = root.fork(static_cast<std::uint64_t>(intent) * 100000 + ep);
      auto [obs, goal_sound] = env->reset(rng, intent, &split);
      const Embedding& goal = embedder.embed(goal_sound);
      std::vector<float> hidden(policy.core_width(), 0.0f);
      int prev_action = -1;
      for (int t = 0; t < env->max_steps(); ++t) {
        Embedding img = var.encode_image(obs.image);
        std::vector<float> features;
        features.insert(features.end(), img.v.begin(), img.v.end());
        features.insert(features.end(), goal.v.begin(), goal.v.end());
        features.insert(features.end(), obs.state.begin(), obs.state.end());
        for (int a = 0; a < env->action_count(); ++a) {
          features.push_back(a == prev_action ? 1.0f : 0.0f);
        }
        PolicyNet::StepOut out = policy.forward_step(obs.image, features, hidden);
        int action = 0;
        for (std::size_t a = 1; a < out.logits.size(); ++a) {
          if (out.logits[a] > out.logits[action]) action = static_cast<int>(a);
        }
        StepResult sr = env->step(action, rng, &split);
        obs = std::move(sr.obs);
        prev_action = action;
        if (sr.done) break;
      }
      wins += env->success() ? 1 : 0;
    }
    report.successes.push_back(wins);
    report.per_intent.push_back(static_cast<double>(wins) / episodes_per_intent);
    total_success += wins;
  }
  report.overall = static_cast<double>(total_success) / (kIntentCount * episodes_per_intent);
  return report;
}

FinetuneReport finetune(PolicyNet& policy, VarModel& var, EnvKind kind, std::uint64_t shift_seed,
                        int budget, const PpoConfig& rl_config, int var_epochs,
                        const MfccBank& bank, LabelLedger& ledger, std::uint64_t seed,
                        int eval_episodes_per_intent) {
  if (budget < 1) throw ConfigError("finetune: triplet budget must be >= 1");

  FinetuneReport report;
  RenderTheme base = RenderTheme::defaults();
  RenderTheme shifted = RenderTheme::shifted(shift_seed);

  report.pre_shift_success = evaluate_policy(policy, var, kind, bank, true,
                                             eval_episodes_per_intent, base, seed)
                                 .overall;
  report.post_shift_success = evaluate_policy(policy, var, kind, bank, true,
                                              eval_episodes_per_intent, shifted, seed)
                                  .overall;

  long long labels_before = ledger.triplet_labels;
  long long queries_before = ledger.queries;

  // non-expert data collection in the shifted world
  std::unique_ptr<Env> env = make_env(kind);
  env->set_theme(shifted);
  Rng collect_rng(seed, 0xf1);
  std::vector<Triplet> triplets =
      collect_triplets(*env, budget, collect_rng, bank.split(false), ledger);
  report.triplets_collected = static_cast<long long>(triplets.size());

  VarConfig tuned = var.config();
  tuned.epochs = var_epochs;
  var.set_training(tuned);
  train_var(var, triplets, seed ^ 0x5eedf17eULL);

  // self-supervised recovery: no current sounds assumed post-deployment
  train_policy(policy, var, kind, TrainMode::image_only, rl_config, bank, shifted, ledger,
               seed ^ 0xf17e0000ULL);

  report.recovered_success = evaluate_policy(policy, var, kind, bank, true,
                                             eval_episodes_per_intent, shifted, seed)
                                 .overall;
  report.ledger_triplet_delta = ledger.triplet_labels - labels_before;
  report.ledger_query_delta = ledger.queries - queries_before;
  return report;
}

}  // namespace sgrd
