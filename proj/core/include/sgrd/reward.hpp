#pragma once

#include <unordered_map>
#include <vector>

#include "sgrd/envs.hpp"
#include "sgrd/var.hpp"

namespace sgrd {

// full: both similarity terms of the intrinsic reward.
// image_only: first term only, for fine-tuning when current sounds are not
// available.
enum class RewardMode { full, image_only };

// Composite RL observation. The current sound S_t is deliberately absent:
// it feeds the reward, never the policy.
struct MdpState {
  Tensor image;                        // I_t
  std::vector<float> image_embedding;  // f_I(I_t), unit norm
  std::vector<float> goal_embedding;   // f_S(S^g), unit norm, constant per episode
  std::vector<float> robot_state;      // M_t
};

// Content-addressed memo of the sound encoder. Identical matrices encode
// identically (the encoder is deterministic), so memoization is exact; the
// dataset is finite, so the table stays small. Exact byte comparison guards
// against hash collisions.
class SoundEmbedder {
 public:
  explicit SoundEmbedder(const VarModel& var) : var_(&var) {}

  const Embedding& embed(const Mfcc& sound) const;
  const VarModel& var() const { return *var_; }

 private:
  const VarModel* var_;
  mutable std::unordered_map<std::uint64_t, std::vector<std::pair<Mfcc, Embedding>>> memo_;
};

// Encodes the observation through the frozen VAR. The goal embedding is the
// caller's per-episode cached value.
MdpState assemble_state(const VarModel& var, const Observation& obs,
                        const Embedding& goal_embedding);
// Convenience overload encoding the goal sound in place.
MdpState assemble_state(const VarModel& var, const Observation& obs, const Mfcc& goal_sound);

// r = f_I(I) . f_S(S_g) [+ f_S(S_t) . f_S(S_g) in full mode].
// Unit-norm embeddings bound the result to [-2, 2] (image-only: [-1, 1]).
// No ledger charge, no environment query.
float intrinsic_reward(const Embedding& image_embedding, const Embedding& current_sound_embedding,
                       const Embedding& goal_embedding, RewardMode mode);
float intrinsic_reward(const VarModel& var, const Tensor& image, const Mfcc& current_sound,
                       const Mfcc& goal_sound, RewardMode mode);

}  // namespace sgrd
