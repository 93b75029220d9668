#include "sgrd/reward.hpp"

#include <cstring>

namespace sgrd {

namespace {

std::uint64_t fnv1a(const float* data, std::size_t count) {
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(data);
  std::size_t n = count * sizeof(float);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const Embedding& SoundEmbedder::embed(const Mfcc& sound) const {
  std::uint64_t key = fnv1a(sound.values.data.data(), sound.values.data.size());
  auto& bucket = memo_[key];
  for (const auto& [mfcc, emb] : bucket) {
    if (mfcc == sound) return emb;
  }
  bucket.emplace_back(sound, var_->encode_sound(sound));
  return bucket.back().second;
}

MdpState assemble_state(const VarModel& var, const Observation& obs,
                        const Embedding& goal_embedding) {
  MdpState state;
  state.image = obs.image;
  state.image_embedding = var.encode_image(obs.image).v;
  state.goal_embedding = goal_embedding.v;
  state.robot_state = obs.state;
  return state;
}

MdpState assemble_state(const VarModel& var, const Observation& obs, const Mfcc& goal_sound) {
  return assemble_state(var, obs, var.encode_sound(goal_sound));
}

float intrinsic_reward(const Embedding& image_embedding, const Embedding& current_sound_embedding,
                       const Embedding& goal_embedding, RewardMode mode) {
  double r = image_embedding.dot(goal_embedding);
  if (mode == RewardMode::full) r += current_sound_embedding.dot(goal_embedding);
  return static_cast<float>(r);
}

float intrinsic_reward(const VarModel& var, const Tensor& image, const Mfcc& current_sound,
                       const Mfcc& goal_sound, RewardMode mode) {
  Embedding img = var.encode_image(image);
  Embedding goal = var.encode_sound(goal_sound);
  if (mode == RewardMode::image_only) {
    return intrinsic_reward(img, goal, goal, mode);
  }
  Embedding cur = var.encode_sound(current_sound);
  return intrinsic_reward(img, cur, goal, mode);
}

}  // namespace sgrd
