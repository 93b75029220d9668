#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "helpers.hpp"
#include "sgrd/envs.hpp"
#include "sgrd/reward.hpp"

using namespace sgrd;
using sgrd::test::random_tensor;

namespace {

Embedding unit(std::vector<float> v) {
  Embedding e{std::move(v)};
  double n = e.norm();
  for (auto& x : e.v) x = static_cast<float>(x / n);
  return e;
}

Embedding random_unit(Rng& rng) {
  return unit({(float)rng.normal(), (float)rng.normal(), (float)rng.normal()});
}

Mfcc random_mfcc(Rng& rng) {
  Mfcc m;
  for (auto& v : m.values.data) v = static_cast<float>(rng.normal() * 20.0);
  return m;
}

}  // namespace

TEST_CASE("intrinsic_reward: perfect alignment of all three embeddings gives 2") {
  Embedding e = unit({0.2f, -0.5f, 0.8f});
  CHECK(intrinsic_reward(e, e, e, RewardMode::full) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("intrinsic_reward: orthogonality gives 0") {
  Embedding img = unit({1, 0, 0});
  Embedding cur = unit({0, 1, 0});
  Embedding goal = unit({0, 0, 1});
  CHECK(intrinsic_reward(img, cur, goal, RewardMode::full) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("intrinsic_reward: image-only equals the first term of full mode") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Embedding img = random_unit(rng);
    Embedding cur = random_unit(rng);
    Embedding goal = random_unit(rng);
    float full = intrinsic_reward(img, cur, goal, RewardMode::full);
    float image_only = intrinsic_reward(img, cur, goal, RewardMode::image_only);
    CHECK(image_only == doctest::Approx(img.dot(goal)).epsilon(1e-6));
    CHECK(full == doctest::Approx(image_only + cur.dot(goal)).epsilon(1e-5));
  }
}

TEST_CASE("intrinsic_reward: bounds from unit norms") {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    Embedding img = random_unit(rng);
    Embedding cur = random_unit(rng);
    Embedding goal = random_unit(rng);
    float full = intrinsic_reward(img, cur, goal, RewardMode::full);
    float image_only = intrinsic_reward(img, cur, goal, RewardMode::image_only);
    CHECK(full >= -2.0f);
    CHECK(full <= 2.0f);
    CHECK(image_only >= -1.0f);
    CHECK(image_only <= 1.0f);
  }
}

TEST_CASE("intrinsic_reward: invariant under a common rotation") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Embedding img = random_unit(rng);
    Embedding cur = random_unit(rng);
    Embedding goal = random_unit(rng);
    // Gram-Schmidt rotation
    std::array<std::array<double, 3>, 3> q{};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) q[r][c] = rng.normal();
      for (int prev = 0; prev < r; ++prev) {
        double dot = 0.0;
        for (int c = 0; c < 3; ++c) dot += q[r][c] * q[prev][c];
        for (int c = 0; c < 3; ++c) q[r][c] -= dot * q[prev][c];
      }
      double n = 0.0;
      for (int c = 0; c < 3; ++c) n += q[r][c] * q[r][c];
      for (int c = 0; c < 3; ++c) q[r][c] /= std::sqrt(n);
    }
    auto rot = [&](const Embedding& e) {
      Embedding out{std::vector<float>(3)};
      for (int r = 0; r < 3; ++r) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += q[r][c] * e.v[c];
        out.v[r] = static_cast<float>(s);
      }
      return out;
    };
    float a = intrinsic_reward(img, cur, goal, RewardMode::full);
    float b = intrinsic_reward(rot(img), rot(cur), rot(goal), RewardMode::full);
    CHECK(std::abs(a - b) < 1e-5);
  }
}

TEST_CASE("intrinsic_reward: the Mfcc-level overload matches the embedding-level one") {
  VarModel var(VarConfig{}, 11);
  Rng rng(12);
  Tensor img = random_tensor({3, 32, 32}, rng, 0.3);
  for (auto& v : img.data) v = std::clamp(v + 0.5f, 0.0f, 1.0f);
  Mfcc cur = random_mfcc(rng);
  Mfcc goal = random_mfcc(rng);

  float direct = intrinsic_reward(var, img, cur, goal, RewardMode::full);
  float via_emb = intrinsic_reward(var.encode_image(img), var.encode_sound(cur),
                                   var.encode_sound(goal), RewardMode::full);
  CHECK(direct == doctest::Approx(via_emb).epsilon(1e-6));
}

TEST_CASE("assemble_state: deterministic, unit-norm embeddings, goal cached per episode") {
  VarModel var(VarConfig{}, 21);
  MfccBank bank = build_mfcc_bank(make_dataset(3, 1, 22));
  auto env = make_env(EnvKind::gridnav);
  Rng rng(23);
  auto [obs, goal_sound] = env->reset(rng, 1, &bank.train);

  Embedding goal = var.encode_sound(goal_sound);
  MdpState a = assemble_state(var, obs, goal);
  MdpState b = assemble_state(var, obs, goal);
  CHECK(a.image_embedding == b.image_embedding);
  CHECK(a.goal_embedding == b.goal_embedding);
  CHECK(a.robot_state == b.robot_state);

  Embedding img_emb{a.image_embedding};
  Embedding goal_emb{a.goal_embedding};
  CHECK(std::abs(img_emb.norm() - 1.0) < 1e-5);
  CHECK(std::abs(goal_emb.norm() - 1.0) < 1e-5);

  // the goal embedding stays constant across the episode's states
  StepResult sr = env->step(0, rng, &bank.train);
  MdpState c = assemble_state(var, sr.obs, goal);
  CHECK(c.goal_embedding == a.goal_embedding);
  CHECK(assemble_state(var, obs, goal_sound).goal_embedding == a.goal_embedding);
}

TEST_CASE("SoundEmbedder: memoized encoding is exact") {
  VarModel var(VarConfig{}, 31);
  SoundEmbedder embedder(var);
  Rng rng(32);
  Mfcc a = random_mfcc(rng);
  Mfcc b = random_mfcc(rng);

  const Embedding& ea1 = embedder.embed(a);
  CHECK(ea1.v == var.encode_sound(a).v);
  const Embedding& ea2 = embedder.embed(a);
  CHECK(&ea1 == &ea2);  // served from the memo
  CHECK(embedder.embed(b).v == var.encode_sound(b).v);
  CHECK(embedder.embed(empty_mfcc()).v == var.encode_sound(empty_mfcc()).v);
}

TEST_CASE("with a trained embedding, goal-matching states earn more reward") {
  // small but real: train on gridnav triplets, then compare mean reward on
  // states whose trigger matches the goal vs those that do not
  MfccBank bank = build_mfcc_bank(make_dataset(30, 5, 41));
  auto env = make_env(EnvKind::gridnav);
  Rng rng(42);
  LabelLedger ledger;
  auto triplets = collect_triplets(*env, 3000, rng, bank.train, ledger);
  VarConfig cfg;
  cfg.epochs = 4;
  VarModel var(cfg, 43);
  train_var(var, triplets, 44);

  SoundEmbedder embedder(var);
  double match_sum = 0.0, other_sum = 0.0;
  long long match_n = 0, other_n = 0;
  for (int episode = 0; episode < 40; ++episode) {
    int goal_intent = rng.uniform_int(kIntentCount);
    auto [obs, goal_sound] = env->reset(rng, goal_intent, &bank.train);
    const Embedding& goal = embedder.embed(goal_sound);
    for (int t = 0; t < 40; ++t) {
      StepResult sr = env->step(rng.uniform_int(3), rng, &bank.train);
      float r = intrinsic_reward(var.encode_image(sr.obs.image),
                                 embedder.embed(sr.obs.current_sound), goal, RewardMode::full);
      if (env->trigger_intent() == goal_intent) {
        match_sum += r;
        ++match_n;
      } else {
        other_sum += r;
        ++other_n;
      }
      if (sr.done) break;
    }
  }
  REQUIRE(match_n > 10);
  REQUIRE(other_n > 10);
  CHECK(match_sum / match_n > other_sum / other_n);
}
