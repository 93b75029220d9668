// Microbenchmarks for the pipeline's hot paths: audio feature extraction,
// encoder forward/backward, env stepping/rendering, and the policy step that
// dominates RL wall time.

#include <benchmark/benchmark.h>

#include "sgrd/audio.hpp"
#include "sgrd/envs.hpp"
#include "sgrd/ppo.hpp"
#include "sgrd/reward.hpp"
#include "sgrd/var.hpp"

namespace {

using namespace sgrd;

Waveform bench_waveform() {
  Rng rng(1);
  return synth_command(intent_of(0), rng);
}

void BM_SynthCommand(benchmark::State& state) {
  Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth_command(intent_of(1), rng));
  }
}
BENCHMARK(BM_SynthCommand);

void BM_Mfcc(benchmark::State& state) {
  Waveform w = bench_waveform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfcc(w));
  }
}
BENCHMARK(BM_Mfcc);

void BM_EncodeImage(benchmark::State& state) {
  VarModel model(VarConfig{}, 3);
  Rng rng(4);
  Tensor img({3, 32, 32});
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.encode_image(img));
  }
}
BENCHMARK(BM_EncodeImage);

void BM_EncodeSound(benchmark::State& state) {
  VarModel model(VarConfig{}, 5);
  Mfcc m = mfcc(bench_waveform());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.encode_sound(m));
  }
}
BENCHMARK(BM_EncodeSound);

void BM_TripletForwardBackward(benchmark::State& state) {
  VarModel model(VarConfig{}, 6);
  Rng rng(7);
  Triplet t;
  t.image = Tensor({3, 32, 32});
  for (auto& v : t.image.data) v = static_cast<float>(rng.uniform());
  t.positive = mfcc(bench_waveform());
  t.negative = empty_mfcc();
  for (auto _ : state) {
    GradMap grads;
    benchmark::DoNotOptimize(triplet_forward_backward(model, t, 1.0f, grads));
  }
}
BENCHMARK(BM_TripletForwardBackward);

void BM_GridNavStep(benchmark::State& state) {
  MfccBank bank = build_mfcc_bank(make_dataset(2, 1, 8));
  GridNavEnv env;
  Rng rng(9);
  env.reset(rng, 0, &bank.train);
  int action = 0;
  for (auto _ : state) {
    StepResult sr = env.step(action, rng, &bank.train);
    benchmark::DoNotOptimize(sr.obs.image.data.data());
    action = (action + 1) % env.action_count();
    if (sr.done) env.reset(rng, 0, &bank.train);
  }
}
BENCHMARK(BM_GridNavStep);

void BM_ArmReachRender(benchmark::State& state) {
  ArmReachEnv env;
  Rng rng(10);
  env.reset(rng, 0, nullptr);
  for (auto _ : state) {
    benchmark::DoNotOptimize(env.render());
  }
}
BENCHMARK(BM_ArmReachRender);

void BM_PolicyForwardStep(benchmark::State& state) {
  PpoConfig pc;
  PolicyNet policy(3, 4, 3, pc, 11);
  Rng rng(12);
  Tensor img({3, 32, 32});
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  std::vector<float> features(3 + 3 + 4, 0.3f);
  std::vector<float> hidden = policy.zero_hidden();
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy.forward_step(img, features, hidden));
  }
}
BENCHMARK(BM_PolicyForwardStep);

}  // namespace

BENCHMARK_MAIN();
