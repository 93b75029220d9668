#pragma once

#include <string>
#include <vector>

#include "sgrd/rng.hpp"
#include "sgrd/tensor.hpp"

namespace sgrd {

inline constexpr int kSampleRate = 16000;
inline constexpr double kCommandSeconds = 0.64;
inline constexpr int kCommandSamples = 10240;  // 0.64 s at 16 kHz

inline constexpr int kMfccFrames = 64;   // l
inline constexpr int kMfccCoeffs = 13;   // m
inline constexpr int kIntentCount = 4;

// Mono float32 audio in [-1, 1] at the fixed project sample rate.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = kSampleRate;
};

// l x m matrix of audio features; the sound observation fed to the sound
// encoder. The empty sound is exactly the all-zeros matrix.
struct Mfcc {
  Tensor values{std::vector<int>{kMfccFrames, kMfccCoeffs}};

  bool is_empty() const;
  bool operator==(const Mfcc& other) const { return values.data == other.values.data; }
};

// One of the four tonal command classes. Fundamentals are the
// equal-temperament frequencies of the notes C4, D4, E4 and F4.
struct Intent {
  int index = 0;
  double fundamental_hz = 0.0;
};

Intent intent_of(int index);
double intent_frequency(int index);

// 0.64 s tone at the intent fundamental: randomized harmonic profile
// (harmonics 1-6, log-uniform gains below the fundamental), random
// attack/decay envelope, detune up to +-1%, additive noise at SNR >= 20 dB,
// peak-normalized.
Waveform synth_command(const Intent& intent, Rng& rng);

// Frame 400 samples (25 ms), hop 160 (10 ms), Hann window, 512-point
// magnitude spectrum, 26 triangular mel filters over 0-8000 Hz, log-energy
// floor 1e-10, orthonormal DCT-II, coefficients 0-12. Output padded or
// truncated to exactly 64 frames (zero-pad at the tail).
Mfcc mfcc(const Waveform& w);

// The all-zeros matrix delivered when no sound trigger holds. Definitional:
// it does not pass through the mfcc pipeline.
Mfcc empty_mfcc();

// Per-intent train/test waveform lists, disjoint by construction (the test
// draws use later indices of the same per-intent stream).
struct SoundDataset {
  std::vector<std::vector<Waveform>> train;  // [intent][sample]
  std::vector<std::vector<Waveform>> test;
  std::uint64_t seed = 0;
};

SoundDataset make_dataset(int train_n, int test_n, std::uint64_t seed);

void save_dataset(const SoundDataset& dataset, const std::string& dir);
SoundDataset load_dataset(const std::string& dir);

// MFCCs of a whole dataset, precomputed once; the reinforcement-learning and
// collection loops index into this instead of re-running the pipeline.
struct MfccBank {
  std::vector<std::vector<Mfcc>> train;  // [intent][sample]
  std::vector<std::vector<Mfcc>> test;

  const std::vector<std::vector<Mfcc>>& split(bool test_split) const {
    return test_split ? test : train;
  }
};

MfccBank build_mfcc_bank(const SoundDataset& dataset);

}  // namespace sgrd
