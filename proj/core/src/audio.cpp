#include "sgrd/audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgrd/error.hpp"

namespace sgrd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kFrameLen = 400;
constexpr int kHop = 160;
constexpr int kFftSize = 512;
constexpr int kMelFilters = 26;
constexpr double kMelLowHz = 0.0;
constexpr double kMelHighHz = 8000.0;
constexpr double kLogFloor = 1e-10;

// Equal temperament relative to A4 = 440 Hz: C4, D4, E4, F4.
const double kIntentHz[kIntentCount] = {
    261.62556530059863,  // C4 (midi 60)
    293.66476791740757,  // D4 (midi 62)
    329.62755691286992,  // E4 (midi 64)
    349.22823143300388,  // F4 (midi 65)
};

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

struct MelBank {
  // weight[filter][bin] over the one-sided spectrum
  std::vector<std::vector<double>> weight;
};

const MelBank& mel_bank() {
  static const MelBank bank = [] {
    MelBank b;
    b.weight.assign(kMelFilters, std::vector<double>(kFftSize / 2 + 1, 0.0));
    double mel_lo = hz_to_mel(kMelLowHz);
    double mel_hi = hz_to_mel(kMelHighHz);
    std::vector<double> edges_hz(kMelFilters + 2);
    for (int p = 0; p < kMelFilters + 2; ++p) {
      double mel = mel_lo + (mel_hi - mel_lo) * p / (kMelFilters + 1);
      edges_hz[p] = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
    }
    for (int m = 0; m < kMelFilters; ++m) {
      double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
      for (int k = 0; k <= kFftSize / 2; ++k) {
        double f = static_cast<double>(k) * kSampleRate / kFftSize;
        if (f <= lo || f >= hi) continue;
        b.weight[m][k] = f < mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      }
    }
    return b;
  }();
  return bank;
}

}  // namespace

bool Mfcc::is_empty() const {
  for (float v : values.data) {
    if (v != 0.0f) return false;
  }
  return true;
}

Intent intent_of(int index) {
  if (index < 0 || index >= kIntentCount) {
    throw ConfigError("intent index out of range: " + std::to_string(index));
  }
  return Intent{index, kIntentHz[index]};
}

double intent_frequency(int index) { return intent_of(index).fundamental_hz; }

Waveform synth_command(const Intent& intent, Rng& rng) {
  const int n = kCommandSamples;
  Waveform w;
  w.samples.resize(n);

  double detune = 1.0 + 0.01 * rng.uniform(-1.0, 1.0);
  double f0 = intent.fundamental_hz * detune;

  // Fundamental at unit gain; overtones follow an instrument-like rolloff
  // (random brightness exponent, small per-harmonic jitter), capped strictly
  // below the fundamental so the dominant spectral peak stays on it.
  double gains[6];
  gains[0] = 1.0;
  double rolloff = rng.uniform(1.0, 2.0);
  for (int k = 1; k < 6; ++k) {
    double jitter = std::exp(rng.uniform(std::log(0.75), std::log(1.33)));
    gains[k] = std::min(0.6, std::pow(k + 1.0, -rolloff) * jitter);
  }
  double phases[6];
  for (int k = 0; k < 6; ++k) phases[k] = rng.uniform(0.0, 2.0 * kPi);

  double attack_s = rng.uniform(0.01, 0.05);
  double decay_tau = rng.uniform(0.8, 1.4);
  double snr_db = rng.uniform(30.0, 36.0);

  std::vector<double> clean(n);
  double power = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / kSampleRate;
    double env = std::min(t / attack_s, 1.0) * std::exp(-std::max(0.0, t - attack_s) / decay_tau);
    double s = 0.0;
    for (int k = 0; k < 6; ++k) {
      double fk = f0 * (k + 1);
      if (fk >= kSampleRate / 2.0) break;
      s += gains[k] * std::sin(2.0 * kPi * fk * t + phases[k]);
    }
    clean[i] = env * s;
    power += clean[i] * clean[i];
  }
  power /= n;

  double noise_std = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    clean[i] += noise_std * rng.normal();
    peak = std::max(peak, std::abs(clean[i]));
  }
  double scale = peak > 0.0 ? 0.95 / peak : 0.0;
  for (int i = 0; i < n; ++i) w.samples[i] = static_cast<float>(clean[i] * scale);
  return w;
}

Mfcc mfcc(const Waveform& w) {
  if (w.samples.empty()) throw ConfigError("mfcc: empty waveform");
  const int n = static_cast<int>(w.samples.size());
  int frame_count = n >= kFrameLen ? (n - kFrameLen) / kHop + 1 : 0;

  Mfcc out;  // zero-initialized: tail frames beyond the input stay zero
  std::vector<std::complex<double>> spec(kFftSize);
  std::vector<double> logmel(kMelFilters);
  const MelBank& bank = mel_bank();

  int emit = std::min(frame_count, kMfccFrames);
  for (int fr = 0; fr < emit; ++fr) {
    const float* x = w.samples.data() + static_cast<std::size_t>(fr) * kHop;
    for (int i = 0; i < kFftSize; ++i) {
      if (i < kFrameLen) {
        double win = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (kFrameLen - 1)));
        spec[i] = std::complex<double>(win * x[i], 0.0);
      } else {
        spec[i] = 0.0;
      }
    }
    fft(spec);
    for (int m = 0; m < kMelFilters; ++m) {
      double e = 0.0;
      const std::vector<double>& wgt = bank.weight[m];
      for (int k = 0; k <= kFftSize / 2; ++k) {
        if (wgt[k] != 0.0) e += wgt[k] * std::abs(spec[k]);
      }
      logmel[m] = std::log(std::max(e, kLogFloor));
    }
    for (int j = 0; j < kMfccCoeffs; ++j) {
      double c = 0.0;
      for (int m = 0; m < kMelFilters; ++m) {
        c += logmel[m] * std::cos(kPi * j * (2.0 * m + 1.0) / (2.0 * kMelFilters));
      }
      double s = j == 0 ? std::sqrt(1.0 / kMelFilters) : std::sqrt(2.0 / kMelFilters);
      out.values.at(fr, j) = static_cast<float>(s * c);
    }
  }
  return out;
}

Mfcc empty_mfcc() { return Mfcc{}; }

SoundDataset make_dataset(int train_n, int test_n, std::uint64_t seed) {
  if (train_n < 1 || test_n < 1) {
    throw ConfigError("dataset sizes must be >= 1, got train=" + std::to_string(train_n) +
                      " test=" + std::to_string(test_n));
  }
  SoundDataset ds;
  ds.seed = seed;
  ds.train.resize(kIntentCount);
  ds.test.resize(kIntentCount);
  Rng root(seed);
  for (int i = 0; i < kIntentCount; ++i) {
    Rng stream = root.fork(static_cast<std::uint64_t>(i));
    Intent intent = intent_of(i);
    ds.train[i].reserve(train_n);
    ds.test[i].reserve(test_n);
    for (int s = 0; s < train_n; ++s) ds.train[i].push_back(synth_command(intent, stream));
    for (int s = 0; s < test_n; ++s) ds.test[i].push_back(synth_command(intent, stream));
  }
  return ds;
}

namespace {

std::string wave_filename(int intent, const char* split, int index) {
  std::ostringstream name;
  name << "i" << intent << "_" << split << "_";
  name.width(5);
  name.fill('0');
  name << index;
  return name.str() + ".f32";
}

void write_waveform(const std::string& path, const Waveform& w) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(w.samples.data()),
            static_cast<std::streamsize>(w.samples.size() * 4));
  if (!out) throw IoError("write failed for " + path);
}

Waveform read_waveform(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + path);
  std::streamsize bytes = in.tellg();
  if (bytes % 4 != 0) throw FormatError(path + ": size is not a multiple of 4 bytes");
  in.seekg(0);
  Waveform w;
  w.samples.resize(static_cast<std::size_t>(bytes / 4));
  in.read(reinterpret_cast<char*>(w.samples.data()), bytes);
  if (!in) throw IoError("read failed for " + path);
  return w;
}

}  // namespace

void save_dataset(const SoundDataset& dataset, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "seed = " << dataset.seed << "\n";
  manifest << "sample_rate = " << kSampleRate << "\n";
  manifest << "duration_s = " << kCommandSeconds << "\n";
  manifest << "intents = " << kIntentCount << "\n";
  manifest << "train_per_intent = " << dataset.train[0].size() << "\n";
  manifest << "test_per_intent = " << dataset.test[0].size() << "\n";
  for (int i = 0; i < kIntentCount; ++i) {
    for (std::size_t s = 0; s < dataset.train[i].size(); ++s) {
      std::string name = wave_filename(i, "train", static_cast<int>(s));
      write_waveform(dir + "/" + name, dataset.train[i][s]);
      manifest << "file = " << name << " " << i << " train\n";
    }
    for (std::size_t s = 0; s < dataset.test[i].size(); ++s) {
      std::string name = wave_filename(i, "test", static_cast<int>(s));
      write_waveform(dir + "/" + name, dataset.test[i][s]);
      manifest << "file = " << name << " " << i << " test\n";
    }
  }
  std::ofstream out(dir + "/manifest.txt", std::ios::trunc);
  if (!out) throw IoError("cannot open " + dir + "/manifest.txt for writing");
  out << manifest.str();
}

SoundDataset load_dataset(const std::string& dir) {
  std::ifstream in(dir + "/manifest.txt");
  if (!in) throw IoError("cannot open " + dir + "/manifest.txt (run make-sounds first)");
  SoundDataset ds;
  ds.train.resize(kIntentCount);
  ds.test.resize(kIntentCount);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    ls >> key >> eq;
    if (key == "seed") {
      ls >> ds.seed;
    } else if (key == "sample_rate") {
      int rate = 0;
      ls >> rate;
      if (rate != kSampleRate) {
        throw FormatError(dir + ": unsupported sample rate " + std::to_string(rate));
      }
    } else if (key == "file") {
      std::string name, split;
      int intent = -1;
      ls >> name >> intent >> split;
      if (intent < 0 || intent >= kIntentCount || (split != "train" && split != "test")) {
        throw FormatError(dir + "/manifest.txt: bad file record: " + line);
      }
      Waveform w = read_waveform(dir + "/" + name);
      (split == "train" ? ds.train : ds.test)[intent].push_back(std::move(w));
    }
  }
  for (int i = 0; i < kIntentCount; ++i) {
    if (ds.train[i].empty() || ds.test[i].empty()) {
      throw FormatError(dir + ": manifest lists no samples for intent " + std::to_string(i));
    }
  }
  return ds;
}

MfccBank build_mfcc_bank(const SoundDataset& dataset) {
  MfccBank bank;
  bank.train.resize(kIntentCount);
  bank.test.resize(kIntentCount);
  for (int i = 0; i < kIntentCount; ++i) {
    bank.train[i].reserve(dataset.train[i].size());
    bank.test[i].reserve(dataset.test[i].size());
    for (const Waveform& w : dataset.train[i]) bank.train[i].push_back(mfcc(w));
    for (const Waveform& w : dataset.test[i]) bank.test[i].push_back(mfcc(w));
  }
  return bank;
}

}  // namespace sgrd
