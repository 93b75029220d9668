#include "sgrd/envs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgrd/checkpoint.hpp"
#include "sgrd/error.hpp"

namespace sgrd {

const char* to_string(EnvKind kind) {
  return kind == EnvKind::gridnav ? "gridnav" : "armreach";
}

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "gridnav") return EnvKind::gridnav;
  if (s == "armreach") return EnvKind::armreach;
  throw ConfigError("unknown env kind: " + s + " (expected gridnav or armreach)");
}

namespace {

std::array<float, 3> hsv(double h, double s, double v) {
  h = h - std::floor(h);
  double c = v * s;
  double hp = h * 6.0;
  double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  double m = v - c;
  return {static_cast<float>(r + m), static_cast<float>(g + m), static_cast<float>(b + m)};
}

}  // namespace

RenderTheme RenderTheme::defaults() {
  RenderTheme t;
  t.sky = {0.55f, 0.75f, 0.95f};
  t.floor = {0.45f, 0.38f, 0.30f};
  t.wall = {0.62f, 0.60f, 0.55f};
  t.table = {0.22f, 0.25f, 0.30f};
  t.block = {0.75f, 0.73f, 0.70f};
  t.tip = {1.00f, 0.35f, 0.10f};
  t.palette = {{{0.90f, 0.15f, 0.15f},
                {0.10f, 0.80f, 0.20f},
                {0.15f, 0.30f, 0.95f},
                {0.95f, 0.85f, 0.10f}}};
  t.light_gain = 1.0f;
  return t;
}

RenderTheme RenderTheme::shifted(std::uint64_t shift_seed) {
  Rng rng(shift_seed, 0xd0);
  RenderTheme t;
  t.sky = hsv(rng.uniform(), rng.uniform(0.4, 0.9), rng.uniform(0.4, 1.0));
  t.floor = hsv(rng.uniform(), rng.uniform(0.3, 0.9), rng.uniform(0.2, 0.8));
  t.wall = hsv(rng.uniform(), rng.uniform(0.2, 0.8), rng.uniform(0.3, 0.9));
  t.table = hsv(rng.uniform(), rng.uniform(0.3, 0.9), rng.uniform(0.15, 0.7));
  t.block = hsv(rng.uniform(), rng.uniform(0.2, 0.8), rng.uniform(0.5, 1.0));
  t.tip = hsv(rng.uniform(), rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0));
  // hue-spaced object palette keeps the four classes mutually distinct
  double base_hue = rng.uniform();
  for (int k = 0; k < kIntentCount; ++k) {
    double hue = base_hue + k * 0.25 + rng.uniform(-0.04, 0.04);
    t.palette[k] = hsv(hue, rng.uniform(0.6, 1.0), rng.uniform(0.6, 1.0));
  }
  t.light_gain = static_cast<float>(rng.uniform(0.7, 1.3));
  return t;
}

namespace {

constexpr int kImg = kImageSize;

inline void put_pixel(Tensor& img, int x, int y, const std::array<float, 3>& color, float gain,
                      float mix = 1.0f) {
  if (x < 0 || x >= kImg || y < 0 || y >= kImg) return;
  for (int c = 0; c < 3; ++c) {
    float v = std::min(1.0f, color[c] * gain);
    float& px = img[(c * kImg + y) * kImg + x];
    px = px * (1.0f - mix) + v * mix;
  }
}

void fill_rows(Tensor& img, int y0, int y1, const std::array<float, 3>& color, float gain,
               float shade_from = 1.0f, float shade_to = 1.0f) {
  for (int y = y0; y <= y1; ++y) {
    float s = shade_from;
    if (y1 > y0) s += (shade_to - shade_from) * static_cast<float>(y - y0) / (y1 - y0);
    for (int x = 0; x < kImg; ++x) {
      for (int c = 0; c < 3; ++c) {
        img[(c * kImg + y) * kImg + x] = std::min(1.0f, color[c] * gain * s);
      }
    }
  }
}

void draw_shape(Tensor& img, int shape, int cx, int cy, int half, const std::array<float, 3>& color,
                float gain) {
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      bool inside = false;
      switch (shape) {
        case 0: inside = true; break;                                  // square
        case 1: inside = dx * dx + dy * dy <= half * half; break;      // disc
        case 2: inside = std::abs(dx) * 2 <= dy + half; break;         // triangle (apex up)
        default: inside = std::abs(dx) * 3 <= half || std::abs(dy) * 3 <= half; break;  // plus
      }
      if (inside) put_pixel(img, cx + dx, cy + dy, color, gain);
    }
  }
}

// heading unit vectors: N, E, S, W (y grows downward)
constexpr int kFwdX[4] = {0, 1, 0, -1};
constexpr int kFwdY[4] = {-1, 0, 1, 0};

Mfcc sample_sound(int intent, Rng& rng, const IntentSamples& split) {
  const auto& list = split[intent];
  if (list.empty()) throw ConfigError("sound split has no samples for intent " + std::to_string(intent));
  return list[rng.uniform_int(static_cast<int>(list.size()))];
}

}  // namespace

GridNavEnv::GridNavEnv() : theme_(RenderTheme::defaults()) {}

std::pair<Observation, Mfcc> GridNavEnv::reset(Rng& rng, int goal_intent,
                                               const IntentSamples* split) {
  if (goal_intent < 0 || goal_intent >= kIntentCount) {
    throw ConfigError("goal intent out of range: " + std::to_string(goal_intent));
  }
  goal_ = goal_intent;
  step_count_ = 0;
  hold_count_ = 0;
  success_ = false;

  ax_ = rng.uniform_int(kArena);
  ay_ = rng.uniform_int(kArena);
  heading_ = rng.uniform_int(4);
  start_x_ = ax_;
  start_y_ = ay_;
  for (int k = 0; k < kIntentCount; ++k) {
    while (true) {
      int x = rng.uniform_int(kArena);
      int y = rng.uniform_int(kArena);
      bool clash = (x == ax_ && y == ay_);
      for (int j = 0; j < k && !clash; ++j) clash = objects_[j] == std::make_pair(x, y);
      if (!clash) {
        objects_[k] = {x, y};
        break;
      }
    }
  }

  Mfcc goal_sound;
  if (split) goal_sound = sample_sound(goal_, rng, *split);
  Mfcc current;
  int trig = trigger_intent();
  if (trig != kEmptyClass && split) current = sample_sound(trig, rng, *split);
  return {observe(current), goal_sound};
}

bool GridNavEnv::in_frustum(int ox, int oy, int* depth, int* lateral) const {
  int fx = kFwdX[heading_], fy = kFwdY[heading_];
  int rx = -fy, ry = fx;  // right-hand vector
  int dx = ox - ax_, dy = oy - ay_;
  int d = dx * fx + dy * fy;
  int l = dx * rx + dy * ry;
  // perspective cone: lateral reach grows with depth
  if (d >= 1 && d <= kFrustumDepth && l >= -d && l <= d) {
    if (depth) *depth = d;
    if (lateral) *lateral = l;
    return true;
  }
  return false;
}

int GridNavEnv::trigger_intent() const {
  int best = kEmptyClass;
  int best_dist = 1 << 20;
  for (int k = 0; k < kIntentCount; ++k) {
    int d, l;
    if (in_frustum(objects_[k].first, objects_[k].second, &d, &l)) {
      int dist = d * d + l * l;
      if (dist < best_dist) {  // tie resolved toward the smaller intent index
        best_dist = dist;
        best = k;
      }
    }
  }
  return best;
}

int GridNavEnv::diagnostic_class() const {
  int visible = 0;
  for (int k = 0; k < kIntentCount; ++k) {
    if (in_frustum(objects_[k].first, objects_[k].second, nullptr, nullptr)) ++visible;
  }
  if (visible > 1) return -1;  // two objects in view: class ambiguous for diagnostics
  return trigger_intent();
}

void GridNavEnv::update_success() {
  const auto& [gx, gy] = objects_[goal_];
  bool close = std::max(std::abs(gx - ax_), std::abs(gy - ay_)) <= 1;
  bool seen = in_frustum(gx, gy, nullptr, nullptr);
  if (close && seen) {
    if (++hold_count_ > kHoldSteps) success_ = true;
  } else {
    hold_count_ = 0;
  }
}

StepResult GridNavEnv::step(int action, Rng& rng, const IntentSamples* split) {
  if (action < 0 || action >= action_count()) {
    throw UsageError("gridnav: invalid action index " + std::to_string(action));
  }
  if (action == 0) {
    int nx = ax_ + kFwdX[heading_];
    int ny = ay_ + kFwdY[heading_];
    bool blocked = nx < 0 || nx >= kArena || ny < 0 || ny >= kArena;
    for (int k = 0; k < kIntentCount && !blocked; ++k) blocked = objects_[k] == std::make_pair(nx, ny);
    if (!blocked) {
      ax_ = nx;
      ay_ = ny;
    }
  } else if (action == 1) {
    heading_ = (heading_ + 3) % 4;
  } else {
    heading_ = (heading_ + 1) % 4;
  }
  step_count_ += 1;
  update_success();

  Mfcc current;
  int trig = trigger_intent();
  if (trig != kEmptyClass && split) current = sample_sound(trig, rng, *split);
  return {observe(current), step_count_ >= kHorizon};
}

Observation GridNavEnv::observe(const Mfcc& current) const {
  Observation obs;
  obs.image = render();
  obs.state = {static_cast<float>(ax_ - start_x_) / (kArena - 1),
               static_cast<float>(ay_ - start_y_) / (kArena - 1),
               static_cast<float>(kFwdX[heading_]), static_cast<float>(kFwdY[heading_])};
  obs.current_sound = current;
  return obs;
}

Tensor GridNavEnv::render() const {
  Tensor img({3, kImg, kImg});
  float gain = theme_.light_gain;
  const int horizon = 12;
  fill_rows(img, 0, horizon - 1, theme_.sky, gain);
  fill_rows(img, horizon, kImg - 1, theme_.floor, gain, 0.85f, 1.05f);

  int fx = kFwdX[heading_], fy = kFwdY[heading_];
  int rx = -fy, ry = fx;

  // wall bands per lateral column, nearer walls taller and brighter
  for (int l = -1; l <= 1; ++l) {
    int wall_d = 0;
    for (int d = 1; d <= kFrustumDepth; ++d) {
      int cx = ax_ + d * fx + l * rx;
      int cy = ay_ + d * fy + l * ry;
      if (cx < 0 || cx >= kArena || cy < 0 || cy >= kArena) {
        wall_d = d;
        break;
      }
    }
    if (wall_d == 0) continue;
    int x0 = l == -1 ? 0 : (l == 0 ? 11 : 22);
    int x1 = l == -1 ? 10 : (l == 0 ? 21 : 31);
    int half_h = wall_d == 1 ? 5 : (wall_d == 2 ? 3 : 1);
    float shade = 1.0f - 0.18f * static_cast<float>(wall_d - 1);
    for (int y = horizon - half_h; y <= horizon + half_h; ++y) {
      for (int x = x0; x <= x1; ++x) {
        put_pixel(img, x, y, theme_.wall, gain * shade);
      }
    }
  }

  // objects, far to near; screen position follows the perspective cone
  for (int d = kFrustumDepth; d >= 1; --d) {
    for (int l = -d; l <= d; ++l) {
      for (int k = 0; k < kIntentCount; ++k) {
        int od, ol;
        if (!in_frustum(objects_[k].first, objects_[k].second, &od, &ol)) continue;
        if (od != d || ol != l) continue;
        int cx = 16 + static_cast<int>(std::lround(11.0f * l / d));
        int cy = d == 1 ? 18 : (d == 2 ? 14 : 13);
        int half = d == 1 ? 7 : (d == 2 ? 4 : 2);
        draw_shape(img, k, cx, cy, half, theme_.palette[k], gain);
      }
    }
  }
  return img;
}

std::string GridNavEnv::trace_line() const {
  static const char* kHeadingName = "NESW";
  std::ostringstream out;
  out << step_count_ << " pose=" << ax_ << "," << ay_ << "," << kHeadingName[heading_]
      << " trigger=" << trigger_intent() << " success=" << (success_ ? 1 : 0);
  return out.str();
}

void GridNavEnv::place_for_test(int agent_x, int agent_y, int heading,
                                const std::array<std::pair<int, int>, kIntentCount>& object_cells,
                                int goal_intent) {
  ax_ = agent_x;
  ay_ = agent_y;
  start_x_ = agent_x;
  start_y_ = agent_y;
  heading_ = heading;
  objects_ = object_cells;
  goal_ = goal_intent;
  step_count_ = 0;
  hold_count_ = 0;
  success_ = false;
}

ArmReachEnv::ArmReachEnv() : theme_(RenderTheme::defaults()) {}

std::pair<Observation, Mfcc> ArmReachEnv::reset(Rng& rng, int goal_intent,
                                                const IntentSamples* split) {
  if (goal_intent < 0 || goal_intent >= kIntentCount) {
    throw ConfigError("goal intent out of range: " + std::to_string(goal_intent));
  }
  goal_ = goal_intent;
  step_count_ = 0;
  hold_count_ = 0;
  success_ = false;

  tx_ = static_cast<float>(rng.uniform(0.05, 0.95));
  ty_ = static_cast<float>(rng.uniform(0.05, 0.95));

  // randomized spacing via normalized gaps over the slack left of the
  // minimum separation
  const double margin = 0.08, min_gap = 0.12;
  const double slack = (1.0 - 2.0 * margin) - (kIntentCount - 1) * min_gap;
  double gaps[kIntentCount + 1];
  double sum = 0.0;
  for (double& g : gaps) {
    g = -std::log(std::max(rng.uniform(), 1e-12));
    sum += g;
  }
  double x = margin;
  for (int k = 0; k < kIntentCount; ++k) {
    x += gaps[k] / sum * slack;
    blocks_[k] = static_cast<float>(x);
    x += min_gap;
  }

  Mfcc goal_sound;
  if (split) goal_sound = sample_sound(goal_, rng, *split);
  Mfcc current;
  int trig = trigger_intent();
  if (trig != kEmptyClass && split) current = sample_sound(trig, rng, *split);
  return {observe(current), goal_sound};
}

int ArmReachEnv::trigger_intent() const {
  for (int k = 0; k < kIntentCount; ++k) {
    float dx = tx_ - blocks_[k];
    float dy = ty_ - kLineY;
    if (dx * dx + dy * dy <= kAlignRadius * kAlignRadius) return k;
  }
  return kEmptyClass;
}

int ArmReachEnv::diagnostic_class() const {
  float best = 1e9f;
  int best_k = 0;
  for (int k = 0; k < kIntentCount; ++k) {
    float dx = tx_ - blocks_[k];
    float dy = ty_ - kLineY;
    float dist = std::sqrt(dx * dx + dy * dy);
    if (dist < best) {
      best = dist;
      best_k = k;
    }
  }
  // only central alignments and clear empties qualify; the in-between band
  // is visually ambiguous by construction
  if (best <= 0.6f * kAlignRadius) return best_k;
  return best >= 3.0f * kAlignRadius ? kEmptyClass : -1;
}

void ArmReachEnv::update_success() {
  float dx = tx_ - blocks_[goal_];
  float dy = ty_ - kLineY;
  if (dx * dx + dy * dy <= kAlignRadius * kAlignRadius) {
    if (++hold_count_ > kHoldSteps) success_ = true;
  } else {
    hold_count_ = 0;
  }
}

StepResult ArmReachEnv::step(int action, Rng& rng, const IntentSamples* split) {
  if (action < 0 || action >= action_count()) {
    throw UsageError("armreach: invalid action index " + std::to_string(action));
  }
  // 8 compass directions then stay
  static const float kDx[9] = {0, 1, 1, 1, 0, -1, -1, -1, 0};
  static const float kDy[9] = {-1, -1, 0, 1, 1, 1, 0, -1, 0};
  if (action != 8) {
    float nx = kDx[action], ny = kDy[action];
    float inv = 1.0f / std::sqrt(nx * nx + ny * ny);
    tx_ = std::clamp(tx_ + kStep * nx * inv, 0.0f, 1.0f);
    ty_ = std::clamp(ty_ + kStep * ny * inv, 0.0f, 1.0f);
  }
  step_count_ += 1;
  update_success();

  Mfcc current;
  int trig = trigger_intent();
  if (trig != kEmptyClass && split) current = sample_sound(trig, rng, *split);
  return {observe(current), step_count_ >= kHorizon};
}

Observation ArmReachEnv::observe(const Mfcc& current) const {
  Observation obs;
  obs.image = render();
  obs.state = {tx_, ty_};
  obs.current_sound = current;
  return obs;
}

namespace {

// The arm camera frames the block line: full workspace width, vertical band
// [0.3, 0.7]. The extra rows-per-unit resolve tip/block alignment.
constexpr float kArmViewY0 = 0.3f;
constexpr float kArmViewYSpan = 0.4f;

// coverage of [b0, b1] over screen pixel p, both in screen units
inline float axis_coverage(int p, float b0, float b1) {
  float p0 = static_cast<float>(p) / kImg;
  float p1 = static_cast<float>(p + 1) / kImg;
  return std::max(0.0f, std::min(p1, b1) - std::max(p0, b0)) * kImg;
}

void draw_box_aa(Tensor& img, float x0, float x1, float wy0, float wy1,
                 const std::array<float, 3>& color, float gain) {
  float y0 = (wy0 - kArmViewY0) / kArmViewYSpan;
  float y1 = (wy1 - kArmViewY0) / kArmViewYSpan;
  int px0 = std::max(0, static_cast<int>(std::floor(x0 * kImg)));
  int px1 = std::min(kImg - 1, static_cast<int>(std::floor(x1 * kImg)));
  int py0 = std::max(0, static_cast<int>(std::floor(y0 * kImg)));
  int py1 = std::min(kImg - 1, static_cast<int>(std::floor(y1 * kImg)));
  for (int py = py0; py <= py1; ++py) {
    float cy = axis_coverage(py, y0, y1);
    for (int px = px0; px <= px1; ++px) {
      float cov = axis_coverage(px, x0, x1) * cy;
      if (cov > 0.0f) put_pixel(img, px, py, color, gain, std::min(1.0f, cov));
    }
  }
}

}  // namespace

Tensor ArmReachEnv::render() const {
  Tensor img({3, kImg, kImg});
  float gain = theme_.light_gain;
  fill_rows(img, 0, kImg - 1, theme_.table, gain, 0.95f, 1.05f);

  const float hs = 0.045f;
  for (int k = 0; k < kIntentCount; ++k) {
    draw_box_aa(img, blocks_[k] - hs, blocks_[k] + hs, kLineY - hs, kLineY + hs, theme_.block,
                gain);
  }
  // solid gripper marker slightly larger than a block: an aligned block is
  // occluded outright, which reads at 32 px where sub-pixel offsets do not
  const float tip_hs = 0.055f, arm = 0.09f, w = 0.016f;
  draw_box_aa(img, tx_ - arm, tx_ + arm, ty_ - w, ty_ + w, theme_.tip, gain);
  draw_box_aa(img, tx_ - w, tx_ + w, ty_ - arm, ty_ + arm, theme_.tip, gain);
  draw_box_aa(img, tx_ - tip_hs, tx_ + tip_hs, ty_ - tip_hs, ty_ + tip_hs, theme_.tip, gain);
  return img;
}

std::string ArmReachEnv::trace_line() const {
  std::ostringstream out;
  out << step_count_ << " pose=" << tx_ << "," << ty_ << " trigger=" << trigger_intent()
      << " success=" << (success_ ? 1 : 0);
  return out.str();
}

void ArmReachEnv::place_for_test(float tip_x, float tip_y,
                                 const std::array<float, kIntentCount>& block_x, int goal_intent) {
  tx_ = tip_x;
  ty_ = tip_y;
  blocks_ = block_x;
  goal_ = goal_intent;
  step_count_ = 0;
  hold_count_ = 0;
  success_ = false;
}

std::unique_ptr<Env> make_env(EnvKind kind) {
  if (kind == EnvKind::gridnav) return std::make_unique<GridNavEnv>();
  return std::make_unique<ArmReachEnv>();
}

TriggerResult trigger_sound(const Env& env, Rng& rng, const IntentSamples& split) {
  TriggerResult result;
  result.positive_intent = env.trigger_intent();
  if (result.positive_intent != kEmptyClass) {
    result.positive = sample_sound(result.positive_intent, rng, split);
    int other = rng.uniform_int(kIntentCount - 1);
    result.negative_intent = other >= result.positive_intent ? other + 1 : other;
  } else {
    result.negative_intent = rng.uniform_int(kIntentCount);
  }
  result.negative = sample_sound(result.negative_intent, rng, split);
  return result;
}

std::vector<Triplet> collect_triplets(Env& env, int n, Rng& rng, const IntentSamples& split,
                                      LabelLedger& ledger, double min_nonempty_frac) {
  if (n < 1) throw ConfigError("collect_triplets: n must be >= 1");
  const int want_nonempty = static_cast<int>(std::ceil(min_nonempty_frac * n));
  const int max_empty = n - want_nonempty;

  std::vector<Triplet> out;
  out.reserve(n);
  int empty_count = 0;
  bool need_reset = true;
  while (static_cast<int>(out.size()) < n) {
    if (need_reset) {
      env.reset(rng, rng.uniform_int(kIntentCount), &split);
      need_reset = false;
    }
    StepResult sr = env.step(rng.uniform_int(env.action_count()), rng, nullptr);
    need_reset = sr.done;
    TriggerResult trig = trigger_sound(env, rng, split);
    bool is_empty = trig.positive_intent == kEmptyClass;
    if (is_empty && empty_count >= max_empty) continue;  // empty quota filled, keep roaming
    Triplet t;
    t.image = std::move(sr.obs.image);
    t.positive = is_empty ? empty_mfcc() : std::move(trig.positive);
    t.negative = std::move(trig.negative);
    out.push_back(std::move(t));
    ledger.charge_triplet();
    if (is_empty) ++empty_count;
  }
  return out;
}

void apply_domain_shift(Env& env, std::uint64_t shift_seed) {
  env.set_theme(RenderTheme::shifted(shift_seed));
}

std::vector<LabeledImage> collect_diagnostic_images(Env& env, int per_class, Rng& rng) {
  std::vector<int> counts(kEmptyClass + 1, 0);
  std::vector<LabeledImage> out;
  int needed = per_class * (kEmptyClass + 1);
  bool need_reset = true;
  long long guard = 0;
  while (static_cast<int>(out.size()) < needed) {
    if (++guard > 5'000'000) {
      throw NumericError("diagnostic image collection failed to fill class quotas");
    }
    if (need_reset) {
      env.reset(rng, rng.uniform_int(kIntentCount), nullptr);
      need_reset = false;
    }
    StepResult sr = env.step(rng.uniform_int(env.action_count()), rng, nullptr);
    need_reset = sr.done;
    int cls = env.diagnostic_class();
    if (cls < 0 || counts[cls] >= per_class) continue;
    counts[cls] += 1;
    out.push_back(LabeledImage{std::move(sr.obs.image), cls});
  }
  return out;
}

void save_triplets(const std::vector<Triplet>& triplets, const std::string& path) {
  std::vector<std::pair<std::string, Tensor>> tensors;
  tensors.reserve(triplets.size() * 3 + 1);
  Tensor count({1});
  count[0] = static_cast<float>(triplets.size());
  tensors.emplace_back("count", count);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    std::string base = "t" + std::to_string(i);
    tensors.emplace_back(base + ".i", triplets[i].image);
    tensors.emplace_back(base + ".sp", triplets[i].positive.values);
    tensors.emplace_back(base + ".sn", triplets[i].negative.values);
  }
  write_tensor_file(path, tensors);
}

std::vector<Triplet> load_triplets(const std::string& path) {
  auto tensors = read_tensor_file_ordered(path);
  if (tensors.empty() || tensors[0].first != "count") {
    throw FormatError(path + ": not a triplet archive (missing count)");
  }
  std::size_t n = static_cast<std::size_t>(tensors[0].second[0]);
  if (tensors.size() != 1 + 3 * n) {
    throw FormatError(path + ": expected " + std::to_string(1 + 3 * n) + " tensors, found " +
                      std::to_string(tensors.size()));
  }
  std::vector<Triplet> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Triplet t;
    t.image = std::move(tensors[1 + 3 * i].second);
    t.positive.values = std::move(tensors[2 + 3 * i].second);
    t.negative.values = std::move(tensors[3 + 3 * i].second);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace sgrd
