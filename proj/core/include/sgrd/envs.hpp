#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sgrd/audio.hpp"
#include "sgrd/ledger.hpp"
#include "sgrd/rng.hpp"
#include "sgrd/var.hpp"

namespace sgrd {

enum class EnvKind { gridnav, armreach };
const char* to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& s);

// Rendering palette. Dynamics never read it; a theme swap (domain shift)
// changes pixels only.
struct RenderTheme {
  std::array<float, 3> sky{};
  std::array<float, 3> floor{};
  std::array<float, 3> wall{};
  std::array<float, 3> table{};
  std::array<float, 3> block{};
  std::array<float, 3> tip{};
  std::array<std::array<float, 3>, kIntentCount> palette{};
  float light_gain = 1.0f;

  static RenderTheme defaults();
  // Deterministic substitute theme; object colors stay mutually distinct so
  // the task remains solvable after the shift.
  static RenderTheme shifted(std::uint64_t shift_seed);
};

// Agent-facing observation. The image comes from the env renderer only; the
// current sound is the all-zeros matrix when no trigger fires. No object
// identity, distance, or target position appears here.
struct Observation {
  Tensor image;                // [3, 32, 32] in [0, 1]
  std::vector<float> state;    // robot state M_t
  Mfcc current_sound;          // S_t
};

struct StepResult {
  Observation obs;
  bool done = false;
};

// Sampled sounds per intent, usually one split of an MfccBank.
using IntentSamples = std::vector<std::vector<Mfcc>>;

class Env {
 public:
  virtual ~Env() = default;

  virtual EnvKind kind() const = 0;
  virtual int action_count() const = 0;
  virtual int max_steps() const = 0;
  virtual int state_dim() const = 0;

  // Randomizes the layout, zeroes step/hold counters, draws the one-time
  // goal sound from `split` for `goal_intent`.
  virtual std::pair<Observation, Mfcc> reset(Rng& rng, int goal_intent,
                                             const IntentSamples* split) = 0;

  // Applies the action, advances counters, samples S_t on trigger. Done is
  // raised exactly when the step counter reaches the horizon.
  virtual StepResult step(int action, Rng& rng, const IntentSamples* split) = 0;

  // Intent of the currently triggering object, or kEmptyClass.
  virtual int trigger_intent() const = 0;

  // As trigger_intent, but -1 when the view is ambiguous (diagnostics only).
  virtual int diagnostic_class() const = 0;

  // Latched within the episode once the hold condition has been met.
  virtual bool success() const = 0;

  virtual int goal_intent() const = 0;
  virtual int steps_taken() const = 0;
  virtual Tensor render() const = 0;
  virtual void set_theme(const RenderTheme& theme) = 0;
  virtual const RenderTheme& theme() const = 0;

  // "step pose trigger success" line for trace dumps.
  virtual std::string trace_line() const = 0;
};

std::unique_ptr<Env> make_env(EnvKind kind);

// 9x9 arena, agent pose (cell, heading), four shape/color-coded objects.
// Actions: forward, turn-left, turn-right. Horizon 80. An episode succeeds
// after the agent has been within Chebyshev distance 1 of the target with it
// in view for more than 5 consecutive steps.
class GridNavEnv final : public Env {
 public:
  static constexpr int kArena = 9;
  static constexpr int kHorizon = 80;
  static constexpr int kFrustumDepth = 3;
  static constexpr int kHoldSteps = 5;

  GridNavEnv();

  EnvKind kind() const override { return EnvKind::gridnav; }
  int action_count() const override { return 3; }
  int max_steps() const override { return kHorizon; }
  int state_dim() const override { return 4; }
  std::pair<Observation, Mfcc> reset(Rng& rng, int goal_intent,
                                     const IntentSamples* split) override;
  StepResult step(int action, Rng& rng, const IntentSamples* split) override;
  int trigger_intent() const override;
  int diagnostic_class() const override;
  bool success() const override { return success_; }
  int goal_intent() const override { return goal_; }
  int steps_taken() const override { return step_count_; }
  Tensor render() const override;
  void set_theme(const RenderTheme& theme) override { theme_ = theme; }
  const RenderTheme& theme() const override { return theme_; }
  std::string trace_line() const override;

  // test access
  void place_for_test(int agent_x, int agent_y, int heading,
                      const std::array<std::pair<int, int>, kIntentCount>& object_cells,
                      int goal_intent);

 private:
  Observation observe(const Mfcc& current) const;
  void update_success();
  bool in_frustum(int ox, int oy, int* depth, int* lateral) const;

  RenderTheme theme_;
  int ax_ = 0, ay_ = 0, heading_ = 0;  // heading: 0 N, 1 E, 2 S, 3 W
  int start_x_ = 0, start_y_ = 0;
  std::array<std::pair<int, int>, kIntentCount> objects_{};
  int goal_ = 0;
  int step_count_ = 0;
  int hold_count_ = 0;
  bool success_ = false;
};

// Unit-square workspace, gripper tip, four identical blocks on a horizontal
// line with randomized spacing; intent identity is the left-to-right rank.
// Actions: 8 compass moves of 0.03 plus stay. Horizon 120. Success after the
// tip stays within 0.05 of the target block for more than 50 consecutive
// steps.
class ArmReachEnv final : public Env {
 public:
  static constexpr int kHorizon = 120;
  static constexpr float kStep = 0.03f;
  static constexpr float kAlignRadius = 0.05f;
  static constexpr int kHoldSteps = 50;
  static constexpr float kLineY = 0.5f;

  ArmReachEnv();

  EnvKind kind() const override { return EnvKind::armreach; }
  int action_count() const override { return 9; }
  int max_steps() const override { return kHorizon; }
  int state_dim() const override { return 2; }
  std::pair<Observation, Mfcc> reset(Rng& rng, int goal_intent,
                                     const IntentSamples* split) override;
  StepResult step(int action, Rng& rng, const IntentSamples* split) override;
  int trigger_intent() const override;
  int diagnostic_class() const override;
  bool success() const override { return success_; }
  int goal_intent() const override { return goal_; }
  int steps_taken() const override { return step_count_; }
  Tensor render() const override;
  void set_theme(const RenderTheme& theme) override { theme_ = theme; }
  const RenderTheme& theme() const override { return theme_; }
  std::string trace_line() const override;

  // test access
  void place_for_test(float tip_x, float tip_y, const std::array<float, kIntentCount>& block_x,
                      int goal_intent);

 private:
  Observation observe(const Mfcc& current) const;
  void update_success();

  RenderTheme theme_;
  float tx_ = 0.5f, ty_ = 0.5f;
  std::array<float, kIntentCount> blocks_{};  // x positions, ascending
  int goal_ = 0;
  int step_count_ = 0;
  int hold_count_ = 0;
  bool success_ = false;
};

struct TriggerResult {
  int positive_intent = kEmptyClass;  // 0..3, or kEmptyClass for the empty sound
  int negative_intent = 0;            // always a real intent
  Mfcc positive;
  Mfcc negative;
};

// Positive sound of the triggering object (empty matrix when none), negative
// drawn uniformly from the other intents (any intent when positive is empty).
TriggerResult trigger_sound(const Env& env, Rng& rng, const IntentSamples& split);

// Uniform-random policy collection of exactly `n` triplets, at least
// `min_nonempty_frac` of them with a non-empty positive (collection keeps
// stepping past the empty quota until the mix is met). Charges the ledger
// two labels per recorded triplet.
std::vector<Triplet> collect_triplets(Env& env, int n, Rng& rng, const IntentSamples& split,
                                      LabelLedger& ledger, double min_nonempty_frac = 0.25);

void apply_domain_shift(Env& env, std::uint64_t shift_seed);

// Rejection-samples unambiguous labeled renders for the separation
// diagnostics (ground truth stays on this side of the fence; nothing here
// feeds training).
std::vector<LabeledImage> collect_diagnostic_images(Env& env, int per_class, Rng& rng);

// Triplet archive in the shared tensor container: per record an image tensor
// and two sound matrices.
void save_triplets(const std::vector<Triplet>& triplets, const std::string& path);
std::vector<Triplet> load_triplets(const std::string& path);

}  // namespace sgrd
