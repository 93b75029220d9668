#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgrd/audio.hpp"
#include "sgrd/net.hpp"
#include "sgrd/tensor.hpp"

namespace sgrd {

inline constexpr int kImageSize = 32;
inline constexpr int kImageChannels = 3;
// Class index used for the empty sound / nothing-in-view image class in
// diagnostics; the four intents are 0..3.
inline constexpr int kEmptyClass = kIntentCount;

// MFCC matrices enter the sound encoder scaled into the recurrent cell's
// useful dynamic range. Scaling preserves the all-zeros empty sound.
inline constexpr float kMfccInputScale = 0.02f;

struct VarConfig {
  int latent_dim = 3;
  float margin = 1.0f;  // working range 1.0 - 1.2 on a unit hypersphere
  float learning_rate = 1e-3f;
  int batch_size = 32;
  int epochs = 12;

  void validate() const;  // throws ConfigError
};

// d-dimensional unit vector on the hypersphere.
struct Embedding {
  std::vector<float> v;

  int dim() const { return static_cast<int>(v.size()); }
  double dot(const Embedding& other) const;
  double norm() const;
};

// (anchor image, positive sound, negative sound) training record. The
// positive and negative always differ as intents (empty counts as its own
// intent); no class label travels with the record.
struct Triplet {
  Tensor image;  // [3, n, n] floats in [0, 1]
  Mfcc positive;
  Mfcc negative;
};

// Joint visual-audio embedding: image encoder (conv stack + dense +
// l2-normalize) and sound encoder (bidirectional recurrent + mean-pool +
// dense + l2-normalize), both onto the same unit hypersphere.
class VarModel {
 public:
  VarModel() = default;
  VarModel(const VarConfig& config, std::uint64_t seed);

  const VarConfig& config() const { return config_; }
  const Net& image_net() const { return image_net_; }
  const Net& sound_net() const { return sound_net_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  Embedding encode_image(const Tensor& image) const;
  Embedding encode_sound(const Mfcc& sound) const;

  // Adjusts training hyperparameters in place (fine-tuning runs fewer
  // epochs); architecture fields must not change.
  void set_training(const VarConfig& config);

  // Sound matrix as the tensor actually fed to the sound net (scaled).
  static Tensor sound_input(const Mfcc& sound);

 private:
  VarConfig config_;
  Net image_net_;
  Net sound_net_;
  ParamStore params_;

  friend struct VarTrainAccess;
};

// max(0, |vi - vp|^2 - |vi - vn|^2 + margin); subgradient 0 at the hinge.
float triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative,
                   float margin);

struct TripletLossGrads {
  float loss = 0.0f;
  std::vector<float> d_anchor, d_positive, d_negative;
};
TripletLossGrads triplet_loss_with_grads(const Embedding& anchor, const Embedding& positive,
                                         const Embedding& negative, float margin);

// Forward all three branches of one triplet, add the loss gradients into
// `grads` scaled by `grad_scale`. Returns the loss value.
float triplet_forward_backward(VarModel& model, const Triplet& triplet, float grad_scale,
                               GradMap& grads);

struct VarTrainResult {
  std::vector<double> epoch_mean_loss;
};

// Minibatch Adam on the mean triplet loss. Deterministic given `seed`.
VarTrainResult train_var(VarModel& model, const std::vector<Triplet>& triplets,
                         std::uint64_t seed);

struct LabeledImage {
  Tensor image;
  int class_index;  // 0..3 or kEmptyClass
};
struct LabeledSound {
  Mfcc sound;
  int class_index;
};

struct SeparationReport {
  double intra_mean_cos = 0.0;
  std::optional<double> inter_mean_cos;  // absent with a single class
  double separation = 0.0;               // intra - inter (0 when inter absent)
  double centroid_accuracy = 0.0;        // nearest-sound-centroid image classification
  int class_count = 0;
  std::vector<int> classes;
  std::vector<std::vector<float>> sound_centroids;  // per listed class
  std::vector<std::string> warnings;

  std::string to_text() const;
};

// Diagnostic clustering quality: mean cosine similarity of image/sound pairs
// that share a class vs pairs that do not, plus nearest-sound-centroid image
// classification. Ground-truth classes are used here only, never in training.
SeparationReport eval_separation(const VarModel& model, const std::vector<LabeledImage>& images,
                                 const std::vector<LabeledSound>& sounds);

// Per-point embedding dump for external plotting: "class modality v0 .. vd".
void dump_embeddings(const VarModel& model, const std::vector<LabeledImage>& images,
                     const std::vector<LabeledSound>& sounds, const std::string& path);

void save_var(const VarModel& model, const std::string& path);
VarModel load_var(const std::string& path);

}  // namespace sgrd
