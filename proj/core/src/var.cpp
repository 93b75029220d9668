#include "sgrd/var.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sgrd/checkpoint.hpp"
#include "sgrd/error.hpp"
#include "sgrd/optim.hpp"

namespace sgrd {

void VarConfig::validate() const {
  if (latent_dim < 2) throw ConfigError("latent_dim must be >= 2, got " + std::to_string(latent_dim));
  if (!(margin > 0.0f)) throw ConfigError("margin must be > 0, got " + std::to_string(margin));
  if (!(learning_rate > 0.0f)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

double Embedding::dot(const Embedding& other) const {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<double>(v[i]) * other.v[i];
  return s;
}

double Embedding::norm() const {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

namespace {

std::vector<LayerSpec> image_layers(int latent_dim) {
  return {LayerSpec::make_conv2d(kImageChannels, 8, 3, 2),
          LayerSpec::make_relu(),
          LayerSpec::make_conv2d(8, 16, 3, 2),
          LayerSpec::make_relu(),
          LayerSpec::make_conv2d(16, 32, 3, 2),
          LayerSpec::make_relu(),
          LayerSpec::make_dense(32 * 3 * 3, latent_dim),
          LayerSpec::make_l2_normalize()};
}

std::vector<LayerSpec> sound_layers(int latent_dim) {
  return {LayerSpec::make_recurrent_bi(kMfccCoeffs, 32),
          LayerSpec::make_mean_pool(),
          LayerSpec::make_dense(64, latent_dim),
          LayerSpec::make_l2_normalize()};
}

Embedding to_embedding(Tensor t) {
  Embedding e;
  e.v = std::move(t.data);
  return e;
}

}  // namespace

VarModel::VarModel(const VarConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  image_net_ = Net("fI", image_layers(config_.latent_dim));
  sound_net_ = Net("fS", sound_layers(config_.latent_dim));
  Rng rng(seed, 0x5a1);
  image_net_.init_params(params_, rng);
  sound_net_.init_params(params_, rng);
}

void VarModel::set_training(const VarConfig& config) {
  config.validate();
  if (config.latent_dim != config_.latent_dim) {
    throw ConfigError("set_training cannot change latent_dim");
  }
  config_ = config;
}

Tensor VarModel::sound_input(const Mfcc& sound) {
  Tensor t = sound.values;
  for (auto& x : t.data) x *= kMfccInputScale;
  return t;
}

Embedding VarModel::encode_image(const Tensor& image) const {
  return to_embedding(image_net_.forward(params_, image));
}

Embedding VarModel::encode_sound(const Mfcc& sound) const {
  return to_embedding(sound_net_.forward(params_, sound_input(sound)));
}

float triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative,
                   float margin) {
  double dp = 0.0, dn = 0.0;
  for (std::size_t i = 0; i < anchor.v.size(); ++i) {
    double ep = static_cast<double>(anchor.v[i]) - positive.v[i];
    double en = static_cast<double>(anchor.v[i]) - negative.v[i];
    dp += ep * ep;
    dn += en * en;
  }
  return static_cast<float>(std::max(0.0, dp - dn + margin));
}

TripletLossGrads triplet_loss_with_grads(const Embedding& anchor, const Embedding& positive,
                                         const Embedding& negative, float margin) {
  TripletLossGrads g;
  g.loss = triplet_loss(anchor, positive, negative, margin);
  std::size_t d = anchor.v.size();
  g.d_anchor.assign(d, 0.0f);
  g.d_positive.assign(d, 0.0f);
  g.d_negative.assign(d, 0.0f);
  if (g.loss > 0.0f) {
    for (std::size_t i = 0; i < d; ++i) {
      g.d_anchor[i] = 2.0f * (negative.v[i] - positive.v[i]);
      g.d_positive[i] = 2.0f * (positive.v[i] - anchor.v[i]);
      g.d_negative[i] = 2.0f * (anchor.v[i] - negative.v[i]);
    }
  }
  return g;
}

float triplet_forward_backward(VarModel& model, const Triplet& triplet, float grad_scale,
                               GradMap& grads) {
  const Net& fi = model.image_net();
  const Net& fs = model.sound_net();
  const ParamStore& store = model.params();

  NetCache ci, cp, cn;
  Embedding vi = to_embedding(fi.forward(store, triplet.image, &ci));
  Embedding vp = to_embedding(fs.forward(store, VarModel::sound_input(triplet.positive), &cp));
  Embedding vn = to_embedding(fs.forward(store, VarModel::sound_input(triplet.negative), &cn));

  TripletLossGrads g = triplet_loss_with_grads(vi, vp, vn, model.config().margin);
  if (g.loss > 0.0f) {
    int d = vi.dim();
    Tensor di({d}), dp({d}), dn({d});
    for (int i = 0; i < d; ++i) {
      di[i] = g.d_anchor[i] * grad_scale;
      dp[i] = g.d_positive[i] * grad_scale;
      dn[i] = g.d_negative[i] * grad_scale;
    }
    fi.backward(store, ci, di, grads);
    fs.backward(store, cp, dp, grads);
    fs.backward(store, cn, dn, grads);
  }
  return g.loss;
}

VarTrainResult train_var(VarModel& model, const std::vector<Triplet>& triplets,
                         std::uint64_t seed) {
  if (triplets.empty()) throw ConfigError("train_var: need at least one triplet");
  const VarConfig& cfg = model.config();
  AdamConfig adam;
  adam.lr = cfg.learning_rate;

  Rng rng(seed, 0x7a2);
  std::vector<int> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);

  VarTrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the project rng keeps runs reproducible.
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_int(i + 1)]);
    }
    double epoch_loss = 0.0;
    std::size_t done = 0;
    while (done < order.size()) {
      std::size_t batch = std::min<std::size_t>(cfg.batch_size, order.size() - done);
      GradMap grads;
      float scale = 1.0f / static_cast<float>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        const Triplet& t = triplets[order[done + b]];
        try {
          epoch_loss += triplet_forward_backward(model, t, scale, grads);
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " (triplet index " +
                             std::to_string(order[done + b]) + ")");
        }
      }
      adam_step(model.params(), grads, adam);
      done += batch;
    }
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

SeparationReport eval_separation(const VarModel& model, const std::vector<LabeledImage>& images,
                                 const std::vector<LabeledSound>& sounds) {
  SeparationReport report;

  std::vector<std::pair<int, Embedding>> img_emb, snd_emb;
  img_emb.reserve(images.size());
  snd_emb.reserve(sounds.size());
  for (const auto& li : images) img_emb.emplace_back(li.class_index, model.encode_image(li.image));
  for (const auto& ls : sounds) snd_emb.emplace_back(ls.class_index, model.encode_sound(ls.sound));

  std::vector<int> classes;
  for (int c = 0; c <= kEmptyClass; ++c) {
    bool has_img = std::any_of(img_emb.begin(), img_emb.end(), [&](auto& p) { return p.first == c; });
    bool has_snd = std::any_of(snd_emb.begin(), snd_emb.end(), [&](auto& p) { return p.first == c; });
    if (has_img && has_snd) {
      classes.push_back(c);
    } else if (has_img || has_snd) {
      report.warnings.push_back("class " + std::to_string(c) +
                                " present in only one modality, skipped");
    }
  }
  if (classes.empty()) throw ConfigError("eval_separation: no class present in both modalities");
  report.classes = classes;
  report.class_count = static_cast<int>(classes.size());

  double intra_sum = 0.0, inter_sum = 0.0;
  long long intra_n = 0, inter_n = 0;
  for (const auto& [ci, ei] : img_emb) {
    for (const auto& [cs, es] : snd_emb) {
      double cos_val = ei.dot(es);
      if (ci == cs) {
        intra_sum += cos_val;
        ++intra_n;
      } else {
        inter_sum += cos_val;
        ++inter_n;
      }
    }
  }
  report.intra_mean_cos = intra_n > 0 ? intra_sum / intra_n : 0.0;
  if (inter_n > 0) {
    report.inter_mean_cos = inter_sum / inter_n;
    report.separation = report.intra_mean_cos - *report.inter_mean_cos;
  }

  // nearest-sound-centroid classification of the images
  int d = model.config().latent_dim;
  std::vector<std::vector<float>> centroids;
  for (int c : classes) {
    std::vector<double> acc(d, 0.0);
    int n = 0;
    for (const auto& [cs, es] : snd_emb) {
      if (cs != c) continue;
      for (int i = 0; i < d; ++i) acc[i] += es.v[i];
      ++n;
    }
    std::vector<float> centroid(d);
    for (int i = 0; i < d; ++i) centroid[i] = static_cast<float>(acc[i] / n);
    centroids.push_back(std::move(centroid));
  }
  report.sound_centroids = centroids;

  long long correct = 0, total = 0;
  for (const auto& [ci, ei] : img_emb) {
    if (std::find(classes.begin(), classes.end(), ci) == classes.end()) continue;
    double best = -1e30;
    int best_class = -1;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      double s = 0.0;
      for (int i = 0; i < ei.dim(); ++i) s += static_cast<double>(ei.v[i]) * centroids[k][i];
      if (s > best) {
        best = s;
        best_class = classes[k];
      }
    }
    correct += best_class == ci ? 1 : 0;
    ++total;
  }
  report.centroid_accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
  return report;
}

std::string SeparationReport::to_text() const {
  std::ostringstream out;
  out << "intra_mean_cos = " << intra_mean_cos << "\n";
  if (inter_mean_cos) {
    out << "inter_mean_cos = " << *inter_mean_cos << "\n";
    out << "separation = " << separation << "\n";
  } else {
    out << "inter_mean_cos = absent\n";
  }
  out << "centroid_accuracy = " << centroid_accuracy << "\n";
  out << "class_count = " << class_count << "\n";
  for (std::size_t k = 0; k < classes.size(); ++k) {
    out << "centroid_" << classes[k] << " =";
    for (float v : sound_centroids[k]) out << " " << v;
    out << "\n";
  }
  for (const auto& w : warnings) out << "warning = " << w << "\n";
  return out.str();
}

void dump_embeddings(const VarModel& model, const std::vector<LabeledImage>& images,
                     const std::vector<LabeledSound>& sounds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  auto line = [&](int cls, const char* modality, const Embedding& e) {
    out << cls << " " << modality;
    for (float v : e.v) out << " " << v;
    out << "\n";
  };
  for (const auto& li : images) line(li.class_index, "image", model.encode_image(li.image));
  for (const auto& ls : sounds) line(ls.class_index, "sound", model.encode_sound(ls.sound));
}

void save_var(const VarModel& model, const std::string& path) {
  std::vector<std::pair<std::string, Tensor>> tensors;
  auto scalar = [](float v) {
    Tensor t({1});
    t[0] = v;
    return t;
  };
  const VarConfig& c = model.config();
  tensors.emplace_back("meta.latent_dim", scalar(static_cast<float>(c.latent_dim)));
  tensors.emplace_back("meta.margin", scalar(c.margin));
  tensors.emplace_back("meta.learning_rate", scalar(c.learning_rate));
  tensors.emplace_back("meta.batch_size", scalar(static_cast<float>(c.batch_size)));
  tensors.emplace_back("meta.epochs", scalar(static_cast<float>(c.epochs)));
  for (const auto& [name, t] : model.params().params) tensors.emplace_back(name, t);
  write_tensor_file(path, tensors);
}

VarModel load_var(const std::string& path) {
  std::map<std::string, Tensor> tensors = read_tensor_file(path);
  auto meta = [&](const std::string& key) -> float {
    auto it = tensors.find("meta." + key);
    if (it == tensors.end()) throw FormatError(path + ": missing meta." + key);
    return it->second[0];
  };
  VarConfig cfg;
  cfg.latent_dim = static_cast<int>(meta("latent_dim"));
  cfg.margin = meta("margin");
  cfg.learning_rate = meta("learning_rate");
  cfg.batch_size = static_cast<int>(meta("batch_size"));
  cfg.epochs = static_cast<int>(meta("epochs"));

  VarModel model(cfg, 0);
  for (auto& [name, t] : model.params().params) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError(path + ": missing parameter " + name);
    if (it->second.shape != t.shape) {
      throw FormatError(path + ": parameter " + name + " has shape " +
                        shape_to_string(it->second.shape) + ", expected " +
                        shape_to_string(t.shape));
    }
    t = it->second;
  }
  return model;
}

}  // namespace sgrd
