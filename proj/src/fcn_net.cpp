#include "cwseg/fcn_net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cwseg/error.hpp"

namespace cwseg {

void NetConfig::validate() const {
  if (in_channels == 0) throw ParamError("net config: in_channels must be positive");
  if (num_classes < 2) throw ParamError("net config: num_classes must be >= 2");
  if (base_width == 0) throw ParamError("net config: base_width must be positive");
  if (fc_width == 0) throw ParamError("net config: fc_width must be positive");
}

std::vector<LayerSpec> topology(const NetConfig& cfg) {
  cfg.validate();
  const std::size_t b = cfg.base_width;
  const std::size_t k = cfg.num_classes;
  using S = StageId;
  return {
      {"conv1_1", S::Stage1, cfg.in_channels, b, 3, 1, true, false},
      {"conv1_2", S::Stage1, b, b, 3, 1, true, true},
      {"conv2_1", S::Stage1, b, 2 * b, 3, 1, true, false},
      {"conv2_2", S::Stage1, 2 * b, 2 * b, 3, 1, true, true},
      {"conv3_1", S::Stage1, 2 * b, 4 * b, 3, 1, true, false},
      {"conv3_2", S::Stage1, 4 * b, 4 * b, 3, 1, true, true},
      {"score_pool3", S::Stage1, 4 * b, k, 1, 0, false, false},
      {"conv4_1", S::Stage2, 4 * b, 8 * b, 3, 1, true, false},
      {"conv4_2", S::Stage2, 8 * b, 8 * b, 3, 1, true, true},
      {"score_pool4", S::Stage2, 8 * b, k, 1, 0, false, false},
      {"conv5_1", S::Stage3, 8 * b, 8 * b, 3, 1, true, false},
      {"conv5_2", S::Stage3, 8 * b, 8 * b, 3, 1, true, true},
      {"fc6", S::Stage3, 8 * b, cfg.fc_width, 3, 1, true, false},
      {"fc7", S::Stage3, cfg.fc_width, cfg.fc_width, 1, 0, true, false},
      {"score_fr", S::Stage3, cfg.fc_width, k, 1, 0, false, false},
  };
}

namespace {

std::string dims_string(const std::vector<std::uint32_t>& dims) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << "]";
  return os.str();
}

const WeightEntry& require_entry(const WeightStore& weights, const std::string& key,
                                 const std::string& layer) {
  const auto it = weights.find(key);
  if (it == weights.end()) {
    throw ContractError("weight store is missing layer \"" + layer + "\" (entry \"" + key + "\")");
  }
  if (it->second.payload.size() != it->second.element_count()) {
    throw FormatError("weight entry \"" + key + "\": payload length does not match dims " +
                      dims_string(it->second.dims));
  }
  return it->second;
}

void require_dims(const WeightEntry& e, const std::vector<std::uint32_t>& expected,
                  const std::string& key) {
  if (e.dims != expected) {
    throw ShapeError("weight entry \"" + key + "\": shape " + dims_string(e.dims) +
                     " does not match expected " + dims_string(expected));
  }
}

// Conv layers of one stage, with ReLU and pooling as each LayerSpec says.
Tensor run_layers(const StagedNet& net, StageId stage, bool heads, Tensor x, WorkCounter* work) {
  for (const LayerSpec& spec : net.layers()) {
    if (spec.stage != stage) continue;
    const bool is_head = !spec.relu && !spec.pool_after;
    if (is_head != heads) continue;
    x = conv2d(x, net.layer(spec.name), work);
    if (spec.relu) x = relu(x);
    if (spec.pool_after) x = maxpool2d(x, 2, 2);
  }
  return x;
}

const LayerSpec& head_of(const StagedNet& net, StageId stage) {
  for (const LayerSpec& spec : net.layers()) {
    if (spec.stage == stage && !spec.relu && !spec.pool_after) return spec;
  }
  throw ContractError("topology has no head for stage");
}

void require_input(const Tensor& t, std::size_t channels, const char* what) {
  if (t.empty() || t.channels() != channels) {
    std::ostringstream os;
    os << what << ": expected " << channels << " channels, got "
       << (t.empty() ? std::string("empty tensor") : t.shape_string());
    throw ShapeError(os.str());
  }
}

}  // namespace

const ConvParams& StagedNet::layer(std::string_view name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].name == name) return params_[i];
  }
  throw ContractError("no layer named \"" + std::string(name) + "\"");
}

std::size_t StagedNet::conv_count(StageId stage) const {
  return static_cast<std::size_t>(
      std::count_if(specs_.begin(), specs_.end(), [stage](const LayerSpec& s) { return s.stage == stage; }));
}

StagedNet build_net(const NetConfig& cfg, const WeightStore& weights) {
  StagedNet net;
  net.config_ = cfg;
  net.specs_ = topology(cfg);
  net.params_.reserve(net.specs_.size());
  for (const LayerSpec& spec : net.specs_) {
    const WeightEntry& w = require_entry(weights, spec.name, spec.name);
    const WeightEntry& b = require_entry(weights, bias_key(spec.name), spec.name);
    const auto out = static_cast<std::uint32_t>(spec.out_channels);
    const auto in = static_cast<std::uint32_t>(spec.in_channels);
    const auto k = static_cast<std::uint32_t>(spec.kernel);
    require_dims(w, {out, in, k, k}, spec.name);
    require_dims(b, {out}, bias_key(spec.name));

    ConvParams p;
    p.out_channels = spec.out_channels;
    p.in_channels = spec.in_channels;
    p.kernel_h = spec.kernel;
    p.kernel_w = spec.kernel;
    p.stride = 1;
    p.pad = spec.pad;
    p.weights = w.payload;
    p.bias = b.payload;
    p.validate();
    net.params_.push_back(std::move(p));
  }
  return net;
}

NetConfig infer_config(const WeightStore& weights) {
  auto dims = [&weights](const std::string& name) -> const std::vector<std::uint32_t>& {
    const auto it = weights.find(name);
    if (it == weights.end()) {
      throw ContractError("weight store is missing layer \"" + name + "\"");
    }
    if (it->second.dims.size() != 4) {
      throw ShapeError("weight entry \"" + name + "\" must be rank 4, got " +
                       dims_string(it->second.dims));
    }
    return it->second.dims;
  };
  NetConfig cfg;
  cfg.in_channels = dims("conv1_1")[1];
  cfg.base_width = dims("conv1_1")[0];
  cfg.num_classes = dims("score_fr")[0];
  cfg.fc_width = dims("fc6")[0];
  cfg.validate();
  return cfg;
}

Stage1Result run_stage1(const StagedNet& net, const Tensor& frame, WorkCounter* work) {
  require_input(frame, net.config().in_channels, "run_stage1");
  if (frame.height() % kNetStride != 0 || frame.width() % kNetStride != 0) {
    std::ostringstream os;
    os << "run_stage1: frame " << frame.shape_string() << " spatial dims must be multiples of "
       << kNetStride;
    throw ShapeError(os.str());
  }
  Stage1Result r;
  r.pool3_features = run_layers(net, StageId::Stage1, false, frame, work);
  r.score_pool3 = conv2d(r.pool3_features, net.layer(head_of(net, StageId::Stage1).name), work);
  return r;
}

Stage2Result run_stage2(const StagedNet& net, const Tensor& pool3_features, WorkCounter* work) {
  require_input(pool3_features, 4 * net.config().base_width, "run_stage2");
  Stage2Result r;
  r.pool4_features = run_layers(net, StageId::Stage2, false, pool3_features, work);
  r.score_pool4 = conv2d(r.pool4_features, net.layer(head_of(net, StageId::Stage2).name), work);
  return r;
}

Tensor run_stage3(const StagedNet& net, const Tensor& pool4_features, WorkCounter* work) {
  require_input(pool4_features, 8 * net.config().base_width, "run_stage3");
  if (pool4_features.height() < 2 || pool4_features.width() < 2) {
    throw ShapeError("run_stage3: pool4 features " + pool4_features.shape_string() +
                     " too small to pool");
  }
  const Tensor body = run_layers(net, StageId::Stage3, false, pool4_features, work);
  return conv2d(body, net.layer(head_of(net, StageId::Stage3).name), work);
}

Tensor fuse_and_upsample(const StagedNet& net, const Tensor& score_fr, const Tensor& score_pool4,
                         const Tensor& score_pool3) {
  const std::size_t k = net.config().num_classes;
  require_input(score_fr, k, "fuse_and_upsample(score_fr)");
  require_input(score_pool4, k, "fuse_and_upsample(score_pool4)");
  require_input(score_pool3, k, "fuse_and_upsample(score_pool3)");

  const Tensor up_fr = upsample_bilinear(score_fr, 2);
  const Tensor fuse_pool4 = add(up_fr, crop_center(score_pool4, up_fr.height(), up_fr.width()));
  const Tensor up_pool4 = upsample_bilinear(fuse_pool4, 2);
  const Tensor fuse_pool3 =
      add(up_pool4, crop_center(score_pool3, up_pool4.height(), up_pool4.width()));
  return upsample_bilinear(fuse_pool3, 8);
}

StageOutputs full_forward(const StagedNet& net, const Tensor& frame) {
  StageOutputs out;
  auto s1 = run_stage1(net, frame);
  auto s2 = run_stage2(net, s1.pool3_features);
  out.score_fr = run_stage3(net, s2.pool4_features);
  out.final_scores = fuse_and_upsample(net, *out.score_fr, s2.score_pool4, s1.score_pool3);
  out.pool3_features = std::move(s1.pool3_features);
  out.score_pool3 = std::move(s1.score_pool3);
  out.pool4_features = std::move(s2.pool4_features);
  out.score_pool4 = std::move(s2.score_pool4);
  return out;
}

LabelMask argmax_mask(const Tensor& scores) {
  if (scores.empty()) throw ShapeError("argmax_mask: empty score tensor");
  LabelMask mask(scores.height(), scores.width());
  for (std::size_t y = 0; y < scores.height(); ++y) {
    for (std::size_t x = 0; x < scores.width(); ++x) {
      std::uint32_t best = 0;
      float best_score = scores.at(0, y, x);
      for (std::size_t c = 1; c < scores.channels(); ++c) {
        if (scores.at(c, y, x) > best_score) {
          best_score = scores.at(c, y, x);
          best = static_cast<std::uint32_t>(c);
        }
      }
      mask.at(y, x) = best;
    }
  }
  return mask;
}

std::vector<float> class_probability(const Tensor& scores, std::size_t cls) {
  if (cls >= scores.channels()) {
    throw ParamError("class_probability: class " + std::to_string(cls) + " out of range");
  }
  std::vector<float> prob(scores.height() * scores.width());
  for (std::size_t y = 0; y < scores.height(); ++y) {
    for (std::size_t x = 0; x < scores.width(); ++x) {
      double m = scores.at(0, y, x);
      for (std::size_t c = 1; c < scores.channels(); ++c) m = std::max<double>(m, scores.at(c, y, x));
      double denom = 0.0;
      for (std::size_t c = 0; c < scores.channels(); ++c) denom += std::exp(scores.at(c, y, x) - m);
      prob[y * scores.width() + x] = static_cast<float>(std::exp(scores.at(cls, y, x) - m) / denom);
    }
  }
  return prob;
}

}  // namespace cwseg
