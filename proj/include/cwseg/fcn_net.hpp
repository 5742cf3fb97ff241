#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwseg/label_mask.hpp"
#include "cwseg/tensor.hpp"
#include "cwseg/weight_store.hpp"

namespace cwseg {

enum class StageId : std::uint8_t { Stage1 = 1, Stage2 = 2, Stage3 = 3 };

constexpr int stage_index(StageId s) { return static_cast<int>(s) - 1; }
inline constexpr std::size_t kNumStages = 3;

// The network's total downsampling; frame height and width must be multiples.
inline constexpr std::size_t kNetStride = 32;

struct NetConfig {
  std::size_t in_channels = 3;
  std::size_t num_classes = 2;
  std::size_t base_width = 8;
  // Width of the convolutionalized classifier (fc6, fc7) in stage 3.
  std::size_t fc_width = 2048;

  void validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// One convolution of the fixed topology.
struct LayerSpec {
  std::string name;
  StageId stage;
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;
  std::size_t pad;
  bool relu;
  // A 2x2/2 max pool follows this layer.
  bool pool_after;
};

// Layer list in execution order:
//   stage 1: conv1_1 conv1_2 pool1 conv2_1 conv2_2 pool2 conv3_1 conv3_2 pool3, score_pool3
//   stage 2: conv4_1 conv4_2 pool4, score_pool4
//   stage 3: conv5_1 conv5_2 pool5 fc6 fc7, score_fr
// Widths b, 2b, 4b, 8b, 8b for conv1..conv5; fc6/fc7 use fc_width.
std::vector<LayerSpec> topology(const NetConfig& cfg);

class StagedNet {
 public:
  const NetConfig& config() const { return config_; }
  const std::vector<LayerSpec>& layers() const { return specs_; }
  std::size_t layer_count() const { return specs_.size(); }
  // Throws ContractError for an unknown name.
  const ConvParams& layer(std::string_view name) const;
  // Number of convolutions executed by one run of the stage.
  std::size_t conv_count(StageId stage) const;

 private:
  friend StagedNet build_net(const NetConfig& cfg, const WeightStore& weights);

  NetConfig config_;
  std::vector<LayerSpec> specs_;
  std::vector<ConvParams> params_;
};

// Validates every layer against the topology; errors name the offending layer.
StagedNet build_net(const NetConfig& cfg, const WeightStore& weights);

// Recovers the NetConfig a weight store was generated for.
NetConfig infer_config(const WeightStore& weights);

struct Stage1Result {
  Tensor pool3_features;
  Tensor score_pool3;
};

struct Stage2Result {
  Tensor pool4_features;
  Tensor score_pool4;
};

struct StageOutputs {
  Tensor pool3_features;
  Tensor score_pool3;
  Tensor pool4_features;
  Tensor score_pool4;
  std::optional<Tensor> score_fr;
  Tensor final_scores;
};

Stage1Result run_stage1(const StagedNet& net, const Tensor& frame, WorkCounter* work = nullptr);
Stage2Result run_stage2(const StagedNet& net, const Tensor& pool3_features,
                        WorkCounter* work = nullptr);
Tensor run_stage3(const StagedNet& net, const Tensor& pool4_features, WorkCounter* work = nullptr);

// FCN-8s fusion: up2(score_fr) + score_pool4 -> up2 -> + score_pool3 -> up8.
Tensor fuse_and_upsample(const StagedNet& net, const Tensor& score_fr, const Tensor& score_pool4,
                         const Tensor& score_pool3);

StageOutputs full_forward(const StagedNet& net, const Tensor& frame);

// Per-pixel argmax over channels; ties go to the lowest class index.
LabelMask argmax_mask(const Tensor& scores);

// Per-pixel softmax probability of one class.
std::vector<float> class_probability(const Tensor& scores, std::size_t cls);

}  // namespace cwseg
