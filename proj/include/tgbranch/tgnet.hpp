// Copyright 2026 The tgbranch authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TGBRANCH_TGNET_HPP_
#define TGBRANCH_TGNET_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tgbranch/ad.hpp"
#include "tgbranch/features.hpp"

namespace tgb {

// Actor-critic over (candidates, node, tree) feature blocks: shared
// embeddings and fusion, a masked pre-norm transformer encoder, a soft
// mutual-attention mixer, a tree-gated branching head, and a masked-mean
// critic.  All math is 64-bit.
struct NetConfig {
  int d_h = 64;
  int n_layers = 2;
  int n_heads = 4;
  double dropout = 0.05;
  int gate_depth = 3;  // K
  std::uint64_t seed = 0;

  // Input widths of the K gated head layers: d_h, d_h/2, ..., final maps
  // to one logit.
  std::vector<int> head_widths() const;
  void validate() const;  // throws Error(BAD_CONFIG)
};

// Named tensors, ordered by name for deterministic iteration.  Weight
// matrices are (out x in); rows act on the right as x * W^T.  Critic-only
// parameters carry the "critic_" prefix (the optimizer keys on it).
using ParamMap = std::map<std::string, Eigen::MatrixXd>;

ParamMap init_params(const NetConfig& cfg);

enum class ForwardMode { kRollout, kTrain };

struct PolicyOutput {
  Eigen::VectorXd logits;  // length L; padded slots hold the -1e9 surrogate
  Eigen::VectorXd probs;   // padded entries exactly 0
  double value = 0.0;
  double entropy = 0.0;
  std::vector<bool> pad_mask;
};

// log-prob and entropy of a sampled action; throws Error(MASKED_ACTION).
std::pair<double, double> log_prob_entropy(const PolicyOutput& out,
                                           int action);

// Node ids of one forward pass on a caller-owned tape (training path).
struct ForwardGraph {
  int logits = -1;     // 1 x L
  int log_probs = -1;  // 1 x L (padded entries 0)
  int probs = -1;      // 1 x L
  int value = -1;      // 1 x 1
  int entropy = -1;    // 1 x 1
};

class TgNet {
 public:
  explicit TgNet(const NetConfig& cfg);

  const NetConfig& config() const { return cfg_; }

  // Inference forward; dropout active only in TRAIN mode (rng required).
  // Throws Error(SHAPE_MISMATCH) and Error(NON_FINITE).
  PolicyOutput forward(const StateFeatures& state, const ParamMap& params,
                       ForwardMode mode = ForwardMode::kRollout,
                       std::mt19937_64* dropout_rng = nullptr) const;

  // Differentiable forward over parameter leaves already on the tape
  // (ids from insert_params); shares leaves across minibatch samples.
  ForwardGraph build_graph(ad::Tape& tape,
                           const std::map<std::string, int>& param_ids,
                           const StateFeatures& state, ForwardMode mode,
                           std::mt19937_64* dropout_rng = nullptr) const;

  static std::map<std::string, int> insert_params(ad::Tape& tape,
                                                  const ParamMap& params);

 private:
  NetConfig cfg_;
};

// --- Checkpoint io ----------------------------------------------------------

// Binary format: magic, format version, feature-schema version, NetConfig,
// named tensors (row-major 64-bit little-endian), trailing FNV-1a checksum.
void save_checkpoint(const std::string& path, const NetConfig& cfg,
                     const ParamMap& params);
struct Checkpoint {
  NetConfig cfg;
  ParamMap params;
  int feature_schema_version = 0;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tgb

#endif  // TGBRANCH_TGNET_HPP_
