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

#include "tgbranch/tgnet.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tgb {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'B', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd xavier(std::mt19937_64& rng, int out, int in) {
  double bound = std::sqrt(6.0 / (in + out));
  Eigen::MatrixXd m(out, in);
  for (int r = 0; r < out; ++r)
    for (int c = 0; c < in; ++c)
      m(r, c) = (2.0 * unit_uniform(rng) - 1.0) * bound;
  return m;
}

// Inverted-dropout mask: entries 0 with probability p, else 1/(1-p).
Eigen::MatrixXd dropout_mask(std::mt19937_64& rng, Eigen::Index rows,
                             Eigen::Index cols, double p) {
  Eigen::MatrixXd m(rows, cols);
  double keep = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = unit_uniform(rng) < p ? 0.0 : keep;
  return m;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::vector<int> NetConfig::head_widths() const {
  std::vector<int> w;
  int width = d_h;
  for (int k = 0; k < gate_depth; ++k) {
    w.push_back(width);
    width = std::max(1, width / 2);
  }
  return w;
}

void NetConfig::validate() const {
  if (d_h <= 0 || n_layers < 0 || n_heads <= 0 || gate_depth < 1)
    throw Error("BAD_CONFIG", "non-positive dimension");
  if (d_h % n_heads != 0) throw Error("BAD_CONFIG", "d_h % n_heads != 0");
  if (dropout < 0.0 || dropout >= 1.0)
    throw Error("BAD_CONFIG", "dropout outside [0,1)");
}

ParamMap init_params(const NetConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed ^ 0x7467626e65740001ull);
  ParamMap p;
  const int d = cfg.d_h;

  auto linear = [&](const std::string& name, int out, int in) {
    p[name + "_w"] = xavier(rng, out, in);
  };
  auto linear_b = [&](const std::string& name, int out, int in) {
    p[name + "_w"] = xavier(rng, out, in);
    p[name + "_b"] = Eigen::MatrixXd::Zero(1, out);
  };
  auto norm = [&](const std::string& name, int width) {
    p[name + "_gain"] = Eigen::MatrixXd::Ones(1, width);
    p[name + "_bias"] = Eigen::MatrixXd::Zero(1, width);
  };

  norm("ln_cand", kCandidateFeatureDim);
  linear("embed_cand", d, kCandidateFeatureDim);
  norm("ln_tree", kNodeFeatureDim + kTreeFeatureDim);
  linear("embed_tree", d, kNodeFeatureDim + kTreeFeatureDim);
  linear("fuse", d, 2 * d);

  for (int l = 0; l < cfg.n_layers; ++l) {
    std::string pre = "enc" + std::to_string(l) + "_";
    norm(pre + "ln1", d);
    linear(pre + "wq", d, d);
    linear(pre + "wk", d, d);
    linear(pre + "wv", d, d);
    linear(pre + "wo", d, d);
    norm(pre + "ln2", d);
    linear_b(pre + "ff1", 4 * d, d);
    linear_b(pre + "ff2", d, 4 * d);
  }

  linear("bim_wt1", d, d);
  linear("bim_wc1", d, d);
  linear("bim_w3", d, d);
  linear("bim_w4", d, d);

  std::vector<int> widths = cfg.head_widths();
  for (int k = 0; k < cfg.gate_depth; ++k) {
    int in = widths[k];
    int out = k + 1 < cfg.gate_depth ? widths[k + 1] : 1;
    std::string sk = std::to_string(k);
    linear("actor_gate" + sk, in, d);
    linear_b("actor_f" + sk, out, in);
  }

  linear_b("critic_mlp1", d, 2 * d);
  linear_b("critic_mlp2", d, d);
  for (int k = 0; k < cfg.gate_depth; ++k) {
    int in = widths[k];
    int out = k + 1 < cfg.gate_depth ? widths[k + 1] : 1;
    std::string sk = std::to_string(k);
    linear("critic_gate" + sk, in, d);
    linear_b("critic_f" + sk, out, in);
  }
  return p;
}

std::map<std::string, int> TgNet::insert_params(ad::Tape& tape,
                                                const ParamMap& params) {
  std::map<std::string, int> ids;
  for (const auto& [name, value] : params) ids[name] = tape.input(value);
  return ids;
}

TgNet::TgNet(const NetConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

ForwardGraph TgNet::build_graph(ad::Tape& t,
                                const std::map<std::string, int>& pid,
                                const StateFeatures& state, ForwardMode mode,
                                std::mt19937_64* dropout_rng) const {
  const int L = static_cast<int>(state.candidates.rows());
  if (state.candidates.cols() != kCandidateFeatureDim ||
      state.node.size() != kNodeFeatureDim ||
      state.tree.size() != kTreeFeatureDim ||
      static_cast<int>(state.pad_mask.size()) != L || L < 1 ||
      state.num_candidates() < 1)
    throw Error("SHAPE_MISMATCH");
  bool train = mode == ForwardMode::kTrain && cfg_.dropout > 0.0;
  if (train && dropout_rng == nullptr)
    throw Error("BAD_CONFIG", "TRAIN mode needs a dropout rng");

  const int d = cfg_.d_h;
  const std::vector<bool>& pad = state.pad_mask;

  auto P = [&](const std::string& name) {
    auto it = pid.find(name);
    if (it == pid.end()) throw Error("SHAPE_MISMATCH", name);
    return it->second;
  };
  // x (n x in) -> x W^T [+ b], W stored (out x in).
  auto lin = [&](int x, const std::string& name) {
    return t.matmul(x, t.transpose(P(name + "_w")));
  };
  auto lin_b = [&](int x, const std::string& name) {
    return t.add_rowvec(lin(x, name), P(name + "_b"));
  };
  int ones_col = t.input(Eigen::MatrixXd::Ones(L, 1));
  auto broadcast = [&](int row) { return t.matmul(ones_col, row); };
  auto drop = [&](int x, Eigen::Index rows, Eigen::Index cols) {
    if (!train) return x;
    return t.mul_const(x, dropout_mask(*dropout_rng, rows, cols,
                                       cfg_.dropout));
  };

  // Embeddings and fusion.
  int c_in = t.input(state.candidates);
  Eigen::MatrixXd nm(1, kNodeFeatureDim + kTreeFeatureDim);
  nm << state.node.transpose(), state.tree.transpose();
  int nm_in = t.input(nm);
  int c_emb = lin(t.layer_norm(c_in, P("ln_cand_gain"), P("ln_cand_bias")),
                  "embed_cand");
  int t_emb = lin(t.layer_norm(nm_in, P("ln_tree_gain"), P("ln_tree_bias")),
                  "embed_tree");
  int z = lin(t.concat_cols({c_emb, broadcast(t_emb)}), "fuse");

  // Pre-norm encoder with key-padding masks.
  const int dk = d / cfg_.n_heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  for (int l = 0; l < cfg_.n_layers; ++l) {
    std::string pre = "enc" + std::to_string(l) + "_";
    int h = t.layer_norm(z, P(pre + "ln1_gain"), P(pre + "ln1_bias"));
    int q = lin(h, pre + "wq");
    int kk = lin(h, pre + "wk");
    int v = lin(h, pre + "wv");
    std::vector<int> heads;
    for (int hd = 0; hd < cfg_.n_heads; ++hd) {
      int qs = t.slice_cols(q, hd * dk, dk);
      int ks = t.slice_cols(kk, hd * dk, dk);
      int vs = t.slice_cols(v, hd * dk, dk);
      int scores = t.scale(t.matmul(qs, t.transpose(ks)), inv_sqrt_dk);
      int attn = t.softmax_rows(scores, pad);
      heads.push_back(t.matmul(attn, vs));
    }
    int o = lin(t.concat_cols(heads), pre + "wo");
    z = t.add(z, drop(o, L, d));
    int h2 = t.layer_norm(z, P(pre + "ln2_gain"), P(pre + "ln2_bias"));
    int ff = lin_b(t.relu(lin_b(h2, pre + "ff1")), pre + "ff2");
    z = t.add(z, drop(ff, L, d));
  }

  // Soft mutual attention: candidate summary e and per-candidate share d_i.
  int alpha = t.softmax_rows(
      t.transpose(t.matmul(z, t.transpose(lin(t_emb, "bim_wt1")))), pad);
  int e_row = t.matmul(alpha, z);  // 1 x d
  int beta = t.softmax_rows(
      t.transpose(t.matmul(lin(z, "bim_wc1"), t.transpose(t_emb))), pad);
  int d_mat = t.matmul(t.transpose(beta), t_emb);  // L x d
  int gate = t.sigmoid(
      t.add_rowvec(lin(d_mat, "bim_w4"), lin(e_row, "bim_w3")));
  int e_full = broadcast(e_row);
  int one_minus_gate = t.add_scalar(t.scale(gate, -1.0), 1.0);
  int r = t.add(t.mul(gate, e_full), t.mul(one_minus_gate, d_mat));

  // Tree-gated branching head.
  int q_act = r;
  for (int k = 0; k < cfg_.gate_depth; ++k) {
    std::string sk = std::to_string(k);
    int g = t.sigmoid(lin(t_emb, "actor_gate" + sk));  // 1 x width_k
    q_act = lin_b(t.mul(q_act, broadcast(g)), "actor_f" + sk);
    if (k + 1 < cfg_.gate_depth) q_act = t.relu(q_act);
  }
  int logits = t.transpose(q_act);  // 1 x L

  ForwardGraph out;
  out.logits = logits;
  out.log_probs = t.log_softmax_rows(logits, pad);
  out.probs = t.softmax_rows(logits, pad);
  out.entropy =
      t.scale(t.sum_all(t.mul(out.probs, out.log_probs)), -1.0);

  // Critic: permutation-invariant pooled state.
  int pooled = t.masked_mean_rows(r, pad);
  int vstate = t.concat_cols({pooled, t_emb});  // 1 x 2d
  int vh = t.relu(lin_b(vstate, "critic_mlp1"));
  vh = t.relu(lin_b(vh, "critic_mlp2"));
  for (int k = 0; k < cfg_.gate_depth; ++k) {
    std::string sk = std::to_string(k);
    int g = t.sigmoid(lin(t_emb, "critic_gate" + sk));
    vh = lin_b(t.mul(vh, g), "critic_f" + sk);
    if (k + 1 < cfg_.gate_depth) vh = t.relu(vh);
  }
  out.value = vh;  // 1 x 1
  return out;
}

PolicyOutput TgNet::forward(const StateFeatures& state, const ParamMap& params,
                            ForwardMode mode,
                            std::mt19937_64* dropout_rng) const {
  ad::Tape tape;
  std::map<std::string, int> pid = insert_params(tape, params);
  ForwardGraph g = build_graph(tape, pid, state, mode, dropout_rng);

  PolicyOutput out;
  const Eigen::MatrixXd& logits = tape.value(g.logits);
  const Eigen::MatrixXd& probs = tape.value(g.probs);
  const int L = static_cast<int>(logits.cols());
  out.logits.resize(L);
  out.probs.resize(L);
  out.pad_mask = state.pad_mask;
  for (int i = 0; i < L; ++i) {
    out.logits(i) = state.pad_mask[i] ? -1e9 : logits(0, i);
    out.probs(i) = probs(0, i);
  }
  out.value = tape.value(g.value)(0, 0);
  out.entropy = tape.value(g.entropy)(0, 0);
  if (!out.logits.allFinite() || !out.probs.allFinite() ||
      !std::isfinite(out.value) || !std::isfinite(out.entropy))
    throw Error("NON_FINITE");
  return out;
}

std::pair<double, double> log_prob_entropy(const PolicyOutput& out,
                                           int action) {
  if (action < 0 || action >= out.probs.size() || out.pad_mask[action])
    throw Error("MASKED_ACTION", std::to_string(action));
  return {std::log(out.probs(action)), out.entropy};
}

// --- Checkpoint io ----------------------------------------------------------

namespace {

template <typename T>
void put(std::string& s, const T& v) {
  s.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& s, std::size_t& at) {
  if (at + sizeof(T) > s.size()) throw Error("BAD_CHECKPOINT", "truncated");
  T v;
  std::memcpy(&v, s.data() + at, sizeof(T));
  at += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const NetConfig& cfg,
                     const ParamMap& params) {
  std::string payload;
  put(payload, kCheckpointVersion);
  put(payload, static_cast<std::uint32_t>(kFeatureSchemaVersion));
  put(payload, static_cast<std::int32_t>(cfg.d_h));
  put(payload, static_cast<std::int32_t>(cfg.n_layers));
  put(payload, static_cast<std::int32_t>(cfg.n_heads));
  put(payload, cfg.dropout);
  put(payload, static_cast<std::int32_t>(cfg.gate_depth));
  put(payload, cfg.seed);
  put(payload, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, m] : params) {
    put(payload, static_cast<std::uint32_t>(name.size()));
    payload.append(name);
    put(payload, static_cast<std::uint32_t>(m.rows()));
    put(payload, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put(payload, m(r, c));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IO_ERROR", path);
  out.write(kMagic, sizeof(kMagic));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  std::uint64_t sum = fnv1a(payload);
  out.write(reinterpret_cast<const char*>(&sum), sizeof(sum));
  if (!out) throw Error("IO_ERROR", path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  if (bytes.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw Error("BAD_CHECKPOINT", "magic");
  std::string payload =
      bytes.substr(sizeof(kMagic),
                   bytes.size() - sizeof(kMagic) - sizeof(std::uint64_t));
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - sizeof(stored),
              sizeof(stored));
  if (fnv1a(payload) != stored) throw Error("BAD_CHECKPOINT", "checksum");

  std::size_t at = 0;
  Checkpoint ck;
  std::uint32_t version = take<std::uint32_t>(payload, at);
  if (version != kCheckpointVersion)
    throw Error("BAD_CHECKPOINT", "version " + std::to_string(version));
  ck.feature_schema_version =
      static_cast<int>(take<std::uint32_t>(payload, at));
  ck.cfg.d_h = take<std::int32_t>(payload, at);
  ck.cfg.n_layers = take<std::int32_t>(payload, at);
  ck.cfg.n_heads = take<std::int32_t>(payload, at);
  ck.cfg.dropout = take<double>(payload, at);
  ck.cfg.gate_depth = take<std::int32_t>(payload, at);
  ck.cfg.seed = take<std::uint64_t>(payload, at);
  std::uint32_t count = take<std::uint32_t>(payload, at);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = take<std::uint32_t>(payload, at);
    if (at + len > payload.size()) throw Error("BAD_CHECKPOINT", "name");
    std::string name = payload.substr(at, len);
    at += len;
    std::uint32_t rows = take<std::uint32_t>(payload, at);
    std::uint32_t cols = take<std::uint32_t>(payload, at);
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c)
        m(r, c) = take<double>(payload, at);
    ck.params[name] = std::move(m);
  }
  if (at != payload.size()) throw Error("BAD_CHECKPOINT", "trailing bytes");
  return ck;
}

}  // namespace tgb
