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

#include <algorithm>
#include <cmath>

#include "tgbranch/bnb.hpp"

namespace tgb {

namespace {

constexpr int kReliability = 8;        // eta for reliability branching
constexpr double kInfeasGain = 1e10;   // surrogate gain for a cut-off child

double fraction(const CandidateInfo& cd) {
  return cd.value - std::floor(cd.value);
}

int argmax_first(const std::vector<double>& scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

class RandomPolicy final : public BranchingPolicy {
 public:
  int decide(const StateFeatures& state, DecisionContext& ctx) override {
    int n = state.num_candidates();
    return static_cast<int>((*ctx.rng)() % static_cast<std::uint64_t>(n));
  }
};

class MostFractionalPolicy final : public BranchingPolicy {
 public:
  int decide(const StateFeatures&, DecisionContext& ctx) override {
    const auto& cands = ctx.snapshot->candidates;
    std::vector<double> scores(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
      double f = fraction(cands[i]);
      scores[i] = std::min(f, 1.0 - f);
    }
    return argmax_first(scores);
  }
};

double pscost_score(const CandidateInfo& cd, const PseudocostTable& pc) {
  double f = fraction(cd);
  return (pc.down_mean(cd.var) * f) * (pc.up_mean(cd.var) * (1.0 - f));
}

class PscostPolicy final : public BranchingPolicy {
 public:
  int decide(const StateFeatures&, DecisionContext& ctx) override {
    const auto& cands = ctx.snapshot->candidates;
    std::vector<double> scores(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i)
      scores[i] = pscost_score(cands[i], *ctx.pseudocosts);
    return argmax_first(scores);
  }
};

double strong_score(const std::pair<ProbeResult, ProbeResult>& probes,
                    double node_bound) {
  auto improvement = [&](const ProbeResult& r) {
    if (!r.feasible) return kInfeasGain;
    return std::max(r.bound - node_bound, 0.0);
  };
  return std::max(improvement(probes.first), 1e-6) *
         std::max(improvement(probes.second), 1e-6);
}

class StrongPolicy final : public BranchingPolicy {
 public:
  int decide(const StateFeatures&, DecisionContext& ctx) override {
    const auto& cands = ctx.snapshot->candidates;
    std::vector<double> scores(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i)
      scores[i] = strong_score(ctx.engine->probe_children(static_cast<int>(i)),
                               ctx.snapshot->node_bound);
    return argmax_first(scores);
  }
};

// Strong branching per candidate until both of its pseudocost counts reach
// the reliability threshold, pseudocosts afterwards.  Probe outcomes feed
// the pseudocost table so candidates graduate to the cheap rule.
class RelpscostLikePolicy final : public BranchingPolicy {
 public:
  int decide(const StateFeatures&, DecisionContext& ctx) override {
    const auto& cands = ctx.snapshot->candidates;
    PseudocostTable& pc = *ctx.pseudocosts;
    std::vector<double> scores(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const CandidateInfo& cd = cands[i];
      bool reliable = pc.up_count(cd.var) >= kReliability &&
                      pc.down_count(cd.var) >= kReliability;
      if (reliable) {
        scores[i] = pscost_score(cd, pc);
        continue;
      }
      auto probes = ctx.engine->probe_children(static_cast<int>(i));
      double f = fraction(cd);
      double nb = ctx.snapshot->node_bound;
      if (probes.first.feasible && std::isfinite(probes.first.bound))
        pc.add_down(cd.var,
                    (probes.first.bound - nb) / std::max(f, 1e-6));
      if (probes.second.feasible && std::isfinite(probes.second.bound))
        pc.add_up(cd.var,
                  (probes.second.bound - nb) / std::max(1.0 - f, 1e-6));
      scores[i] = strong_score(probes, nb);
    }
    return argmax_first(scores);
  }
};

}  // namespace

std::unique_ptr<BranchingPolicy> make_baseline_policy(const std::string& name,
                                                      std::uint64_t seed) {
  (void)seed;  // the engine's RNG drives randomized policies
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name == "most_fractional") return std::make_unique<MostFractionalPolicy>();
  if (name == "pscost") return std::make_unique<PscostPolicy>();
  if (name == "strong") return std::make_unique<StrongPolicy>();
  if (name == "relpscost") return std::make_unique<RelpscostLikePolicy>();
  throw Error("UNKNOWN_POLICY", name);
}

std::vector<std::string> baseline_policy_names() {
  return {"random", "most_fractional", "pscost", "strong", "relpscost"};
}

}  // namespace tgb
