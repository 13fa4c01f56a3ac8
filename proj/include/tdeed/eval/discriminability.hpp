// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/types.hpp"
#include "tdeed/model/tdeed.hpp"

namespace tdeed::eval {

/// Mean cosine similarity between each token and the sequence's mean token.
/// 1.0 means the sequence has collapsed to a single direction; values near 0
/// mean tokens stay mutually distinguishable. Norms are floored at 1e-12, so
/// a zero mean token yields ~0 rather than a division failure.
template <class S>
double discriminability(const TokenSeq<S>& tokens) {
  check_contract(tokens.valid >= 1, "discriminability: empty sequence");
  constexpr double eps = 1e-12;
  const auto x = tokens.x.leftCols(tokens.valid).template cast<double>().eval();
  const Eigen::VectorXd mean = x.rowwise().mean();
  const double mean_norm = std::max(mean.norm(), eps);
  double acc = 0.0;
  for (Eigen::Index l = 0; l < x.cols(); ++l) {
    const double tok_norm = std::max(x.col(l).norm(), eps);
    acc += x.col(l).dot(mean) / (tok_norm * mean_norm);
  }
  return acc / static_cast<double>(x.cols());
}

struct StageSimilarity {
  std::string stage;
  double mean_similarity = 0.0;
};

/// Runs the model over probe clips with stage hooks enabled and averages the
/// per-stage similarity. Stages come back in architectural order (capture
/// order of the first probe).
template <class S>
std::vector<StageSimilarity> discriminability_profile(
    const model::TdeedModel<S>& m, const std::vector<FeatureMapSeq<S>>& probes) {
  check_contract(!probes.empty(), "discriminability: no probe clips");
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& clip : probes) {
    typename model::TdeedModel<S>::Cache cache;
    std::vector<model::StageHook<S>> hooks;
    if (m.cfg().temporal_module == model::TemporalModule::sgp_pyramid)
      m.pyramid_forward(clip, cache, &hooks);
    else
      m.forward(clip, cache, &hooks);
    for (const auto& h : hooks) {
      auto [it, fresh] = acc.try_emplace(h.name, std::pair<double, int>{0.0, 0});
      if (fresh) order.push_back(h.name);
      it->second.first += discriminability(h.tokens);
      it->second.second += 1;
    }
  }
  std::vector<StageSimilarity> out;
  for (const auto& name : order)
    out.push_back({name, acc[name].first / acc[name].second});
  return out;
}

}  // namespace tdeed::eval
