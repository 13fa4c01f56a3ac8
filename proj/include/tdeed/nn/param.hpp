// Copyright 2026 The tdeed authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tdeed/core/errors.hpp"
#include "tdeed/core/types.hpp"

namespace tdeed::nn {

/// A learnable tensor. `id` indexes the flat gradient vector assigned at
/// registration time; gradients never live inside the parameter so that
/// several clips can be processed against the same read-only model.
template <class S>
struct Parameter {
  std::string name;
  MatX<S> value;
  int id = -1;

  Eigen::Index size() const { return value.size(); }
};

/// Flat per-parameter gradient buffers, aligned with registration order.
template <class S>
using GradVec = std::vector<MatX<S>>;

template <class S>
class ParamRegistry {
 public:
  void add(Parameter<S>& p, const std::string& name) {
    p.name = name;
    p.id = static_cast<int>(params_.size());
    params_.push_back(&p);
  }

  const std::vector<Parameter<S>*>& list() const { return params_; }
  std::size_t count() const { return params_.size(); }

  Eigen::Index scalar_count() const {
    Eigen::Index n = 0;
    for (const auto* p : params_) n += p->size();
    return n;
  }

  GradVec<S> make_grads() const {
    GradVec<S> g;
    g.reserve(params_.size());
    for (const auto* p : params_)
      g.push_back(MatX<S>::Zero(p->value.rows(), p->value.cols()));
    return g;
  }

  static void accumulate(GradVec<S>& into, const GradVec<S>& from, S scale = S(1)) {
    check_contract(into.size() == from.size(), "grad accumulate: size mismatch");
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += scale * from[i];
  }

  static void zero(GradVec<S>& g) {
    for (auto& m : g) m.setZero();
  }

 private:
  std::vector<Parameter<S>*> params_;
};

/// Builds nested parameter names ("encoder.0.ffn.w1").
inline std::string scoped(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

}  // namespace tdeed::nn
