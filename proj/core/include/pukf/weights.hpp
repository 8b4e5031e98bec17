#pragma once

#include "pukf/errors.hpp"
#include "pukf/types.hpp"

namespace pukf {

/// Per-state update percentages beta in [0,1], with gamma_i = 1 - beta_i.
/// beta = 1 is a full update, beta = 0 a consider (Schmidt) step.
class UpdateWeights {
 public:
  explicit UpdateWeights(Vector beta) : beta_(std::move(beta)) {
    for (Index i = 0; i < beta_.size(); ++i) {
      if (!(beta_(i) >= 0.0 && beta_(i) <= 1.0))
        throw WeightOutOfRange("UpdateWeights: beta outside [0,1]");
    }
  }

  static UpdateWeights uniform(Index n, double beta) {
    return UpdateWeights(Vector::Constant(n, beta));
  }
  static UpdateWeights full_update(Index n) { return uniform(n, 1.0); }
  static UpdateWeights consider_all(Index n) { return uniform(n, 0.0); }

  const Vector& beta() const { return beta_; }
  Vector gamma() const { return Vector::Ones(beta_.size()) - beta_; }
  Matrix gamma_matrix() const { return gamma().asDiagonal(); }

  Index size() const { return beta_.size(); }
  bool all_one() const { return (beta_.array() == 1.0).all(); }
  bool all_zero() const { return (beta_.array() == 0.0).all(); }

 private:
  Vector beta_;
};

}  // namespace pukf
