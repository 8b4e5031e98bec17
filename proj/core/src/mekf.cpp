#include "pukf/mekf.hpp"

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"
#include "pukf/filter_core.hpp"
#include "pukf/sqrt_filter.hpp"
#include "pukf/ud_filter.hpp"

namespace pukf {

Index MekfState::add_quaternion_block(const std::string& name, const Quaternion& q0) {
  MekfBlock b;
  b.name = name;
  b.is_quaternion = true;
  b.dim = 3;
  b.error_offset = error_dim_;
  b.value_index = static_cast<Index>(quats_.size());
  quats_.push_back(q0.normalized());
  blocks_.push_back(b);
  error_dim_ += 3;
  return static_cast<Index>(blocks_.size()) - 1;
}

Index MekfState::add_additive_block(const std::string& name, const Vector& x0) {
  MekfBlock b;
  b.name = name;
  b.is_quaternion = false;
  b.dim = x0.size();
  b.error_offset = error_dim_;
  b.value_index = static_cast<Index>(additive_.size());
  additive_.push_back(x0);
  blocks_.push_back(b);
  error_dim_ += x0.size();
  return static_cast<Index>(blocks_.size()) - 1;
}

Quaternion& MekfState::quaternion(Index block_index) {
  const MekfBlock& b = blocks_.at(block_index);
  if (!b.is_quaternion) throw FilterError("MekfState: block is not a quaternion");
  return quats_.at(b.value_index);
}

const Quaternion& MekfState::quaternion(Index block_index) const {
  const MekfBlock& b = blocks_.at(block_index);
  if (!b.is_quaternion) throw FilterError("MekfState: block is not a quaternion");
  return quats_.at(b.value_index);
}

Vector& MekfState::additive(Index block_index) {
  const MekfBlock& b = blocks_.at(block_index);
  if (b.is_quaternion) throw FilterError("MekfState: block is not additive");
  return additive_.at(b.value_index);
}

const Vector& MekfState::additive(Index block_index) const {
  const MekfBlock& b = blocks_.at(block_index);
  if (b.is_quaternion) throw FilterError("MekfState: block is not additive");
  return additive_.at(b.value_index);
}

void MekfState::set_covariance(Covariance cov) {
  if (covariance_dim(cov) != error_dim_)
    throw FilterError("MekfState: covariance dimension does not match error state");
  cov_ = std::move(cov);
}

void MekfState::inject_correction(const Vector& delta) {
  if (delta.size() != error_dim_) throw FilterError("MekfState: correction size mismatch");
  for (const MekfBlock& b : blocks_) {
    if (b.is_quaternion) {
      const Eigen::Vector3d dtheta = delta.segment<3>(b.error_offset);
      if (dtheta.isZero(0.0)) continue;
      Quaternion& q = quats_[b.value_index];
      q = quat_multiply(small_angle_quat(dtheta), q).normalized();
    } else {
      additive_[b.value_index] += delta.segment(b.error_offset, b.dim);
    }
  }
}

MekfState pu_mekf_update(const MekfState& state, const Matrix& h, const Matrix& r_cov,
                         const Vector& residual, const UpdateWeights& w,
                         Vector* correction_out) {
  if (w.size() != state.error_dim())
    throw FilterError("pu_mekf_update: weight dimension mismatch");

  MekfState out = state;
  Matrix gain;

  switch (covariance_form(state.covariance())) {
    case CovForm::Full: {
      const Matrix p = std::get<Matrix>(state.covariance());
      const GainResult g = kalman_gain(p, h, r_cov);
      const Index n = p.rows();
      const Matrix p_plus =
          symmetrized((Matrix::Identity(n, n) - g.K * h) * p);
      const Vector zero = Vector::Zero(n);
      out.set_covariance(partial_update(zero, zero, p, p_plus, w).P);
      gain = g.K;
      break;
    }
    case CovForm::SquareRoot: {
      const SqrtFactor& s = std::get<SqrtFactor>(state.covariance());
      const SrVectorCovUpdate up = sr_vector_cov_update(s.S, h, r_cov, w);
      out.set_covariance(SqrtFactor{up.S});
      gain = up.K;
      break;
    }
    case CovForm::Ud: {
      const UdFactors& f = std::get<UdFactors>(state.covariance());
      const UdGain g = ud_gain(f, h, r_cov);
      const UdPartialUpdate up =
          ud_partial_update(f, g, w, Vector::Zero(state.error_dim()), residual);
      out.set_covariance(up.cov);
      gain = g.K;
      break;
    }
  }

  const Vector delta = w.beta().cwiseProduct(gain * residual);
  out.inject_correction(delta);
  if (correction_out) *correction_out = delta;
  return out;
}

void MekfCovPropagator::propagate(MekfState& state, const Matrix& phi, const Matrix& qd) {
  switch (covariance_form(state.covariance())) {
    case CovForm::Full: {
      const Matrix& p = std::get<Matrix>(state.covariance());
      state.set_covariance(symmetrized(phi * p * phi.transpose() + qd));
      break;
    }
    case CovForm::SquareRoot: {
      if (cached_qd_.size() == 0 || cached_qd_.rows() != qd.rows() || cached_qd_ != qd) {
        cached_qd_ = qd;
        cached_sqrt_t_ = symmetric_sqrt(qd).transpose();
      }
      const SqrtFactor& s = std::get<SqrtFactor>(state.covariance());
      state.set_covariance(SqrtFactor{sr_propagate(s.S, phi, cached_sqrt_t_)});
      break;
    }
    case CovForm::Ud: {
      const UdFactors& f = std::get<UdFactors>(state.covariance());
      const Index n = f.U.rows();
      state.set_covariance(ud_propagate(f, phi, Matrix::Identity(n, n), qd));
      break;
    }
  }
}

}  // namespace pukf
