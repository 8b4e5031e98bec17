#pragma once

#include <string>
#include <vector>

#include "pukf/quaternion.hpp"
#include "pukf/types.hpp"
#include "pukf/weights.hpp"

namespace pukf {

/// Error-state bookkeeping for the partial-update multiplicative EKF.
/// Quaternion blocks occupy three error-state rows each (small-angle error);
/// additive blocks occupy their own dimension. The covariance lives over the
/// reduced error-state dimension in any of the three representations.

struct MekfBlock {
  std::string name;
  bool is_quaternion = false;
  Index dim = 0;           // error-state rows (3 for quaternion blocks)
  Index error_offset = 0;  // first error-state row of this block
  Index value_index = 0;   // index into the quaternion or additive storage
};

class MekfState {
 public:
  Index add_quaternion_block(const std::string& name, const Quaternion& q0);
  Index add_additive_block(const std::string& name, const Vector& x0);

  Index error_dim() const { return error_dim_; }
  const std::vector<MekfBlock>& blocks() const { return blocks_; }
  const MekfBlock& block(Index i) const { return blocks_.at(i); }

  Quaternion& quaternion(Index block_index);
  const Quaternion& quaternion(Index block_index) const;
  Vector& additive(Index block_index);
  const Vector& additive(Index block_index) const;

  void set_covariance(Covariance cov);
  Covariance& covariance() { return cov_; }
  const Covariance& covariance() const { return cov_; }
  Matrix covariance_full() const { return covariance_matrix(cov_); }

  /// Applies an already weighted error-state correction: additive blocks add
  /// their segment, quaternion blocks compose the small-angle error
  /// quaternion and renormalize. Zero quaternion segments are skipped so a
  /// beta = 0 block is bit-for-bit untouched.
  void inject_correction(const Vector& delta);

 private:
  std::vector<MekfBlock> blocks_;
  std::vector<Quaternion> quats_;
  std::vector<Vector> additive_;
  Index error_dim_ = 0;
  Covariance cov_ = Matrix();
};

/// One PU-MEKF measurement update: delta x^{++} = beta .* (K r); quaternion
/// blocks are corrected multiplicatively, additive blocks additively, and the
/// covariance is partial-updated with the same weights through the active
/// backend. Returns the applied correction via out parameter when requested.
MekfState pu_mekf_update(const MekfState& state, const Matrix& h, const Matrix& r_cov,
                         const Vector& residual, const UpdateWeights& w,
                         Vector* correction_out = nullptr);

/// Covariance propagation through the active backend. Caches the process
/// noise square root while qd is unchanged (it is recomputed whenever qd
/// changes value).
class MekfCovPropagator {
 public:
  void propagate(MekfState& state, const Matrix& phi, const Matrix& qd);

 private:
  Matrix cached_qd_;
  Matrix cached_sqrt_t_;  // transpose factor of qd
};

}  // namespace pukf
