#include "pukf/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"
#include "pukf/filter_core.hpp"
#include "pukf/mekf.hpp"
#include "pukf/quaternion.hpp"
#include "pukf/sqrt_filter.hpp"
#include "pukf/ud_filter.hpp"

namespace pukf {

namespace {

Vector parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      values.push_back(std::stod(item, &pos));
    } catch (const std::exception&) {
      throw ConfigError("weights: bad number '" + item + "'");
    }
  }
  if (values.empty()) throw ConfigError("weights: empty list");
  Vector v(static_cast<Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) v(static_cast<Index>(i)) = values[i];
  return v;
}

Vector resolve_beta(const std::optional<Vector>& given, const Vector& fallback, Index n) {
  Vector beta = fallback;
  if (given) beta = *given;
  if (beta.size() == 1 && n > 1) beta = Vector::Constant(n, beta(0));
  if (beta.size() != n)
    throw ConfigError("weights: expected " + std::to_string(n) + " entries, got " +
                      std::to_string(beta.size()));
  for (Index i = 0; i < n; ++i)
    if (!(beta(i) >= 0.0 && beta(i) <= 1.0)) throw ConfigError("weights: beta outside [0,1]");
  return beta;
}

double safe_condition_number(const Matrix& m) {
  if (!m.allFinite()) return std::numeric_limits<double>::infinity();
  return condition_number(m);
}

double factor_condition_full(const Matrix& p) {
  try {
    return safe_condition_number(cholesky_lower(p));
  } catch (const NotPositiveDefinite&) {
    return std::numeric_limits<double>::infinity();
  }
}

std::vector<Matrix> eval_f_hessians(const NonlinearSystem& sys, const Vector& x,
                                    const Vector& u, int k) {
  if (sys.has_f_hessians()) return sys.f_hessians(x, u, k);
  return finite_diff_hessians([&](const Vector& xx) { return sys.f(xx, u, k); }, x);
}

std::vector<Matrix> eval_h_hessians(const NonlinearSystem& sys, const Vector& x, int k) {
  if (sys.has_h_hessians()) return sys.h_hessians(x, k);
  return finite_diff_hessians([&](const Vector& xx) { return sys.h(xx, k); }, x);
}

/// Weights for one measurement epoch. Dynamic modes evaluate the
/// second-order terms once here and hold the result through any sequential
/// scalar loop.
UpdateWeights epoch_weights(const WeightSpec& spec, const Vector& static_beta,
                            const NonlinearSystem& sys, const Vector& x_minus,
                            const Matrix& p_minus, const Vector& y, int k,
                            const Vector& x_prev, const Matrix& p_prev,
                            const Vector& u_prev, const Vector& sigma0) {
  if (spec.mode == WeightMode::Static) return UpdateWeights(static_beta);

  const Matrix h = sys.H(x_minus, k);
  const Vector y_hat = sys.h(x_minus, k);
  const Vector sigma_k = p_minus.diagonal().cwiseMax(0.0).cwiseSqrt();
  const Vector f_scale = scale_factor(sigma_k, sigma0, h, p_minus, sys.R);

  UpdateWeights w = UpdateWeights::full_update(x_minus.size());
  if (spec.mode == WeightMode::Dnl) {
    const GainResult g = kalman_gain(p_minus, h, sys.R);
    const std::vector<Matrix> f_hess = eval_f_hessians(sys, x_prev, u_prev, k - 1);
    const std::vector<Matrix> h_hess = eval_h_hessians(sys, x_minus, k);
    const Vector y_term = second_order_state_term(f_hess, p_prev) -
                          second_order_meas_term(h_hess, p_minus, g.K);
    const Vector z_term = g.K * (y - y_hat);
    w = dnl_select(y_term, z_term, f_scale);
  } else {
    const std::vector<Matrix> h_hess = eval_h_hessians(sys, x_minus, k);
    const Matrix lambda = lambda_matrix(h_hess, p_minus);
    w = dc_select(p_minus, h, sys.R, lambda, f_scale);
  }
  if (spec.baseline) {
    Vector base = *spec.baseline;
    if (base.size() == 1 && x_minus.size() > 1) base = Vector::Constant(x_minus.size(), base(0));
    w = apply_baseline(w, base);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Generic full/SR/UD state holder for NonlinearSystem scenarios.

struct FilterBelief {
  CovForm form = CovForm::Full;
  Vector x;
  Matrix P;      // Full
  Matrix S;      // SquareRoot
  UdFactors ud;  // Ud

  static FilterBelief init(CovForm form, const Vector& x0, const Matrix& p0) {
    FilterBelief b;
    b.form = form;
    b.x = x0;
    switch (form) {
      case CovForm::Full: b.P = p0; break;
      case CovForm::SquareRoot: b.S = cholesky_lower(p0); break;
      case CovForm::Ud: b.ud = udu_decompose(p0); break;
    }
    return b;
  }

  Matrix full_cov() const {
    switch (form) {
      case CovForm::Full: return P;
      case CovForm::SquareRoot: return S * S.transpose();
      case CovForm::Ud: return ud.reconstruct();
    }
    return P;
  }

  double factor_cond() const {
    switch (form) {
      case CovForm::Full: return factor_condition_full(P);
      case CovForm::SquareRoot: return safe_condition_number(S);
      case CovForm::Ud:
        return safe_condition_number(ud.U * ud.d.cwiseMax(0.0).cwiseSqrt().asDiagonal());
    }
    return 0.0;
  }

  void propagate(const NonlinearSystem& sys, const Vector& u, int k, Matrix* q_sqrt_cache) {
    switch (form) {
      case CovForm::Full: {
        const StateCov out = ekf_propagate({x, P}, sys, u, k);
        x = out.x;
        P = out.P;
        break;
      }
      case CovForm::SquareRoot: {
        const Matrix f = sys.F(x, u, k);
        x = sys.f(x, u, k);
        if (!x.allFinite()) throw NonFiniteState("sr propagate: non-finite state");
        if (q_sqrt_cache->size() == 0 && !sys.Q.isZero(0.0))
          *q_sqrt_cache = (sys.G * symmetric_sqrt(sys.Q)).transpose();
        S = sr_propagate(S, f, q_sqrt_cache->size() == 0 ? Matrix(0, x.size()) : *q_sqrt_cache);
        break;
      }
      case CovForm::Ud: {
        const Matrix f = sys.F(x, u, k);
        x = sys.f(x, u, k);
        if (!x.allFinite()) throw NonFiniteState("ud propagate: non-finite state");
        ud = ud_propagate(ud, f, sys.G, sys.Q);
        break;
      }
    }
  }

  /// Assimilates the given scalar rows (subset of the decorrelated
  /// measurement) with a partial update after each scalar step.
  void assimilate_rows(const NonlinearSystem& sys, const Vector& y,
                       const std::vector<Index>& rows, const UpdateWeights& w, int k) {
    if (rows.empty() || w.all_zero()) return;
    const Index n = x.size();

    Matrix t = Matrix::Identity(y.size(), y.size());
    Vector r_diag = sys.R.diagonal();
    if (!is_diagonal(sys.R)) {
      if (form == CovForm::Ud) {
        const UdFactors rf = udu_decompose(sys.R);
        t = rf.U.triangularView<Eigen::Upper>().solve(Matrix::Identity(y.size(), y.size()));
        r_diag = rf.d;
      } else {
        const Matrix s_r = cholesky_lower(sys.R);
        t = s_r.triangularView<Eigen::Lower>().solve(Matrix::Identity(y.size(), y.size()));
        r_diag = Vector::Ones(y.size());
      }
    }

    for (Index row : rows) {
      const Matrix h_full = t * sys.H(x, k);
      const Vector y_hat = t * sys.h(x, k);
      const Vector z = t * y;
      const Vector h_row = h_full.row(row).transpose();
      const double r_i = r_diag(row);
      const double resid = z(row) - y_hat(row);

      switch (form) {
        case CovForm::Full: {
          const double innov = h_row.dot(P * h_row) + r_i;
          if (!(innov > 0.0)) throw SingularInnovation("scalar innovation <= 0");
          const Vector kv = P * h_row / innov;
          const Vector x_plus = x + kv * resid;
          const Matrix p_plus =
              symmetrized((Matrix::Identity(n, n) - kv * h_row.transpose()) * P);
          const StateCov out = partial_update(x, x_plus, P, p_plus, w);
          x = out.x;
          P = out.P;
          break;
        }
        case CovForm::SquareRoot: {
          const PotterUpdate up =
              potter_scalar_update(S, x, h_row, r_i, z(row), y_hat(row));
          const SrPartialUpdate pu =
              sr_partial_update_scalar(S, up.S, up.a, up.phi, w, x, up.x);
          x = pu.x;
          S = pu.S;
          break;
        }
        case CovForm::Ud: {
          const UdGain g = ud_gain(ud, h_row.transpose(), Matrix::Constant(1, 1, r_i));
          const UdPartialUpdate pu =
              ud_partial_update(ud, g, w, x, Vector::Constant(1, resid));
          x = pu.x;
          ud = pu.cov;
          break;
        }
      }
      if (!x.allFinite()) throw NonFiniteState("assimilate: non-finite state");
    }
  }
};

void push_row(RunRecord& rec, double t, const Vector& truth, const Vector& est,
              const Vector& sigma, const Vector& beta, const Matrix& cov,
              double cond_factor, int gate) {
  rec.time.push_back(t);
  rec.truth.push_back(truth);
  rec.est.push_back(est);
  rec.err.push_back(est - truth);
  rec.sigma.push_back(sigma);
  rec.beta.push_back(beta);
  rec.cov.push_back(cov);
  rec.cond_full.push_back(safe_condition_number(cov));
  rec.cond_factor.push_back(cond_factor);
  rec.gate.push_back(gate);
}

void freeze_remaining(RunRecord& rec, const std::vector<double>& times,
                      const std::vector<Vector>& truths, size_t from) {
  for (size_t i = from; i < times.size(); ++i) {
    push_row(rec, times[i], truths[i], rec.est.back(), rec.sigma.back(), rec.beta.back(),
             rec.cov.back(), rec.cond_factor.back(), 1);
  }
}

// ---------------------------------------------------------------------------
// Falling body

RunRecord run_falling_body(const ScenarioConfig& cfg, FilterVariant variant,
                           const WeightSpec& spec, std::uint64_t seed) {
  const FallingBodyParams& params = cfg.falling_body;
  const NonlinearSystem sys = falling_body_model(params);
  const FallingBodyStream stream = falling_body_truth(params, seed);

  const Vector default_beta = scenario_default_beta(cfg, variant);
  Vector static_beta = default_beta;
  if (spec.mode == WeightMode::Static)
    static_beta = resolve_beta(spec.static_beta, default_beta, 3);

  CovForm form = CovForm::Full;
  if (variant == FilterVariant::SrPu) form = CovForm::SquareRoot;
  if (variant == FilterVariant::UdPu) form = CovForm::Ud;

  const Matrix p0 = params.sigma0.cwiseProduct(params.sigma0).asDiagonal();
  FilterBelief belief = FilterBelief::init(form, stream.x0_estimate, p0);

  RunRecord rec;
  rec.seed = seed;
  rec.variant = to_string(variant);
  rec.sigma0 = params.sigma0;

  Vector beta_now = spec.mode == WeightMode::Static ? static_beta : Vector::Ones(3);
  {
    const Matrix cov = belief.full_cov();
    push_row(rec, 0.0, stream.truth[0], belief.x, cov.diagonal().cwiseMax(0.0).cwiseSqrt(),
             beta_now, cov, belief.factor_cond(), 1);
  }

  Matrix q_sqrt_cache;
  const Vector u = Vector::Zero(0);
  Vector x_prev = belief.x;
  Matrix p_prev = p0;
  size_t mi = 0;

  const size_t n_rows = stream.times.size();
  for (size_t k = 1; k < n_rows; ++k) {
    try {
      x_prev = belief.x;
      p_prev = belief.full_cov();
      belief.propagate(sys, u, static_cast<int>(k) - 1, &q_sqrt_cache);

      if (mi < stream.meas_step.size() &&
          stream.meas_step[mi] == static_cast<int>(k)) {
        const Vector y = Vector::Constant(1, stream.measurements[mi]);
        ++mi;
        const Matrix p_minus = belief.full_cov();
        const UpdateWeights w =
            epoch_weights(spec, static_beta, sys, belief.x, p_minus, y,
                          static_cast<int>(k), x_prev, p_prev, u, params.sigma0);
        beta_now = w.beta();
        if (variant == FilterVariant::Schmidt) {
          const Matrix h = sys.H(belief.x, static_cast<int>(k));
          const StateCov out = schmidt_update_block(
              {belief.x, p_minus}, {2}, h.leftCols(2), h.rightCols(1), sys.R, y,
              sys.h(belief.x, static_cast<int>(k)));
          belief.x = out.x;
          belief.P = out.P;
        } else {
          belief.assimilate_rows(sys, y, {0}, w, static_cast<int>(k));
        }
      }
    } catch (const FilterError&) {
      if (rec.failed_at < 0.0) rec.failed_at = stream.times[k];
      freeze_remaining(rec, stream.times, stream.truth, k);
      return rec;
    }
    const Matrix cov = belief.full_cov();
    if (!belief.x.allFinite() || !cov.allFinite()) {
      if (rec.failed_at < 0.0) rec.failed_at = stream.times[k];
      freeze_remaining(rec, stream.times, stream.truth, k);
      return rec;
    }
    push_row(rec, stream.times[k], stream.truth[k], belief.x,
             cov.diagonal().cwiseMax(0.0).cwiseSqrt(), beta_now, cov,
             belief.factor_cond(), 1);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Tumbler

RunRecord run_tumbler(const ScenarioConfig& cfg, FilterVariant variant,
                      const WeightSpec& spec, std::uint64_t seed) {
  const TumblerParams& params = cfg.tumbler;
  const NonlinearSystem sys = tumbler_model(params);
  const TumblerStream stream = tumbler_truth(params, seed);
  const int n_feat = params.n_features;
  const Index n = 3 * n_feat + 3;

  const int init_frames =
      std::max(2, static_cast<int>(std::llround(params.init_window * params.frame_rate)));
  if (static_cast<size_t>(init_frames) >= stream.times.size())
    throw ConfigError("tumbler: init window longer than the run");

  std::vector<Matrix> init_clouds(stream.measured_features.begin(),
                                  stream.measured_features.begin() + init_frames);
  const CoarseRateInit coarse = coarse_rate_init(init_clouds, stream.dt);

  const Vector default_beta = scenario_default_beta(cfg, variant);
  Vector static_beta = default_beta;
  if (spec.mode == WeightMode::Static)
    static_beta = resolve_beta(spec.static_beta, default_beta, n);

  const int i0 = init_frames - 1;  // filter anchored at this frame
  Vector x0(n);
  for (int i = 0; i < n_feat; ++i)
    x0.segment<3>(3 * i) = stream.measured_features[i0].row(i).transpose();
  x0.tail<3>() = coarse.omega_mean;

  Vector sigma0(n);
  sigma0.head(3 * n_feat).setConstant(std::sqrt(params.r_variance));
  sigma0.tail<3>() = coarse.omega_sigma.cwiseMax(1e-3);
  const Matrix p0 = sigma0.cwiseProduct(sigma0).asDiagonal();

  CovForm form = CovForm::Full;
  if (variant == FilterVariant::SrPu) form = CovForm::SquareRoot;
  if (variant == FilterVariant::UdPu) form = CovForm::Ud;
  FilterBelief belief = FilterBelief::init(form, x0, p0);

  RunRecord rec;
  rec.seed = seed;
  rec.variant = to_string(variant);
  rec.sigma0 = sigma0;

  auto truth_at = [&](size_t frame) {
    Vector t(n);
    for (int i = 0; i < n_feat; ++i)
      t.segment<3>(3 * i) = stream.truth_features[frame].row(i).transpose();
    t.tail<3>() = stream.omega;
    return t;
  };

  Vector beta_now = spec.mode == WeightMode::Static ? static_beta : Vector::Ones(n);
  {
    const Matrix cov = belief.full_cov();
    push_row(rec, stream.times[i0], truth_at(i0), belief.x,
             cov.diagonal().cwiseMax(0.0).cwiseSqrt(), beta_now, cov,
             belief.factor_cond(), 1);
  }

  Matrix q_sqrt_cache;
  const Vector u = Vector::Zero(0);
  Vector x_prev = belief.x;
  Matrix p_prev = p0;
  const double fresh_var = params.r_variance;
  const double drop_var = params.drop_cov_factor * fresh_var;

  std::vector<double> times_after(stream.times.begin() + i0 + 1, stream.times.end());
  std::vector<Vector> truths_after;
  for (size_t f = i0 + 1; f < stream.times.size(); ++f) truths_after.push_back(truth_at(f));

  for (size_t f = i0 + 1; f < stream.times.size(); ++f) {
    int gate_flag = 1;
    try {
      x_prev = belief.x;
      p_prev = belief.full_cov();
      belief.propagate(sys, u, static_cast<int>(f) - 1, &q_sqrt_cache);

      // Per-feature 3-dof chi-square gating on the innovation.
      Vector y(3 * n_feat);
      for (int i = 0; i < n_feat; ++i)
        y.segment<3>(3 * i) = stream.measured_features[f].row(i).transpose();
      const Matrix p_minus = belief.full_cov();
      std::vector<Index> rows;
      for (int i = 0; i < n_feat; ++i) {
        const Vector innov = y.segment<3>(3 * i) - belief.x.segment<3>(3 * i);
        const Matrix s_i = p_minus.block(3 * i, 3 * i, 3, 3) +
                           params.r_variance * Matrix::Identity(3, 3);
        if (chi2_gate(innov, s_i, params.chi2_threshold)) {
          rows.push_back(3 * i);
          rows.push_back(3 * i + 1);
          rows.push_back(3 * i + 2);
        } else {
          gate_flag = 0;
        }
      }

      const UpdateWeights w =
          epoch_weights(spec, static_beta, sys, belief.x, p_minus, y,
                        static_cast<int>(f), x_prev, p_prev, u, sigma0);
      beta_now = w.beta();
      if (variant == FilterVariant::Schmidt) {
        Matrix h_rows(static_cast<Index>(rows.size()), n);
        Vector y_rows(static_cast<Index>(rows.size()));
        Vector yhat_full = sys.h(belief.x, static_cast<int>(f));
        const Matrix h_full = sys.H(belief.x, static_cast<int>(f));
        Vector yhat_rows(static_cast<Index>(rows.size()));
        Matrix r_rows = params.r_variance *
                        Matrix::Identity(static_cast<Index>(rows.size()),
                                         static_cast<Index>(rows.size()));
        for (size_t ri = 0; ri < rows.size(); ++ri) {
          h_rows.row(static_cast<Index>(ri)) = h_full.row(rows[ri]);
          y_rows(static_cast<Index>(ri)) = y(rows[ri]);
          yhat_rows(static_cast<Index>(ri)) = yhat_full(rows[ri]);
        }
        const StateCov out = schmidt_update_block(
            {belief.x, p_minus}, {3 * n_feat}, h_rows.leftCols(3 * n_feat),
            h_rows.rightCols(3), r_rows, y_rows, yhat_rows);
        belief.x = out.x;
        belief.P = out.P;
      } else {
        belief.assimilate_rows(sys, y, rows, w, static_cast<int>(f));
      }

      // Re-initialization: forced on a period, or when too few features stay
      // below the covariance drop threshold.
      bool want_reinit = false;
      if (params.forced_reinit_period > 0 &&
          (static_cast<int>(f) - i0) % params.forced_reinit_period == 0)
        want_reinit = true;
      const Matrix p_now = belief.full_cov();
      int active = 0;
      for (int i = 0; i < n_feat; ++i)
        if (p_now.block(3 * i, 3 * i, 3, 3).trace() / 3.0 <= drop_var) ++active;
      if (active < params.reinit_threshold) want_reinit = true;

      if (want_reinit) {
        const TumblerReinitResult re =
            tumbler_reinit(belief.x, p_now, stream.measured_features[f], fresh_var);
        belief = FilterBelief::init(form, re.x, re.P);
      }
    } catch (const FilterError&) {
      if (rec.failed_at < 0.0) rec.failed_at = stream.times[f];
      freeze_remaining(rec, times_after, truths_after, f - i0 - 1);
      return rec;
    }
    const Matrix cov = belief.full_cov();
    if (!belief.x.allFinite() || !cov.allFinite()) {
      if (rec.failed_at < 0.0) rec.failed_at = stream.times[f];
      freeze_remaining(rec, times_after, truths_after, f - i0 - 1);
      return rec;
    }
    push_row(rec, stream.times[f], truth_at(f), belief.x,
             cov.diagonal().cwiseMax(0.0).cwiseSqrt(), beta_now, cov,
             belief.factor_cond(), gate_flag);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// IMU-camera (PU-MEKF)

Vector imu_cam_truth_log(const ImuCamState& s) {
  Vector v(21);
  v.segment<3>(0) = rotation_vector(s.q_wi);
  v.segment<3>(3) = s.p;
  v.segment<3>(6) = s.v;
  v.segment<3>(9) = s.bg;
  v.segment<3>(12) = s.ba;
  v.segment<3>(15) = s.p_ic;
  v.segment<3>(18) = rotation_vector(s.q_ic);
  return v;
}

Vector imu_cam_error_log(const ImuCamState& est, const ImuCamState& truth) {
  Vector v(21);
  v.segment<3>(0) = attitude_error(est.q_wi, truth.q_wi);
  v.segment<3>(3) = est.p - truth.p;
  v.segment<3>(6) = est.v - truth.v;
  v.segment<3>(9) = est.bg - truth.bg;
  v.segment<3>(12) = est.ba - truth.ba;
  v.segment<3>(15) = est.p_ic - truth.p_ic;
  v.segment<3>(18) = attitude_error(est.q_ic, truth.q_ic);
  return v;
}

double mekf_factor_cond(const MekfState& st) {
  switch (covariance_form(st.covariance())) {
    case CovForm::Full:
      return factor_condition_full(std::get<Matrix>(st.covariance()));
    case CovForm::SquareRoot:
      return safe_condition_number(std::get<SqrtFactor>(st.covariance()).S);
    case CovForm::Ud: {
      const UdFactors& f = std::get<UdFactors>(st.covariance());
      return safe_condition_number(f.U * f.d.cwiseMax(0.0).cwiseSqrt().asDiagonal());
    }
  }
  return 0.0;
}

RunRecord run_imu_cam(const ScenarioConfig& cfg, FilterVariant variant,
                      const WeightSpec& spec, std::uint64_t seed) {
  if (variant != FilterVariant::MekfPu)
    throw ConfigError("imu-cam supports --filter mekf-pu only");
  if (spec.mode != WeightMode::Static)
    throw ConfigError("imu-cam supports static weights only");

  const ImuCamParams& params = cfg.imu_cam;
  const ImuCamStream stream = imu_cam_truth(params, seed);

  const Vector default_beta = scenario_default_beta(cfg, variant);
  const Vector beta = resolve_beta(spec.static_beta, default_beta, kImuCamErrorDim);
  const UpdateWeights w{beta};

  MekfState st = make_imu_cam_filter_state(params, stream.init_estimate, cfg.mekf_cov_form);
  MekfCovPropagator propagator;
  const Matrix qc = imu_cam_qc(params);
  const double dt = stream.imu_dt;
  const Matrix r_unit = params.pixel_sigma * params.pixel_sigma * Matrix::Identity(2, 2);

  Vector sigma0(kImuCamErrorDim);
  sigma0 << Vector::Constant(3, params.imu_att_sigma), Vector::Constant(3, params.imu_pos_sigma),
      Vector::Constant(3, params.vel_sigma), Vector::Constant(3, params.gyro_bias_sigma),
      Vector::Constant(3, params.accel_bias_sigma), Vector::Constant(3, params.lever_sigma),
      Vector::Constant(3, params.ext_att_sigma);

  RunRecord rec;
  rec.seed = seed;
  rec.variant = to_string(variant);
  rec.sigma0 = sigma0;

  std::vector<double> frame_times;
  std::vector<Vector> frame_truths;
  frame_times.reserve(stream.frames.size());
  for (const ImuCamFrame& fr : stream.frames) {
    frame_times.push_back(fr.imu_index * dt);
    frame_truths.push_back(imu_cam_truth_log(stream.truth[fr.imu_index]));
  }

  size_t frame_i = 0;
  for (int k = 0; k < static_cast<int>(stream.gyro.size()); ++k) {
    try {
      ImuCamState est = imu_cam_state_from_mekf(st);
      const Eigen::Vector3d omega_hat = stream.gyro[k] - est.bg;
      const Eigen::Vector3d sf_hat = stream.accel[k] - est.ba;

      const Matrix f_err = imu_cam_error_f(est.q_wi, omega_hat, sf_hat);
      const Matrix g_err = imu_cam_error_g(est.q_wi);
      const Matrix phi =
          Matrix::Identity(kImuCamErrorDim, kImuCamErrorDim) + f_err * dt;
      const Matrix qd = g_err * qc * g_err.transpose() * dt;
      propagator.propagate(st, phi, qd);

      ImuCamState mean = est;
      imu_cam_mean_propagate(mean, omega_hat, sf_hat, params.gravity, dt);
      st.quaternion(0) = mean.q_wi;
      st.additive(1) = mean.p;
      st.additive(2) = mean.v;

      if (frame_i < stream.frames.size() &&
          stream.frames[frame_i].imu_index == k + 1) {
        const ImuCamFrame& fr = stream.frames[frame_i];
        if (!fr.feature_ids.empty() && !w.all_zero()) {
          const ImuCamState pred = imu_cam_state_from_mekf(st);
          const ImuCamProjection proj =
              imu_cam_measurement_model(params, pred, stream.landmarks, fr.feature_ids);
          Vector residual(2 * static_cast<Index>(proj.feature_ids.size()));
          for (size_t i = 0; i < proj.feature_ids.size(); ++i) {
            const auto it = std::find(fr.feature_ids.begin(), fr.feature_ids.end(),
                                      proj.feature_ids[i]);
            const size_t j = static_cast<size_t>(it - fr.feature_ids.begin());
            residual(2 * i) = fr.pixels[j].x() - proj.y_hat(2 * i);
            residual(2 * i + 1) = fr.pixels[j].y() - proj.y_hat(2 * i + 1);
          }
          const Index mdim = residual.size();
          const Matrix r_cov = params.pixel_sigma * params.pixel_sigma *
                               Matrix::Identity(mdim, mdim);
          st = pu_mekf_update(st, proj.h, r_cov, residual, w);
        }

        const ImuCamState est_now = imu_cam_state_from_mekf(st);
        const ImuCamState& truth_now = stream.truth[fr.imu_index];
        const Matrix cov = st.covariance_full();
        if (!cov.allFinite()) throw NonFiniteState("imu-cam: covariance non-finite");
        RunRecord& r = rec;
        r.time.push_back(fr.imu_index * dt);
        r.truth.push_back(imu_cam_truth_log(truth_now));
        r.est.push_back(imu_cam_truth_log(est_now));
        r.err.push_back(imu_cam_error_log(est_now, truth_now));
        r.sigma.push_back(cov.diagonal().cwiseMax(0.0).cwiseSqrt());
        r.beta.push_back(beta);
        r.cov.push_back(cov);
        r.cond_full.push_back(safe_condition_number(cov));
        r.cond_factor.push_back(mekf_factor_cond(st));
        r.gate.push_back(1);
        ++frame_i;
      }
    } catch (const FilterError&) {
      if (rec.failed_at < 0.0) rec.failed_at = (k + 1) * dt;
      // Freeze the remaining camera-frame rows.
      if (rec.time.empty()) {
        const ImuCamState est0 = stream.init_estimate;
        rec.time.push_back(0.0);
        rec.truth.push_back(imu_cam_truth_log(stream.truth[0]));
        rec.est.push_back(imu_cam_truth_log(est0));
        rec.err.push_back(imu_cam_error_log(est0, stream.truth[0]));
        rec.sigma.push_back(sigma0);
        rec.beta.push_back(beta);
        rec.cov.push_back(Matrix(sigma0.cwiseProduct(sigma0).asDiagonal()));
        rec.cond_full.push_back(1.0);
        rec.cond_factor.push_back(1.0);
        rec.gate.push_back(1);
      }
      while (frame_i < stream.frames.size()) {
        const ImuCamFrame& fr = stream.frames[frame_i];
        const ImuCamState& truth_now = stream.truth[fr.imu_index];
        rec.time.push_back(fr.imu_index * dt);
        rec.truth.push_back(imu_cam_truth_log(truth_now));
        rec.est.push_back(rec.est.back());
        rec.err.push_back(rec.est.back() - imu_cam_truth_log(truth_now));
        rec.sigma.push_back(rec.sigma.back());
        rec.beta.push_back(rec.beta.back());
        rec.cov.push_back(rec.cov.back());
        rec.cond_full.push_back(rec.cond_full.back());
        rec.cond_factor.push_back(rec.cond_factor.back());
        rec.gate.push_back(1);
        ++frame_i;
      }
      return rec;
    }
  }
  return rec;
}

}  // namespace

FilterVariant parse_filter_variant(const std::string& name) {
  if (name == "ekf") return FilterVariant::Ekf;
  if (name == "schmidt") return FilterVariant::Schmidt;
  if (name == "pu") return FilterVariant::Pu;
  if (name == "sr-pu") return FilterVariant::SrPu;
  if (name == "ud-pu") return FilterVariant::UdPu;
  if (name == "mekf-pu") return FilterVariant::MekfPu;
  throw ConfigError("unknown filter variant '" + name + "'");
}

std::string to_string(FilterVariant variant) {
  switch (variant) {
    case FilterVariant::Ekf: return "ekf";
    case FilterVariant::Schmidt: return "schmidt";
    case FilterVariant::Pu: return "pu";
    case FilterVariant::SrPu: return "sr-pu";
    case FilterVariant::UdPu: return "ud-pu";
    case FilterVariant::MekfPu: return "mekf-pu";
  }
  return "?";
}

WeightSpec parse_weight_spec(const std::string& text) {
  WeightSpec spec;
  if (text.empty()) return spec;
  auto parse_base = [&](const std::string& rest) {
    if (rest.rfind("base=", 0) != 0) throw ConfigError("weights: expected base=<list>");
    spec.baseline = parse_number_list(rest.substr(5));
  };
  if (text == "dnl") spec.mode = WeightMode::Dnl;
  else if (text == "dc") spec.mode = WeightMode::Dc;
  else if (text.rfind("dnl:", 0) == 0) {
    spec.mode = WeightMode::Dnl;
    parse_base(text.substr(4));
  } else if (text.rfind("dc:", 0) == 0) {
    spec.mode = WeightMode::Dc;
    parse_base(text.substr(3));
  } else {
    spec.static_beta = parse_number_list(text);
  }
  return spec;
}

Vector scenario_default_beta(const ScenarioConfig& cfg, FilterVariant variant) {
  if (cfg.scenario == "falling-body") {
    switch (variant) {
      case FilterVariant::Ekf: return Vector::Ones(3);
      case FilterVariant::Schmidt: return (Vector(3) << 1.0, 1.0, 0.0).finished();
      default: return (Vector(3) << 0.9, 0.9, 0.75).finished();
    }
  }
  if (cfg.scenario == "tumbler") {
    const Index n = 3 * cfg.tumbler.n_features + 3;
    Vector beta = Vector::Ones(n);
    switch (variant) {
      case FilterVariant::Ekf: return beta;
      case FilterVariant::Schmidt:
        beta.tail<3>().setZero();
        return beta;
      default:
        beta.head(3 * cfg.tumbler.n_features).setConstant(cfg.tumbler.feature_beta);
        beta.tail<3>().setConstant(cfg.tumbler.rate_beta);
        return beta;
    }
  }
  // imu-cam: the paper's block weights.
  Vector beta(kImuCamErrorDim);
  beta << Vector::Constant(3, 0.95), Vector::Constant(3, 0.95), Vector::Constant(3, 1.0),
      Vector::Constant(3, 1.0), Vector::Constant(3, 1.0), Vector::Constant(3, 0.25),
      Vector::Constant(3, 0.25);
  return beta;
}

RunRecord run_scenario(const ScenarioConfig& cfg, FilterVariant variant,
                       const WeightSpec& weights, std::uint64_t seed) {
  if (cfg.scenario == "falling-body") return run_falling_body(cfg, variant, weights, seed);
  if (cfg.scenario == "tumbler") return run_tumbler(cfg, variant, weights, seed);
  if (cfg.scenario == "imu-cam") return run_imu_cam(cfg, variant, weights, seed);
  throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

DivergenceInfo divergence_detect(const RunRecord& record) {
  DivergenceInfo info;
  if (record.failed_at >= 0.0) {
    info.diverged = true;
    info.first_time = record.failed_at;
  }
  int consecutive = 0;
  for (size_t t = 0; t < record.time.size(); ++t) {
    bool bad = !record.est[t].allFinite() || !record.err[t].allFinite();
    if (bad) {
      if (!info.diverged || record.time[t] < info.first_time) {
        info.diverged = true;
        info.first_time = record.time[t];
      }
      return info;
    }
    bool over = false;
    for (Index i = 0; i < record.err[t].size(); ++i) {
      if (std::abs(record.err[t](i)) > 10.0 * 3.0 * record.sigma0(i)) {
        over = true;
        break;
      }
    }
    consecutive = over ? consecutive + 1 : 0;
    if (consecutive >= 10) {
      const double first = record.time[t - 9];
      if (!info.diverged || first < info.first_time) {
        info.diverged = true;
        info.first_time = first;
      }
      return info;
    }
  }
  return info;
}

FormComparison compare_forms(const ScenarioConfig& cfg, const WeightSpec& weights,
                             std::uint64_t seed) {
  std::vector<RunRecord> runs;
  FormComparison out;

  if (cfg.scenario == "imu-cam") {
    for (CovForm form : {CovForm::Full, CovForm::SquareRoot, CovForm::Ud}) {
      ScenarioConfig c = cfg;
      c.mekf_cov_form = form;
      runs.push_back(run_scenario(c, FilterVariant::MekfPu, weights, seed));
    }
  } else {
    runs.push_back(run_scenario(cfg, FilterVariant::Pu, weights, seed));
    runs.push_back(run_scenario(cfg, FilterVariant::SrPu, weights, seed));
    runs.push_back(run_scenario(cfg, FilterVariant::UdPu, weights, seed));
  }

  const RunRecord& ref = runs.front();
  const size_t rows = ref.time.size();
  const Index n = ref.est.front().size();

  Vector scale = Vector::Constant(n, 1e-12);
  for (size_t t = 0; t < rows; ++t)
    scale = scale.cwiseMax(ref.est[t].cwiseAbs());

  auto compare_pair = [&](const RunRecord& a, const RunRecord& b, double* sdev, double* cdev) {
    for (size_t t = 0; t < rows; ++t) {
      const Vector d = (a.est[t] - b.est[t]).cwiseQuotient(scale);
      *sdev = std::max(*sdev, d.cwiseAbs().maxCoeff());
      const double pn = a.cov[t].norm();
      if (pn > 0.0) *cdev = std::max(*cdev, (a.cov[t] - b.cov[t]).norm() / pn);
    }
  };

  for (size_t i = 1; i < runs.size(); ++i)
    compare_pair(ref, runs[i], &out.max_state_dev, &out.max_cov_dev);

  // With beta == 1 the plain EKF joins the comparison.
  const Vector beta_check =
      weights.mode == WeightMode::Static && weights.static_beta
          ? *weights.static_beta
          : scenario_default_beta(cfg, FilterVariant::Pu);
  if (cfg.scenario != "imu-cam" && weights.mode == WeightMode::Static &&
      (beta_check.array() == 1.0).all()) {
    out.ekf_included = true;
    const RunRecord ekf = run_scenario(cfg, FilterVariant::Ekf, weights, seed);
    compare_pair(ref, ekf, &out.max_state_dev_vs_ekf, &out.max_cov_dev_vs_ekf);
  }
  return out;
}

}  // namespace pukf
