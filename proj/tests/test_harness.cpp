#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pukf/errors.hpp"
#include "pukf/harness/csv.hpp"
#include "pukf/harness/flops.hpp"
#include "pukf/harness/monte_carlo.hpp"
#include "test_util.hpp"

using namespace pukf;

TEST_CASE("flop formulas agree with independent term-by-term evaluation") {
  for (int n = 1; n <= 20; ++n) {
    for (int m = 1; m <= 20; ++m) {
      // batch total vs stage sum
      double batch_stage_sum = 0.0;
      for (const FlopRow& row : flops_batch_stages(n, m)) batch_stage_sum += row.flops.muldiv;
      CHECK(flops_batch_total(n, m) == doctest::Approx(batch_stage_sum).epsilon(1e-12));

      // sequential total vs per-scalar sum x m + decorrelation
      const double per_scalar =
          (n * n) + n + 1.0 + n + (0.5 * (n * n - n) + n);
      const double decorr = (2.0 / 3.0) * m * m * m + m * m - (5.0 / 3.0) * m +
                            0.5 * m * m * n - 0.5 * m * n;
      CHECK(flops_sequential_total(n, m) ==
            doctest::Approx(per_scalar * m + decorr).epsilon(1e-12));

      // advantage row evaluated term-by-term
      const double adv = 0.5 * std::pow(m, 3) - 0.5 * m * m + double(m) * m * n -
                         double(m) * n + 7.0 / 6.0 * m;
      CHECK(flops_sequential_advantage(n, m) == doctest::Approx(adv).epsilon(1e-12));

      for (int q = 1; q <= 20; ++q) {
        const FlopCount sr = flops_sr_pu_combined(n, q);
        CHECK(sr.muldiv == doctest::Approx(2.5 * n * n * n + (q + 7.5) * n * n + 6.0 * n + 1.0));
        CHECK(sr.sqrts == doctest::Approx(2.0 * n + 2.0));
        const FlopCount ud = flops_ud_pu_combined(n, q);
        CHECK(ud.muldiv ==
              doctest::Approx(2.0 * n * n * n + (q + 4.0) * n * n + (q + 1.0) * n + 2.0));
      }
    }
  }

  // hand-checked anchors
  CHECK(flops_sequential_advantage(10, 1) == doctest::Approx(7.0 / 6.0));
  CHECK(flops_batch_total(3, 2) == doctest::Approx(62.0));
  CHECK(flops_ud_conventional_update(3).muldiv == doctest::Approx(18.0));
}

TEST_CASE("flops_report contains every table") {
  const auto rows = flops_report(3, 2, 1);
  int batch = 0, seq = 0, adv = 0, fact = 0, ud = 0, sr = 0;
  for (const auto& r : rows) {
    if (r.table == "batch") ++batch;
    if (r.table == "sequential") ++seq;
    if (r.table == "advantage") ++adv;
    if (r.table == "factorized") ++fact;
    if (r.table == "ud-update") ++ud;
    if (r.table == "sr-conventional") ++sr;
  }
  CHECK(batch == 6);
  CHECK(seq == 8);
  CHECK(adv == 3);
  CHECK(fact == 2);
  CHECK(ud == 3);
  CHECK(sr == 2);
}

TEST_CASE("weight spec parsing") {
  const WeightSpec a = parse_weight_spec("0.9,0.9,0.75");
  CHECK(a.mode == WeightMode::Static);
  REQUIRE(a.static_beta.has_value());
  CHECK(a.static_beta->size() == 3);
  CHECK((*a.static_beta)(2) == doctest::Approx(0.75));

  CHECK(parse_weight_spec("dnl").mode == WeightMode::Dnl);
  CHECK(parse_weight_spec("dc").mode == WeightMode::Dc);

  const WeightSpec b = parse_weight_spec("dnl:base=0.9,0.9,0.75");
  CHECK(b.mode == WeightMode::Dnl);
  REQUIRE(b.baseline.has_value());
  CHECK(b.baseline->size() == 3);

  CHECK_THROWS_AS(parse_weight_spec("dnl:wrong=1"), ConfigError);
  CHECK_THROWS_AS(parse_weight_spec("a,b"), ConfigError);
  CHECK_THROWS_AS(parse_filter_variant("nope"), ConfigError);
}

TEST_CASE("config parsing") {
  ScenarioConfig cfg = default_config("falling-body");
  apply_config_entry(cfg, "falling_body.sigma0_position", "123");
  CHECK(cfg.falling_body.sigma0(0) == 123.0);
  apply_config_entry(cfg, "falling_body.draw_mode", "sign");
  CHECK(cfg.falling_body.draw_mode == FallingBodyParams::DrawMode::Sign);
  CHECK_THROWS_AS(apply_config_entry(cfg, "nope.key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(cfg, "falling_body.dt", "fast"), ConfigError);
  CHECK_THROWS_AS(default_config("mars"), ConfigError);

  // reference text reparses cleanly for every scenario
  for (const char* sc : {"falling-body", "imu-cam", "tumbler"}) {
    const std::string text = reference_config_text(sc);
    ScenarioConfig fresh = default_config(sc);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const size_t a = s.find_first_not_of(" \t");
        const size_t b = s.find_last_not_of(" \t");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      apply_config_entry(fresh, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    CHECK(fresh.scenario == sc);
  }
}

TEST_CASE("run_scenario is deterministic for every scenario") {
  struct Case {
    const char* scenario;
    FilterVariant variant;
  };
  for (const Case& c : {Case{"falling-body", FilterVariant::Pu},
                        Case{"tumbler", FilterVariant::UdPu},
                        Case{"imu-cam", FilterVariant::MekfPu}}) {
    ScenarioConfig cfg = default_config(c.scenario);
    cfg.falling_body.duration = 10.0;
    cfg.tumbler.duration = 8.0;
    cfg.imu_cam.duration = 3.0;
    const WeightSpec ws;
    const RunRecord a = run_scenario(cfg, c.variant, ws, 7);
    const RunRecord b = run_scenario(cfg, c.variant, ws, 7);
    REQUIRE(a.time.size() == b.time.size());
    for (size_t t = 0; t < a.time.size(); ++t) {
      CHECK((a.est[t] - b.est[t]).norm() == 0.0);
      CHECK((a.sigma[t] - b.sigma[t]).norm() == 0.0);
    }
    // and the emitted CSV is byte-identical
    std::ostringstream sa, sb;
    write_run_csv(sa, a);
    write_run_csv(sb, b);
    CHECK(sa.str() == sb.str());
  }
}

TEST_CASE("run CSV layout") {
  ScenarioConfig cfg = default_config("falling-body");
  cfg.falling_body.duration = 2.0;
  const RunRecord rec = run_scenario(cfg, FilterVariant::Pu, WeightSpec{}, 1);
  std::ostringstream out;
  write_run_csv(out, rec);
  const std::string text = out.str();

  CHECK(text.rfind("time,truth_1,truth_2,truth_3,est_1", 0) == 0);
  CHECK(text.find("cond_full,cond_factor,gate\r\n") != std::string::npos);
  // CRLF terminated lines, 21 rows + header
  size_t crlf = 0;
  for (size_t i = 0; i + 1 < text.size(); ++i)
    if (text[i] == '\r' && text[i + 1] == '\n') ++crlf;
  CHECK(crlf == rec.time.size() + 1);
  // 17 significant digits survive a round trip
  CHECK(format_csv_double(0.1) == "0.10000000000000001");
}

TEST_CASE("divergence_detect") {
  RunRecord rec;
  rec.sigma0 = Vector::Ones(1);
  for (int t = 0; t < 40; ++t) {
    rec.time.push_back(t);
    rec.truth.push_back(Vector::Zero(1));
    rec.est.push_back(Vector::Zero(1));
    rec.err.push_back(Vector::Zero(1));
    rec.sigma.push_back(Vector::Ones(1));
    rec.beta.push_back(Vector::Ones(1));
    rec.cov.push_back(Matrix::Identity(1, 1));
    rec.cond_full.push_back(1.0);
    rec.cond_factor.push_back(1.0);
    rec.gate.push_back(1);
  }
  CHECK_FALSE(divergence_detect(rec).diverged);

  // one NaN marks divergence at that epoch
  RunRecord nanrec = rec;
  nanrec.est[5](0) = std::numeric_limits<double>::quiet_NaN();
  nanrec.err[5](0) = std::numeric_limits<double>::quiet_NaN();
  const DivergenceInfo ni = divergence_detect(nanrec);
  CHECK(ni.diverged);
  CHECK(ni.first_time == 5.0);

  // a large error must persist for ten consecutive epochs
  RunRecord big = rec;
  for (int t = 10; t < 19; ++t) big.err[t](0) = 31.0;  // nine epochs: not yet
  CHECK_FALSE(divergence_detect(big).diverged);
  big.err[19](0) = 31.0;  // tenth
  const DivergenceInfo bi = divergence_detect(big);
  CHECK(bi.diverged);
  CHECK(bi.first_time == 10.0);
}

TEST_CASE("full-update campaign with Gaussian 3-sigma draws produces divergent runs") {
  ScenarioConfig cfg = default_config("falling-body");
  cfg.falling_body.draw_mode = FallingBodyParams::DrawMode::Normal;
  cfg.falling_body.draw_scale.setConstant(3.0);
  int diverged = 0;
  for (int seed = 0; seed < 100; ++seed)
    if (divergence_detect(run_scenario(cfg, FilterVariant::Ekf, WeightSpec{}, seed)).diverged)
      ++diverged;
  CHECK(diverged >= 1);
}

TEST_CASE("monte_carlo determinism, merging and stats") {
  ScenarioConfig cfg = default_config("falling-body");
  cfg.falling_body.duration = 10.0;
  const WeightSpec ws;

  CHECK_THROWS_AS(monte_carlo(cfg, FilterVariant::Pu, ws, 0, 0, 1), InvalidRunCount);

  const MonteCarloReport serial = monte_carlo(cfg, FilterVariant::Pu, ws, 12, 5, 1);
  const MonteCarloReport parallel = monte_carlo(cfg, FilterVariant::Pu, ws, 12, 5, 8);
  REQUIRE(serial.time.size() == parallel.time.size());
  for (size_t t = 0; t < serial.time.size(); ++t) {
    CHECK((serial.sum_err[t] - parallel.sum_err[t]).norm() == 0.0);
    CHECK((serial.sum_err_sq[t] - parallel.sum_err_sq[t]).norm() == 0.0);
  }
  std::ostringstream sa, sb;
  write_monte_carlo_csv(sa, serial);
  write_monte_carlo_csv(sb, parallel);
  CHECK(sa.str() == sb.str());

  // split campaign merges into the monolithic one
  const MonteCarloReport first = monte_carlo(cfg, FilterVariant::Pu, ws, 7, 5, 2);
  const MonteCarloReport second = monte_carlo(cfg, FilterVariant::Pu, ws, 5, 12, 2);
  const MonteCarloReport merged = merge_reports(first, second);
  CHECK(merged.run_count == serial.run_count);
  const auto ms = merged.sampled_sigma();
  const auto ss = serial.sampled_sigma();
  for (size_t t = 0; t < ms.size(); ++t)
    CHECK((ms[t] - ss[t]).norm() <= 1e-12 * std::max(1.0, ss[t].norm()));

  // n_runs = 1: sampled sigma degenerates to zero, mean error is the error
  const MonteCarloReport one = monte_carlo(cfg, FilterVariant::Pu, ws, 1, 5, 1);
  const RunRecord only = run_scenario(cfg, FilterVariant::Pu, ws, 5);
  for (size_t t = 0; t < one.time.size(); ++t) {
    CHECK((one.mean_err()[t] - only.err[t]).norm() == 0.0);
    CHECK((one.mean_filter_sigma()[t] - only.sigma[t]).norm() == 0.0);
  }
}

TEST_CASE("consistency_stats on synthetic reports") {
  // Perfectly matched report: per-run error draws with sigma equal to the
  // filter sigma give a ratio near one; here we construct the sums directly.
  MonteCarloReport rep;
  rep.run_count = 100;
  rep.state_dim = 1;
  for (int t = 0; t < 30; ++t) {
    rep.time.push_back(t);
    // 100 synthetic "errors" alternating +-1: mean 0, sample sigma ~1.005
    rep.sum_err.push_back(Vector::Zero(1));
    rep.sum_err_sq.push_back(Vector::Constant(1, 100.0));
    rep.sum_filter_sigma.push_back(Vector::Constant(1, 100.0));  // filter sigma 1
  }
  const ConsistencySummary cs = consistency_stats(rep);
  CHECK(cs.sigma_ratio(0) == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(std::abs(cs.err_zscore(0)) <= 1e-12);

  // halved filter sigma doubles the ratio
  MonteCarloReport rep2 = rep;
  for (auto& v : rep2.sum_filter_sigma) v *= 0.5;
  CHECK(consistency_stats(rep2).sigma_ratio(0) ==
        doctest::Approx(2.0 * cs.sigma_ratio(0)).epsilon(1e-12));
}

TEST_CASE("compare_forms on the falling body") {
  ScenarioConfig cfg = default_config("falling-body");
  cfg.falling_body.duration = 15.0;

  // beta = 0: assimilation skipped everywhere, so states agree bit-exactly;
  // covariance propagation arithmetic differs per form at roundoff level.
  WeightSpec frozen;
  frozen.static_beta = Vector::Zero(3);
  const FormComparison fc = compare_forms(cfg, frozen, 3);
  CHECK(fc.max_state_dev == 0.0);
  CHECK(fc.max_cov_dev <= 1e-12);

  // beta = 1 includes the plain EKF in the comparison
  WeightSpec full;
  full.static_beta = Vector::Ones(3);
  const FormComparison f1 = compare_forms(cfg, full, 3);
  CHECK(f1.ekf_included);
  CHECK(f1.max_state_dev <= 1e-6);
  CHECK(f1.max_state_dev_vs_ekf <= 1e-6);

  // reference weights: three-way equivalence within 1e-6
  const FormComparison fr = compare_forms(cfg, WeightSpec{}, 3);
  CHECK(fr.max_state_dev <= 1e-6);
  CHECK(fr.max_cov_dev <= 1e-6);
}

TEST_CASE("condition-number series: factor vs full covariance") {
  ScenarioConfig cfg = default_config("falling-body");
  cfg.falling_body.duration = 15.0;
  for (FilterVariant v : {FilterVariant::SrPu, FilterVariant::UdPu}) {
    const RunRecord rec = run_scenario(cfg, v, WeightSpec{}, 2);
    for (size_t t = 0; t < rec.time.size(); ++t) {
      if (!std::isfinite(rec.cond_full[t])) continue;
      CHECK(rec.cond_factor[t] <= rec.cond_full[t] * (1.0 + 1e-9));
      CHECK(std::abs(rec.cond_factor[t] - std::sqrt(rec.cond_full[t])) <=
            1e-6 * std::sqrt(rec.cond_full[t]));
    }
  }
}

TEST_CASE("imu-cam rejects unsupported variants") {
  ScenarioConfig cfg = default_config("imu-cam");
  CHECK_THROWS_AS(run_scenario(cfg, FilterVariant::Ekf, WeightSpec{}, 0), ConfigError);
  WeightSpec dnl;
  dnl.mode = WeightMode::Dnl;
  CHECK_THROWS_AS(run_scenario(cfg, FilterVariant::MekfPu, dnl, 0), ConfigError);
}
