#include "support.hpp"

#include <kerrcomb/io.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

using namespace kerrcomb;
using namespace kerrcomb::testing;

namespace {

const SweepResult& default_pump_sweep() {
  static const SweepResult sweep = [] {
    const auto axis = linear_range(1.01, 1.5, 0.005);
    return pump_sweep(headline(), axis, omega_ratio_grid(5.0, 1001));
  }();
  return sweep;
}

// Stable prefix of a pump sweep trace.
std::pair<std::vector<double>, std::vector<double>> stable_part(const SweepResult& s, const std::string& key) {
  std::vector<double> axis, values;
  for (std::size_t k = 0; k < s.axis.size(); ++k)
    if (s.points[k].computed) {
      axis.push_back(s.axis[k]);
      values.push_back(s.traces.at(key)[k]);
    }
  return {axis, values};
}

}  // namespace

TEST(LinearRange, InclusiveEndpoints) {
  const auto r = linear_range(1.01, 1.5, 0.005);
  ASSERT_EQ(r.size(), 99u);
  EXPECT_DOUBLE_EQ(r.front(), 1.01);
  EXPECT_NEAR(r.back(), 1.5, 1e-12);
  EXPECT_THROW(linear_range(1.0, 0.5, 0.1), InvalidArgument);
  EXPECT_THROW(linear_range(0.0, 1.0, 0.0), InvalidArgument);
}

TEST(CouplingSweep, RejectsRatiosOutsideUnitInterval) {
  const std::vector<double> bad{0.5, 1.2};
  EXPECT_THROW(coupling_sweep(headline(), bad, omega_ratio_grid(5.0, 11)), InvalidArgument);
}

TEST(CouplingSweep, ReferenceRatios) {
  const auto sweep = coupling_sweep(headline(), kReferenceRatios, omega_ratio_grid(5.0, 1001));
  ASSERT_EQ(sweep.points.size(), 4u);
  const auto& s1 = sweep.traces.at("min_S1");
  const auto& s3 = sweep.traces.at("min_S3");
  EXPECT_GE(s3[0], 4.0);                  // 0.34
  EXPECT_NEAR(s3[1], 4.0, 0.05);          // 0.57
  EXPECT_LT(s1[3], 4.0);                  // 1.0
  EXPECT_LT(s3[3], 4.0);
  EXPECT_TRUE(sweep.points[3].scan.summary.five_partite);
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_LT(s1[k], s1[k - 1]);
    EXPECT_LT(s3[k], s3[k - 1]);
  }
  for (const auto& pt : sweep.points) {
    EXPECT_TRUE(pt.computed);
    EXPECT_LE(pt.residual, 1e-8);
  }
}

TEST(CouplingSweep, ZeroCouplingIsExactlyVacuum) {
  const std::vector<double> zero{0.0};
  const auto sweep = coupling_sweep(headline(), zero, omega_ratio_grid(5.0, 51));
  for (const auto& rep : sweep.points[0].scan.reports) {
    if (!rep.valid) continue;
    for (double s : rep.s_values) EXPECT_DOUBLE_EQ(s, 4.0);
  }
}

TEST(PumpSweep, RejectsValuesOutsideRange) {
  const std::vector<double> bad{1.0};
  EXPECT_THROW(pump_sweep(headline(), bad, omega_ratio_grid(5.0, 11)), InvalidArgument);
  const std::vector<double> high{2.5};
  EXPECT_THROW(pump_sweep(headline(), high, omega_ratio_grid(5.0, 11)), InvalidArgument);
}

TEST(PumpSweep, UnstablePointsAreReportedNotSkipped) {
  const auto& sweep = default_pump_sweep();
  ASSERT_EQ(sweep.points.size(), 99u);
  std::size_t unstable = 0;
  for (std::size_t k = 0; k < sweep.points.size(); ++k) {
    const auto& pt = sweep.points[k];
    EXPECT_EQ(pt.parameter, sweep.axis[k]);
    if (!pt.computed) {
      ++unstable;
      EXPECT_FALSE(pt.stability.stable);
      EXPECT_GT(pt.parameter, 1.42);
      EXPECT_TRUE(std::isnan(sweep.traces.at("min_S3")[k]));
    }
  }
  EXPECT_GT(unstable, 0u);
}

TEST(PumpSweep, GlobalMinimumOfSecondPairNearReferencePump) {
  const auto [axis, values] = stable_part(default_pump_sweep(), "min_S3");
  const auto shape = analyze_trace(axis, values);
  EXPECT_GE(shape.argmin_parameter, 1.12);
  EXPECT_LE(shape.argmin_parameter, 1.18);
}

TEST(PumpSweep, MinimizingFrequencyJumpsTowardCenter) {
  const auto& sweep = default_pump_sweep();
  const auto jumps = regime_changes(sweep.axis, sweep.traces.at("argmin_w_S1"));
  ASSERT_FALSE(jumps.empty());
  const auto& first = jumps.front();
  EXPECT_GE(first.parameter_before, 1.05);
  EXPECT_LE(first.parameter_after, 1.15);
  EXPECT_GT(first.omega_before, first.omega_after);
}

TEST(PumpSweep, FirstPairTraceIsSingleDipOverStablePumps) {
  const auto [axis, values] = stable_part(default_pump_sweep(), "min_S1");
  EXPECT_TRUE(analyze_trace(axis, values).single_dip);
}

TEST(PumpSweep, SymmetricPairsAgree) {
  const auto& sweep = default_pump_sweep();
  for (std::size_t k = 0; k < sweep.axis.size(); ++k) {
    if (!sweep.points[k].computed) continue;
    EXPECT_NEAR(sweep.traces.at("min_S1")[k], sweep.traces.at("min_S2")[k], 1e-8 * 4);
    EXPECT_NEAR(sweep.traces.at("min_S3")[k], sweep.traces.at("min_S4")[k], 1e-8 * 4);
  }
}

TEST(AnalyzeTrace, Shapes) {
  const std::vector<double> axis{0, 1, 2, 3, 4};
  const std::vector<double> v{5, 3, 1, 2, 4};
  const auto s = analyze_trace(axis, v);
  EXPECT_TRUE(s.single_dip);
  EXPECT_EQ(s.argmin_index, 2u);
  EXPECT_EQ(s.turning_points.size(), 1u);
  const std::vector<double> w{5, 3, 4, 2, 4};
  EXPECT_FALSE(analyze_trace(axis, w).single_dip);
  EXPECT_EQ(analyze_trace(axis, w).turning_points.size(), 3u);
  const std::vector<double> edge{1, 2, 3, 4, 5};
  EXPECT_FALSE(analyze_trace(axis, edge).single_dip);
  const std::vector<double> gap{5, std::nan(""), 1, 2, 4};
  EXPECT_THROW(analyze_trace(axis, gap), InvalidArgument);
}

TEST(RegimeChanges, DetectsJumps) {
  const std::vector<double> axis{1, 2, 3, 4};
  const std::vector<double> w{1.5, 1.4, 0.01, std::nan("")};
  const auto jumps = regime_changes(axis, w);
  ASSERT_EQ(jumps.size(), 1u);
  EXPECT_EQ(jumps[0].parameter_before, 2);
  EXPECT_EQ(jumps[0].parameter_after, 3);
}

TEST(ScalingCheck, IdentityScale) {
  const auto rep = scaling_check(reference_point(0.8), 1.0, omega_ratio_grid(5.0, 101));
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.max_abs_error, 0.0);
}

TEST(ScalingCheck, DoubledRatesPreserveWitnesses) {
  for (double ratio : kReferenceRatios) {
    const auto rep = scaling_check(reference_point(ratio), 2.0, omega_ratio_grid(5.0, 201));
    EXPECT_TRUE(rep.passed) << ratio << " " << rep.max_rel_error;
    EXPECT_EQ(rep.name, "scaling_law");
  }
}

TEST(ScalingCheck, FixedPumpIsNegativeControl) {
  const auto rep = scaling_check(headline(), 2.0, omega_ratio_grid(5.0, 201), false);
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.max_rel_error, 1e-3);
}

TEST(ScalingCheck, RejectsNonPositiveScale) {
  EXPECT_THROW(scaling_check(headline(), 0.0, omega_ratio_grid(5.0, 11)), InvalidArgument);
}

TEST(SweepOutput, DeterministicAcrossRunsAndThreadCounts) {
  const std::vector<double> ratios{0.34, 1.0};
  const auto grid = omega_ratio_grid(5.0, 101);
  auto render = [&] {
    std::ostringstream os;
    write_sweep_csv(os, coupling_sweep(headline(), ratios, grid));
    return os.str();
  };
  setenv("KERRCOMB_THREADS", "1", 1);
  const std::string a = render();
  setenv("KERRCOMB_THREADS", "3", 1);
  const std::string b = render();
  unsetenv("KERRCOMB_THREADS");
  const std::string c = render();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a.substr(0, a.find('\n')), sweep_csv_header("gamma_c_ratio"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 101);
}

TEST(SweepOutput, UnstablePointKeepsARow) {
  const std::vector<double> eps{1.2, 1.6};
  const auto sweep = pump_sweep(headline(), eps, omega_ratio_grid(5.0, 11));
  std::ostringstream os;
  write_sweep_csv(os, sweep);
  const std::string text = os.str();
  EXPECT_NE(text.find("\n1.6000000000000001,nan,nan"), std::string::npos);
  std::ostringstream summary;
  write_sweep_summary_csv(summary, sweep);
  EXPECT_NE(summary.str().find("1.6000000000000001,0,nan"), std::string::npos);
}
