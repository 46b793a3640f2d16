#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracle/dense_oracle.hpp"
#include "tns/noise.hpp"
#include "tns/observables.hpp"

using namespace tns;

namespace {

SiteSeries grid(std::size_t rows, std::size_t cols) {
  SiteSeries s;
  s.label = "density";
  for (std::size_t j = 0; j < cols; ++j) s.sites.push_back(j);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < cols; ++j) row.push_back(0.1 * static_cast<double>(i) - 1.0 / (3.0 + static_cast<double>(j)));
    s.append(0.25 * static_cast<double>(i), row);
  }
  return s;
}

}  // namespace

TEST(MeasureZ, ProductAndBellStates) {
  const std::vector<int> zero(5, 0), mixed{1, 0, 1};
  for (double z : measure_z(Mps::basis_state(zero))) EXPECT_DOUBLE_EQ(z, 1.0);
  const auto m = measure_z(Mps::basis_state(mixed));
  EXPECT_DOUBLE_EQ(m[0], -1.0);
  EXPECT_DOUBLE_EQ(m[1], 1.0);
  EXPECT_DOUBLE_EQ(m[2], -1.0);

  const double r = 1.0 / std::sqrt(2.0);
  const std::vector<cplx> bell{r, 0.0, 0.0, r};
  const auto b = measure_z(Mps::from_dense(bell, 2));
  EXPECT_NEAR(b[0], 0.0, 1e-15);
  EXPECT_NEAR(b[1], 0.0, 1e-15);
}

TEST(MeasureZ, RandomStateMatchesDense) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    Mps s = Mps::random(10, 6, rng);
    s.normalize();
    const auto z = measure_z(s);
    const auto expect = oracle::z_expectations(oracle::to_vec(s.to_dense()), 10);
    for (std::size_t n = 0; n < 10; ++n) {
      EXPECT_NEAR(z[n], expect[n], 1e-10) << n;
      EXPECT_LE(std::abs(z[n]), 1.0 + 1e-9);
    }
  }
}

TEST(MeasureZ, DensityConventionIsShared) {
  const std::vector<double> z{1.0, -1.0, 0.2, -0.6};
  const auto d = density_from_z(z);
  EXPECT_DOUBLE_EQ(d[0], 0.0);
  EXPECT_DOUBLE_EQ(d[1], 1.0);
  EXPECT_DOUBLE_EQ(d[2], 0.4);
  EXPECT_DOUBLE_EQ(d[3], 0.8);
  // fermion_density subtracts the same mapping of the vacuum profile
  const std::vector<double> vac{0.5, -0.5, 0.5, -0.5};
  const auto delta = fermion_density(z, vac);
  const auto dv = density_from_z(vac);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_DOUBLE_EQ(delta[n], d[n] - dv[n]);
  EXPECT_THROW(fermion_density(z, std::vector<double>(3, 0.0)), std::invalid_argument);

  const std::vector<int> bits{0, 1, 1, 0};
  const auto occ = density_from_z(measure_z(Mps::basis_state(bits)));
  for (std::size_t n = 0; n < 4; ++n) EXPECT_DOUBLE_EQ(occ[n], static_cast<double>(bits[n]));
}

TEST(Heatmap, SingleCellIsTwoLines) {
  SiteSeries s;
  s.sites = {0};
  s.append(0.0, {0.5});
  EXPECT_EQ(emit_heatmap_table(s), "t,site,value,parity\n0,0,0.5,even\n");
  s.parity_column = false;
  EXPECT_EQ(emit_heatmap_table(s), "t,site,value\n0,0,0.5\n");
}

TEST(Heatmap, RoundTripIsExact) {
  SiteSeries s = grid(4, 6);
  const auto back = parse_heatmap_table(emit_heatmap_table(s));
  EXPECT_EQ(back.times, s.times);
  EXPECT_EQ(back.sites, s.sites);
  EXPECT_EQ(back.values, s.values);
  EXPECT_TRUE(back.parity_column);

  SiteSeries e;
  e.sites = {0, 1};
  e.parity_column = false;
  e.append(1.5, {0.1, std::numeric_limits<double>::denorm_min()}, {1e-3, 2e-3});
  e.append(3.0, {-0.2, 1.0 / 7.0}, {4e-3, 5e-3});
  const auto eb = parse_heatmap_table(emit_heatmap_table(e));
  EXPECT_EQ(eb.values, e.values);
  EXPECT_EQ(eb.stderrs, e.stderrs);
  EXPECT_FALSE(eb.parity_column);
}

TEST(Heatmap, SitesAscendWithinEachBlock) {
  SiteSeries s;
  s.sites = {3, 1, 2};
  s.parity_column = false;
  s.append(0.0, {30.0, 10.0, 20.0});
  EXPECT_EQ(emit_heatmap_table(s), "t,site,value\n0,1,10\n0,2,20\n0,3,30\n");
}

TEST(Heatmap, IncompleteGridListsMissingCells) {
  SiteSeries s = grid(3, 4);
  s.values[1][2] = std::nan("");
  s.values[2].pop_back();
  try {
    emit_heatmap_table(s);
    FAIL() << "expected an incomplete-grid error";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2 missing"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(t=0.25, site=2)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(t=0.5, site=3)"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_heatmap_table("t,site,value\n0,0,1\n0,1,2\n1,0,3\n"), std::invalid_argument);
  EXPECT_THROW(parse_heatmap_table("t,site,value\n0,0,abc\n"), std::invalid_argument);
  EXPECT_THROW(parse_heatmap_table("time,site,value\n"), std::invalid_argument);
  EXPECT_THROW(grid(1, 2).append(1.0, {1.0}), std::invalid_argument);
}

TEST(Heatmap, ShortestRoundTripNumbers) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 26.0}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(0.25), "0.25");
  EXPECT_EQ(format_double(18.0), "18");
}
