#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "nadvqe/surfaces.hpp"

using namespace nadvqe;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}

template <class F>
std::vector<double> sample(const std::vector<double>& x, const std::vector<double>& y, F f) {
  std::vector<double> v;
  for (double a : x)
    for (double b : y) v.push_back(f(a, b));
  return v;
}

GridSpec small_grid() {
  GridSpec g;
  g.n_r = 20;
  g.n_theta = 18;
  return g;
}

SurfaceSet coarse_set(std::size_t nr, std::size_t nt, const GridSpec& g) {
  SurfaceSet s;
  s.r_axis = linspace(g.r_min, g.r_max, nr);
  s.theta_axis = linspace(g.theta_min, g.theta_max, nt);
  auto lin = [](double r, double t) { return 0.3 + 0.2 * r - 0.1 * t; };
  s.e_x = sample(s.r_axis, s.theta_axis, lin);
  s.e_a = sample(s.r_axis, s.theta_axis, [&](double r, double t) { return lin(r, t) + 0.1; });
  s.e_b = sample(s.r_axis, s.theta_axis, [&](double r, double t) { return lin(r, t) + 0.2 + 0.05 * r; });
  s.f_r = sample(s.r_axis, s.theta_axis, [](double r, double t) { return 0.01 * r * t; });
  s.f_theta = sample(s.r_axis, s.theta_axis, [](double r, double t) { return -0.02 * t + r; });
  s.energy_mask.assign(s.size(), 0);
  s.nac_mask.assign(s.size(), 0);
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST(Spline, ReproducesCubicsInOneDimension) {
  const auto x = linspace(0.0, 2.0, 7);
  const auto xq = linspace(0.0, 2.0, 41);
  const auto w = spline_weights(x, xq);
  auto f = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t - 0.3 * t * t * t; };
  for (std::size_t q = 0; q < xq.size(); ++q) {
    double v = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) v += w(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k)) * f(x[k]);
    EXPECT_NEAR(v, f(xq[q]), 1e-12);
  }
}

TEST(Spline, FewKnots) {
  const std::vector<double> x3{0.0, 1.0, 3.0}, x2{1.0, 2.0}, x1{4.0};
  auto par = [](double t) { return 2.0 + t - t * t; };
  const auto w3 = spline_weights(x3, {0.5, 2.0});
  EXPECT_NEAR(w3.row(0).dot(Eigen::Vector3d(par(0), par(1), par(3))), par(0.5), 1e-13);
  EXPECT_NEAR(w3.row(1).dot(Eigen::Vector3d(par(0), par(1), par(3))), par(2.0), 1e-13);
  const auto w2 = spline_weights(x2, {1.25});
  EXPECT_NEAR(w2(0, 0), 0.75, 1e-15);
  EXPECT_NEAR(w2(0, 1), 0.25, 1e-15);
  EXPECT_EQ(spline_weights(x1, {4.0})(0, 0), 1.0);
}

TEST(Spline, RejectsExtrapolationAndBadKnots) {
  try {
    spline_weights({0.0, 1.0, 2.0}, {2.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::extrapolation);
  }
  try {
    spline_weights({0.0, 1.0, 1.0}, {0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
  }
}

TEST(Bicubic, LinearFieldIsExact) {
  const auto r = linspace(1.0, 3.0, 6), t = linspace(0.5, 3.0, 5);
  const auto rq = linspace(1.0, 3.0, 33), tq = linspace(0.5, 3.0, 29);
  auto f = [](double a, double b) { return 0.7 + 1.3 * a - 0.4 * b; };
  const auto out = Bicubic(r, t, rq, tq).apply(sample(r, t, f));
  EXPECT_LE(max_abs_diff(out, sample(rq, tq, f)), 1e-12);
}

TEST(Bicubic, IdentityOnSameGridAndThroughKnots) {
  const auto r = linspace(1.0, 3.0, 9), t = linspace(0.5, 3.0, 8);
  const auto v = sample(r, t, [](double a, double b) { return std::exp(-a) * std::sin(3 * b); });
  EXPECT_LE(max_abs_diff(Bicubic(r, t, r, t).apply(v), v), 1e-12);
  // Knots embedded in a finer query set.
  const auto rq = linspace(1.0, 3.0, 17), tq = linspace(0.5, 3.0, 15);
  const auto fine = Bicubic(r, t, rq, tq).apply(v);
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j)
      EXPECT_NEAR(fine[(2 * i) * tq.size() + 2 * j], v[i * t.size() + j], 1e-10);
}

TEST(Bicubic, FourthOrderConvergence) {
  const GridSpec g;
  const auto rq = g.r_axis(), tq = g.theta_axis();
  auto f = [](double a, double b) { return std::sin(a) * std::cos(b); };
  const auto exact = sample(rq, tq, f);
  std::vector<double> errs;
  for (std::size_t n : {9u, 17u, 33u}) {
    const auto r = linspace(g.r_min, g.r_max, n), t = linspace(g.theta_min, g.theta_max, n);
    errs.push_back(max_abs_diff(Bicubic(r, t, rq, tq).apply(sample(r, t, f)), exact));
  }
  for (std::size_t k = 1; k < errs.size(); ++k) {
    EXPECT_GE(errs[k - 1] / errs[k], 8.0);
    EXPECT_NEAR(std::log2(errs[k - 1] / errs[k]), 4.0, 0.5);
  }
}

TEST(Bicubic, CommutesWithSignFlip) {
  const auto r = linspace(1.0, 3.0, 7), t = linspace(0.5, 3.0, 6);
  const auto rq = linspace(1.0, 3.0, 20), tq = linspace(0.5, 3.0, 20);
  const auto v = sample(r, t, [](double a, double b) { return std::cos(a * b); });
  auto neg = v;
  for (auto& x : neg) x = -x;
  const Bicubic s(r, t, rq, tq);
  const auto a = s.apply(v), b = s.apply(neg);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], -b[k], 1e-12);
}

TEST(Assemble, SinglePoint) {
  ScanResult e;
  e.r_axis = {1.8};
  e.theta_axis = {1.9};
  GeometryResult g;
  g.geometry = {1.8, 1.9};
  g.energies = {-1.0, -0.5, -0.2};
  g.converged = true;
  e.points = {g};
  NacField n;
  n.r_axis = e.r_axis;
  n.theta_axis = e.theta_axis;
  InternalNac v;
  v.tag = g.geometry;
  v.f_r = 0.3;
  v.f_theta = -0.1;
  n.values = {v};
  const auto s = assemble(e, n);
  EXPECT_EQ(s.n_r(), 1u);
  EXPECT_EQ(s.n_theta(), 1u);
  EXPECT_EQ(s.e_a[0], -0.5);
  EXPECT_EQ(s.e_b[0], -0.2);
  EXPECT_EQ(s.f_r[0], 0.3);
  EXPECT_FALSE(s.masked(0));
}

TEST(Assemble, MasksAndAlignment) {
  ScanResult e;
  NacField n;
  e.r_axis = n.r_axis = {1.0, 2.0};
  e.theta_axis = n.theta_axis = {1.0};
  for (double r : e.r_axis) {
    GeometryResult g;
    g.geometry = {r, 1.0};
    g.energies = {0, 1, 2};
    g.converged = r < 1.5;
    e.points.push_back(g);
    InternalNac v;
    v.tag = g.geometry;
    n.values.push_back(v);
  }
  n.values[0].masked = true;
  const auto s = assemble(e, n);
  EXPECT_TRUE(s.nac_mask[0]);
  EXPECT_FALSE(s.energy_mask[0]);
  EXPECT_TRUE(s.energy_mask[1]);
  EXPECT_DOUBLE_EQ(s.masked_fraction(), 1.0);

  n.values[1].tag = {2.5, 1.0};
  try {
    assemble(e, n);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::alignment);
    EXPECT_NE(std::string(err.what()).find(describe({2.0, 1.0})), std::string::npos);
  }
}

TEST(Interpolate, LinearSurfacesReproduced) {
  const auto g = small_grid();
  const auto s = coarse_set(6, 5, g);
  const auto f = interpolate(s, g);
  auto lin = [](double r, double t) { return 0.3 + 0.2 * r - 0.1 * t; };
  EXPECT_LE(max_abs_diff(f.e_x, sample(g.r_axis(), g.theta_axis(), lin)), 1e-12);
  EXPECT_EQ(f.provenance, "filled: none");
}

TEST(Interpolate, FillsMaskedPointsAndRecordsThem) {
  const auto g = small_grid();
  auto s = coarse_set(6, 5, g);
  const auto clean = interpolate(s, g);
  const std::size_t k = 2 * 5 + 2;
  s.e_a[k] = 99.0;
  s.f_r[k] = 0.0;
  s.energy_mask[k] = 1;
  s.nac_mask[k] = 1;
  const auto f = interpolate(s, g);
  EXPECT_NE(f.provenance.find(describe({s.r_axis[2], s.theta_axis[2]})), std::string::npos);
  // Harmonic fill is exact for the linear energies.
  EXPECT_LE(max_abs_diff(f.e_a, clean.e_a), 1e-10);
  for (double v : f.f_r) EXPECT_TRUE(std::isfinite(v));
}

TEST(Interpolate, NacFillKeepsInverseGapShape) {
  const auto g = small_grid();
  auto s = coarse_set(6, 5, g);
  // NAC * gap linear, gap linear: both fills are exact.
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double r = s.r_axis[k / 5], t = s.theta_axis[k % 5];
    const double gap = s.e_b[k] - s.e_a[k];
    s.f_r[k] = (0.4 + 0.1 * r - 0.05 * t) / gap;
  }
  auto masked = s;
  masked.nac_mask[3 * 5 + 1] = 1;
  masked.f_r[3 * 5 + 1] = 0.0;
  fill_masked(masked);
  EXPECT_NEAR(masked.f_r[3 * 5 + 1], s.f_r[3 * 5 + 1], 1e-10);
}

TEST(Interpolate, RefusesHeavilyMaskedSets) {
  const auto g = small_grid();
  auto s = coarse_set(5, 4, g);
  for (std::size_t k = 0; k < 4; ++k) s.energy_mask[k * 5] = 1;
  try {
    interpolate(s, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
  }
  s.energy_mask[0] = 0;
  EXPECT_NO_THROW(interpolate(s, g));
}

TEST(Interpolate, FineGridOutsideHull) {
  auto g = small_grid();
  const auto s = coarse_set(6, 5, g);
  g.r_max += 0.1;
  try {
    interpolate(s, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::extrapolation);
  }
}

TEST(Bundle, RoundTripIsExact) {
  const auto g = small_grid();
  auto f = interpolate(coarse_set(6, 5, g), g);
  f.provenance = "filled: none; config 0123";
  const auto path = std::filesystem::temp_directory_path() / "nadvqe_test_bundle.bin";
  write_bundle(path, f);
  const auto b = read_bundle(path);
  EXPECT_EQ(b.grid, f.grid);
  EXPECT_EQ(b.provenance, f.provenance);
  EXPECT_EQ(b.e_x, f.e_x);
  EXPECT_EQ(b.f_theta, f.f_theta);
}

TEST(Bundle, RejectsForeignAndTruncatedFiles) {
  const auto dir = std::filesystem::temp_directory_path();
  {
    std::ofstream o(dir / "nadvqe_not_bundle.bin", std::ios::binary);
    o << "NOTABUNDLE-----------";
  }
  try {
    read_bundle(dir / "nadvqe_not_bundle.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format);
  }
  const auto g = small_grid();
  write_bundle(dir / "nadvqe_trunc.bin", interpolate(coarse_set(6, 5, g), g));
  std::filesystem::resize_file(dir / "nadvqe_trunc.bin", 500);
  try {
    read_bundle(dir / "nadvqe_trunc.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::format);
  }
}

TEST(Grid, DefaultsAndSpacingCheck) {
  const GridSpec g;
  EXPECT_EQ(g.size(), 64u * 64u);
  EXPECT_TRUE(spacing_mismatch("dr", 0.0443, g.dr()).empty());
  EXPECT_TRUE(spacing_mismatch("dtheta", 0.0409, g.dtheta()).empty());
  const auto msg = spacing_mismatch("dtheta", 0.0500, g.dtheta());
  EXPECT_NE(msg.find("0.0409"), std::string::npos);
}
