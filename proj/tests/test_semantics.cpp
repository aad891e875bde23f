#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "beamsem/error.hpp"
#include "beamsem/semantics.hpp"

using namespace beamsem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

PathComponent nlos(double power_db, Vec3 hop) {
  PathComponent p;
  p.gain = std::sqrt(std::pow(10.0, power_db / 10.0));
  p.is_los = false;
  p.bounce_count = 1;
  p.last_hop_point = hop;
  return p;
}

EffectiveScatterer at(int cam, int row, int col, double power = 1.0) {
  EffectiveScatterer e;
  e.camera = cam;
  e.heatmap_row = row;
  e.heatmap_col = col;
  e.image_point = {row * 4.0, col * 4.0};
  e.relative_power = power;
  return e;
}

}  // namespace

TEST(CameraConfig, DefaultsAndValidation) {
  CameraConfig cfg = default_camera_config();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.count(), 4u);
  EXPECT_EQ(cfg.heatmap_rows(), 48);
  EXPECT_EQ(cfg.heatmap_cols(), 128);
  EXPECT_NEAR(cfg.cameras[0].elevation, kPi / 2, 1e-15);
  cfg.downsample = 5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = default_camera_config();
  cfg.cameras[1].half_fov = kPi / 2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Extract, ThresholdKeepsStrongPaths) {
  Scene scene;
  const std::vector<PathComponent> paths{nlos(0.0, {1, 0, 0}), nlos(-6.0, {2, 0, 0}), nlos(-12.0, {3, 0, 0})};
  const auto kept = extract_effective_scatterers(paths, -10.0, scene);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].point, Vec3(1, 0, 0));
  EXPECT_EQ(kept[1].point, Vec3(2, 0, 0));
  EXPECT_NEAR(kept[0].relative_power, 1.0, 1e-12);
  EXPECT_NEAR(kept[1].relative_power, std::pow(10.0, -0.6), 1e-12);
}

TEST(Extract, LosPathMapsToBs) {
  Scene scene;
  scene.bs_position = {0, 0, 3};
  PathComponent los;
  los.gain = {0.001, 0.002};
  los.last_hop_point = scene.bs_position;
  const std::vector<PathComponent> paths{los};
  const auto kept = extract_effective_scatterers(paths, -10.0, scene);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_TRUE(kept[0].is_los);
  EXPECT_EQ(kept[0].point, scene.bs_position);
  EXPECT_DOUBLE_EQ(kept[0].relative_power, 1.0);
  EXPECT_THROW((void)extract_effective_scatterers({}, -10.0, scene), NoPathsError);
}

TEST(Extract, LoweringThresholdNeverRemoves) {
  Scene scene;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> db(-30.0, 0.0);
  std::vector<PathComponent> paths{nlos(0.0, {0, 0, 0})};
  for (int i = 1; i < 20; ++i) paths.push_back(nlos(db(rng), {double(i), 0, 0}));
  std::size_t prev = 0;
  for (const double th : {-1.0, -5.0, -10.0, -15.0, -25.0}) {
    const auto kept = extract_effective_scatterers(paths, th, scene);
    EXPECT_GE(kept.size(), prev);
    prev = kept.size();
  }
}

TEST(Project, OpticalCenter) {
  const auto cfg = default_camera_config();
  const auto p = project_to_camera(kPi / 2, 0.0, cfg.cameras[0], cfg);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->row, 96.0, 1e-12);
  EXPECT_NEAR(p->col, 256.0, 1e-12);
}

TEST(Project, TwentyDegreesRight) {
  const auto cfg = default_camera_config();
  const auto p = project_to_camera(kPi / 2, 20.0 * kDeg, cfg.cameras[0], cfg);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->col, 256.0 * std::tan(20.0 * kDeg) + 256.0, 1e-9);
  EXPECT_NEAR(p->col, 349.18, 5e-3);
}

TEST(Project, GeneralPointMatchesFormula) {
  const auto cfg = default_camera_config();
  const double theta_c = 0.1;
  const double phi_c = -0.3;
  const auto p = project_to_camera(kPi / 2 + theta_c, kPi + phi_c, cfg.cameras[2], cfg);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->row, 256.0 * std::tan(theta_c) / std::cos(phi_c) + 96.0, 1e-9);
  EXPECT_NEAR(p->col, 256.0 * std::tan(phi_c) + 256.0, 1e-9);
}

TEST(Project, FieldOfViewBoundary) {
  const auto cfg = default_camera_config();
  const auto edge = project_to_camera(kPi / 2, 45.0 * kDeg - 1e-6, cfg.cameras[0], cfg);
  ASSERT_TRUE(edge);
  EXPECT_NEAR(edge->col, 512.0, 1e-3);
  EXPECT_LT(edge->col, 512.0);
  EXPECT_FALSE(project_to_camera(kPi / 2, 50.0 * kDeg, cfg.cameras[0], cfg));
  EXPECT_FALSE(project_to_camera(kPi / 2 + 0.6, 0.0, cfg.cameras[0], cfg));
  // The camera at 270 degrees sees -90 degrees.
  EXPECT_TRUE(project_to_camera(kPi / 2, -kPi / 2, cfg.cameras[3], cfg));
}

TEST(Locate, HeatmapPointIsFloorOfImagePoint) {
  const auto cfg = default_camera_config();
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> el(kPi / 2 - 0.4, kPi / 2 + 0.4);
  std::uniform_real_distribution<double> az(-kPi, kPi);
  std::vector<ScattererSource> sources;
  for (int i = 0; i < 400; ++i) {
    ScattererSource s;
    s.aoa_elevation = el(rng);
    s.aoa_azimuth = az(rng);
    s.path_index = static_cast<std::size_t>(i);
    sources.push_back(s);
  }
  const auto located = locate_scatterers(sources, cfg);
  EXPECT_GT(located.size(), 200u);
  for (const auto& e : located) {
    EXPECT_GE(e.image_point.row, 0.0);
    EXPECT_LT(e.image_point.row, 192.0);
    EXPECT_GE(e.image_point.col, 0.0);
    EXPECT_LT(e.image_point.col, 512.0);
    EXPECT_EQ(e.heatmap_row, static_cast<int>(std::floor(e.image_point.row / 4.0)));
    EXPECT_EQ(e.heatmap_col, static_cast<int>(std::floor(e.image_point.col / 4.0)));
  }
}

TEST(Rasterize, KernelValues) {
  const auto cfg = default_camera_config();
  const std::vector<EffectiveScatterer> one{at(1, 20, 60, 0.4)};
  const auto hm = rasterize_heatmaps(one, cfg);
  EXPECT_DOUBLE_EQ(hm.distribution(1, 20, 60), 1.0);
  EXPECT_DOUBLE_EQ(hm.strength(1, 20, 60), 0.4);
  EXPECT_NEAR(hm.distribution(1, 21, 60), 0.8007, 5e-5);
  EXPECT_NEAR(hm.distribution(1, 21, 60), std::exp(-1.0 / 4.5), 1e-12);
  EXPECT_NEAR(hm.strength(1, 20, 61), 0.4 * std::exp(-1.0 / 4.5), 1e-12);
  EXPECT_EQ(hm.distribution(0, 20, 60), 0.0);
  // Strictly decreasing with distance inside the 3 sigma radius.
  double prev = 1.0;
  for (int d = 1; d <= 4; ++d) {
    EXPECT_LT(hm.distribution(1, 20, 60 + d), prev);
    prev = hm.distribution(1, 20, 60 + d);
  }
}

TEST(Rasterize, FarApartIsElementwiseMax) {
  const auto cfg = default_camera_config();
  const std::vector<EffectiveScatterer> a{at(0, 10, 10, 0.9)};
  const std::vector<EffectiveScatterer> b{at(0, 10, 40, 0.3)};
  const std::vector<EffectiveScatterer> ab{a[0], b[0]};
  const auto ha = rasterize_heatmaps(a, cfg);
  const auto hb = rasterize_heatmaps(b, cfg);
  const auto hab = rasterize_heatmaps(ab, cfg);
  for (std::size_t i = 0; i < hab.distribution_data().size(); ++i) {
    EXPECT_EQ(hab.distribution_data()[i], std::max(ha.distribution_data()[i], hb.distribution_data()[i]));
    EXPECT_EQ(hab.strength_data()[i], std::max(ha.strength_data()[i], hb.strength_data()[i]));
  }
  EXPECT_EQ(hab.distribution(0, 10, 10), 1.0);
  EXPECT_EQ(hab.distribution(0, 10, 40), 1.0);
}

TEST(Rasterize, OutOfRangeThrows) {
  const auto cfg = default_camera_config();
  const std::vector<EffectiveScatterer> bad{at(0, 48, 0)};
  EXPECT_THROW((void)rasterize_heatmaps(bad, cfg), std::out_of_range);
}

TEST(Decode, SingleAndEmpty) {
  const auto cfg = default_camera_config();
  EXPECT_TRUE(decode_heatmaps(SemanticHeatmap(4, 48, 128), 0.3).empty());
  const std::vector<EffectiveScatterer> one{at(2, 5, 7)};
  const auto det = decode_heatmaps(rasterize_heatmaps(one, cfg), 0.3);
  ASSERT_EQ(det.size(), 1u);
  EXPECT_EQ(det[0].camera, 2);
  EXPECT_EQ(det[0].row, 5);
  EXPECT_EQ(det[0].col, 7);
  EXPECT_DOUBLE_EQ(det[0].score, 1.0);
}

TEST(Decode, TwoPeaksEightApart) {
  const auto cfg = default_camera_config();
  const std::vector<EffectiveScatterer> two{at(0, 20, 50), at(0, 20, 58)};
  const auto hm = rasterize_heatmaps(two, cfg);
  const auto det = decode_heatmaps(hm, 0.3);
  // Brute-force scan for strict 3x3 maxima.
  std::set<std::pair<int, int>> want;
  for (int r = 0; r < hm.rows(); ++r)
    for (int c = 0; c < hm.cols(); ++c) {
      const double v = hm.distribution(0, r, c);
      if (v < 0.3) continue;
      bool peak = true;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr == 0 && dc == 0) || r + dr < 0 || c + dc < 0 || r + dr >= hm.rows() || c + dc >= hm.cols()) continue;
          if (hm.distribution(0, r + dr, c + dc) >= v) peak = false;
        }
      if (peak) want.insert({r, c});
    }
  EXPECT_EQ(want, (std::set<std::pair<int, int>>{{20, 50}, {20, 58}}));
  std::set<std::pair<int, int>> got;
  for (const auto& d : det) got.insert({d.row, d.col});
  EXPECT_EQ(got, want);
}

TEST(Decode, PlateauYieldsOneDetection) {
  SemanticHeatmap hm(1, 5, 5);
  hm.distribution(0, 2, 2) = 0.8;
  hm.distribution(0, 2, 3) = 0.8;
  const auto det = decode_heatmaps(hm, 0.3);
  ASSERT_EQ(det.size(), 1u);
  EXPECT_EQ(det[0].row, 2);
  EXPECT_EQ(det[0].col, 2);
}

TEST(PrecisionRecall, Examples) {
  const std::vector<HeatmapPoint> gt{{0, 10, 10}, {0, 30, 30}};
  const std::vector<Detection> perfect{{0, 10, 10, 1.0}, {0, 30, 30, 0.9}};
  auto pr = precision_recall(perfect, gt, 3.0);
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);
  EXPECT_DOUBLE_EQ(pr.recall, 1.0);

  const std::vector<Detection> half{{0, 10, 10, 1.0}};
  pr = precision_recall(half, gt, 3.0);
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);
  EXPECT_DOUBLE_EQ(pr.recall, 0.5);

  const std::vector<HeatmapPoint> one{{0, 10, 10}};
  const std::vector<Detection> far{{0, 10, 14, 1.0}};
  pr = precision_recall(far, one, 3.0);
  EXPECT_DOUBLE_EQ(pr.precision, 0.0);
  EXPECT_DOUBLE_EQ(pr.recall, 0.0);

  const std::vector<Detection> wrong_cam{{1, 10, 10, 1.0}};
  EXPECT_DOUBLE_EQ(precision_recall(wrong_cam, one, 3.0).recall, 0.0);
}

TEST(PrecisionRecall, EmptyConventions) {
  EXPECT_DOUBLE_EQ(precision_recall({}, {}, 3.0).precision, 1.0);
  const std::vector<HeatmapPoint> one{{0, 1, 1}};
  EXPECT_DOUBLE_EQ(precision_recall({}, one, 3.0).precision, 0.0);
}

TEST(PrecisionRecall, GreedyByScore) {
  // Both detections are in range of the single truth; the higher score wins.
  const std::vector<HeatmapPoint> gt{{0, 10, 10}};
  const std::vector<Detection> det{{0, 10, 12, 0.5}, {0, 10, 11, 0.9}};
  const auto pr = precision_recall(det, gt, 3.0);
  EXPECT_EQ(pr.matched, 1u);
  EXPECT_DOUBLE_EQ(pr.precision, 0.5);
  EXPECT_DOUBLE_EQ(pr.recall, 1.0);
}

TEST(RoundTrip, SeparatedLayoutsRecoverExactly) {
  const auto cfg = default_camera_config();
  std::mt19937_64 rng(21);
  for (int layout = 0; layout < 50; ++layout) {
    std::vector<EffectiveScatterer> pts;
    std::uniform_int_distribution<int> cam(0, 3), row(0, 47), col(0, 127);
    for (int tries = 0; tries < 200 && pts.size() < 8; ++tries) {
      const auto e = at(cam(rng), row(rng), col(rng));
      bool ok = true;
      for (const auto& p : pts)
        if (p.camera == e.camera && std::hypot(p.heatmap_row - e.heatmap_row, p.heatmap_col - e.heatmap_col) < 4.0) ok = false;
      if (ok) pts.push_back(e);
    }
    const auto det = decode_heatmaps(rasterize_heatmaps(pts, cfg), 0.3);
    const auto gt = heatmap_points(pts);
    const auto pr = precision_recall(det, gt, 3.0);
    EXPECT_DOUBLE_EQ(pr.precision, 1.0) << "layout " << layout;
    EXPECT_DOUBLE_EQ(pr.recall, 1.0) << "layout " << layout;
  }
}

TEST(MeanScatterers, Example) {
  const std::vector<std::vector<EffectiveScatterer>> samples{{at(0, 1, 1), at(2, 3, 3)}};
  EXPECT_DOUBLE_EQ(mean_effective_scatterers(samples, 4), 0.5);
  EXPECT_THROW((void)mean_effective_scatterers({}, 4), std::invalid_argument);
}

TEST(Pgm, HeaderAndValues) {
  const auto path = std::filesystem::temp_directory_path() / "beamsem_test.pgm";
  const std::vector<double> plane{0.0, 0.5, 1.0, 2.0, -1.0, 0.25};
  write_pgm(path, plane, 2, 3);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int cols = 0, rows = 0, maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  in.get();
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(cols, 3);
  EXPECT_EQ(rows, 2);
  EXPECT_EQ(maxval, 255);
  std::vector<unsigned char> px(6);
  in.read(reinterpret_cast<char*>(px.data()), 6);
  EXPECT_EQ(px, (std::vector<unsigned char>{0, 128, 255, 255, 0, 64}));
  std::filesystem::remove(path);
  EXPECT_THROW(write_pgm(path, plane, 2, 2), std::invalid_argument);
}
