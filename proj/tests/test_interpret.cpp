#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lfsg/data.hpp"
#include "lfsg/errors.hpp"
#include "lfsg/interpret.hpp"

using lfsg::Labels;
using lfsg::Matrix;
using lfsg::Vector;

namespace {

std::string scratch_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("lfsg_interpret_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return std::vector<char>(std::istreambuf_iterator<char>(is),
                           std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("representative energy equals the sum of singular values") {
  lfsg::SyntheticSpec spec;
  spec.ambient_dim = 16;
  spec.subspace_dim = 3;
  spec.clusters = 3;
  spec.points_per_cluster = 20;
  spec.noise_sigma = 0.01;
  spec.seed = 99;
  const auto data = lfsg::generate_synthetic(spec);

  const int d = 3;
  const auto reps = lfsg::cluster_representatives(data.X, data.labels, d);
  REQUIRE(reps.size() == 3);

  for (int c = 0; c < 3; ++c) {
    // reference: SVD of the raw cluster block, computed independently
    Matrix block(16, 20);
    int k = 0;
    for (int j = 0; j < data.X.cols(); ++j)
      if (data.labels[static_cast<std::size_t>(j)] == c)
        block.col(k++) = data.X.col(j);
    REQUIRE(k == 20);
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);

    // a_c = sum sigma_j u_j over orthonormal u_j, so the squared norm is
    // the sum of squared singular values
    double expect = 0.0;
    for (int j = 0; j < d; ++j) expect += svd.singularValues()[j] * svd.singularValues()[j];
    CHECK(reps[static_cast<std::size_t>(c)].squaredNorm() ==
          doctest::Approx(expect).epsilon(1e-10));

    // and it matches the sign-fixed reconstruction
    Vector ref = Vector::Zero(16);
    for (int j = 0; j < d; ++j) {
      Vector u = svd.matrixU().col(j);
      if (u.sum() < 0.0) u = -u;
      ref += svd.singularValues()[j] * u;
    }
    CHECK((reps[static_cast<std::size_t>(c)] - ref).cwiseAbs().maxCoeff() <=
          1e-8);
  }
}

TEST_CASE("representative count is capped by rank") {
  // one cluster of rank 1: all columns proportional to e1
  Matrix X(4, 3);
  X << 1, 2, 3,
       0, 0, 0,
       0, 0, 0,
       0, 0, 0;
  const Labels labels{0, 0, 0};
  const auto reps = lfsg::cluster_representatives(X, labels, 3);
  REQUIRE(reps.size() == 1);
  // only the rank-1 direction contributes: a = sigma_1 * e1
  const double sigma1 = std::sqrt(1.0 + 4.0 + 9.0);
  CHECK(reps[0][0] == doctest::Approx(sigma1).epsilon(1e-12));
  CHECK(reps[0].tail(3).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sign convention keeps entry sums nonnegative") {
  // flipping the sign of every sample must not change the representative
  Matrix X(5, 8);
  X.setRandom();
  const Labels labels{0, 0, 0, 0, 0, 0, 0, 0};
  const auto plus = lfsg::cluster_representatives(X, labels, 2);
  const auto minus = lfsg::cluster_representatives(Matrix(-X), labels, 2);
  CHECK((plus[0] - minus[0]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("matricize is column-major") {
  Vector a(4);
  a << 1, 2, 3, 4;
  const Matrix img = lfsg::matricize(a, 2, 2);
  CHECK(img(0, 0) == 1.0);
  CHECK(img(1, 0) == 2.0);
  CHECK(img(0, 1) == 3.0);
  CHECK(img(1, 1) == 4.0);
  CHECK_THROWS_AS(lfsg::matricize(a, 3, 2), lfsg::ShapeMismatch);
}

TEST_CASE("pgm round trip is exact") {
  const std::string dir = scratch_dir("pgm");
  Matrix pixels(3, 5);
  pixels << 0, 17, 255, 128, 1,
            2, 3, 4, 5, 6,
            250, 251, 252, 253, 254;
  const std::string path = dir + "/img.pgm";
  lfsg::write_pgm(path, pixels);
  const Matrix back = lfsg::read_pgm(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 5);
  CHECK((back - pixels).cwiseAbs().maxCoeff() == 0.0);

  const auto raw = slurp(path);
  REQUIRE(raw.size() > 2);
  CHECK(raw[0] == 'P');
  CHECK(raw[1] == '5');
  std::filesystem::remove_all(dir);
}

TEST_CASE("png round trip is exact") {
  const std::string dir = scratch_dir("png");
  Matrix pixels(4, 3);
  pixels << 0, 255, 7,
            13, 99, 200,
            1, 2, 3,
            254, 128, 64;
  const std::string path = dir + "/img.png";
  lfsg::write_png(path, pixels);
  const Matrix back = lfsg::read_png(path);
  REQUIRE(back.rows() == 4);
  REQUIRE(back.cols() == 3);
  CHECK((back - pixels).cwiseAbs().maxCoeff() == 0.0);

  const auto raw = slurp(path);
  REQUIRE(raw.size() > 8);
  const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  for (int i = 0; i < 8; ++i)
    CHECK(static_cast<unsigned char>(raw[static_cast<std::size_t>(i)]) ==
          sig[i]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("export scales to the full byte range with half-up rounding") {
  const std::string dir = scratch_dir("export");
  // min 1.0 -> 0, max 3.0 -> 255; 2.0 -> 127.5 rounds half-up to 128
  Matrix img(1, 3);
  img << 1.0, 2.0, 3.0;
  const auto paths = lfsg::export_images({img}, dir, lfsg::ImageFormat::PGM);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].find("cluster_1.pgm") != std::string::npos);
  const Matrix px = lfsg::read_pgm(paths[0]);
  CHECK(px(0, 0) == 0.0);
  CHECK(px(0, 1) == 128.0);
  CHECK(px(0, 2) == 255.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("constant images export as zeros") {
  const std::string dir = scratch_dir("flat");
  const Matrix img = Matrix::Constant(2, 2, 5.5);
  const auto paths = lfsg::export_images({img}, dir, lfsg::ImageFormat::PNG);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].find("cluster_1.png") != std::string::npos);
  const Matrix px = lfsg::read_png(paths[0]);
  CHECK(px.cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("exports are deterministic byte for byte") {
  Matrix a(2, 3), b(3, 2);
  a << 0.1, -2.0, 3.5,
       4.0, 0.0, -1.0;
  b << 9, 8, 7,
       6, 5, 4;
  const std::string dir1 = scratch_dir("rep1");
  const std::string dir2 = scratch_dir("rep2");
  for (const auto format : {lfsg::ImageFormat::PGM, lfsg::ImageFormat::PNG}) {
    const auto p1 = lfsg::export_images({a, b}, dir1, format);
    const auto p2 = lfsg::export_images({a, b}, dir2, format);
    REQUIRE(p1.size() == 2);
    REQUIRE(p2.size() == 2);
    CHECK(p1[0].find("cluster_1") != std::string::npos);
    CHECK(p1[1].find("cluster_2") != std::string::npos);
    for (std::size_t i = 0; i < 2; ++i) CHECK(slurp(p1[i]) == slurp(p2[i]));
  }
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("image codec validations") {
  CHECK_THROWS_AS(lfsg::read_pgm("missing_file.pgm"), lfsg::IoError);
  CHECK_THROWS_AS(lfsg::read_png("missing_file.png"), lfsg::IoError);
  CHECK_THROWS_AS(lfsg::cluster_representatives(Matrix(), {}, 1),
                  lfsg::EmptyMatrix);
  Matrix X(2, 2);
  X.setOnes();
  CHECK_THROWS_AS(lfsg::cluster_representatives(X, {0, 0}, 0),
                  lfsg::InvalidSpec);
}
