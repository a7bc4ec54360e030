#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/SVD>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "lfsg/data.hpp"
#include "lfsg/errors.hpp"

using lfsg::Labels;
using lfsg::Matrix;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("data_test_") + name;
}

lfsg::SyntheticSpec small_spec() {
  lfsg::SyntheticSpec spec;
  spec.ambient_dim = 20;
  spec.subspace_dim = 3;
  spec.clusters = 4;
  spec.points_per_cluster = 15;
  spec.noise_sigma = 0.0;
  spec.seed = 42;
  return spec;
}

}  // namespace

TEST_CASE("synthetic shapes and label layout") {
  const auto data = lfsg::generate_synthetic(small_spec());
  CHECK(data.X.rows() == 20);
  CHECK(data.X.cols() == 60);
  REQUIRE(data.labels.size() == 60);
  for (int j = 0; j < 60; ++j) CHECK(data.labels[j] == j / 15);
  CHECK(lfsg::count_clusters(data.labels) == 4);
}

TEST_CASE("noiseless clusters live in rank-d subspaces") {
  const auto data = lfsg::generate_synthetic(small_spec());
  for (int c = 0; c < 4; ++c) {
    const Matrix block = data.X.middleCols(c * 15, 15);
    Eigen::JacobiSVD<Matrix> svd(block);
    const auto& sv = svd.singularValues();
    REQUIRE(sv.size() >= 4);
    CHECK(sv(2) > 1e-8);                  // genuinely 3-dimensional
    CHECK(sv(3) <= 1e-10 * sv(0));        // and no more
  }
}

TEST_CASE("noise perturbs every cluster block") {
  auto spec = small_spec();
  const auto clean = lfsg::generate_synthetic(spec);
  spec.noise_sigma = 0.1;
  const auto noisy = lfsg::generate_synthetic(spec);
  for (int c = 0; c < 4; ++c) {
    const Matrix diff = noisy.X.middleCols(c * 15, 15) -
                        clean.X.middleCols(c * 15, 15);
    CHECK(diff.norm() > 0.0);
  }
}

TEST_CASE("synthetic is deterministic per seed") {
  const auto a = lfsg::generate_synthetic(small_spec());
  const auto b = lfsg::generate_synthetic(small_spec());
  CHECK(a.X == b.X);
  auto spec = small_spec();
  spec.seed = 43;
  const auto c = lfsg::generate_synthetic(spec);
  CHECK(a.X != c.X);
}

TEST_CASE("synthetic rejects bad parameters") {
  auto spec = small_spec();
  spec.subspace_dim = 21;
  CHECK_THROWS_AS(lfsg::generate_synthetic(spec), lfsg::InvalidSpec);
  spec = small_spec();
  spec.clusters = 0;
  CHECK_THROWS_AS(lfsg::generate_synthetic(spec), lfsg::InvalidSpec);
  spec = small_spec();
  spec.noise_sigma = -0.5;
  CHECK_THROWS_AS(lfsg::generate_synthetic(spec), lfsg::InvalidSpec);
}

TEST_CASE("split respects per-class fractions") {
  const auto data = lfsg::generate_synthetic(small_spec());
  const auto split = lfsg::split_in_out(data, 0.6, 9);
  // floor(0.6 * 15) = 9 in-sample per class
  CHECK(split.in.X.cols() == 36);
  CHECK(split.out.X.cols() == 24);
  for (int c = 0; c < 4; ++c) {
    CHECK(std::count(split.in.labels.begin(), split.in.labels.end(), c) == 9);
    CHECK(std::count(split.out.labels.begin(), split.out.labels.end(), c) == 6);
  }
}

TEST_CASE("split indices are sorted, disjoint, and complete") {
  const auto data = lfsg::generate_synthetic(small_spec());
  const auto split = lfsg::split_in_out(data, 0.5, 123);
  CHECK(std::is_sorted(split.in_indices.begin(), split.in_indices.end()));
  CHECK(std::is_sorted(split.out_indices.begin(), split.out_indices.end()));
  std::set<int> all(split.in_indices.begin(), split.in_indices.end());
  all.insert(split.out_indices.begin(), split.out_indices.end());
  CHECK(all.size() == 60);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 59);
  // gathered columns match the original matrix at the reported indices
  for (std::size_t k = 0; k < split.in_indices.size(); ++k) {
    CHECK(split.in.X.col(static_cast<Eigen::Index>(k)) ==
          data.X.col(split.in_indices[k]));
    CHECK(split.in.labels[k] == data.labels[split.in_indices[k]]);
  }
}

TEST_CASE("split is deterministic per seed and varies across seeds") {
  const auto data = lfsg::generate_synthetic(small_spec());
  const auto s1 = lfsg::split_in_out(data, 0.5, 7);
  const auto s2 = lfsg::split_in_out(data, 0.5, 7);
  const auto s3 = lfsg::split_in_out(data, 0.5, 8);
  CHECK(s1.in_indices == s2.in_indices);
  CHECK(s1.in_indices != s3.in_indices);
}

TEST_CASE("split refuses classes that cannot land on both sides") {
  lfsg::LabeledData tiny;
  tiny.X = Matrix::Random(4, 3);
  tiny.labels = {0, 0, 1};  // class 1 has one member
  CHECK_THROWS_AS(lfsg::split_in_out(tiny, 0.5, 0),
                  lfsg::InsufficientClassSize);
}

TEST_CASE("split validates the fraction") {
  const auto data = lfsg::generate_synthetic(small_spec());
  CHECK_THROWS_AS(lfsg::split_in_out(data, 0.0, 0), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::split_in_out(data, 1.0, 0), lfsg::InvalidSpec);
}

TEST_CASE("csv round trip is exact") {
  const std::string path = temp_path("m.csv");
  Matrix X(3, 4);
  X << 1.0, -2.5, 3.1415926535897931, 1e-300,
       0.1, 0.2, 0.3, -0.0,
       1e300, -1e-17, 7.0, 0.12345678901234567;
  lfsg::save_matrix_csv(path, X);
  const Matrix Y = lfsg::load_matrix_csv(path);
  REQUIRE(Y.rows() == 3);
  REQUIRE(Y.cols() == 4);
  CHECK(X == Y);  // 17 significant digits round-trip doubles exactly
  std::remove(path.c_str());
}

TEST_CASE("bin round trip is exact and dispatch picks it by extension") {
  const std::string path = temp_path("m.bin");
  const Matrix X = Matrix::Random(5, 7);
  lfsg::save_matrix(path, X);
  const Matrix Y = lfsg::load_matrix(path);
  CHECK(X == Y);
  std::remove(path.c_str());
}

TEST_CASE("bin loader rejects foreign files") {
  const std::string path = temp_path("bad.bin");
  std::ofstream os(path, std::ios::binary);
  os << "not a matrix";
  os.close();
  CHECK_THROWS_AS(lfsg::load_matrix_bin(path), lfsg::ParseError);
  std::remove(path.c_str());
}

TEST_CASE("csv loader rejects ragged rows and junk") {
  const std::string path = temp_path("ragged.csv");
  {
    std::ofstream os(path);
    os << "1,2,3\n4,5\n";
  }
  CHECK_THROWS_AS(lfsg::load_matrix_csv(path), lfsg::ParseError);
  {
    std::ofstream os(path);
    os << "1,2\nx,4\n";
  }
  CHECK_THROWS_AS(lfsg::load_matrix_csv(path), lfsg::ParseError);
  std::remove(path.c_str());
}

TEST_CASE("csv loader skips blank lines and tolerates CRLF") {
  const std::string path = temp_path("crlf.csv");
  {
    std::ofstream os(path);
    os << "1,2\r\n\r\n3,4\r\n";
  }
  const Matrix X = lfsg::load_matrix_csv(path);
  REQUIRE(X.rows() == 2);
  CHECK(X(1, 1) == 4.0);
  std::remove(path.c_str());
}

TEST_CASE("labels are 1-based on disk and 0-based in memory") {
  const std::string path = temp_path("labels.txt");
  const Labels labels = {0, 2, 1, 1, 0};
  lfsg::save_labels(path, labels);
  {
    std::ifstream is(path);
    int first = 0;
    is >> first;
    CHECK(first == 1);
  }
  CHECK(lfsg::load_labels(path) == labels);
  std::remove(path.c_str());
}

TEST_CASE("label loader rejects nonpositive entries") {
  const std::string path = temp_path("zero_label.txt");
  {
    std::ofstream os(path);
    os << "1\n0\n2\n";
  }
  CHECK_THROWS_AS(lfsg::load_labels(path), lfsg::ParseError);
  std::remove(path.c_str());
}

TEST_CASE("count_clusters validates contiguity") {
  CHECK(lfsg::count_clusters({0, 1, 2, 1}) == 3);
  CHECK_THROWS_AS(lfsg::count_clusters({0, 2}), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::count_clusters({1, 2}), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::count_clusters({}), lfsg::EmptyMatrix);
}

TEST_CASE("missing files raise IoError") {
  CHECK_THROWS_AS(lfsg::load_matrix_csv("definitely_missing.csv"),
                  lfsg::IoError);
  CHECK_THROWS_AS(lfsg::load_labels("definitely_missing.txt"), lfsg::IoError);
}
