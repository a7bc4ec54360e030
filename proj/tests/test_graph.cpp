#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <set>

#include "lfsg/errors.hpp"
#include "lfsg/graph.hpp"
#include "lfsg/metrics.hpp"
#include "lfsg/rng.hpp"

using lfsg::Matrix;
using lfsg::Vector;

namespace {

Matrix random_matrix(int n, lfsg::Rng& rng) {
  Matrix Z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) Z(i, j) = rng.normal();
  return Z;
}

// block-diagonal affinity with two well-separated components
Matrix two_component_affinity(int n1, int n2) {
  Matrix W = Matrix::Zero(n1 + n2, n1 + n2);
  W.topLeftCorner(n1, n1).setConstant(1.0);
  W.bottomRightCorner(n2, n2).setConstant(1.0);
  W.diagonal().setZero();
  return W;
}

}  // namespace

TEST_CASE("affinity symmetrizes and rectifies the representation") {
  Matrix Z(2, 2);
  Z << 1.0, -4.0,
       2.0, 0.5;
  const Matrix W = lfsg::affinity_from_representation(Z);
  CHECK(W(0, 0) == 1.0);
  CHECK(W(0, 1) == 3.0);  // (|-4| + |2|) / 2
  CHECK(W(1, 0) == 3.0);
  CHECK(W(1, 1) == 0.5);
}

TEST_CASE("affinity is exactly symmetric and nonnegative") {
  lfsg::Rng rng(1);
  const Matrix Z = random_matrix(25, rng);
  const Matrix W = lfsg::affinity_from_representation(Z);
  CHECK(W == W.transpose().eval());  // bit-for-bit
  CHECK((W.array() >= 0.0).all());
  CHECK_THROWS_AS(lfsg::affinity_from_representation(Matrix::Zero(2, 3)),
                  lfsg::NonSquare);
}

TEST_CASE("laplacian structure") {
  lfsg::Rng rng(2);
  const Matrix Z = random_matrix(20, rng);
  const Matrix W = lfsg::affinity_from_representation(Z);
  const auto g = lfsg::build_graph(W);
  CHECK(g.degrees == W.rowwise().sum().eval());
  CHECK(g.L == g.L.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(g.L);
  REQUIRE(eig.info() == Eigen::Success);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  CHECK(eig.eigenvalues().maxCoeff() <= 2.0 + 1e-10);
}

TEST_CASE("isolated vertices keep an identity row in L") {
  Matrix W = Matrix::Zero(4, 4);
  W(0, 1) = W(1, 0) = 1.0;  // vertices 2 and 3 are isolated
  const auto g = lfsg::build_graph(W);
  for (int i = 2; i < 4; ++i) {
    CHECK(g.L(i, i) == 1.0);
    for (int j = 0; j < 4; ++j) {
      if (j != i) CHECK(g.L(i, j) == 0.0);
    }
  }
}

TEST_CASE("a connected component contributes a zero eigenvalue") {
  const Matrix W = two_component_affinity(6, 5);
  const auto g = lfsg::build_graph(W);
  const auto emb = lfsg::spectral_embed(g.L, 2);
  CHECK(std::abs(emb.eigenvalues(0)) <= 1e-10);
  CHECK(std::abs(emb.eigenvalues(1)) <= 1e-10);
}

TEST_CASE("graph filter: order zero is the identity, order one matches") {
  lfsg::Rng rng(3);
  const Matrix Z = random_matrix(12, rng);
  const auto g = lfsg::build_graph(lfsg::affinity_from_representation(Z));
  const Matrix X = random_matrix(12, rng).topRows(5);

  const Matrix X0 = lfsg::graph_filter(X, g.L, 0);
  CHECK(X0 == X);

  const Matrix S = Matrix::Identity(12, 12) - 0.5 * g.L;
  const Matrix X1 = lfsg::graph_filter(X, g.L, 1);
  CHECK((X1 - (S * X.transpose()).transpose()).norm() <= 1e-12);

  const Matrix X3 = lfsg::graph_filter(X, g.L, 3);
  const Matrix R3 = (S * (S * (S * X.transpose()))).transpose();
  CHECK((X3 - R3).norm() <= 1e-12);

  CHECK_THROWS_AS(lfsg::graph_filter(X, g.L, -1), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::graph_filter(X.leftCols(5), g.L, 1),
                  lfsg::DimensionMismatch);
}

TEST_CASE("spectral embedding rows are unit norm with fixed signs") {
  lfsg::Rng rng(4);
  const Matrix Z = random_matrix(18, rng);
  const auto g = lfsg::build_graph(lfsg::affinity_from_representation(Z));
  const auto emb = lfsg::spectral_embed(g.L, 3);
  REQUIRE(emb.coords.rows() == 18);
  REQUIRE(emb.coords.cols() == 3);
  for (int i = 0; i < 18; ++i) {
    CHECK(emb.coords.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // repeated embedding is bit-identical (deterministic solver + sign rule)
  const auto emb2 = lfsg::spectral_embed(g.L, 3);
  CHECK(emb.coords == emb2.coords);
}

TEST_CASE("spectral clustering separates graph components") {
  const Matrix W = two_component_affinity(7, 9);
  const auto g = lfsg::build_graph(W);
  const auto labels = lfsg::spectral_cluster(g.L, 2, 5);
  REQUIRE(labels.size() == 16);
  const std::set<int> first(labels.begin(), labels.begin() + 7);
  const std::set<int> second(labels.begin() + 7, labels.end());
  CHECK(first.size() == 1);
  CHECK(second.size() == 1);
  CHECK(*first.begin() != *second.begin());
}

TEST_CASE("kmeans recovers separated blobs") {
  lfsg::Rng rng(6);
  const int per = 30;
  Matrix pts(3 * per, 2);
  lfsg::Labels truth(3 * per);
  const double cx[3] = {0.0, 10.0, -10.0};
  const double cy[3] = {0.0, 10.0, 10.0};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per; ++i) {
      pts(c * per + i, 0) = cx[c] + 0.3 * rng.normal();
      pts(c * per + i, 1) = cy[c] + 0.3 * rng.normal();
      truth[static_cast<std::size_t>(c * per + i)] = c;
    }
  }
  const auto res = lfsg::kmeans(pts, 3, 77);
  CHECK(lfsg::acc(res.labels, truth) == 100.0);
  CHECK(res.wcss > 0.0);
  CHECK(res.iterations >= 1);
}

TEST_CASE("kmeans is deterministic per seed") {
  lfsg::Rng rng(8);
  Matrix pts(40, 3);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.normal();
  const auto a = lfsg::kmeans(pts, 4, 123);
  const auto b = lfsg::kmeans(pts, 4, 123);
  CHECK(a.labels == b.labels);
  CHECK(a.wcss == b.wcss);
  CHECK(a.centers == b.centers);
}

TEST_CASE("kmeans handles duplicate points without losing clusters") {
  Matrix pts(6, 1);
  pts << 0.0, 0.0, 0.0, 0.0, 5.0, 5.0;
  const auto res = lfsg::kmeans(pts, 2, 1);
  const std::set<int> used(res.labels.begin(), res.labels.end());
  CHECK(used.size() == 2);
  CHECK(res.labels[4] == res.labels[5]);
  CHECK(res.labels[0] != res.labels[4]);
}

TEST_CASE("kmeans argument validation") {
  Matrix pts = Matrix::Random(5, 2);
  CHECK_THROWS_AS(lfsg::kmeans(pts, 0, 0), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::kmeans(pts, 6, 0), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::kmeans(pts, 2, 0, 0), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::kmeans(Matrix(0, 2), 1, 0), lfsg::EmptyMatrix);
}

TEST_CASE("spectral_embed validates the cluster count") {
  const Matrix L = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(lfsg::spectral_embed(L, 0), lfsg::InvalidSpec);
  CHECK_THROWS_AS(lfsg::spectral_embed(L, 5), lfsg::InvalidSpec);
}
