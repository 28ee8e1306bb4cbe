#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "matschrod/errors.hpp"
#include "matschrod/grid.hpp"

using namespace matschrod;

TEST_CASE("grid construction rejects bad parameters") {
  CHECK_THROWS_AS(GridSpec::build(0, 1.0, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::build(4, 1.0, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::build(1, 0.0, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::build(1, 1.0, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::build(1, 1.0, 4, 0), InvalidArgument);
  CHECK_THROWS_AS(GridSpec::build(1, std::nan(""), 4, 1), InvalidArgument);
}

TEST_CASE("grid geometry") {
  const GridSpec g = GridSpec::build(2, 3.0, 5, 2);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.node_count() == 25);
  CHECK(g.state_size() == 50);
  CHECK(g.cell_count() == 36);
  CHECK(g.cell_volume() == doctest::Approx(1.0));
  CHECK(g.volume() == doctest::Approx(25.0));

  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const MultiIndex a = g.multi_index(n);
    CHECK(g.node_index(a) == n);
    const Point x = g.coordinates(n);
    CHECK(x[0] == doctest::Approx(-3.0 + (a[0] + 1) * 1.0));
    CHECK(x[1] == doctest::Approx(-3.0 + (a[1] + 1) * 1.0));
  }
  // alpha_0 varies slowest
  CHECK(g.multi_index(1)[1] == 1);
  CHECK(g.multi_index(5)[0] == 1);
  CHECK(g.node_index({-1, 0, 0}) == kBoundary);
  CHECK(g.node_index({0, 5, 0}) == kBoundary);

  const MultiIndex c0 = g.cell_corner(0);
  CHECK(c0[0] == -1);
  CHECK(c0[1] == -1);
  CHECK(g.corner_node(c0) == kBoundary);
  CHECK(g.shifted_node({-1, 0, 0}, 0) == g.node_index({0, 0, 0}));
  CHECK(g.shifted_node({4, 0, 0}, 0) == kBoundary);
  CHECK(g.corner_coordinates(0)[0] == doctest::Approx(-3.0));
}

TEST_CASE("edge enumeration covers interior and boundary half-edges") {
  for (int d = 1; d <= 3; ++d) {
    const GridSpec g = GridSpec::build(d, 1.0, 4, 1);
    std::size_t count = 0, boundary = 0;
    g.for_each_edge([&](std::size_t a, std::size_t b, int axis) {
      ++count;
      CHECK(axis >= 0);
      CHECK(axis < d);
      CHECK((a != kBoundary || b != kBoundary));
      if (a == kBoundary || b == kBoundary) ++boundary;
    });
    const std::size_t per_line = 5;  // N + 1
    std::size_t lines = 1;
    for (int i = 1; i < d; ++i) lines *= 4;
    CHECK(count == static_cast<std::size_t>(d) * per_line * lines);
    CHECK(boundary == static_cast<std::size_t>(d) * 2 * lines);
  }
}

TEST_CASE("vector state validation") {
  const GridSpec g = GridSpec::build(1, 1.0, 4, 2);
  CHECK(VectorState(g).values().isZero());
  CHECK_THROWS_AS(VectorState(g, Vector::Zero(7)), InvalidArgument);
  Vector bad = Vector::Zero(8);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(VectorState(g, bad), InvalidArgument);
  VectorState f(g);
  f.at(2, 1) = 3.0;
  CHECK(f.values()[5] == 3.0);
  CHECK(f.node_value(2)[1] == 3.0);
}

TEST_CASE("diffusion samples: symmetrization and ellipticity constants") {
  const GridSpec g = GridSpec::build(2, 1.0, 3, 1);
  std::mt19937_64 rng(7);
  std::vector<Matrix> samples;
  double lo = kInfinity, hi = 0.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    Matrix q(2, 2);
    const Vector r = oracle::random_vector(rng, 3, 0.0, 1.0);
    q << 1.0 + r[0], r[1] + 0.1, r[1] - 0.1, 1.0 + r[2];
    samples.push_back(q);
    const auto e = oracle::eig2(q(0, 0), r[1], q(1, 1));
    lo = std::min(lo, e[0]);
    hi = std::max(hi, e[1]);
  }
  const DiffusionField q = DiffusionField::from_samples(g, samples);
  CHECK(q.eta1() == doctest::Approx(lo).epsilon(1e-12));
  CHECK(q.eta2() == doctest::Approx(hi).epsilon(1e-12));
  CHECK_FALSE(q.diagonal());
  CHECK(q.at_cell(0)(0, 1) == q.at_cell(0)(1, 0));
  CHECK(q.elliptic());

  std::vector<Matrix> degenerate(g.cell_count(), Matrix::Identity(2, 2));
  degenerate[3](1, 1) = 0.0;
  CHECK_FALSE(DiffusionField::from_samples(g, degenerate).elliptic());
  CHECK(DiffusionField::from_samples(g, degenerate).diagonal());
  CHECK_THROWS_AS(DiffusionField::from_samples(g, std::vector<Matrix>(3, Matrix::Identity(2, 2))), InvalidArgument);
}

TEST_CASE("potential samples: flags") {
  const GridSpec g = GridSpec::build(1, 1.0, 3, 2);
  Matrix a(2, 2);
  a << 1.0, -0.5, -0.5, 1.0;
  const PotentialField v = PotentialField::from_samples(g, std::vector<Matrix>(3, a));
  CHECK(v.symmetric());
  CHECK(v.psd());
  CHECK(v.off_diagonal_max() == -0.5);
  CHECK(v.min_eigenvalue() == doctest::Approx(0.5));
  CHECK(v.max_eigenvalue() == doctest::Approx(1.5));

  Matrix anti(2, 2);
  anti << 0.0, -1.0, 1.0, 0.0;
  const PotentialField w = PotentialField::from_samples(g, std::vector<Matrix>(3, anti));
  CHECK_FALSE(w.symmetric());
  CHECK(w.at(0).isZero());
  CHECK(w.raw_at(0)(1, 0) == 1.0);

  Matrix neg(2, 2);
  neg << 1.0, 2.0, 2.0, 1.0;
  CHECK_FALSE(PotentialField::from_samples(g, std::vector<Matrix>(3, neg)).psd());

  const GridSpec scalar = GridSpec::build(1, 1.0, 3, 1);
  CHECK(PotentialField::from_samples(scalar, std::vector<Matrix>(3, Matrix::Ones(1, 1))).off_diagonal_max() ==
        -kInfinity);
}

TEST_CASE("sampling is deterministic and rejects bad samples") {
  const GridSpec g = GridSpec::build(2, 2.0, 6, 2);
  const auto q = [](const Point& x) { return Matrix((1.5 + std::sin(x[0] * x[1])) * Matrix::Identity(2, 2)); };
  const auto v = [](const Point& x) { return Matrix(x.squaredNorm() * Matrix::Identity(2, 2)); };
  const SampledFields a = sample_fields(q, v, g);
  const SampledFields b = sample_fields(q, v, g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) CHECK((a.diffusion.at_cell(c).array() == b.diffusion.at_cell(c).array()).all());
  for (std::size_t n = 0; n < g.node_count(); ++n) CHECK((a.potential.at(n).array() == b.potential.at(n).array()).all());

  const auto nan_v = [](const Point&) { return Matrix::Constant(2, 2, std::nan("")); };
  CHECK_THROWS_AS(sample_fields(q, nan_v, g), InvalidArgument);
  const auto wrong_shape = [](const Point&) { return Matrix::Identity(3, 3); };
  CHECK_THROWS_AS(sample_fields(q, wrong_shape, g), InvalidArgument);
}

TEST_CASE("mixed norms and the finite-measure Holder chain") {
  const GridSpec g = GridSpec::build(1, 1.5, 2, 2);  // h = 1
  VectorState f(g);
  f.values() << 3.0, 4.0, 0.0, 1.0;  // |f| = 5, 1
  CHECK(mixed_norm(f, 1.0) == doctest::Approx(6.0));
  CHECK(mixed_norm(f, 2.0) == doctest::Approx(std::sqrt(26.0)));
  CHECK(mixed_norm(f, kInfinity) == doctest::Approx(5.0));
  CHECK_THROWS_AS(mixed_norm(f, 0.5), InvalidArgument);

  const GridSpec big = GridSpec::build(2, 1.0, 7, 3);
  std::mt19937_64 rng(11);
  const double mass = static_cast<double>(big.node_count()) * big.cell_volume();
  const std::vector<double> ps{1.0, 1.5, 2.0, 3.0, 4.0, 8.0, kInfinity};
  for (int trial = 0; trial < 50; ++trial) {
    const VectorState s = oracle::random_state(big, rng);
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
      const double p = ps[i], q = ps[i + 1];
      const double inv = 1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q);
      CHECK(mixed_norm(s, p) <= std::pow(mass, inv) * mixed_norm(s, q) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("bump profile") {
  CHECK(bump_phi(0.0) == 1.0);
  CHECK(bump_phi(1.0) == 1.0);
  CHECK(bump_phi(2.0) == 0.0);
  CHECK(bump_phi(3.0) == 0.0);
  CHECK(bump_phi(1.5) == doctest::Approx(0.5));
  for (double r = 1.05; r < 2.0; r += 0.1) {
    const double fd = (bump_phi(r + 1e-6) - bump_phi(r - 1e-6)) / 2e-6;
    CHECK(bump_phi_derivative(r) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(bump_phi_derivative(r) <= 0.0);
  }
  const GridSpec g = GridSpec::build(1, 5.0, 99, 2);
  const VectorState b = bump_state(g, Point::Zero(1), 1.0, 1);
  CHECK(b.values().minCoeff() >= 0.0);
  CHECK(b.values().maxCoeff() == 1.0);
  for (std::size_t n = 0; n < g.node_count(); ++n) CHECK(b.at(n, 0) == 0.0);
}
