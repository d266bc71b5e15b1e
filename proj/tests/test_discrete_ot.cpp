#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "otstab/constructions.hpp"
#include "otstab/discrete_ot.hpp"
#include "otstab/error.hpp"

using namespace otstab;

TEST_CASE("discrete measures validate their inputs") {
  CHECK_THROWS_AS(DiscreteMeasure({Point{0, 0}, Point{1, 0}}, {0.5, 0.6}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({Point{0, 0}, Point{0, 0}}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({Point{0, 0}, Point{1, 0}}, {-0.5, 1.5}), Error);
  CHECK_NOTHROW(DiscreteMeasure::unnormalized({Point{0, 0}}, {3.0}));
}

TEST_CASE("exact solver matches brute-force assignment on random instances") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<Point> a, b;
    for (int k = 0; k < n; ++k) {
      a.push_back(Point{u(gen), u(gen)});
      b.push_back(Point{u(gen), u(gen)});
    }
    const std::vector<double> w(n, 1.0 / n);
    for (double p : {1.0, 2.0, 3.0}) {
      std::vector<std::vector<double>> c(n, std::vector<double>(n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c[i][j] = std::pow(distance(a[i], b[j]), p);
      const auto sol = solve_exact(DiscreteMeasure(a, w), DiscreteMeasure(b, w), p);
      CHECK(sol.cost == doctest::Approx(oracle::assignment_cost(c)).epsilon(1e-12));
      CHECK(sol.duality_gap <= 1e-12);
      CHECK(sol.max_marginal_error <= 1e-12);
      CHECK(sol.min_reduced_cost >= -1e-12);
    }
  }
}

TEST_CASE("unbalanced weights and bad inputs") {
  CHECK_THROWS_AS(solve_transport({0.5, 0.5}, {0.7, 0.4}, {0, 1, 1, 0}), Error);
  try {
    solve_transport({1.0}, {0.5}, {0.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::imbalance);
  }
  CHECK_THROWS_AS(cost_matrix({Point{0, 0}}, {Point{1, 0}}, 0.5), Error);
}

TEST_CASE("transport with unequal weights satisfies marginals and duality") {
  const std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b{0.25, 0.25, 0.5};
  std::vector<double> cost;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) cost.push_back(std::abs(i - 1.5 * j));
  const auto s = solve_transport(a, b, cost);
  std::vector<double> rows(4, 0.0), cols(3, 0.0);
  double c = 0.0;
  for (const auto& e : s.coupling) {
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
    c += e.mass * cost[e.source * 3 + e.target];
    CHECK(cost[e.source * 3 + e.target] - s.u[e.source] - s.v[e.target] == doctest::Approx(0.0));
  }
  for (int i = 0; i < 4; ++i) CHECK(rows[i] == doctest::Approx(a[i]));
  for (int j = 0; j < 3; ++j) CHECK(cols[j] == doctest::Approx(b[j]));
  CHECK(s.cost == doctest::Approx(c));
  CHECK(s.v[0] == 0.0);
}

TEST_CASE("degenerate square has cost 2 for every coupling") {
  // unit masses at opposite corners; every coupling [[t, 1-t], [1-t, t]] costs 2
  const std::vector<Point> mu{Point{0, 0}, Point{1, 1}}, nu{Point{1, 0}, Point{0, 1}};
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    const double plan[2][2] = {{t, 1 - t}, {1 - t, t}};
    double cost = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) cost += plan[i][j] * squared_distance(mu[i], nu[j]);
    CHECK(cost == doctest::Approx(2.0).epsilon(1e-15));
  }
  const auto s = solve_exact(DiscreteMeasure::unnormalized(mu, {1.0, 1.0}),
                             DiscreteMeasure::unnormalized(nu, {1.0, 1.0}), 2.0);
  CHECK(std::abs(s.wasserstein - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("cell perturbation: solver, closed form and coupling structure") {
  const CellInstance inst = choose_sequences(12);
  for (int i = 1; i <= 10; ++i) {
    const auto t = oracle::cell_terms(12, i);
    for (double p : {1.0, 2.0, 3.0}) {
      const double expected = oracle::pair_shift_wp(t.r, t.sigma, p);
      CHECK(wasserstein_cell_perturbation(inst, i, p) == doctest::Approx(expected).epsilon(1e-12));
      const auto s = solve_exact(cell_atoms(inst).measure, perturbed_cell_atoms(inst, i).measure, p);
      CHECK(std::abs(s.wasserstein / expected - 1.0) <= 1e-9);
      CHECK(coupling_structure_check(inst, i, p));
    }
  }
}

TEST_CASE("rotating pair distance") {
  const BlowupInstance blow = build_blowup(2, 2.0, DensityKind::uniform_ball);
  for (double t : {1e-6, 1e-3, 0.1, 0.5}) {
    CHECK(wasserstein_rotating(2.0, t) == doctest::Approx(4.0 * std::sin(t / 2)));
    for (double p : {1.0, 2.0}) {
      const auto s = solve_exact(rotating_pair(blow, 0.0).measure, rotating_pair(blow, t).measure, p);
      CHECK(s.wasserstein == doctest::Approx(wasserstein_rotating(2.0, t)).epsilon(1e-9));
    }
  }
}
