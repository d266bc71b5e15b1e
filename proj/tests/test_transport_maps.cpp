#include <cmath>
#include <random>

#include "doctest.h"
#include "otstab/constructions.hpp"
#include "otstab/error.hpp"
#include "otstab/transport_maps.hpp"

using namespace otstab;

namespace {

// Index of the nearest atom by exhaustive search.
int nearest(const Point& x, const std::vector<Point>& atoms) {
  int best = 0;
  for (std::size_t j = 1; j < atoms.size(); ++j) {
    if (distance(x, atoms[j]) < distance(x, atoms[best])) best = int(j);
  }
  return best;
}

}  // namespace

TEST_CASE("rotating oracle splits along the line orthogonal to B_theta") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const BlowupInstance inst = build_blowup(2, 2.0, DensityKind::log_blowup);
  for (double t : {0.0, 1e-4, 0.3}) {
    const TransportMap m = rotating_map(inst, t);
    for (int k = 0; k < 2000; ++k) {
      const Point x{u(gen), u(gen)};
      CHECK(m.assign(x) == nearest(x, m.target.measure.atoms()));
      CHECK(m.boundary_distance(x) == doctest::Approx(std::abs(x[0] * std::sin(t) + x[1] * std::cos(t))));
    }
  }
  CHECK(oracle_rotating(Point{1.0, 0.0}, 0.0, 2.0) == 0);  // ties go to B_theta
}

TEST_CASE("cell oracles send each box to its nearest atom") {
  const CellInstance inst = choose_sequences(8);
  const auto rho = inst.density();
  const auto xs = rho.sample({2, 0}, 50000);
  const TransportMap base = cell_map(inst);
  for (int i : {1, 4, 8}) {
    const TransportMap pert = perturbed_map(inst, i);
    for (const Point& x : xs) {
      CHECK(base.assign(x) == nearest(x, base.target.measure.atoms()));
      CHECK(pert.assign(x) == nearest(x, pert.target.measure.atoms()));
    }
  }
  CHECK_THROWS_AS(oracle_cell(Point{5.0, 5.0}, inst), Error);
  CHECK_THROWS_AS(perturbed_map(inst, 9), Error);
}

TEST_CASE("perturbed oracle moves whole boxes") {
  const CellInstance inst = choose_sequences(6);
  for (int i = 1; i <= 6; ++i) {
    const Point up = inst.box_plus(i).center();
    Point down = up;
    down[1] = -0.25 * inst.radius[i - 1];
    CHECK(oracle_cell(up, inst) == atom_index(i, Sign::plus));
    CHECK(oracle_cell(down, inst) == atom_index(i, Sign::minus));
    CHECK(oracle_perturbed(down, inst, i) == atom_index(i, Sign::plus));
    CHECK(oracle_perturbed(inst.box_minus(i).center(), inst, i) == atom_index(i, Sign::minus));
  }
}

TEST_CASE("certificates pass for every oracle") {
  const BlowupInstance blow = build_blowup(3, 2.0, DensityKind::log_blowup);
  const auto r = closest_point_certificate(rotating_map(blow, 0.05), blow.density, 100000, {1, 1});
  CHECK(r.violations == 0);
  CHECK(r.min_margin >= 0.0);
  const CellInstance inst = choose_sequences(10);
  const auto rho = inst.density();
  for (const auto& m : {cell_map(inst), perturbed_map(inst, 2), perturbed_map(inst, 10)}) {
    CHECK(closest_point_certificate(m, rho, 100000, {1, 2}).violations == 0);
    const auto push = pushforward_check(m, rho, 100000, {1, 3});
    CHECK(push.max_z < 5.0);
  }
}

TEST_CASE("a wrong map fails both checks") {
  const BlowupInstance blow = build_blowup(2, 2.0, DensityKind::uniform_ball);
  TransportMap wrong = rotating_map(blow, 0.0);
  wrong.assign = [](const Point& x) { return x[0] >= 0.0 ? 0 : 1; };
  const auto r = closest_point_certificate(wrong, blow.density, 20000, {1, 1}, false);
  CHECK(r.violations > 0);
  CHECK(r.witness.has_value());
  try {
    closest_point_certificate(wrong, blow.density, 20000, {1, 1});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::certificate_failure);
  }
  TransportMap lopsided = rotating_map(blow, 0.0);
  lopsided.assign = [](const Point& x) { return x[1] >= 0.3 ? 0 : 1; };
  CHECK_THROWS_AS(pushforward_check(lopsided, blow.density, 20000, {1, 2}), Error);
}

TEST_CASE("pushforward of the rotating map gives half mass to each atom") {
  for (const auto kind : {DensityKind::log_blowup, DensityKind::poly_blowup, DensityKind::uniform_ball}) {
    const BlowupInstance blow = build_blowup(2, 1.0, kind, 0.5);
    const auto r = pushforward_check(rotating_map(blow, 0.2), blow.density, 200000, {4, 4});
    CHECK(r.empirical[0] == doctest::Approx(0.5).epsilon(0.01));
    CHECK(r.expected[1] == 0.5);
  }
}
