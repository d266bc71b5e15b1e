#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "otstab/constructions.hpp"
#include "otstab/error.hpp"

using namespace otstab;

TEST_CASE("derived constants match their brute-force values") {
  CHECK(minimal_width_constant() == doctest::Approx(oracle::width_constant_brute()).epsilon(1e-15));
  CHECK(minimal_width_constant() == 112.5);
  CHECK(radius_width_series() == doctest::Approx(oracle::dilog_half()).epsilon(1e-14));
  const CellInstance inst = choose_sequences(12);
  CHECK(inst.k2 == 11250.0);
  CHECK(inst.c0 == doctest::Approx(oracle::cell_scale(112.5)).epsilon(1e-13));
  CHECK(inst.c0 == doctest::Approx(0.0874).epsilon(1e-3));
}

TEST_CASE("sequences follow their defining formulas") {
  const int N = 15;
  const CellInstance inst = choose_sequences(N);
  for (int i = 1; i <= N; ++i) {
    const auto t = oracle::cell_terms(N, i);
    CHECK(inst.radius[i - 1] == doctest::Approx(t.r).epsilon(1e-13));
    CHECK(inst.offset[i - 1] == doctest::Approx(t.w).epsilon(1e-13));
    CHECK(inst.length[i - 1] == inst.offset[i - 1]);
    CHECK(inst.sigma[i - 1] == doctest::Approx(t.sigma).epsilon(1e-12));
    if (i > 1) {
      const double gap = inst.center[i - 1] - inst.center[i - 2];
      CHECK(gap == doctest::Approx(inst.c0 * inst.k2 / double((i - 1) * (i - 1))).epsilon(1e-10));
    }
  }
  // centres accumulate at the origin from the left
  CHECK(inst.center.back() < 0.0);
  CHECK(std::abs(inst.center.back()) < std::abs(inst.center.front()));
}

TEST_CASE("every constructed instance passes all constraints") {
  for (int N = 2; N <= 60; ++N) {
    const CellInstance inst = choose_sequences(N);
    const auto reports = validate(inst);
    CHECK(reports.size() == std::size_t(3 * N + 1));
    CHECK(violations(inst).empty());
    double total = 0.0;
    for (double s : inst.sigma) total += 2.0 * s;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(choose_sequences(1), Error);
  CHECK_THROWS_AS(choose_sequences(5, 0.5), Error);
}

TEST_CASE("tampered instances are rejected by name") {
  CellInstance inst = choose_sequences(8);
  inst.offset[3] = inst.radius[3];
  auto bad = violations(inst);
  REQUIRE_FALSE(bad.empty());
  CHECK(bad.front().name == "offset_dominates_radius");
  CHECK(bad.front().index == 4);

  inst = choose_sequences(8);
  inst.center[5] = inst.center[4] + 1e-6;
  bad = violations(inst);
  REQUIRE_FALSE(bad.empty());
  CHECK(bad.front().name == "cell_separation");

  inst = choose_sequences(8);
  inst.sigma[0] *= 1.01;
  bad = violations(inst);
  REQUIRE(bad.size() == 1);
  CHECK(bad.front().name == "total_mass");
}

TEST_CASE("instance JSON round trip keeps sequences verbatim") {
  const CellInstance inst = choose_sequences(10);
  const auto j = to_json(inst);
  const CellInstance back = cell_instance_from_json(j);
  CHECK(back.radius == inst.radius);
  CHECK(back.center == inst.center);
  CHECK(back.sigma == inst.sigma);
  CHECK(violations(back).empty());

  auto broken = j;
  broken["radius"].erase(0);
  CHECK_THROWS_AS(cell_instance_from_json(broken), Error);
  broken = j;
  broken["offset"][2] = -1.0;
  CHECK_THROWS_AS(cell_instance_from_json(broken), Error);
}

TEST_CASE("cell location finds box centres and rejects gaps") {
  const CellInstance inst = choose_sequences(10);
  for (int i = 1; i <= inst.N; ++i) {
    CHECK(inst.locate(inst.box_plus(i).center()) == i);
    CHECK(inst.locate(inst.box_minus(i).center()) == i);
    CHECK(inst.locate(inst.b_plus(i)) == 0);  // the atoms sit between the boxes
  }
  CHECK(inst.locate(Point{1.0, 0.0}) == 0);
  CHECK_THROWS_AS(inst.box_plus(0), Error);
  CHECK_THROWS_AS(inst.c_plus(11), Error);
}

TEST_CASE("target families") {
  const BlowupInstance blow = build_blowup(3, 2.0, DensityKind::log_blowup);
  const TargetFamily rot = rotating_pair(blow, 0.2);
  CHECK(rot.measure.size() == 2);
  CHECK(rot.measure.weight(0) == 0.5);
  CHECK(rot.measure.atom(1) == -rot.measure.atom(0));
  CHECK(norm(rot.measure.atom(0)) == doctest::Approx(2.0));

  const CellInstance inst = choose_sequences(6);
  const TargetFamily cells = cell_atoms(inst);
  const TargetFamily pert = perturbed_cell_atoms(inst, 3);
  CHECK(cells.measure.size() == 12);
  CHECK(cells.measure.total_weight() == doctest::Approx(1.0));
  for (int i = 1; i <= 6; ++i) {
    CHECK(cells.measure.atom(atom_index(i, Sign::plus)) == inst.b_plus(i));
    CHECK(cells.measure.weight(atom_index(i, Sign::minus)) == inst.sigma[i - 1]);
    const Point expected = i == 3 ? inst.c_minus(i) : inst.b_minus(i);
    CHECK(pert.measure.atom(atom_index(i, Sign::minus)) == expected);
  }
  CHECK(pert.cell == 3);
  CHECK_THROWS_AS(perturbed_cell_atoms(inst, 7), Error);
  CHECK_THROWS_AS(build_blowup(2, -1.0, DensityKind::log_blowup), Error);
  CHECK_THROWS_AS(build_blowup(2, 1.0, DensityKind::uniform_cell_union), Error);
}
