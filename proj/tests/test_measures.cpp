#include <cmath>
#include <numbers>

#include "doctest.h"
#include "otstab/error.hpp"
#include "otstab/geometry.hpp"
#include "otstab/measures.hpp"

using namespace otstab;

namespace {

// Unnormalized mass of the d = 2 profile over the unit ball, by polar
// integration around A = e_1 with the arc length of each circle inside the
// half ball counted on an angle grid.
double brute_integral_2d(DensityKind kind, double delta) {
  const int angles = 4000;
  auto arc = [&](double r) {
    int in = 0;
    for (int k = 0; k < angles; ++k) {
      const double phi = 2.0 * std::numbers::pi * (k + 0.5) / angles;
      // |A + r w|^2 <= 1 divided by r, so tiny radii do not round away
      const double c = std::cos(phi);
      in += (1.0 + r * c >= 0.0 && 2.0 * c + r <= 0.0);
    }
    return 2.0 * std::numbers::pi * in / angles;
  };
  const double inv_e = std::exp(-1.0);
  const int steps = 4000;
  double total = 0.0;
  if (kind == DensityKind::log_blowup) {
    // r^-1 (log r)^-2 dr = dt with t = -1/log r on (0, 1/e)
    for (int k = 0; k < steps; ++k) total += arc(std::exp(-1.0 / ((k + 0.5) / steps))) / steps;
    // r^-1 dr = d(log r) on (1/e, sqrt 2)
    const double a = -1.0, b = 0.5 * std::log(2.0);
    for (int k = 0; k < steps; ++k) total += arc(std::exp(a + (b - a) * (k + 0.5) / steps)) * (b - a) / steps;
  } else {
    // r^(delta-1) dr = d(r^delta)/delta
    const double top = std::pow(std::sqrt(2.0), delta);
    for (int k = 0; k < steps; ++k) {
      total += arc(std::pow(top * (k + 0.5) / steps, 1.0 / delta)) * top / steps / delta;
    }
  }
  return 2.0 * total;
}

}  // namespace

TEST_CASE("radial profiles") {
  CHECK(radial_profile(DensityKind::log_blowup, 2, 0.1) ==
        doctest::Approx(100.0 / std::pow(std::log(0.1), 2)));
  CHECK(radial_profile(DensityKind::log_blowup, 3, 0.5) == doctest::Approx(8.0));
  CHECK(radial_profile(DensityKind::poly_blowup, 2, 0.25, 0.5) == doctest::Approx(std::pow(0.25, -1.5)));
  CHECK_THROWS_AS(radial_profile(DensityKind::log_blowup, 2, 0.0), Error);
  CHECK_THROWS_AS(radial_profile(DensityKind::uniform_ball, 2, 0.5), Error);
}

TEST_CASE("normalization matches an independent polar integration in d = 2") {
  const auto log_q = normalize(DensityKind::log_blowup, 2, 0.0, Method::quadrature);
  CHECK(log_q.integral.value == doctest::Approx(brute_integral_2d(DensityKind::log_blowup, 0.0)).epsilon(2e-3));
  const auto poly_q = normalize(DensityKind::poly_blowup, 2, 0.5, Method::quadrature);
  CHECK(poly_q.integral.value == doctest::Approx(brute_integral_2d(DensityKind::poly_blowup, 0.5)).epsilon(2e-3));
}

TEST_CASE("quadrature and Monte Carlo normalizations agree") {
  for (int d : {2, 3, 5}) {
    const auto q = normalize(DensityKind::log_blowup, d, 0.0, Method::quadrature);
    const auto m = normalize(DensityKind::log_blowup, d, 0.0, Method::monte_carlo, 1'000'000, {3, 0});
    CHECK(std::abs(q.integral.value - m.integral.value) < 5.0 * m.integral.standard_error + 1e-9);
  }
  const auto q = normalize(DensityKind::poly_blowup, 3, 1.0, Method::quadrature);
  const auto m = normalize(DensityKind::poly_blowup, 3, 1.0, Method::monte_carlo, 1'000'000, {4, 0});
  CHECK(std::abs(q.integral.value - m.integral.value) < 5.0 * m.integral.standard_error);
  CHECK_THROWS_AS(normalize(DensityKind::uniform_ball, 2, 0.0, Method::quadrature), Error);
  CHECK_THROWS_AS(normalize(DensityKind::poly_blowup, 2, 2.0, Method::quadrature), Error);
  CHECK_THROWS_AS(normalize(DensityKind::log_blowup, 2, 0.0, Method::closed_form), Error);
}

TEST_CASE("density values follow the nearest singular point") {
  const auto rho = SourceDensity::log_blowup(2);
  const Point x{0.5, 0.1};
  CHECK(rho(x) == doctest::Approx(rho.c0() * radial_profile(DensityKind::log_blowup, 2, std::hypot(0.5, 0.1))));
  CHECK(rho(Point{-0.5, 0.1}) == doctest::Approx(rho(x)));
  CHECK(rho(Point{0.9, 0.9}) == 0.0);
  CHECK_THROWS_AS(rho(Point{1.0, 0.0}), Error);
  CHECK_THROWS_AS(rho(Point{0.0, 0.0, 0.0}), Error);
  const auto ball = SourceDensity::uniform_ball(3);
  CHECK(ball(Point{0.1, 0.1, 0.1}) == doctest::Approx(1.0 / ball_volume(3)));
}

TEST_CASE("reflections preserve the density") {
  for (const auto& rho : {SourceDensity::log_blowup(2), SourceDensity::poly_blowup(3, 0.7)}) {
    const Point x = rho.dim() == 2 ? Point{0.3, -0.2} : Point{0.3, -0.2, 0.1};
    for (auto mask : rho.reflection_masks()) CHECK(rho(reflect(x, mask)) == doctest::Approx(rho(x)));
  }
}

TEST_CASE("samples stay in the support and are reproducible") {
  const auto rho = SourceDensity::log_blowup(3);
  const auto a = rho.sample({5, 9}, 20000);
  const auto b = rho.sample({5, 9}, 20000);
  const auto c = rho.sample({5, 10}, 20000);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (const Point& x : a) CHECK(dot(x, x) <= 1.0 + 1e-12);
}

TEST_CASE("sampled sector frequencies match the closed-form sector mass") {
  for (const auto& rho : {SourceDensity::log_blowup(2), SourceDensity::log_blowup(4),
                          SourceDensity::poly_blowup(2, 0.5)}) {
    const int d = rho.dim();
    const Cone cone = singular_sector_cone(d);
    const Point apex = -Point::unit(d, 0);
    const std::size_t n = 400000;
    const auto xs = rho.sample({17, 0}, n);
    // below ~1e-12 from the apex the coordinates no longer resolve directions
    const double inner = 1e-12;
    const double frac = singular_sector_fraction(d);
    for (double s : {1e-3, 0.05, 0.3}) {
      std::size_t hits = 0;
      for (const Point& x : xs) {
        const double r = distance(x, apex);
        hits += r > inner && r < s && in_cone(x, cone);
      }
      const double p = rho.sector_mass(s, frac).value - rho.sector_mass(inner, frac).value;
      const double se = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(double(hits) / n - p) < 5.0 * se);
    }
  }
}

TEST_CASE("sector mass is monotone and finite up to the full radius") {
  const auto rho = SourceDensity::log_blowup(2);
  double prev = 0.0;
  for (double s : {1e-12, 1e-6, 1e-2, 0.2, 0.36, 0.5, 1.0}) {
    const double m = rho.sector_mass(s, 0.5).value;
    CHECK(m > prev);
    prev = m;
  }
  CHECK_THROWS_AS(rho.sector_mass(0.0, 0.5), Error);
  CHECK_THROWS_AS(rho.sector_mass(0.1, 1.5), Error);
  CHECK_THROWS_AS(SourceDensity::uniform_ball(2).sector_mass(0.1, 0.5), Error);
}

TEST_CASE("uniform cell unions weight boxes by volume") {
  std::vector<Box> boxes{make_box(Point{0.0, 0.0}, 1.0, 0.5, Sign::plus),
                         make_box(Point{3.0, 0.0}, 1.0, 1.5, Sign::plus)};
  const auto rho = SourceDensity::uniform_cells(2, boxes);
  CHECK(rho.box_masses()[0] == doctest::Approx(0.25));
  CHECK(rho.c0() == doctest::Approx(0.5));
  const auto xs = rho.sample({1, 1}, 100000);
  std::size_t first = 0;
  for (const Point& x : xs) {
    const bool a = in_box(x, boxes[0]), b = in_box(x, boxes[1]);
    CHECK((a || b));
    first += a;
  }
  CHECK(std::abs(double(first) / xs.size() - 0.25) < 5.0 * std::sqrt(0.25 * 0.75 / xs.size()));
  CHECK_THROWS_AS(SourceDensity::uniform_cells(2, {}), Error);
}

TEST_CASE("density JSON round trip") {
  const auto rho = SourceDensity::poly_blowup(3, 0.25);
  const auto back = density_from_json(to_json(rho));
  CHECK(back.kind() == DensityKind::poly_blowup);
  CHECK(back.delta() == 0.25);
  CHECK(back.c0() == doctest::Approx(rho.c0()));
  CHECK_THROWS_AS(density_kind_from_string("gaussian"), Error);
}
