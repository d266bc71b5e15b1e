#include "otstab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "otstab/error.hpp"

namespace otstab {

void check_dimension(int d) {
  if (d < 2 || d > kMaxDim) {
    throw Error(ErrorKind::invalid_dimension,
                "dimension must lie in [2, " + std::to_string(kMaxDim) + "], got " +
                    std::to_string(d));
  }
}

Point::Point(std::initializer_list<double> coords)
    : Point(std::span<const double>(coords.begin(), coords.size())) {}

Point::Point(std::span<const double> coords) {
  check_dimension(static_cast<int>(coords.size()));
  dim_ = static_cast<int>(coords.size());
  for (int k = 0; k < dim_; ++k) {
    if (!std::isfinite(coords[k])) throw Error(ErrorKind::domain, "point coordinates must be finite");
    coords_[k] = coords[k];
  }
}

Point Point::zero(int d) {
  check_dimension(d);
  Point p;
  p.dim_ = d;
  return p;
}

Point Point::unit(int d, int axis) {
  Point p = zero(d);
  p.coords_[axis] = 1.0;
  return p;
}

Point& Point::operator+=(const Point& other) noexcept {
  for (int k = 0; k < dim_; ++k) coords_[k] += other.coords_[k];
  return *this;
}

Point& Point::operator-=(const Point& other) noexcept {
  for (int k = 0; k < dim_; ++k) coords_[k] -= other.coords_[k];
  return *this;
}

Point& Point::operator*=(double s) noexcept {
  for (int k = 0; k < dim_; ++k) coords_[k] *= s;
  return *this;
}

bool operator==(const Point& a, const Point& b) noexcept {
  if (a.dim_ != b.dim_) return false;
  for (int k = 0; k < a.dim_; ++k) {
    if (a.coords_[k] != b.coords_[k]) return false;
  }
  return true;
}

Point operator+(Point a, const Point& b) noexcept { return a += b; }
Point operator-(Point a, const Point& b) noexcept { return a -= b; }
Point operator-(Point a) noexcept { return a *= -1.0; }
Point operator*(double s, Point a) noexcept { return a *= s; }

double dot(const Point& a, const Point& b) noexcept {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) s += a[k] * b[k];
  return s;
}

double norm(const Point& a) noexcept { return std::sqrt(dot(a, a)); }

double squared_distance(const Point& a, const Point& b) noexcept {
  double s = 0.0;
  for (int k = 0; k < a.dim(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

double distance(const Point& a, const Point& b) noexcept { return std::sqrt(squared_distance(a, b)); }

double sphere_area(int d) {
  if (d < 2) throw Error(ErrorKind::invalid_dimension, "sphere_area needs d >= 2");
  const double half = 0.5 * d;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double ball_volume(int d) { return sphere_area(d) / d; }

namespace {

// P(first coordinate of a uniform direction on S^{d-1} <= c).
double first_coordinate_cdf(int d, double c) {
  if (c <= -1.0) return 0.0;
  if (c >= 1.0) return 1.0;
  if (d == 2) return 1.0 - std::acos(c) / std::numbers::pi;
  if (d == 3) return 0.5 * (1.0 + c);
  // omega_1^2 ~ Beta(1/2, (d-1)/2), symmetric about 0
  const double tail = 0.5 * boost::math::ibeta(0.5 * (d - 1), 0.5, 1.0 - c * c);
  return c < 0.0 ? tail : 1.0 - tail;
}

}  // namespace

double direction_fraction(int d, double lo, double hi) {
  check_dimension(d);
  lo = std::max(lo, -1.0);
  hi = std::min(hi, 1.0);
  if (hi <= lo) return 0.0;
  return std::max(0.0, first_coordinate_cdf(d, hi) - first_coordinate_cdf(d, lo));
}

Point target_atom(double theta, double radius, Sign sign, int d) {
  if (!(radius > 0.0)) throw Error(ErrorKind::domain, "target radius must be positive");
  Point b = Point::zero(d);
  const double s = sign_value(sign) * radius;
  b[0] = s * std::sin(theta);
  b[1] = s * std::cos(theta);
  return b;
}

Side halfspace_side(const Point& x, double theta, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::domain, "target radius must be positive");
  const double ip = x[0] * std::sin(theta) + x[1] * std::cos(theta);
  if (ip > 0.0) return Side::positive;
  if (ip < 0.0) return Side::negative;
  return Side::boundary;
}

bool in_cone(const Point& x, const Cone& cone) {
  Point v = x - cone.apex;
  double scale = 0.0;
  for (int k = 0; k < v.dim(); ++k) scale = std::max(scale, std::abs(v[k]));
  if (scale == 0.0) throw Error(ErrorKind::undefined_direction, "point coincides with the cone apex");
  // rescale first so that squares of tiny offsets do not underflow
  v *= 1.0 / scale;
  const double len = norm(v);
  if (!(cone.constraint_sign * v[cone.constraint_axis] > 0.0)) return false;
  return dot(v, cone.axis) / len > cone.cos_half_angle;
}

Cone singular_sector_cone(int d) {
  Cone c;
  c.apex = -Point::unit(d, 0);
  c.axis = Point::unit(d, 0);
  c.cos_half_angle = 0.5;
  c.constraint_axis = 1;
  c.constraint_sign = 1.0;
  return c;
}

double singular_sector_fraction(int d) {
  // the cap {omega_1 > 1/2} is symmetric in omega_2, so x_2 > 0 keeps half of it
  return 0.5 * direction_fraction(d, 0.5, 1.0);
}

Box make_box(const Point& anchor, double length, double width, Sign orientation) {
  if (!(length > 0.0) || !(width > 0.0)) {
    throw Error(ErrorKind::domain, "box length and width must be positive");
  }
  return Box{anchor, length, width, orientation};
}

double Box::lower(int k) const noexcept {
  const double s = sign_value(orientation);
  switch (k) {
    case 0: return s > 0 ? anchor[0] : anchor[0] - length;
    case 1: return anchor[1] - 0.5 * width;
    default: return anchor[k] - 0.5;
  }
}

double Box::upper(int k) const noexcept {
  const double s = sign_value(orientation);
  switch (k) {
    case 0: return s > 0 ? anchor[0] + length : anchor[0];
    case 1: return anchor[1] + 0.5 * width;
    default: return anchor[k] + 0.5;
  }
}

Point Box::center() const {
  Point c = anchor;
  c[0] += sign_value(orientation) * 0.5 * length;
  return c;
}

bool in_box(const Point& x, const Box& box) noexcept {
  if (x.dim() != box.anchor.dim()) return false;
  const double s = sign_value(box.orientation);
  const double y1 = s * (x[0] - box.anchor[0]);
  if (!(y1 > 0.0 && y1 < box.length)) return false;
  if (!(std::abs(x[1] - box.anchor[1]) < 0.5 * box.width)) return false;
  for (int k = 2; k < x.dim(); ++k) {
    if (!(std::abs(x[k] - box.anchor[k]) < 0.5)) return false;
  }
  return true;
}

double distance_to_box(const Point& x, const Box& box) noexcept {
  double s = 0.0;
  for (int k = 0; k < x.dim(); ++k) {
    const double lo = box.lower(k);
    const double hi = box.upper(k);
    const double t = x[k] < lo ? lo - x[k] : (x[k] > hi ? x[k] - hi : 0.0);
    s += t * t;
  }
  return std::sqrt(s);
}

}  // namespace otstab
