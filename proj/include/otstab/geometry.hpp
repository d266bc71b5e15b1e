#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace otstab {

/// Largest supported ambient dimension. Points are stored inline so that
/// Monte Carlo loops never allocate.
inline constexpr int kMaxDim = 8;

/// A point of R^d, 2 <= d <= kMaxDim. Default construction yields an empty
/// placeholder of dimension 0 (for containers); every factory validates.
class Point {
 public:
  Point() = default;
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);

  static Point zero(int d);
  static Point unit(int d, int axis);

  int dim() const noexcept { return dim_; }
  double operator[](int k) const noexcept { return coords_[k]; }
  double& operator[](int k) noexcept { return coords_[k]; }
  std::span<const double> coords() const noexcept {
    return {coords_.data(), static_cast<std::size_t>(dim_)};
  }

  Point& operator+=(const Point& other) noexcept;
  Point& operator-=(const Point& other) noexcept;
  Point& operator*=(double s) noexcept;

  friend bool operator==(const Point& a, const Point& b) noexcept;

 private:
  std::array<double, kMaxDim> coords_{};
  int dim_ = 0;
};

Point operator+(Point a, const Point& b) noexcept;
Point operator-(Point a, const Point& b) noexcept;
Point operator-(Point a) noexcept;
Point operator*(double s, Point a) noexcept;

double dot(const Point& a, const Point& b) noexcept;
double norm(const Point& a) noexcept;
double squared_distance(const Point& a, const Point& b) noexcept;
double distance(const Point& a, const Point& b) noexcept;

/// Throws invalid_dimension unless 2 <= d <= kMaxDim.
void check_dimension(int d);

/// Area of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
double sphere_area(int d);

/// Volume of the unit ball in R^d.
double ball_volume(int d);

/// Probability that the first coordinate of a uniformly random direction on
/// S^{d-1} lies in [lo, hi]. Exact (arccos for d = 2, linear for d = 3,
/// regularized incomplete beta otherwise).
double direction_fraction(int d, double lo, double hi);

enum class Sign { plus, minus };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }

/// B_theta = (R sin theta, R cos theta, 0, ...) or its antipode.
Point target_atom(double theta, double radius, Sign sign, int d);

enum class Side { positive, negative, boundary };

/// Sign of <x, B_theta>. The sign does not depend on R, which only needs to
/// be positive, so the product is formed without it.
Side halfspace_side(const Point& x, double theta, double radius);

/// Circular cone with an extra coordinate half-space:
/// { x : <(x-apex)/|x-apex|, axis> > cos_half_angle,
///       constraint_sign * (x-apex)[constraint_axis] > 0 }.
struct Cone {
  Point apex;
  Point axis;
  double cos_half_angle = 0.5;
  int constraint_axis = 1;
  double constraint_sign = 1.0;
};

/// Throws undefined_direction when x coincides with the apex.
bool in_cone(const Point& x, const Cone& cone);

/// The sector cone at A' = (-1, 0, ...): axis e_1, half-angle 60 degrees,
/// restricted to x_2 > 0.
Cone singular_sector_cone(int d);

/// Solid-angle fraction of singular_sector_cone(d).
double singular_sector_fraction(int d);

/// Open parallelepiped anchor +/- Q(length, width), where
/// Q = { 0 < y_1 < length, |y_2| < width / 2, |y_k| < 1/2 for k >= 3 }.
/// Orientation minus is the point reflection through the anchor.
struct Box {
  Point anchor;
  double length = 0.0;
  double width = 0.0;
  Sign orientation = Sign::plus;

  double volume() const noexcept { return length * width; }
  Point center() const;
  /// Coordinate-wise bounds of the open box.
  double lower(int k) const noexcept;
  double upper(int k) const noexcept;
};

Box make_box(const Point& anchor, double length, double width, Sign orientation);

bool in_box(const Point& x, const Box& box) noexcept;

/// Euclidean distance from x to the closure of the box.
double distance_to_box(const Point& x, const Box& box) noexcept;

}  // namespace otstab
