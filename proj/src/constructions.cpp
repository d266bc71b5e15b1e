#include "otstab/constructions.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/trigamma.hpp>

#include "otstab/error.hpp"

namespace otstab {
namespace {

constexpr double kConstraintTolerance = 1e-9;

Point on_plane(int d, double x1, double x2) {
  Point p = Point::zero(d);
  p[0] = x1;
  p[1] = x2;
  return p;
}

bool boxes_overlap(const Box& a, const Box& b) {
  for (int k = 0; k < a.anchor.dim(); ++k) {
    if (a.upper(k) <= b.lower(k) || b.upper(k) <= a.lower(k)) return false;
  }
  return true;
}

std::vector<double> read_vector(const nlohmann::json& j, const char* key, std::size_t n) {
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != n) {
    throw Error(ErrorKind::config, std::string("instance field '") + key + "' must have N entries");
  }
  return v;
}

}  // namespace

BlowupInstance build_blowup(int d, double R, DensityKind kind, double delta) {
  check_dimension(d);
  if (!(R > 0.0)) throw Error(ErrorKind::domain, "target radius R must be positive");
  BlowupInstance inst;
  inst.d = d;
  inst.R = R;
  switch (kind) {
    case DensityKind::log_blowup: inst.density = SourceDensity::log_blowup(d); break;
    case DensityKind::poly_blowup: inst.density = SourceDensity::poly_blowup(d, delta); break;
    case DensityKind::uniform_ball: inst.density = SourceDensity::uniform_ball(d); break;
    default:
      throw Error(ErrorKind::unsupported_kind, "blow-up instances use blow-up or ball densities");
  }
  inst.cone_fraction = singular_sector_fraction(d);
  return inst;
}

void CellInstance::check_index(int i) const {
  if (i < 1 || i > N) {
    throw Error(ErrorKind::index_out_of_range,
                "cell index " + std::to_string(i) + " outside [1, " + std::to_string(N) + "]");
  }
}

Point CellInstance::anchor_plus(int i) const {
  check_index(i);
  return on_plane(d, center[i - 1] + offset[i - 1], 0.0);
}

Point CellInstance::anchor_minus(int i) const {
  check_index(i);
  return on_plane(d, center[i - 1] - offset[i - 1], 0.0);
}

Point CellInstance::b_plus(int i) const {
  check_index(i);
  return on_plane(d, center[i - 1], offset[i - 1]);
}

Point CellInstance::b_minus(int i) const {
  check_index(i);
  return on_plane(d, center[i - 1], -offset[i - 1]);
}

Point CellInstance::c_plus(int i) const {
  check_index(i);
  return on_plane(d, center[i - 1] + radius[i - 1], offset[i - 1]);
}

Point CellInstance::c_minus(int i) const {
  check_index(i);
  return on_plane(d, center[i - 1] - radius[i - 1], -offset[i - 1]);
}

Box CellInstance::box_plus(int i) const {
  return make_box(anchor_plus(i), length[i - 1], radius[i - 1], Sign::plus);
}

Box CellInstance::box_minus(int i) const {
  return make_box(anchor_minus(i), length[i - 1], radius[i - 1], Sign::minus);
}

int CellInstance::nearest_cell(double x1) const {
  const auto it = std::lower_bound(center.begin(), center.end(), x1);
  const int hi = static_cast<int>(it - center.begin());
  if (hi == 0) return 1;
  if (hi == N) return N;
  return x1 - center[hi - 1] <= center[hi] - x1 ? hi : hi + 1;
}

int CellInstance::locate(const Point& x) const {
  const int i = nearest_cell(x[0]);
  for (int j = std::max(1, i - 1); j <= std::min(N, i + 1); ++j) {
    if (in_box(x, box_plus(j)) || in_box(x, box_minus(j))) return j;
  }
  return 0;
}

SourceDensity CellInstance::density() const {
  std::vector<Box> boxes;
  boxes.reserve(2 * N);
  for (int i = 1; i <= N; ++i) {
    boxes.push_back(box_plus(i));
    boxes.push_back(box_minus(i));
  }
  return SourceDensity::uniform_cells(d, std::move(boxes));
}

double minimal_width_constant() {
  double best = 0.0;
  for (int i = 1; i <= 200; ++i) best = std::max(best, 100.0 * i * i * std::ldexp(1.0, -i));
  return best;
}

double radius_width_series() {
  double s = 0.0;
  for (int i = 1; std::ldexp(1.0, -i) > 1e-18; ++i) {
    s += std::ldexp(1.0, -i) / (static_cast<double>(i) * i);
  }
  return s;
}

CellInstance choose_sequences(int N, double p, CellProfile profile, int d) {
  check_dimension(d);
  if (N < 2) throw Error(ErrorKind::domain, "truncation N must be at least 2");
  if (!(p >= 1.0)) throw Error(ErrorKind::domain, "exponent p must be >= 1");
  if (profile != CellProfile::geometric_radius) {
    throw Error(ErrorKind::unsupported_kind, "only the geometric radius profile is available");
  }
  CellInstance inst;
  inst.d = d;
  inst.N = N;
  inst.k1 = minimal_width_constant();
  inst.k2 = 100.0 * inst.k1;
  inst.series = radius_width_series();
  inst.c0 = 1.0 / std::sqrt(2.0 * inst.k1 * inst.series);
  double mass = 0.0;
  for (int i = 1; i <= N; ++i) {
    const double inv_sq = 1.0 / (static_cast<double>(i) * i);
    inst.radius.push_back(inst.c0 * std::ldexp(1.0, -i));
    inst.length.push_back(inst.c0 * inst.k1 * inv_sq);
    inst.offset.push_back(inst.c0 * inst.k1 * inv_sq);
    inst.center.push_back(-inst.c0 * inst.k2 * boost::math::trigamma(static_cast<double>(i)));
    mass += inst.length.back() * inst.radius.back();
  }
  for (int i = 0; i < N; ++i) inst.sigma.push_back(inst.length[i] * inst.radius[i] / (2.0 * mass));
  const auto bad = violations(inst);
  if (!bad.empty()) {
    throw Error(ErrorKind::internal_consistency,
                "constructed instance violates " + bad.front().name + " at cell " +
                    std::to_string(bad.front().index));
  }
  return inst;
}

std::vector<ConstraintReport> validate(const CellInstance& inst) {
  std::vector<ConstraintReport> out;
  const int N = inst.N;
  for (int i = 1; i <= N; ++i) {
    const double l = inst.length[i - 1], r = inst.radius[i - 1], w = inst.offset[i - 1];
    const double m1 = w / (100.0 * r);
    out.push_back({"offset_dominates_radius", i, m1, m1 >= 1.0 - kConstraintTolerance});
    double gap = INFINITY;
    if (i > 1) gap = std::min(gap, inst.center[i - 1] - inst.center[i - 2]);
    if (i < N) gap = std::min(gap, inst.center[i] - inst.center[i - 1]);
    const double m2 = gap / (100.0 * std::max({l, r, w}));
    out.push_back({"cell_separation", i, m2, m2 >= 1.0 - kConstraintTolerance});
  }
  std::vector<std::pair<int, Box>> boxes;
  for (int i = 1; i <= N; ++i) {
    boxes.emplace_back(i, inst.box_plus(i));
    boxes.emplace_back(i, inst.box_minus(i));
  }
  std::vector<bool> ok(N + 1, true);
  std::vector<double> gap(N + 1, INFINITY);
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    for (std::size_t b = a + 1; b < boxes.size(); ++b) {
      const auto& [i, box_a] = boxes[a];
      const auto& [j, box_b] = boxes[b];
      if (boxes_overlap(box_a, box_b)) ok[i] = ok[j] = false;
      if (i == j) continue;
      const double g = std::max(box_b.lower(0) - box_a.upper(0), box_a.lower(0) - box_b.upper(0));
      gap[i] = std::min(gap[i], g);
      gap[j] = std::min(gap[j], g);
    }
  }
  for (int i = 1; i <= N; ++i) out.push_back({"boxes_disjoint", i, gap[i], ok[i]});
  double total = 0.0;
  for (double s : inst.sigma) total += 2.0 * s;
  out.push_back({"total_mass", 0, std::abs(total - 1.0), std::abs(total - 1.0) <= 1e-12});
  return out;
}

std::vector<ConstraintReport> violations(const CellInstance& inst) {
  auto all = validate(inst);
  std::erase_if(all, [](const ConstraintReport& r) { return r.satisfied; });
  return all;
}

std::string_view to_string(TargetKind k) {
  switch (k) {
    case TargetKind::rotating_pair: return "rotating_pair";
    case TargetKind::cell_atoms: return "cell_atoms";
    case TargetKind::perturbed_cell_atoms: return "perturbed_cell_atoms";
  }
  return "unknown";
}

TargetFamily rotating_pair(const BlowupInstance& inst, double theta) {
  if (!std::isfinite(theta)) throw Error(ErrorKind::domain, "theta must be finite");
  TargetFamily t;
  t.kind = TargetKind::rotating_pair;
  t.theta = theta;
  t.measure = DiscreteMeasure({target_atom(theta, inst.R, Sign::plus, inst.d),
                               target_atom(theta, inst.R, Sign::minus, inst.d)},
                              {0.5, 0.5});
  return t;
}

namespace {

TargetFamily cell_family(const CellInstance& inst, int perturbed) {
  std::vector<Point> atoms;
  std::vector<double> weights;
  for (int i = 1; i <= inst.N; ++i) {
    const bool moved = i == perturbed;
    atoms.push_back(moved ? inst.c_plus(i) : inst.b_plus(i));
    atoms.push_back(moved ? inst.c_minus(i) : inst.b_minus(i));
    weights.push_back(inst.sigma[i - 1]);
    weights.push_back(inst.sigma[i - 1]);
  }
  TargetFamily t;
  t.kind = perturbed == 0 ? TargetKind::cell_atoms : TargetKind::perturbed_cell_atoms;
  t.cell = perturbed;
  t.measure = DiscreteMeasure(std::move(atoms), std::move(weights));
  return t;
}

}  // namespace

TargetFamily cell_atoms(const CellInstance& inst) { return cell_family(inst, 0); }

TargetFamily perturbed_cell_atoms(const CellInstance& inst, int i) {
  inst.check_index(i);
  return cell_family(inst, i);
}

nlohmann::json to_json(const CellInstance& inst) {
  return nlohmann::json{
      {"d", inst.d},
      {"N", inst.N},
      {"constants",
       {{"k1", inst.k1},
        {"k2", inst.k2},
        {"c0", inst.c0},
        {"series", inst.series},
        {"provenance",
         {{"k1", "max over i>=1 of 100 i^2 2^-i"},
          {"k2", "100 k1"},
          {"c0", "(2 k1 series)^-1/2"},
          {"series", "sum_{i>=1} i^-2 2^-i"},
          {"u", "-c0 k2 trigamma(i)"}}}}},
      {"length", inst.length},
      {"radius", inst.radius},
      {"offset", inst.offset},
      {"center", inst.center},
      {"sigma", inst.sigma}};
}

CellInstance cell_instance_from_json(const nlohmann::json& j) {
  try {
    CellInstance inst;
    inst.d = j.at("d").get<int>();
    check_dimension(inst.d);
    inst.N = j.at("N").get<int>();
    if (inst.N < 2) throw Error(ErrorKind::config, "instance N must be at least 2");
    const auto& c = j.at("constants");
    inst.k1 = c.at("k1").get<double>();
    inst.k2 = c.at("k2").get<double>();
    inst.c0 = c.at("c0").get<double>();
    inst.series = c.value("series", 0.0);
    const auto n = static_cast<std::size_t>(inst.N);
    inst.length = read_vector(j, "length", n);
    inst.radius = read_vector(j, "radius", n);
    inst.offset = read_vector(j, "offset", n);
    inst.center = read_vector(j, "center", n);
    inst.sigma = read_vector(j, "sigma", n);
    for (std::size_t k = 0; k < n; ++k) {
      if (!(inst.length[k] > 0.0 && inst.radius[k] > 0.0 && inst.offset[k] > 0.0 &&
            inst.sigma[k] >= 0.0 && std::isfinite(inst.center[k]))) {
        throw Error(ErrorKind::config, "instance sequences must be positive and finite");
      }
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("instance file: ") + e.what());
  }
}

nlohmann::json to_json(const std::vector<ConstraintReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    out.push_back({{"constraint", r.name},
                   {"index", r.index},
                   {"margin", std::isfinite(r.margin) ? nlohmann::json(r.margin) : nlohmann::json()},
                   {"satisfied", r.satisfied}});
  }
  return out;
}

}  // namespace otstab
