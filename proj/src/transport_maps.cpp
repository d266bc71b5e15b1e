#include "otstab/transport_maps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "otstab/error.hpp"
#include "otstab/parallel.hpp"

namespace otstab {
namespace {

std::string describe(const Point& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (int k = 0; k < x.dim(); ++k) os << (k ? ", " : "") << x[k];
  os << ')';
  return os.str();
}

std::vector<double> point_coords(const Point& x) {
  const auto c = x.coords();
  return {c.begin(), c.end()};
}

}  // namespace

int oracle_rotating(const Point& x, double theta, double R) {
  return halfspace_side(x, theta, R) == Side::negative ? 1 : 0;
}

int oracle_cell(const Point& x, const CellInstance& inst) {
  const int i = inst.locate(x);
  if (i == 0) throw Error(ErrorKind::outside_support, "point " + describe(x) + " lies in no cell");
  return atom_index(i, x[1] >= 0.0 ? Sign::plus : Sign::minus);
}

int oracle_perturbed(const Point& x, const CellInstance& inst, int i) {
  inst.check_index(i);
  if (in_box(x, inst.box_plus(i))) return atom_index(i, Sign::plus);
  if (in_box(x, inst.box_minus(i))) return atom_index(i, Sign::minus);
  return oracle_cell(x, inst);
}

TransportMap rotating_map(const BlowupInstance& inst, double theta) {
  TransportMap m;
  m.target = rotating_pair(inst, theta);
  m.oracle = OracleKind::rotating;
  const double R = inst.R;
  const double s = std::sin(theta), c = std::cos(theta);
  m.assign = [theta, R](const Point& x) { return oracle_rotating(x, theta, R); };
  m.boundary_distance = [s, c](const Point& x) { return std::abs(x[0] * s + x[1] * c); };
  m.local_scale = [](const Point&) { return 1.0; };
  return m;
}

TransportMap cell_map(const CellInstance& inst) {
  TransportMap m;
  m.target = cell_atoms(inst);
  m.oracle = OracleKind::cell;
  m.cells = std::make_shared<const CellInstance>(inst);
  m.assign = [inst](const Point& x) { return oracle_cell(x, inst); };
  m.boundary_distance = [](const Point& x) { return std::abs(x[1]); };
  m.local_scale = [inst](const Point& x) {
    return inst.radius[inst.nearest_cell(x[0]) - 1];
  };
  return m;
}

TransportMap perturbed_map(const CellInstance& inst, int i) {
  TransportMap m;
  m.target = perturbed_cell_atoms(inst, i);
  m.oracle = OracleKind::perturbed;
  m.cells = std::make_shared<const CellInstance>(inst);
  m.assign = [inst, i](const Point& x) { return oracle_perturbed(x, inst, i); };
  const Box plus = inst.box_plus(i);
  const Box minus = inst.box_minus(i);
  m.boundary_distance = [plus, minus](const Point& x) {
    // inside cell i the two images are separated by the gap between the boxes
    if (in_box(x, plus)) return distance_to_box(x, minus);
    if (in_box(x, minus)) return distance_to_box(x, plus);
    return std::abs(x[1]);
  };
  m.local_scale = [inst](const Point& x) {
    return inst.radius[inst.nearest_cell(x[0]) - 1];
  };
  return m;
}

CertificateReport closest_point_certificate(const TransportMap& map, const SourceDensity& rho,
                                            std::size_t n, SamplerState state,
                                            bool throw_on_violation) {
  const auto& atoms = map.target.measure.atoms();
  struct Part {
    std::size_t violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    std::optional<Point> witness;
  };
  std::array<Part, kShards> parts{};
  stream_samples(rho, state, n, [&](std::size_t s, const Point& x) {
    const int a = map.assign(x);
    const double da = distance(x, atoms[a]);
    double best_other = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (static_cast<int>(j) != a) best_other = std::min(best_other, distance(x, atoms[j]));
    }
    const double margin = best_other - da;
    Part& p = parts[s];
    if (margin < 0.0) {
      ++p.violations;
      if (!p.witness) p.witness = x;
    }
    p.min_margin = std::min(p.min_margin, margin);
  });
  CertificateReport report;
  report.samples = n;
  report.state = state;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (const Part& p : parts) {
    report.violations += p.violations;
    report.min_margin = std::min(report.min_margin, p.min_margin);
    if (!report.witness && p.witness) report.witness = p.witness;
  }
  if (report.violations > 0 && throw_on_violation) {
    throw Error(ErrorKind::certificate_failure,
                std::to_string(report.violations) + " samples not sent to a nearest atom; witness " +
                    describe(*report.witness));
  }
  return report;
}

PushforwardReport pushforward_check(const TransportMap& map, const SourceDensity& rho,
                                    std::size_t n, SamplerState state) {
  const std::size_t m = map.target.measure.size();
  std::vector<std::vector<std::size_t>> counts(kShards, std::vector<std::size_t>(m, 0));
  stream_samples(rho, state, n, [&](std::size_t s, const Point& x) { ++counts[s][map.assign(x)]; });
  PushforwardReport r;
  r.samples = n;
  r.state = state;
  r.expected = map.target.measure.weights();
  r.empirical.assign(m, 0.0);
  r.standard_error.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t c = 0;
    for (const auto& shard : counts) c += shard[j];
    const double p = r.expected[j];
    r.empirical[j] = static_cast<double>(c) / static_cast<double>(n);
    r.standard_error[j] = std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
    const double dev = std::abs(r.empirical[j] - p);
    r.max_abs_deviation = std::max(r.max_abs_deviation, dev);
    const double z = r.standard_error[j] > 0.0 ? dev / r.standard_error[j]
                                               : (dev > 0.0 ? INFINITY : 0.0);
    r.max_z = std::max(r.max_z, z);
  }
  if (r.max_z > 5.0) {
    throw Error(ErrorKind::pushforward_failure,
                "pushforward deviates from the target weights by more than 5 SE");
  }
  return r;
}

nlohmann::json to_json(const CertificateReport& r) {
  nlohmann::json j{{"samples", r.samples},
                   {"violations", r.violations},
                   {"min_margin", r.min_margin},
                   {"seed", r.state.seed},
                   {"counter", r.state.counter}};
  if (r.witness) j["witness"] = point_coords(*r.witness);
  return j;
}

nlohmann::json to_json(const PushforwardReport& r) {
  return nlohmann::json{{"samples", r.samples},
                        {"empirical", r.empirical},
                        {"expected", r.expected},
                        {"standard_error", r.standard_error},
                        {"max_abs_deviation", r.max_abs_deviation},
                        {"max_z", r.max_z},
                        {"seed", r.state.seed},
                        {"counter", r.state.counter}};
}

}  // namespace otstab
