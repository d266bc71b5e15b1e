#include "otstab/sdot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "otstab/discrete_ot.hpp"
#include "otstab/error.hpp"
#include "otstab/parallel.hpp"

namespace otstab {
namespace {

constexpr std::size_t kAtlasCap = 1000;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Weighted {
  std::vector<Point> points;
  std::vector<double> weights;
};

Weighted stratified_cells(const SourceDensity& rho, std::size_t n, SamplerState state) {
  const auto& boxes = rho.boxes();
  const std::size_t per_box = std::max<std::size_t>(1, (n + boxes.size() - 1) / boxes.size());
  Weighted w;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    Rng rng(state.seed, derive_counter(state.counter, b));
    const Box& box = boxes[b];
    const double weight = rho.box_masses()[b] / static_cast<double>(per_box);
    Point x = Point::zero(rho.dim());
    for (std::size_t k = 0; k < per_box; ++k) {
      do {
        for (int c = 0; c < rho.dim(); ++c) {
          x[c] = box.lower(c) + rng.uniform() * (box.upper(c) - box.lower(c));
        }
      } while (!in_box(x, box));
      w.points.push_back(x);
      w.weights.push_back(weight);
    }
  }
  return w;
}

Weighted training_sample(const SourceDensity& rho, std::size_t n, SamplerState state,
                         const SdotOptions& opt) {
  Weighted w;
  if (opt.stratify && rho.kind() == DensityKind::uniform_cell_union) {
    w = stratified_cells(rho, n, state);
  } else {
    w.points = rho.sample(state, n);
    w.weights.assign(n, 1.0 / static_cast<double>(n));
  }
  if (opt.symmetrize) {
    const auto masks = rho.reflection_masks();
    Weighted s;
    s.points.reserve(w.points.size() * masks.size());
    for (std::size_t k = 0; k < w.points.size(); ++k) {
      for (std::uint32_t m : masks) {
        s.points.push_back(reflect(w.points[k], m));
        s.weights.push_back(w.weights[k] / static_cast<double>(masks.size()));
      }
    }
    w = std::move(s);
  }
  // merge coincident points
  std::vector<std::size_t> order(w.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ca = w.points[a].coords();
    const auto cb = w.points[b].coords();
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  });
  Weighted merged;
  for (std::size_t idx : order) {
    if (!merged.points.empty() && merged.points.back() == w.points[idx]) {
      merged.weights.back() += w.weights[idx];
    } else {
      merged.points.push_back(w.points[idx]);
      merged.weights.push_back(w.weights[idx]);
    }
  }
  return merged;
}

// All-pairs shortest paths in place; false on a negative cycle.
bool floyd_warshall(std::vector<std::vector<double>>& D, double tol) {
  const std::size_t m = D.size();
  for (std::size_t j = 0; j < m; ++j) D[j][j] = std::min(D[j][j], 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < m; ++j) {
      const double djr = D[j][r];
      if (djr == kInf) continue;
      for (std::size_t k = 0; k < m; ++k) {
        const double via = djr + D[r][k];
        if (via < D[j][k]) D[j][k] = via;
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (D[j][j] < -tol) return false;
  }
  return true;
}

}  // namespace

int laguerre_assign(const Point& x, const std::vector<Point>& atoms, const std::vector<double>& psi) {
  int best = 0;
  double best_value = kInf;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double v = squared_distance(x, atoms[j]) - psi[j];
    if (v < best_value) {
      best_value = v;
      best = static_cast<int>(j);
    }
  }
  return best;
}

SdotSolution solve_sdot(const SourceDensity& rho, const TargetFamily& target, std::size_t n,
                        SamplerState state, const SdotOptions& options) {
  if (n < 10'000) throw Error(ErrorKind::domain, "semi-discrete solve needs n >= 1e4 samples");
  const std::size_t m = target.measure.size();
  if (m > 1000) throw Error(ErrorKind::domain, "semi-discrete solve supports at most 1e3 atoms");
  if (target.measure.dim() != rho.dim()) {
    throw Error(ErrorKind::invalid_dimension, "target and density dimensions differ");
  }

  const Weighted train = training_sample(rho, n, state, options);
  const auto& atoms = target.measure.atoms();
  const auto cost = cost_matrix(train.points, atoms, 2.0);
  const ExactSolution lp = solve_transport(train.weights, target.measure.weights(), cost, 2.0);

  std::vector<double> psi = lp.v;
  bool centered = false;
  if (options.center && m > 1) {
    std::vector<std::vector<double>> D(m, std::vector<double>(m, kInf));
    double scale = 0.0;
    for (double c : cost) scale = std::max(scale, c);
    for (const auto& e : lp.coupling) {
      // flows at the rounding level carry no assignment
      if (e.mass <= 1e-9 * train.weights[e.source] || e.mass <= 1e-12) continue;
      const double* row = &cost[e.source * m];
      for (std::size_t k = 0; k < m; ++k) {
        if (k != e.target) D[e.target][k] = std::min(D[e.target][k], row[k] - row[e.target]);
      }
    }
    // every root r gives two extreme feasible weight vectors, dist(r, .) and
    // -dist(., r); their average centers each pairwise difference
    const double tol = 1e-13 * std::max(1.0, scale);
    bool finite = floyd_warshall(D, tol);
    for (std::size_t j = 0; finite && j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) finite = finite && D[j][k] != kInf;
    }
    if (finite) {
      for (std::size_t k = 0; k < m; ++k) {
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r) acc += D[r][k] - D[r][0] - D[k][r] + D[0][r];
        psi[k] = acc / (2.0 * static_cast<double>(m));
      }
      centered = true;
    }
  }
  const double base = psi[0];
  for (double& v : psi) v -= base;

  SdotSolution sol;
  sol.weights = LaguerreWeights{psi, target.measure};
  sol.training_points = train.points.size();
  sol.transport_cost = lp.cost;
  sol.centered = centered;
  sol.state = state;
  sol.map.target = target;
  sol.map.provenance = Provenance::solver;
  sol.map.oracle = OracleKind::none;
  sol.map.assign = [atoms, psi](const Point& x) { return laguerre_assign(x, atoms, psi); };
  return sol;
}

AgreementReport compare_to_oracle(const TransportMap& candidate, const TransportMap& oracle,
                                  const SourceDensity& rho, std::size_t n, SamplerState state,
                                  double threshold) {
  if (candidate.target.measure.size() != oracle.target.measure.size()) {
    throw Error(ErrorKind::domain, "maps must target families of equal size");
  }
  struct Part {
    std::size_t disagreements = 0;
    std::size_t interior = 0;
    double max_rel = 0.0;
    std::vector<Disagreement> atlas;
  };
  std::array<Part, kShards> parts{};
  stream_samples(rho, state, n, [&](std::size_t s, const Point& x) {
    const int a = candidate.assign(x);
    const int b = oracle.assign(x);
    if (a == b) return;
    Part& p = parts[s];
    ++p.disagreements;
    Disagreement d{x, a, b, kInf, 1.0};
    if (oracle.boundary_distance) d.boundary_distance = oracle.boundary_distance(x);
    if (oracle.local_scale) d.local_scale = oracle.local_scale(x);
    const double rel = d.boundary_distance / d.local_scale;
    p.max_rel = std::max(p.max_rel, rel);
    if (!(rel <= threshold)) ++p.interior;
    if (p.atlas.size() < kAtlasCap) p.atlas.push_back(d);
  });
  AgreementReport r;
  r.samples = n;
  r.threshold = threshold;
  r.state = state;
  for (auto& p : parts) {
    r.disagreements += p.disagreements;
    r.interior_disagreements += p.interior;
    r.max_relative_boundary_distance = std::max(r.max_relative_boundary_distance, p.max_rel);
    for (auto& d : p.atlas) {
      if (r.atlas.size() < kAtlasCap) r.atlas.push_back(d);
    }
  }
  r.rate = 1.0 - static_cast<double>(r.disagreements) / static_cast<double>(n);
  r.rate_standard_error = std::sqrt(std::max(0.0, r.rate * (1.0 - r.rate)) / static_cast<double>(n));
  return r;
}

nlohmann::json to_json(const LaguerreWeights& w) {
  return nlohmann::json{{"psi", w.psi}, {"atoms", to_json(w.target)}};
}

nlohmann::json to_json(const AgreementReport& r) {
  return nlohmann::json{
      {"samples", r.samples},
      {"disagreements", r.disagreements},
      {"rate", r.rate},
      {"rate_se", r.rate_standard_error},
      {"interior_disagreements", r.interior_disagreements},
      {"threshold", r.threshold},
      {"max_relative_boundary_distance",
       std::isfinite(r.max_relative_boundary_distance) ? nlohmann::json(r.max_relative_boundary_distance)
                                                       : nlohmann::json()},
      {"seed", r.state.seed},
      {"counter", r.state.counter}};
}

void write_disagreement_csv(std::ostream& os, const AgreementReport& r) {
  const int d = r.atlas.empty() ? 0 : r.atlas.front().x.dim();
  for (int k = 0; k < d; ++k) os << 'x' << (k + 1) << ',';
  os << "candidate,oracle,boundary_distance,local_scale\n";
  const auto old = os.precision(17);
  for (const auto& e : r.atlas) {
    for (int k = 0; k < d; ++k) os << e.x[k] << ',';
    os << e.candidate << ',' << e.oracle << ',' << e.boundary_distance << ',' << e.local_scale << '\n';
  }
  os.precision(old);
}

}  // namespace otstab
