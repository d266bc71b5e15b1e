// Acceptance checks. Each criterion prints one line:
//   criterion N: PASS|FAIL  detail
// Usage: otstab_acceptance [--criterion N]   (all criteria by default)

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "otstab/constructions.hpp"
#include "otstab/discrete_ot.hpp"
#include "otstab/error.hpp"
#include "otstab/sdot.hpp"
#include "otstab/stability.hpp"
#include "otstab/transport_maps.hpp"

using namespace otstab;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome exact_l2_identity() {
  const int N = 12;
  const CellInstance inst = choose_sequences(N);
  const auto rho = inst.density();
  const auto base = cell_map(inst);
  bool ok = true;
  double worst = 0.0;
  int worst_i = 0;
  for (int i = 1; i <= 10; ++i) {
    const double cf = l2_map_distance_squared(base, perturbed_map(inst, i), rho, Method::closed_form).value;
    const double ref = oracle::cell_l2_squared(N, i);
    const auto mc = l2_map_distance_squared(base, perturbed_map(inst, i), rho, Method::monte_carlo,
                                            1'000'000, {kSeed, derive_counter(1, i)});
    const double z = std::abs(mc.value - cf) / mc.standard_error;
    if (z > worst) {
      worst = z;
      worst_i = i;
    }
    ok = ok && z <= 3.0 && std::abs(cf / ref - 1.0) <= 1e-12;
  }
  // expected number of draws that land in the moved cell
  const double hits = 2.0 * inst.sigma[worst_i - 1] * 1e6;
  return {ok, "max |MC - closed form| / SE = " + fmt("%.3f", worst) + " at i = " + std::to_string(worst_i) +
                  " (about " + fmt("%.0f", hits) + " draws in that cell), 3 SE required over i = 1..10"};
}

Outcome exact_wp_identity() {
  const CellInstance inst = choose_sequences(12);
  double worst_literal = 0.0, worst_corrected = 0.0;
  bool coupling = true;
  for (int i = 1; i <= 10; ++i) {
    const double r = inst.radius[i - 1], s = inst.sigma[i - 1];
    for (double p : {1.0, 2.0, 3.0}) {
      const auto sol = solve_exact(cell_atoms(inst).measure, perturbed_cell_atoms(inst, i).measure, p);
      const double literal = r * std::pow(s, 1.0 / p);
      const auto t = oracle::cell_terms(12, i);
      worst_literal = std::max(worst_literal, std::abs(sol.wasserstein / literal - 1.0));
      worst_corrected =
          std::max(worst_corrected, std::abs(sol.wasserstein / oracle::pair_shift_wp(t.r, t.sigma, p) - 1.0));
      coupling = coupling && coupling_structure_check(inst, i, p);
    }
  }
  const bool ok = worst_literal <= 1e-9 && coupling;
  return {ok, "max rel err vs r*sigma^(1/p) = " + fmt("%.3e", worst_literal) +
                  "; vs r*(2 sigma)^(1/p) = " + fmt("%.3e", worst_corrected) +
                  "; coupling structure " + (coupling ? "ok" : "broken")};
}

Outcome rotating_decay() {
  const BlowupInstance inst = build_blowup(2, 2.0, DensityKind::log_blowup);
  const auto m0 = rotating_map(inst, 0.0);
  bool ok = true;
  std::ostringstream os;
  const double thetas[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  for (int k = 0; k < 5; ++k) {
    const double t = thetas[k];
    const std::size_t n = t <= 1e-5 ? 10'000'000 : 1'000'000;
    const auto est = l2_map_distance_squared(m0, rotating_map(inst, t), inst.density, Method::monte_carlo, n,
                                             {kSeed, derive_counter(3, k)});
    const double bound = oracle::rotating_lower_bound(inst.density.c0(), inst.R, t);
    const bool lib_matches = std::abs(rotating_l2_squared_lower_bound(inst, t) / bound - 1.0) <= 1e-12;
    const bool point = est.value >= bound - 3.0 * est.standard_error;
    ok = ok && point && lib_matches;
    os << (k ? "; " : "") << fmt("%.0e", t) << ": " << fmt("%.4f", est.value) << " >= " << fmt("%.4f", bound);
  }
  return {ok, os.str()};
}

Outcome cell_slope() {
  SweepConfig c;
  c.family = Family::cell;
  c.N = 20;
  c.p = 2.0;
  for (int i = 6; i <= 20; ++i) c.grid.push_back(i);
  const auto fit = fit_holder(sweep(c));
  std::vector<double> x, y;
  for (int i = 6; i <= 20; ++i) {
    const auto t = oracle::cell_terms(20, i);
    x.push_back(std::log(oracle::pair_shift_wp(t.r, t.sigma, 2.0)));
    y.push_back(0.5 * std::log(oracle::cell_l2_squared(20, i)));
  }
  const double ref = oracle::ols_slope(x, y);
  const bool ok = fit.slope >= 0.30 && fit.slope <= 0.38 && std::abs(fit.slope - ref) < 1e-9;
  return {ok, "slope over i = 6..20 is " + fmt("%.4f", fit.slope) + " (independent " + fmt("%.4f", ref) +
                  "), target [0.30, 0.38]"};
}

Outcome rotating_slope() {
  SweepConfig c;
  c.family = Family::rotating;
  c.grid = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  c.alphas = {0.5};
  c.state = {kSeed, 5};
  const auto fit = fit_holder(sweep(c));
  // lower-bound closed form over sliding windows of 7 decades
  const BlowupInstance inst = build_blowup(2, 2.0, DensityKind::log_blowup);
  std::vector<double> slopes;
  for (int start = 2; start <= 60; start += 2) {
    std::vector<double> x, y;
    for (int k = 0; k < 7; ++k) {
      const double t = std::pow(10.0, -(start + k));
      x.push_back(std::log(4.0 * std::sin(0.5 * t)));
      y.push_back(0.5 * std::log(oracle::rotating_lower_bound(inst.density.c0(), 2.0, t)));
    }
    slopes.push_back(oracle::ols_slope(x, y));
  }
  bool monotone = true;
  for (std::size_t k = 1; k < slopes.size(); ++k) monotone = monotone && slopes[k] < slopes[k - 1];
  const bool ok = fit.slope <= 0.2 && monotone;
  return {ok, "measured slope over [1e-8, 1e-2] = " + fmt("%.4f", fit.slope) + "; bound-only slope " +
                  fmt("%.4f", slopes.front()) + " -> " + fmt("%.4f", slopes.back()) +
                  (monotone ? " strictly decreasing" : " not monotone")};
}

Outcome witnesses() {
  WitnessOptions o;
  const auto cw = find_witness(1e3, 0.4, 2.0, Family::cell, o);
  const int i = static_cast<int>(cw.parameter);
  const auto t = oracle::cell_terms(std::max(20, i), i);
  const double direct = std::sqrt(oracle::cell_l2_squared(std::max(20, i), i)) /
                        std::pow(oracle::pair_shift_wp(t.r, t.sigma, 2.0), 0.4);
  WitnessOptions r;
  r.blowup = build_blowup(2, 2.0, DensityKind::log_blowup);
  r.state = {kSeed, 6};
  const auto rw = find_witness(1.0, 0.5, 1.0, Family::rotating, r);
  const double wp = wasserstein_rotating(2.0, rw.parameter);
  const bool rot_ok = rw.measured && rw.measured->value > std::sqrt(wp);
  const bool ok = direct > 1e3 && cw.verified && rot_ok;
  return {ok, "cell i = " + std::to_string(i) + " ratio " + fmt("%.1f", direct) + " > 1e3; rotating theta* = " +
                  fmt("%.4g", rw.parameter) + " with |dT| = " + fmt("%.4f", rw.measured ? rw.measured->value : 0.0) +
                  " > W_1^(1/2) = " + fmt("%.4f", std::sqrt(wp))};
}

Outcome sdot_certification() {
  std::vector<std::pair<std::string, AgreementReport>> reports;
  const BlowupInstance blow = build_blowup(2, 2.0, DensityKind::log_blowup);
  std::uint64_t k = 0;
  for (double t : {0.1, 0.3}) {
    const auto oracle = rotating_map(blow, t);
    const auto sol = solve_sdot(blow.density, oracle.target, 20000, {kSeed, derive_counter(7, k)});
    reports.emplace_back("rotating " + fmt("%.1f", t),
                         compare_to_oracle(sol.map, oracle, blow.density, 100000, {kSeed, derive_counter(8, k)}));
    ++k;
  }
  const CellInstance inst = choose_sequences(6);
  const auto rho = inst.density();
  for (int i : {0, 1, 3}) {
    const auto oracle = i == 0 ? cell_map(inst) : perturbed_map(inst, i);
    const auto sol = solve_sdot(rho, oracle.target, 20000, {kSeed, derive_counter(7, k)});
    reports.emplace_back(i == 0 ? "cell" : "perturbed " + std::to_string(i),
                         compare_to_oracle(sol.map, oracle, rho, 100000, {kSeed, derive_counter(8, k)}));
    ++k;
  }
  bool ok = true;
  std::ostringstream os;
  for (const auto& [name, r] : reports) {
    ok = ok && r.rate >= 0.995 && r.interior_disagreements == 0;
    os << (os.tellp() > 0 ? "; " : "") << name << " " << fmt("%.5f", r.rate) << " (" << r.interior_disagreements
       << " interior)";
  }
  return {ok, os.str()};
}

Outcome degenerate_square() {
  const std::vector<Point> mu{Point{0, 0}, Point{1, 1}}, nu{Point{1, 0}, Point{0, 1}};
  double lo = INFINITY, hi = -INFINITY;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    const double plan[2][2] = {{t, 1 - t}, {1 - t, t}};
    double cost = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) cost += plan[i][j] * squared_distance(mu[i], nu[j]);
    lo = std::min(lo, cost);
    hi = std::max(hi, cost);
  }
  const auto s = solve_exact(DiscreteMeasure::unnormalized(mu, {1.0, 1.0}),
                             DiscreteMeasure::unnormalized(nu, {1.0, 1.0}), 2.0);
  const double err = std::abs(s.wasserstein - std::sqrt(2.0));
  const bool ok = std::abs(lo - 2.0) < 1e-15 && std::abs(hi - 2.0) < 1e-15 && err <= 1e-12;
  return {ok, "coupling cost in [" + fmt("%.15f", lo) + ", " + fmt("%.15f", hi) + "]; |W_2 - sqrt 2| = " +
                  fmt("%.1e", err)};
}

Outcome control_separation() {
  std::vector<double> grid;
  for (int k = 0; k <= 6; ++k) grid.push_back(std::pow(10.0, -1.0 - 0.5 * k));
  SweepConfig c;
  c.grid = grid;
  c.alphas = {0.5};
  c.family = Family::control;
  c.state = {kSeed, 9};
  const double control = fit_holder(sweep(c)).slope;
  c.family = Family::rotating;
  c.state = {kSeed, 10};
  const double rotating = fit_holder(sweep(c)).slope;
  const bool ok = control >= 0.45 && control - rotating >= 0.25;
  return {ok, "control slope " + fmt("%.4f", control) + ", rotating slope " + fmt("%.4f", rotating) +
                  " on [1e-4, 1e-1]; gap " + fmt("%.4f", control - rotating)};
}

bool same_digits(double a, double b, int digits) {
  return std::abs(a - b) <= 0.5 * std::pow(10.0, 1 - digits) * std::abs(b);
}

Outcome constraint_validation() {
  bool all = true;
  for (int N = 2; N <= 40; ++N) all = all && violations(choose_sequences(N)).empty();
  const CellInstance inst = choose_sequences(40);
  const double k1 = oracle::width_constant_brute();
  const double c0 = oracle::cell_scale(k1);
  const bool constants = same_digits(inst.k1, k1, 6) && same_digits(inst.k2, 100.0 * k1, 6) &&
                         same_digits(inst.c0, c0, 6) && same_digits(inst.k1, 112.5, 6) &&
                         same_digits(inst.k2, 11250.0, 6) && std::abs(inst.c0 - 0.0874) < 5e-5;
  return {all && constants, std::string("N = 2..40 ") + (all ? "all constraints hold" : "violations found") +
                                "; k1 = " + fmt("%.7g", inst.k1) + ", k2 = " + fmt("%.7g", inst.k2) +
                                ", c0 = " + fmt("%.7g", inst.c0) + " (oracle " + fmt("%.7g", c0) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{
      exact_l2_identity, exact_wp_identity, rotating_decay,   cell_slope,         rotating_slope,
      witnesses,         sdot_certification, degenerate_square, control_separation, constraint_validation};
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--criterion" && a + 1 < argc) {
      selected.push_back(std::atoi(argv[++a]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (selected.empty()) {
    for (int k = 1; k <= 10; ++k) selected.push_back(k);
  }
  bool all = true;
  for (int k : selected) {
    if (k < 1 || k > 10) {
      std::fprintf(stderr, "criterion must lie in 1..10\n");
      return 2;
    }
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const Error& e) {
      o = {false, std::string("error [") + std::string(to_string(e.kind())) + "]: " + e.what()};
    }
    std::printf("criterion %d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
