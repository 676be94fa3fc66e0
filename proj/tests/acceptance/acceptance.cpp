// Copyright 2026 The qdslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number, e.g. `qdslab_acceptance 1 6 7`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qdslab/cli.hpp"
#include "qdslab/field.hpp"
#include "qdslab/lindblad.hpp"
#include "qdslab/semigroup.hpp"
#include "qdslab/verifier.hpp"

using namespace qdslab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

VectorField analytic_1d(std::function<double(double)> w, std::function<double(double)> dw,
                        std::function<double(double)> d2w, std::string name) {
  return analytic_field(
      1, [w](int, std::span<const double> x) { return w(x[0]); },
      [dw](int, int, std::span<const double> x) { return dw(x[0]); },
      [d2w](int, int, int, std::span<const double> x) { return d2w(x[0]); }, std::move(name));
}

VectorField zero_field() {
  return analytic_1d([](double) { return 0.0; }, [](double) { return 0.0; },
                     [](double) { return 0.0; }, "0");
}

// W = x, i.e. V = 2x^2.
VectorField linear_field() { return grad_potential(PolynomialPotential(1, {{{2}, 2.0}})); }

const GridSpec kGrid1d(1, 6.0, 64);
const GridSpec kGrid2d(2, 3.0, 24);

CMatrix diag_of(const RVector& f) {
  CMatrix x = CMatrix::Zero(f.size(), f.size());
  x.diagonal() = f.cast<Complex>();
  return x;
}

double oracle_dt(const LindbladSystem& sys, double nominal) {
  return std::min(nominal, 0.9 / generator_norm_estimate(sys));
}

// 1. G + G^* + Phi = 0 on the default grids.
Outcome form_identity() {
  const std::vector<std::pair<VectorField, GridSpec>> cases{
      {zero_field(), kGrid1d},
      {linear_field(), kGrid1d},
      {grad_potential(PolynomialPotential(1, {{{4}, 1.0}})), kGrid1d},
      {grad_potential(PolynomialPotential(2, {{{4, 0}, 1.0}, {{0, 4}, 1.0}, {{1, 1}, 1.0}})),
       kGrid2d}};
  double worst = 0.0;
  for (const auto& [w, g] : cases) {
    const auto sys = assemble(w, g, 1.0);
    worst = std::max(worst, sys.form_identity_residual() / (1.0 + max_abs(sys.phi)));
  }
  return {worst <= 1e-12, fmt("max relative residual %.2e (W = 0, x, x^3, grad of x^4+y^4+xy / 4)", worst)};
}

// 2. T_t(I) = I for W = x.
Outcome conservativity() {
  const auto sys = assemble(linear_field(), kGrid1d, 1.0);
  const Index m = sys.size();
  const auto run = picard_run(sys, CMatrix::Identity(m, m), TimeGrid(0.5, 128));
  double defect = 0.0;
  for (const auto& node : run.nodes) defect = std::max(defect, max_abs(node - CMatrix::Identity(m, m)));
  return {run.converged && defect <= 1e-8,
          fmt("converged=%d after %d sweeps, max_t |T_t(I) - I|_max = %.2e", int(run.converged),
              run.iterations, defect)};
}

// 3. Picard limit vs RK4 on the master equation.
Outcome oracle_equivalence() {
  const auto sys = assemble(linear_field(), kGrid1d, 1.0);
  const CMatrix x = diag_of(sample(kGrid1d, gaussian_function(1, 0.5).value));
  const auto run = picard_run(sys, x, TimeGrid(0.2, 128));
  const CMatrix ref = master_oracle(sys, x, 0.2, oracle_dt(sys, 1e-3));
  const double gap = max_abs(run.final() - ref);
  return {run.converged && gap <= 1e-6, fmt("|Picard - RK4|_max = %.2e at t = 0.2", gap)};
}

// 4. Successive Picard differences are positive semi-definite.
Outcome monotone_iteration() {
  const auto sys = assemble(linear_field(), kGrid1d, 1.0);
  const auto u = bulk_probe_vectors(kGrid1d)[2];
  const CMatrix x = u * u.adjoint();
  PicardOptions o;
  o.monotonicity = MonotonicityTracking::Always;
  const auto run = picard_run(sys, x, TimeGrid(0.5, 128), o);
  double worst = 0.0;
  for (double v : run.monotonicity) worst = std::min(worst, v);
  const double bound = -1e-10 * spectral_norm(x);
  return {run.converged && !run.monotonicity.empty() && worst >= bound,
          fmt("min lambda_min(T^(n+1) - T^(n)) = %.2e over %zu sweeps (bound %.0e)", worst,
              run.monotonicity.size(), bound)};
}

// 5. Contraction and positivity over seeded random observables.
Outcome contraction_positivity() {
  const GridSpec g(1, 6.0, 32);
  const auto sys = assemble(linear_field(), g, 1.0);
  std::mt19937_64 rng(20261019);
  std::normal_distribution<double> normal;
  double worst_ratio = 0.0, worst_psd = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix a(g.size(), g.size());
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = Complex(normal(rng), normal(rng));
    const bool psd = trial % 2 == 0;
    const CMatrix x = psd ? CMatrix(a * a.adjoint()) : hermitian_part(a);
    const double xn = spectral_norm(x);
    const auto run = picard_run(sys, x, TimeGrid(0.5, 64));
    if (!run.converged) return {false, fmt("trial %d did not converge", trial)};
    for (const auto& node : run.nodes) {
      worst_ratio = std::max(worst_ratio, spectral_norm(node) / xn);
      if (psd) worst_psd = std::min(worst_psd, min_eigenvalue(node) / xn);
    }
  }
  return {worst_ratio <= 1.0 + 1e-8 && worst_psd >= -1e-8,
          fmt("max |T_t(X)|/|X| = %.12f, min lambda_min/|X| (PSD) = %.2e, 20 trials", worst_ratio,
              worst_psd)};
}

// 6. Choi matrices are positive semi-definite.
Outcome complete_positivity() {
  const GridSpec g(1, 6.0, 8);
  double worst = 0.0;
  bool ok = true;
  for (const auto& w : {zero_field(), linear_field()}) {
    const auto sys = assemble(w, g, 1.0);
    for (double t : {0.05, 0.1}) {
      const auto rep = choi_map(sys, t, oracle_dt(sys, t / 100.0));
      ok = ok && rep.completely_positive;
      worst = std::min(worst, rep.lambda_min / rep.lambda_max);
    }
  }
  return {ok, fmt("min lambda_min/lambda_max = %.2e (W = 0, x; t = 0.05, 0.1)", worst)};
}

// 7. T_0.3 = T_0.1 T_0.2 at equal time steps.
Outcome semigroup_law() {
  const GridSpec g(1, 6.0, 32);
  const auto sys = assemble(linear_field(), g, 1.0);
  const CMatrix x = diag_of(sample(g, gaussian_function(1, 0.5).value));
  const auto t3 = picard_run(sys, x, TimeGrid(0.3, 96));
  const auto t2 = picard_run(sys, x, TimeGrid(0.2, 64));
  const auto t1 = picard_run(sys, t2.final(), TimeGrid(0.1, 32));
  const double gap = max_abs(t3.final() - t1.final());
  return {t3.converged && t2.converged && t1.converged && gap <= 1e-5,
          fmt("|T_0.3(X) - T_0.1(T_0.2(X))|_max = %.2e", gap)};
}

double heat_closed_form(double x, double s0, double t) {
  return std::sqrt(s0 / (s0 + t)) * std::exp(-x * x / (2.0 * (s0 + t)));
}

double ou_closed_form(double x, double s0, double t) {
  const double m = x * std::exp(-2.0 * t);
  const double v = (1.0 - std::exp(-4.0 * t)) / 4.0;
  return std::sqrt(s0 / (s0 + v)) * std::exp(-m * m / (2.0 * (s0 + v)));
}

// 8. Quantum and classical evolutions of a Gaussian approach the closed forms.
Outcome classical_limit() {
  const double s0 = 0.5, t = 0.2;
  const ScalarFunction f0 = gaussian_function(1, s0).value;
  struct Errors {
    double quantum, classical;
  };
  auto errors = [&](const VectorField& w, int n, double (*exact)(double, double, double)) {
    const GridSpec g(1, 6.0, n);
    RVector ft(g.size());
    for (Index i = 0; i < g.size(); ++i) ft(i) = exact(g.coordinate(int(i)), s0, t);
    const auto sys = assemble(w, g, 1.0);
    const auto run = picard_run(sys, diag_of(sample(g, f0)), TimeGrid(t, 40));
    Errors e{0.0, 0.0};
    for (const CVector& u : bulk_probe_vectors(g)) {
      const Complex q = u.dot(run.final() * u);
      const double c = (u.array().abs2() * ft.array()).sum();
      e.quantum = std::max(e.quantum, std::abs(q - c));
    }
    const RVector f = classical_solve(w, g, f0, t, t / 40);
    for (Index i : g.bulk_indices()) e.classical = std::max(e.classical, std::abs(f(i) - ft(i)));
    return e;
  };
  bool ok = true;
  std::string detail;
  for (const auto& [name, w, exact] :
       {std::tuple{"heat", zero_field(), &heat_closed_form},
        std::tuple{"OU", linear_field(), &ou_closed_form}}) {
    const Errors coarse = errors(w, 64, exact), fine = errors(w, 128, exact);
    const double pq = std::log2(coarse.quantum / fine.quantum);
    const double pc = std::log2(coarse.classical / fine.classical);
    ok = ok && pq >= 1.8 && pc >= 1.8 && fine.quantum <= 5e-3 && fine.classical <= 5e-3;
    detail += fmt("%s: order %.2f/%.2f, N=128 error %.1e/%.1e (quantum/classical); ", name, pq,
                  pc, fine.quantum, fine.classical);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// 9. Chebotarev-Fagnola conditions (c)-(e).
Outcome chebotarev_fagnola() {
  CFOptions o;
  o.resolutions = {128};
  o.auxiliary_bounds = false;
  const auto wx = cf_check(assemble(linear_field(), kGrid1d, 1.0), o);
  const auto flat = cf_check(assemble(zero_field(), kGrid1d, 1.0), o);
  bool ok = true;
  for (const auto* r : {&wx, &flat}) {
    ok = ok && r->condition("c").status == CFStatus::Pass &&
         r->condition("d").status == CFStatus::Pass && r->condition("d").value == r->shift;
  }
  ok = ok && std::isfinite(wx.k) && wx.drift <= 0.10 && wx.condition("e").status == CFStatus::Pass;
  double flat_ratio = 0.0;
  for (const auto& r : flat.resolutions) flat_ratio = std::max(flat_ratio, r.k / r.c_norm);
  ok = ok && flat_ratio <= 1e-6;
  return {ok, fmt("W = x: k = %.4f (N=64), %.4f (N=128), drift %.1f%%; W = 0: k/|C| = %.1e; "
                  "(c) residual %.1e; (d) lambda_min(C - Phi) = %g",
                  wx.resolutions[0].k, wx.resolutions[1].k, 100.0 * wx.drift, flat_ratio,
                  wx.condition("c").value, wx.condition("d").value)};
}

// 10. Assumption checkers on good and bad fields.
Outcome assumption_checkers() {
  const auto eps = default_eps_list();
  const auto c1 = default_c1_list();
  bool ok = true;
  std::string detail;
  const std::vector<PolynomialPotential> good{
      PolynomialPotential(1, {{{2}, 2.0}}), PolynomialPotential(1, {{{4}, 1.0}}),
      PolynomialPotential(2, {{{4, 0}, 1.0}, {{0, 4}, 1.0}, {{1, 1}, 1.0}})};
  for (const auto& v : good) {
    const auto box = SampleBox::from_grid(v.dim() == 1 ? kGrid1d : kGrid2d);
    const bool sat = check_assumptions(grad_potential(v), box, eps, c1).all_satisfied();
    ok = ok && sat;
    detail += v.describe() + (sat ? " ok; " : " FAILED; ");
  }
  const auto ex = analytic_1d([](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
                              [](double x) { return std::exp(x); }, "exp(x)");
  const auto c2 = check_c2(ex, SampleBox::from_grid(kGrid1d), eps);
  ok = ok && c2.growth_violation;
  detail += fmt("exp(x): C-2 growth flag %d; ", int(c2.growth_violation));

  const auto cubic = analytic_1d([](double x) { return -x * x * x; }, [](double x) { return -3.0 * x * x; },
                                 [](double x) { return -6.0 * x; }, "-x^3");
  const auto a = check_c4(cubic, SampleBox{1, 5.0, 101, 8});
  const auto b = check_c4(cubic, SampleBox{1, 6.0, 121, 8});
  ok = ok && a.constant && b.constant && *b.constant > *a.constant && a.growth_violation &&
       b.growth_violation;
  detail += fmt("-x^3: c4 = %g (R=5), %g (R=6), growth flag %d", a.constant.value_or(NAN),
                b.constant.value_or(NAN), int(a.growth_violation && b.growth_violation));
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 11. Two runs of the same config write identical bytes.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "qdslab_acceptance_determinism";
  fs::remove_all(root);
  const auto doc = io::Json::parse(R"({
    "schema_version": 1,
    "field": {"terms": [{"exponents": [2], "coeff": 2.0}]},
    "grid": {"d": 1, "R": 6.0, "N": 32},
    "time": {"T": 0.2, "steps": 32},
    "analyses": ["check-field", "assemble", "evolve", "verify", "classical"],
    "output_dir": "out",
    "seed": 11,
    "dump_nodes": true
  })");
  std::ostringstream log;
  std::vector<fs::path> outs;
  for (const char* name : {"a", "b"}) {
    auto cfg = cli::parse_config(doc, root / name);
    const auto out = cli::run(cfg, log);
    if (out.status != cli::kOk) return {false, fmt("run %s exited with %d", name, out.status)};
    outs.push_back(cfg.output_dir);
  }
  std::set<fs::path> files;
  for (const auto& dir : outs) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file()) files.insert(fs::relative(e.path(), dir));
    }
  }
  int differing = 0;
  for (const auto& f : files) {
    if (!fs::exists(outs[0] / f) || !fs::exists(outs[1] / f) ||
        slurp(outs[0] / f) != slurp(outs[1] / f)) {
      ++differing;
    }
  }
  fs::remove_all(root);
  return {differing == 0 && !files.empty(),
          fmt("%zu artifacts compared, %d differ", files.size(), differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"form identity", form_identity},
      {"conservativity", conservativity},
      {"oracle equivalence", oracle_equivalence},
      {"monotone iteration", monotone_iteration},
      {"contraction and positivity", contraction_positivity},
      {"complete positivity", complete_positivity},
      {"semigroup law", semigroup_law},
      {"classical limit", classical_limit},
      {"Chebotarev-Fagnola conditions", chebotarev_fagnola},
      {"assumption checkers", assumption_checkers},
      {"determinism", determinism}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !r.pass;
    std::printf("%s %2d %s: %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", id, criteria[i].first,
                r.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
