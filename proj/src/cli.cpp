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


#include "qdslab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qdslab/lindblad.hpp"
#include "qdslab/verifier.hpp"

namespace qdslab::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

const std::set<std::string> kAnalyses{"check-field", "assemble", "evolve",
                                      "verify",      "classical", "choi"};

[[noreturn]] void bad(const std::string& msg) {
  throw Error(ErrorKind::InvalidArgument, "config: " + msg);
}

void expect_object(const Json& obj, const std::string& where,
                   std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where + " must be an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) bad("unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
  }
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) bad("missing key '" + (where.empty() ? "" : where + ".") + key + "'");
  return obj.at(key);
}

double as_double(const Json& v, const std::string& name) {
  if (!v.is_number()) bad(name + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(name + " must be finite");
  return d;
}

long long as_int(const Json& v, const std::string& name) {
  if (!v.is_number_integer()) bad(name + " must be an integer");
  return v.get<long long>();
}

std::vector<double> as_doubles(const Json& v, const std::string& name) {
  if (!v.is_array()) bad(name + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_double(v[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

int point_cap(int dim) { return dim == 1 ? kMaxPoints1d : kMaxPoints2d; }

void check_cap(int dim, int n, const std::string& what) {
  if (n > point_cap(dim)) {
    throw Error(ErrorKind::Dimension, "config: " + what + " N = " + std::to_string(n) +
                                          " exceeds the d=" + std::to_string(dim) + " cap of " +
                                          std::to_string(point_cap(dim)));
  }
}

}  // namespace

VectorField RunConfig::make_field() const {
  if (!tabulated.empty()) return read_tabulated_field(tabulated.string());
  return grad_potential(PolynomialPotential(grid.dim(), terms));
}

RunConfig parse_config(const Json& doc, const fs::path& base_dir) {
  expect_object(doc, "",
                {"schema_version", "field", "grid", "time", "shift", "analyses", "output_dir",
                 "seed", "dump_nodes", "sampling", "verify", "classical", "choi"});
  RunConfig cfg;

  const long long version = as_int(require(doc, "schema_version", ""), "schema_version");
  if (version != kSchemaVersion) {
    bad("schema_version " + std::to_string(version) + " is not supported (expected " +
        std::to_string(kSchemaVersion) + ")");
  }

  {
    const Json& g = require(doc, "grid", "");
    expect_object(g, "grid", {"d", "R", "N", "bulk_width"});
    const int d = int(as_int(require(g, "d", "grid"), "grid.d"));
    const double r = as_double(require(g, "R", "grid"), "grid.R");
    const int n = int(as_int(require(g, "N", "grid"), "grid.N"));
    const int w = g.contains("bulk_width") ? int(as_int(g["bulk_width"], "grid.bulk_width")) : 3;
    cfg.grid = GridSpec(d, r, n, w);
    check_cap(d, n, "grid");
  }
  const int dim = cfg.grid.dim();

  {
    const Json& f = require(doc, "field", "");
    expect_object(f, "field", {"terms", "tabulated"});
    if (f.contains("terms") == f.contains("tabulated")) {
      bad("field needs exactly one of 'terms' or 'tabulated'");
    }
    if (f.contains("terms")) {
      const Json& terms = f["terms"];
      if (!terms.is_array() || terms.empty()) bad("field.terms must be a non-empty array");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string where = "field.terms[" + std::to_string(i) + "]";
        expect_object(terms[i], where, {"exponents", "coeff"});
        const Json& e = require(terms[i], "exponents", where);
        if (!e.is_array()) bad(where + ".exponents must be an array");
        MultiIndex mi;
        for (const auto& x : e) mi.push_back(int(as_int(x, where + ".exponents")));
        if (int(mi.size()) != dim) {
          throw Error(ErrorKind::Dimension, "config: " + where + " has " +
                                                std::to_string(mi.size()) +
                                                " exponents, grid has d = " + std::to_string(dim));
        }
        cfg.terms.emplace_back(mi, as_double(require(terms[i], "coeff", where), where + ".coeff"));
      }
      (void)PolynomialPotential(dim, cfg.terms);  // validates the leading structure
    } else {
      if (!f["tabulated"].is_string()) bad("field.tabulated must be a path string");
      fs::path p = f["tabulated"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!fs::exists(p)) bad("tabulated field file '" + p.string() + "' does not exist");
      cfg.tabulated = p;
      const VectorField w = cfg.make_field();
      if (w.dim() != dim) {
        throw Error(ErrorKind::Dimension, "config: tabulated field has d = " +
                                              std::to_string(w.dim()) + ", grid has d = " +
                                              std::to_string(dim));
      }
    }
  }

  if (doc.contains("time")) {
    const Json& t = doc["time"];
    expect_object(t, "time", {"T", "steps", "tol", "max_iter", "quadrature"});
    const double horizon = t.contains("T") ? as_double(t["T"], "time.T") : 0.5;
    const int steps = t.contains("steps") ? int(as_int(t["steps"], "time.steps")) : 64;
    cfg.time = TimeGrid(horizon, steps);
    if (t.contains("tol")) cfg.picard.tol = as_double(t["tol"], "time.tol");
    if (t.contains("max_iter")) cfg.picard.max_iter = int(as_int(t["max_iter"], "time.max_iter"));
    if (!(cfg.picard.tol > 0.0)) bad("time.tol must be positive");
    if (cfg.picard.max_iter < 1) bad("time.max_iter must be >= 1");
    if (t.contains("quadrature")) {
      const std::string q = t["quadrature"].is_string() ? t["quadrature"].get<std::string>() : "";
      if (q == "linear") {
        cfg.picard.quadrature = Quadrature::Linear;
      } else if (q == "quadratic") {
        cfg.picard.quadrature = Quadrature::Quadratic;
      } else {
        bad("time.quadrature must be \"linear\" or \"quadratic\"");
      }
    }
  }

  if (doc.contains("shift")) {
    cfg.shift = as_double(doc["shift"], "shift");
    if (cfg.shift < 0.0) bad("shift must be >= 0");
  }

  {
    const Json& a = require(doc, "analyses", "");
    if (!a.is_array()) bad("analyses must be an array of names");
    for (const auto& x : a) {
      if (!x.is_string() || !kAnalyses.count(x.get<std::string>())) {
        bad("unknown analysis " + x.dump());
      }
      cfg.analyses.insert(x.get<std::string>());
    }
    if (cfg.analyses.empty()) bad("no analysis requested");
  }

  {
    const Json& o = require(doc, "output_dir", "");
    if (!o.is_string() || o.get<std::string>().empty()) bad("output_dir must be a path string");
    fs::path p = o.get<std::string>();
    cfg.output_dir = p.is_relative() ? base_dir / p : p;
  }

  if (doc.contains("seed")) {
    const long long s = as_int(doc["seed"], "seed");
    if (s < 0) bad("seed must be non-negative");
    cfg.seed = std::uint64_t(s);
  }
  if (doc.contains("dump_nodes")) {
    if (!doc["dump_nodes"].is_boolean()) bad("dump_nodes must be true or false");
    cfg.dump_nodes = doc["dump_nodes"].get<bool>();
  }

  if (doc.contains("sampling")) {
    const Json& s = doc["sampling"];
    expect_object(s, "sampling", {"half_width", "points", "shells", "eps", "c1"});
    if (s.contains("half_width") || s.contains("points") || s.contains("shells")) {
      SampleBox box = SampleBox::from_grid(cfg.grid);
      if (s.contains("half_width")) box.half_width = as_double(s["half_width"], "sampling.half_width");
      if (s.contains("points")) box.points = int(as_int(s["points"], "sampling.points"));
      if (s.contains("shells")) box.shells = int(as_int(s["shells"], "sampling.shells"));
      if (!(box.half_width > 0.0) || box.points < 2 || box.shells < 3) {
        bad("sampling needs half_width > 0, points >= 2, shells >= 3");
      }
      cfg.sampling = box;
    }
    if (s.contains("eps")) cfg.eps_list = as_doubles(s["eps"], "sampling.eps");
    if (s.contains("c1")) cfg.c1_list = as_doubles(s["c1"], "sampling.c1");
  }

  if (doc.contains("verify")) {
    const Json& v = doc["verify"];
    expect_object(v, "verify", {"resolutions", "offsets", "eps"});
    if (v.contains("resolutions")) {
      if (!v["resolutions"].is_array()) bad("verify.resolutions must be an array");
      for (const auto& n : v["resolutions"]) {
        const int pts = int(as_int(n, "verify.resolutions"));
        (void)cfg.grid.with_points(pts);
        check_cap(dim, pts, "verify resolution");
        cfg.resolutions.push_back(pts);
      }
    }
    if (v.contains("offsets")) cfg.offsets = as_doubles(v["offsets"], "verify.offsets");
    if (v.contains("eps")) cfg.commutator_eps = as_doubles(v["eps"], "verify.eps");
    for (double b : cfg.offsets)
      if (!(b > 0.0)) bad("verify.offsets must be positive");
    for (double e : cfg.commutator_eps)
      if (!(e > 0.0)) bad("verify.eps must be positive");
  }

  if (doc.contains("classical")) {
    const Json& c = doc["classical"];
    expect_object(c, "classical", {"variance"});
    if (c.contains("variance")) cfg.classical_variance = as_double(c["variance"], "classical.variance");
    if (!(cfg.classical_variance > 0.0)) bad("classical.variance must be positive");
  }

  if (doc.contains("choi")) {
    const Json& c = doc["choi"];
    expect_object(c, "choi", {"times", "dt"});
    if (c.contains("times")) cfg.choi_times = as_doubles(c["times"], "choi.times");
    if (c.contains("dt")) cfg.choi_dt = as_double(c["dt"], "choi.dt");
    for (double t : cfg.choi_times)
      if (t < 0.0) bad("choi.times must be >= 0");
    if (cfg.choi_dt && !(*cfg.choi_dt > 0.0)) bad("choi.dt must be positive");
  }
  if (cfg.analyses.count("choi") && cfg.grid.size() > 32) {
    throw Error(ErrorKind::Dimension, "config: choi needs M <= 32, grid has M = " +
                                          std::to_string(cfg.grid.size()));
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "config: cannot open '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "config: " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

namespace {

struct Artifacts {
  fs::path root;
  Json list = Json::array();

  fs::path path(const std::string& rel) const { return root / rel; }

  void add(const std::string& rel, const std::string& kind) {
    const fs::path p = path(rel);
    list.push_back({{"path", rel},
                    {"kind", kind},
                    {"bytes", std::uintmax_t(fs::file_size(p))},
                    {"sha256", io::sha256_file(p)}});
  }
};

struct Context {
  const RunConfig& cfg;
  std::ostream& log;
  Artifacts artifacts;
  RunOutcome outcome;

  void flag(int status, const std::string& msg) {
    outcome.status = std::max(outcome.status, status);
    outcome.diagnostics.push_back(msg);
    log << "  ! " << msg << "\n";
  }
};

int status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Numerical: return kNumericalFailure;
    case ErrorKind::InvalidArgument:
    case ErrorKind::Dimension:
    case ErrorKind::Io: return kConfigError;
  }
  return kNumericalFailure;
}

// Neighbouring resolution for refinement studies: 2N when allowed, else N/2.
std::optional<int> refinement(const GridSpec& g) {
  if (2 * g.points() <= point_cap(g.dim())) return 2 * g.points();
  if (g.points() / 2 >= 8 && 2 * g.bulk_width() < g.points() / 2) return g.points() / 2;
  return std::nullopt;
}

double oracle_step(const LindbladSystem& sys, double t, double nominal) {
  return std::min({nominal, 0.9 / generator_norm_estimate(sys), t});
}

void check_field(Context& ctx, const VectorField& w) {
  ctx.log << "[check-field] " << w.description() << "\n";
  const SampleBox box = ctx.cfg.sampling.value_or(SampleBox::from_grid(ctx.cfg.grid));
  const AssumptionReport rep = check_assumptions(w, box, ctx.cfg.eps_list, ctx.cfg.c1_list);
  io::write_json(ctx.artifacts.path("assumptions.json"), io::to_json(rep));
  ctx.artifacts.add("assumptions.json", "assumption-report");
  for (const auto& e : rep.entries) {
    ctx.log << "  " << e.condition << ": " << to_string(e.status)
            << (e.growth_violation ? " (growth-violation)" : "") << "\n";
  }
}

void assemble_stage(Context& ctx, const LindbladSystem& sys) {
  ctx.log << "[assemble] " << sys.grid.describe() << ", shift " << sys.shift << "\n";
  const auto write_op = [&](const std::string& name, const CMatrix& m, OperatorTag tag) {
    io::write_matrix_market(ctx.artifacts.path(name + ".mtx"), {m, tag, sys.grid}, name);
    ctx.artifacts.add(name + ".mtx", "operator");
  };
  for (std::size_t l = 0; l < sys.jumps.size(); ++l) {
    write_op("L" + std::to_string(l + 1), sys.jumps[l], OperatorTag::General);
  }
  write_op("H", sys.hamiltonian, OperatorTag::Hermitian);
  write_op("G0", sys.g0, OperatorTag::Hermitian);
  write_op("G", sys.generator, OperatorTag::General);
  write_op("C", sys.c, OperatorTag::Hermitian);
  write_op("Phi", sys.phi, OperatorTag::Hermitian);

  const double phi_max = max_abs(sys.phi);
  const double form = sys.form_identity_residual();
  const double phi_min = min_eigenvalue(sys.phi);
  const double phi_norm = spectral_norm(sys.phi);
  const double g0_max = -min_eigenvalue(-sys.g0);
  const double g0_norm = spectral_norm(sys.g0);
  const double h_asym = max_abs(sys.hamiltonian - sys.hamiltonian.adjoint());
  CMatrix gap = sys.c - sys.phi;
  gap.diagonal().array() -= sys.shift;
  const bool shift_exact = max_abs(gap) == 0.0;

  const bool form_ok = form <= 1e-12 * (1.0 + phi_max);
  const bool phi_ok = phi_min >= -1e-10 * phi_norm;
  const bool g0_ok = g0_max <= 1e-10 * g0_norm;
  const bool h_ok = h_asym == 0.0;
  Json doc{{"grid", io::to_json(sys.grid)},
           {"field", sys.field.description()},
           {"shift", sys.shift},
           {"form_identity_residual", form},
           {"form_identity_tolerance", 1e-12 * (1.0 + phi_max)},
           {"phi_lambda_min", phi_min},
           {"g0_lambda_max", g0_max},
           {"h_antihermitian_part", h_asym},
           {"c_minus_phi_is_shift", shift_exact},
           {"passed", form_ok && phi_ok && g0_ok && h_ok && shift_exact}};
  io::write_json(ctx.artifacts.path("assembly.json"), doc);
  ctx.artifacts.add("assembly.json", "assembly-report");
  ctx.log << "  form identity residual " << form << "\n";
  if (!form_ok) ctx.flag(kInvariantViolated, "form identity residual above tolerance");
  if (!phi_ok) ctx.flag(kInvariantViolated, "Phi has a negative eigenvalue");
  if (!g0_ok) ctx.flag(kInvariantViolated, "G0 has a positive eigenvalue");
  if (!h_ok) ctx.flag(kInvariantViolated, "H is not exactly Hermitian");
  if (!shift_exact) ctx.flag(kInvariantViolated, "C - Phi differs from shift * I");
}

CMatrix gaussian_observable(const GridSpec& g, double variance) {
  const RVector f = sample(g, gaussian_function(g.dim(), variance).value);
  CMatrix x = CMatrix::Zero(g.size(), g.size());
  x.diagonal() = f.cast<Complex>();
  return x;
}

CMatrix random_hermitian(Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CMatrix a(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = Complex(normal(rng), normal(rng));
  CMatrix x = hermitian_part(a);
  return x / spectral_norm(x);
}

void log_iterations(io::CsvSeries& csv, const SemigroupRun& run, const std::string& label) {
  const double t = run.time.horizon();
  for (std::size_t n = 0; n < run.residuals.size(); ++n) {
    csv.add(int(n) + 1, t, "residual:" + label, run.residuals[n]);
  }
  for (std::size_t n = 0; n < run.monotonicity.size(); ++n) {
    csv.add(int(n) + 1, t, "monotonicity:" + label, run.monotonicity[n]);
  }
}

void evolve(Context& ctx, const LindbladSystem& sys) {
  const RunConfig& cfg = ctx.cfg;
  const TimeGrid& tg = cfg.time;
  ctx.log << "[evolve] T = " << tg.horizon() << ", steps = " << tg.steps() << "\n";
  const Index m = sys.size();
  io::CsvSeries residuals, conservativity, contraction;

  const CMatrix id = CMatrix::Identity(m, m);
  const SemigroupRun ident = picard_run(sys, id, tg, cfg.picard);
  log_iterations(residuals, ident, "identity");
  double defect = 0.0;
  for (int k = 0; k <= tg.steps(); ++k) {
    const double d = max_abs(ident.nodes[std::size_t(k)] - id);
    defect = std::max(defect, d);
    conservativity.add(ident.iterations, tg.node(k), "defect", d);
  }
  ctx.log << "  identity: " << ident.iterations << " iterations, defect " << defect << "\n";

  const double variance = cfg.classical_variance;
  const CMatrix gx = gaussian_observable(sys.grid, variance);
  const SemigroupRun gauss = picard_run(sys, gx, tg, cfg.picard);
  log_iterations(residuals, gauss, "gaussian");
  const double gx_norm = spectral_norm(gx);
  double g_ratio = 0.0, g_lambda = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= tg.steps(); ++k) {
    const CMatrix& node = gauss.nodes[std::size_t(k)];
    const double ratio = spectral_norm(node) / gx_norm;
    const double lam = min_eigenvalue(node);
    g_ratio = std::max(g_ratio, ratio);
    g_lambda = std::min(g_lambda, lam);
    contraction.add(gauss.iterations, tg.node(k), "norm_ratio:gaussian", ratio);
    contraction.add(gauss.iterations, tg.node(k), "lambda_min:gaussian", lam);
  }
  const double dt_oracle = oracle_step(sys, tg.horizon(), tg.step() / 10.0);
  const CMatrix oracle = master_oracle(sys, gx, tg.horizon(), dt_oracle);
  const double oracle_error = max_abs(gauss.final() - oracle);
  ctx.log << "  gaussian: " << gauss.iterations << " iterations, oracle gap " << oracle_error
          << "\n";

  const CMatrix rx = random_hermitian(m, cfg.seed);
  const SemigroupRun rnd = picard_run(sys, rx, tg, cfg.picard);
  log_iterations(residuals, rnd, "random");
  double r_ratio = 0.0, r_herm = 0.0;
  for (int k = 0; k <= tg.steps(); ++k) {
    const CMatrix& node = rnd.nodes[std::size_t(k)];
    const double ratio = spectral_norm(node);  // |X|_2 = 1
    const double herm = max_abs(node - node.adjoint());
    r_ratio = std::max(r_ratio, ratio);
    r_herm = std::max(r_herm, herm);
    contraction.add(rnd.iterations, tg.node(k), "norm_ratio:random", ratio);
    contraction.add(rnd.iterations, tg.node(k), "hermiticity:random", herm);
  }

  if (cfg.dump_nodes) {
    for (int k = 0; k <= tg.steps(); ++k) {
      const std::string name = "nodes/gaussian_" + std::to_string(k) + ".mtx";
      io::write_matrix_market(ctx.artifacts.path(name),
                              {gauss.nodes[std::size_t(k)], OperatorTag::Hermitian, sys.grid},
                              "T_t(X) t=" + io::format_double(tg.node(k)));
      ctx.artifacts.add(name, "observable");
    }
  }

  residuals.write(ctx.artifacts.path("residuals.csv"));
  ctx.artifacts.add("residuals.csv", "time-series");
  conservativity.write(ctx.artifacts.path("conservativity.csv"));
  ctx.artifacts.add("conservativity.csv", "time-series");
  contraction.write(ctx.artifacts.path("contraction.csv"));
  ctx.artifacts.add("contraction.csv", "time-series");

  const bool converged = ident.converged && gauss.converged && rnd.converged;
  const bool conservative = defect <= 1e-8;
  const bool contractive = g_ratio <= 1.0 + 1e-8 && r_ratio <= 1.0 + 1e-8;
  const bool positive = g_lambda >= -1e-8 * gx_norm;
  const bool hermitian = r_herm <= 1e-10;
  Json doc{
      {"time", {{"T", tg.horizon()}, {"steps", tg.steps()}, {"step", tg.step()}}},
      {"quadrature", cfg.picard.quadrature == Quadrature::Linear ? "linear" : "quadratic"},
      {"tol", cfg.picard.tol},
      {"max_iter", cfg.picard.max_iter},
      {"identity",
       {{"converged", ident.converged},
        {"iterations", ident.iterations},
        {"max_defect", defect},
        {"defect_tolerance", 1e-8},
        {"passed", ident.converged && conservative}}},
      {"gaussian",
       {{"variance", variance},
        {"converged", gauss.converged},
        {"iterations", gauss.iterations},
        {"oracle_dt", dt_oracle},
        {"oracle_error", oracle_error},
        {"max_norm_ratio", g_ratio},
        {"min_lambda", g_lambda}}},
      {"random",
       {{"seed", cfg.seed},
        {"converged", rnd.converged},
        {"iterations", rnd.iterations},
        {"max_norm_ratio", r_ratio},
        {"max_hermiticity_defect", r_herm}}},
      {"invariants",
       {{"conservative", conservative},
        {"contractive", contractive},
        {"positive", positive},
        {"hermitian", hermitian}}}};
  io::write_json(ctx.artifacts.path("evolve.json"), doc);
  ctx.artifacts.add("evolve.json", "evolve-report");

  if (!converged) ctx.flag(kNumericalFailure, "Picard iteration did not converge within max_iter");
  if (!conservative) ctx.flag(kInvariantViolated, "conservativity defect above 1e-8");
  if (!contractive) ctx.flag(kInvariantViolated, "contraction bound violated");
  if (!positive) ctx.flag(kInvariantViolated, "positivity violated");
  if (!hermitian) ctx.flag(kInvariantViolated, "Hermiticity not preserved");
}

void verify(Context& ctx, const LindbladSystem& sys) {
  CFOptions opt;
  opt.resolutions = ctx.cfg.resolutions;
  if (opt.resolutions.empty()) {
    if (auto r = refinement(sys.grid)) opt.resolutions.push_back(*r);
  }
  opt.offsets = ctx.cfg.offsets;
  opt.eps_list = ctx.cfg.commutator_eps;
  ctx.log << "[verify] resolutions";
  for (int n : opt.resolutions) ctx.log << " " << n;
  ctx.log << " (+" << sys.grid.points() << ")\n";
  const CFReport rep = cf_check(sys, opt);
  const C4FormBound c4 = c4_form_bound(sys);
  Json doc = io::to_json(rep);
  doc["c4_form"] = io::to_json(c4);
  io::write_json(ctx.artifacts.path("cf_report.json"), doc);
  ctx.artifacts.add("cf_report.json", "cf-report");
  for (const auto& r : rep.resolutions) {
    const std::string name = "witness_k_N" + std::to_string(r.points) + ".txt";
    io::write_witness(ctx.artifacts.path(name), r.estimate.witness,
                      sys.grid.with_points(r.points));
    ctx.artifacts.add(name, "witness");
  }
  ctx.log << "  verdict " << rep.verdict << ", k = " << rep.k << ", drift " << rep.drift << "\n";
  if (rep.condition("c").status == CFStatus::Fail) {
    ctx.flag(kInvariantViolated, "CF condition (c) failed");
  }
  if (rep.condition("d").status == CFStatus::Fail) {
    ctx.flag(kInvariantViolated, "CF condition (d) failed");
  }
}

void classical(Context& ctx, const LindbladSystem& sys) {
  const RunConfig& cfg = ctx.cfg;
  ctx.log << "[classical] variance " << cfg.classical_variance << "\n";
  const SmoothFunction f0 = gaussian_function(sys.grid.dim(), cfg.classical_variance);
  std::vector<std::pair<GridSpec, ClassicalComparison>> levels;
  levels.emplace_back(sys.grid, compare_classical(sys, f0.value, cfg.time, cfg.picard));
  if (auto r = refinement(sys.grid)) {
    const GridSpec g = sys.grid.with_points(*r);
    levels.emplace_back(g, compare_classical(assemble(sys.field, g, sys.shift), f0.value,
                                             cfg.time, cfg.picard));
  }
  std::sort(levels.begin(), levels.end(),
            [](const auto& a, const auto& b) { return a.first.points() < b.first.points(); });
  Json lv = Json::array();
  bool converged = true;
  for (const auto& [g, c] : levels) {
    Json j = io::to_json(c);
    j["N"] = g.points();
    j["h"] = g.spacing();
    lv.push_back(j);
    converged = converged && c.converged;
    ctx.log << "  N = " << g.points() << ": error " << c.max_error << "\n";
  }
  Json doc{{"variance", cfg.classical_variance},
           {"T", cfg.time.horizon()},
           {"steps", cfg.time.steps()},
           {"levels", lv}};
  if (levels.size() == 2 && levels[1].second.max_error > 0.0) {
    const double ratio = levels[0].first.spacing() / levels[1].first.spacing();
    doc["observed_order"] =
        std::log(levels[0].second.max_error / levels[1].second.max_error) / std::log(ratio);
  } else {
    doc["observed_order"] = nullptr;
  }
  io::write_json(ctx.artifacts.path("classical.json"), doc);
  ctx.artifacts.add("classical.json", "classical-report");
  if (!converged) ctx.flag(kNumericalFailure, "classical comparison: Picard run did not converge");
}

void choi(Context& ctx, const LindbladSystem& sys) {
  ctx.log << "[choi] M = " << sys.size() << "\n";
  Json list = Json::array();
  bool cp = true;
  for (double t : ctx.cfg.choi_times) {
    // RK4 is not exactly CP; t/100 keeps the truncation defect well under 1e-8.
    const double dt =
        t == 0.0 ? 1.0 : ctx.cfg.choi_dt.value_or(oracle_step(sys, t, t / 100.0));
    const ChoiReport r = choi_map(sys, t, dt);
    Json j = io::to_json(r);
    j["dt"] = dt;
    list.push_back(j);
    cp = cp && r.completely_positive;
    ctx.log << "  t = " << t << ": lambda_min " << r.lambda_min << "\n";
  }
  io::write_json(ctx.artifacts.path("choi.json"), Json{{"reports", list}});
  ctx.artifacts.add("choi.json", "choi-report");
  if (!cp) ctx.flag(kInvariantViolated, "Choi matrix has a negative eigenvalue");
}

template <class F>
void guarded(Context& ctx, const std::string& stage, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    ctx.flag(status_for(e), stage + ": " + e.what());
  } catch (const std::exception& e) {
    ctx.flag(kNumericalFailure, stage + ": " + e.what());
  }
}

Json config_echo(const RunConfig& cfg) {
  Json analyses = Json::array();
  for (const auto& a : cfg.analyses) analyses.push_back(a);
  return Json{{"grid", io::to_json(cfg.grid)},
              {"T", cfg.time.horizon()},
              {"steps", cfg.time.steps()},
              {"shift", cfg.shift},
              {"seed", cfg.seed},
              {"analyses", analyses}};
}

}  // namespace

RunOutcome run(const RunConfig& cfg, std::ostream& log) {
  fs::create_directories(cfg.output_dir);
  Context ctx{cfg, log, {cfg.output_dir, Json::array()}, {}};

  std::optional<VectorField> field;
  guarded(ctx, "field", [&] { field = cfg.make_field(); });
  if (field && cfg.analyses.count("check-field")) {
    guarded(ctx, "check-field", [&] { check_field(ctx, *field); });
  }

  const bool needs_system = cfg.analyses.size() > cfg.analyses.count("check-field");
  if (field && needs_system) {
    std::optional<LindbladSystem> sys;
    guarded(ctx, "assemble", [&] {
      sys = assemble(*field, cfg.grid, cfg.shift);
      assemble_stage(ctx, *sys);
    });
    if (sys) {
      if (cfg.analyses.count("evolve")) guarded(ctx, "evolve", [&] { evolve(ctx, *sys); });
      if (cfg.analyses.count("verify")) guarded(ctx, "verify", [&] { verify(ctx, *sys); });
      if (cfg.analyses.count("classical")) guarded(ctx, "classical", [&] { classical(ctx, *sys); });
      if (cfg.analyses.count("choi")) guarded(ctx, "choi", [&] { choi(ctx, *sys); });
    }
  }

  Json diagnostics = Json::array();
  for (const auto& d : ctx.outcome.diagnostics) diagnostics.push_back(d);
  const Json manifest{{"schema_version", kSchemaVersion},
                      {"tool", "qdslab"},
                      {"status", ctx.outcome.status},
                      {"config", config_echo(cfg)},
                      {"artifacts", ctx.artifacts.list},
                      {"diagnostics", diagnostics}};
  ctx.outcome.manifest = cfg.output_dir / "manifest.json";
  io::write_json(ctx.outcome.manifest, manifest);
  log << "manifest: " << ctx.outcome.manifest.string() << " (status " << ctx.outcome.status
      << ")\n";
  return ctx.outcome;
}

RunOutcome run_file(const fs::path& config, std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return {kConfigError, {}, {e.what()}};
  }
  try {
    return run(cfg, log);
  } catch (const std::exception& e) {
    // Only reachable when the output directory itself cannot be written.
    log << "error: " << e.what() << "\n";
    return {kConfigError, {}, {e.what()}};
  }
}

namespace {

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

void report_assumptions(const Json& j, std::ostream& out) {
  out << "assumptions (" << j.at("field").get<std::string>() << "): "
      << (j.at("all_satisfied").get<bool>() ? "all satisfied on box" : "not all satisfied")
      << "\n";
  for (const auto& e : j.at("entries")) {
    out << "  " << e.at("condition").get<std::string>() << ": "
        << e.at("status").get<std::string>();
    if (e.at("growth_violation").get<bool>()) out << " [growth-violation]";
    if (e.contains("c4")) out << " c4 = " << e.at("c4").dump();
    out << "\n";
  }
}

void report_cf(const Json& j, std::ostream& out) {
  out << "CF criterion: " << j.at("verdict").get<std::string>() << ", k = "
      << sci(j.at("k").get<double>()) << ", drift " << sci(j.at("drift").get<double>())
      << "\n  trend:";
  for (const auto& r : j.at("k_trend")) {
    out << " N=" << r.at("N").get<int>() << " k=" << sci(r.at("k").get<double>());
  }
  out << "\n";
  for (const auto& c : j.at("conditions")) {
    out << "  (" << c.at("condition").get<std::string>() << ") "
        << c.at("status").get<std::string>() << "\n";
  }
}

void report_evolve(const Json& j, std::ostream& out) {
  const Json& id = j.at("identity");
  const double defect = id.at("max_defect").get<double>();
  out << "conservativity defect " << (id.at("passed").get<bool>() ? "≤" : ">") << " 1e-8 (max "
      << sci(defect) << ", " << id.at("iterations").get<int>() << " iterations)\n";
  out << "  oracle gap (gaussian) " << sci(j.at("gaussian").at("oracle_error").get<double>())
      << ", max |T_t(X)|/|X| " << j.at("random").at("max_norm_ratio").dump() << "\n";
}

void report_classical(const Json& j, std::ostream& out) {
  out << "classical comparison:";
  for (const auto& l : j.at("levels")) {
    out << " N=" << l.at("N").get<int>() << " error " << sci(l.at("max_error").get<double>());
  }
  out << ", observed order "
      << (j.at("observed_order").is_null() ? std::string("n/a")
                                            : std::to_string(j.at("observed_order").get<double>()))
      << "\n";
}

void report_choi(const Json& j, std::ostream& out) {
  for (const auto& r : j.at("reports")) {
    out << "Choi t=" << r.at("t").get<double>() << ": lambda_min "
        << sci(r.at("lambda_min").get<double>()) << " ("
        << (r.at("completely_positive").get<bool>() ? "completely positive" : "NOT completely positive")
        << ")\n";
  }
}

}  // namespace

int report(const fs::path& manifest_path, std::ostream& out) {
  Json manifest;
  try {
    manifest = io::read_json(manifest_path);
  } catch (const Error& e) {
    out << "error: " << e.what() << "\n";
    return kConfigError;
  }
  const fs::path root = manifest_path.has_parent_path() ? manifest_path.parent_path() : ".";
  out << "qdslab report: " << manifest_path.string() << "\n";
  if (manifest.contains("status")) out << "run status: " << manifest["status"].dump() << "\n";

  if (!manifest.contains("artifacts") || !manifest["artifacts"].is_array() ||
      manifest["artifacts"].empty()) {
    out << "no artifacts\n";
    return kOk;
  }

  using Renderer = void (*)(const Json&, std::ostream&);
  const std::vector<std::pair<std::string, Renderer>> sections{
      {"assumptions.json", report_assumptions},
      {"cf_report.json", report_cf},
      {"evolve.json", report_evolve},
      {"classical.json", report_classical},
      {"choi.json", report_choi}};

  int problems = 0;
  std::set<std::string> healthy;
  for (const auto& a : manifest["artifacts"]) {
    const std::string rel = a.value("path", "");
    const fs::path p = root / rel;
    if (rel.empty() || !fs::exists(p)) {
      out << "  error: artifact '" << rel << "' is missing\n";
      ++problems;
      continue;
    }
    if (a.contains("sha256") && io::sha256_file(p) != a["sha256"].get<std::string>()) {
      out << "  error: artifact '" << rel << "' does not match its digest\n";
      ++problems;
      continue;
    }
    healthy.insert(rel);
  }
  out << "artifacts: " << manifest["artifacts"].size() << " listed, " << problems
      << " problem(s)\n";

  for (const auto& [name, render] : sections) {
    if (!healthy.count(name)) continue;
    try {
      render(io::read_json(root / name), out);
    } catch (const std::exception& e) {
      out << "  error: " << name << " is corrupt (" << e.what() << ")\n";
    }
  }
  if (manifest.contains("diagnostics")) {
    for (const auto& d : manifest["diagnostics"]) out << "diagnostic: " << d.get<std::string>() << "\n";
  }
  return kOk;
}

}  // namespace qdslab::cli
