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


#include "qdslab/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

namespace qdslab::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorKind::Io, "double formatting failed");
  return std::string(buf.data(), end);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

}  // namespace

void write_matrix_market(const fs::path& path, const DiscreteOperator& op, const std::string& role) {
  const CMatrix& a = op.matrix;
  const GridSpec& g = op.grid;
  Index nnz = 0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (a(i, j) != Complex(0.0)) ++nnz;

  auto out = open_out(path);
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << "% qdslab role=" << role << " tag=" << to_string(op.tag) << "\n";
  out << "% qdslab grid d=" << g.dim() << " R=" << format_double(g.half_width())
      << " N=" << g.points() << " h=" << format_double(g.spacing()) << " w=" << g.bulk_width()
      << "\n";
  out << "% qdslab order=" << (g.dim() == 1 ? "x" : "x-major (flat = i0*N + i1)") << "\n";
  out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
  // Column-major traversal keeps the entry order deterministic.
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const Complex v = a(i, j);
      if (v == Complex(0.0)) continue;
      out << i + 1 << ' ' << j + 1 << ' ' << format_double(v.real()) << ' '
          << format_double(v.imag()) << '\n';
    }
  }
  finish(out, path);
}

MatrixMarketFile read_matrix_market(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, path.string() + ": empty file");
  std::istringstream banner(line);
  std::string magic, object, format, field, symmetry;
  banner >> magic >> object >> format >> field >> symmetry;
  auto lower = [](std::string s) {
    for (auto& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  field = lower(field);
  symmetry = lower(symmetry);
  if (magic != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
    throw Error(ErrorKind::Io, path.string() + ": not a coordinate Matrix Market file");
  }
  if (field != "real" && field != "complex" && field != "integer") {
    throw Error(ErrorKind::Io, path.string() + ": unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "hermitian") {
    throw Error(ErrorKind::Io, path.string() + ": unsupported symmetry '" + symmetry + "'");
  }

  MatrixMarketFile mm;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '%') break;
    mm.comments.push_back(line.substr(1));
  }
  std::istringstream size_line(line);
  long rows = -1, cols = -1, nnz = -1;
  if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
    throw Error(ErrorKind::Io, path.string() + ": bad size line");
  }
  mm.matrix = CMatrix::Zero(rows, cols);
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double re = 0.0, im = 0.0;
    if (!(in >> i >> j >> re)) throw Error(ErrorKind::Io, path.string() + ": truncated entries");
    if (field == "complex" && !(in >> im)) {
      throw Error(ErrorKind::Io, path.string() + ": truncated entries");
    }
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw Error(ErrorKind::Io, path.string() + ": entry index out of range");
    }
    const Complex v(re, im);
    mm.matrix(i - 1, j - 1) = v;
    if (i != j && symmetry == "symmetric") mm.matrix(j - 1, i - 1) = v;
    if (i != j && symmetry == "hermitian") mm.matrix(j - 1, i - 1) = std::conj(v);
  }
  return mm;
}

void CsvSeries::add(int iteration, double node_time, const std::string& metric, double value) {
  rows_.push_back({iteration, node_time, metric, value});
}

void CsvSeries::write(const fs::path& path) const {
  auto out = open_out(path);
  out << "iteration,node_time,metric,value\n";
  for (const auto& r : rows_) {
    out << r.iteration << ',' << format_double(r.node_time) << ',' << r.metric << ','
        << format_double(r.value) << '\n';
  }
  finish(out, path);
}

void write_witness(const fs::path& path, const CVector& v, const GridSpec& grid) {
  auto out = open_out(path);
  out << (grid.dim() == 1 ? "# index x re im\n" : "# index x y re im\n");
  for (Index p = 0; p < v.size(); ++p) {
    const auto x = grid.point(p);
    out << p << ' ' << format_double(x[0]);
    if (grid.dim() == 2) out << ' ' << format_double(x[1]);
    out << ' ' << format_double(v(p).real()) << ' ' << format_double(v(p).imag()) << '\n';
  }
  finish(out, path);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  }
  return hex.str();
}

void write_json(const fs::path& path, const Json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

// Non-finite doubles become strings so documents stay valid JSON.
static Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json to_json(const GridSpec& grid) {
  return Json{{"d", grid.dim()},
              {"R", grid.half_width()},
              {"N", grid.points()},
              {"h", grid.spacing()},
              {"bulk_width", grid.bulk_width()}};
}

Json to_json(const ConditionEntry& entry) {
  Json j{{"condition", entry.condition},
         {"status", to_string(entry.status)},
         {"growth_violation", entry.growth_violation}};
  Json constants = Json::array();
  for (const auto& [p, c] : entry.constants) constants.push_back(Json::array({num(p), num(c)}));
  j["constants"] = constants;
  if (entry.constant) j["c4"] = num(*entry.constant);
  Json wit = Json::array();
  for (const auto& w : entry.witnesses) wit.push_back({{"point", w.point}, {"value", num(w.value)}});
  j["witnesses"] = wit;
  if (!entry.note.empty()) j["note"] = entry.note;
  return j;
}

Json to_json(const AssumptionReport& report) {
  Json entries = Json::array();
  for (const auto& e : report.entries) entries.push_back(to_json(e));
  return Json{{"field", report.field},
              {"box",
               {{"d", report.box.dim},
                {"half_width", report.box.half_width},
                {"points", report.box.points},
                {"shells", report.box.shells}}},
              {"all_satisfied", report.all_satisfied()},
              {"entries", entries}};
}

Json to_json(const PencilEstimate& p) {
  return Json{{"label", p.label},
              {"constant", num(p.constant)},
              {"offset", num(p.offset)},
              {"parameter", num(p.parameter)},
              {"pencil", p.pencil},
              {"subspace", p.subspace},
              {"resolution", p.resolution},
              {"witness_quotient", num(p.witness_quotient)}};
}

Json to_json(const CFReport& r) {
  Json conditions = Json::array();
  for (const auto& c : r.conditions) {
    conditions.push_back({{"condition", c.condition},
                          {"status", to_string(c.status)},
                          {"value", num(c.value)},
                          {"evidence", c.evidence}});
  }
  Json trend = Json::array();
  for (const auto& res : r.resolutions) {
    trend.push_back({{"N", res.points},
                     {"k", num(res.k)},
                     {"C_norm", num(res.c_norm)},
                     {"witness_quotient", num(res.estimate.witness_quotient)}});
  }
  Json bounds = Json::array();
  for (const auto& b : r.bounds) bounds.push_back(to_json(b));
  return Json{{"field", r.field},
              {"grid", to_json(r.grid)},
              {"shift", r.shift},
              {"conditions", conditions},
              {"k", num(r.k)},
              {"k_trend", trend},
              {"drift", num(r.drift)},
              {"b8", num(r.b8)},
              {"b9_over_b8", num(r.b9_over_b8)},
              {"bounds", bounds},
              {"verdict", r.verdict}};
}

Json to_json(const C4FormBound& b) {
  return Json{{"c4", num(b.c4)},
              {"margin", num(b.margin)},
              {"witness_point", b.witness_point},
              {"holds", b.holds},
              {"growth_violation", b.growth_violation}};
}

Json to_json(const ChoiReport& r) {
  return Json{{"t", r.t},
              {"dimension", r.dimension},
              {"lambda_min", num(r.lambda_min)},
              {"lambda_max", num(r.lambda_max)},
              {"completely_positive", r.completely_positive}};
}

Json to_json(const ClassicalComparison& c) {
  return Json{{"max_error", num(c.max_error)},
              {"leakage", num(c.leakage)},
              {"converged", c.converged},
              {"iterations", c.iterations}};
}

}  // namespace qdslab::io
