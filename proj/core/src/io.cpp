#include "ncrat/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ncrat/errors.hpp"

namespace ncrat {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "io", "cannot open file for writing", {{"path", path.string()}});
  return out;
}

double num(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const MatC& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

MatC matrix_from_json(const json& j, Index rows, Index cols) {
  try {
    if (!j.is_array()) throw Error(ErrorCode::ConfigError, "io", "matrix must be an array of rows");
    if (rows < 0) rows = static_cast<Index>(j.size());
    if (cols < 0) cols = j.empty() ? 0 : static_cast<Index>(j[0].size());
    if (static_cast<Index>(j.size()) != rows) {
      throw Error(ErrorCode::ConfigError, "io", "matrix row count mismatch", {{"expected", rows}, {"found", j.size()}});
    }
    MatC m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      if (static_cast<Index>(j[i].size()) != cols) {
        throw Error(ErrorCode::ConfigError, "io", "matrix column count mismatch", {{"row", i}});
      }
      for (Index k = 0; k < cols; ++k) {
        const json& e = j[i][k];
        m(i, k) = e.is_array() ? Complex(e.at(0).get<double>(), e.at(1).get<double>())
                               : Complex(e.get<double>(), 0.0);
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "io", std::string("bad matrix JSON: ") + e.what());
  }
}

Law law_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "semicircle") return Law::semicircle(num(j, "mean", 0.0), num(j, "variance", 1.0));
    if (type == "marchenko_pastur") return Law::marchenko_pastur(num(j, "lambda", 1.0), num(j, "scale", 1.0));
    if (type == "atomic") {
      return Law::atomic(j.at("atoms").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>());
    }
    if (type == "empirical") {
      if (j.contains("samples")) return Law::empirical(j.at("samples").get<std::vector<double>>());
      std::filesystem::path p = j.at("samples_file").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      return Law::empirical(read_samples_csv(p));
    }
    throw Error(ErrorCode::ConfigError, "io", "unknown law type", {{"type", type}});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "io", std::string("bad law JSON: ") + e.what());
  }
}

std::vector<Law> laws_from_json(const json& j, const std::filesystem::path& base_dir) {
  std::vector<Law> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(law_from_json(item, base_dir));
  } else {
    out.push_back(law_from_json(j, base_dir));
  }
  return out;
}

json pencil_to_json(const LinearPencil& p) {
  json coeffs = json::array();
  for (const auto& c : p.coeffs()) coeffs.push_back(matrix_to_json(c));
  return {{"arity", p.arity()}, {"rows", p.rows()}, {"cols", p.cols()}, {"coeffs", coeffs}};
}

LinearPencil pencil_from_json(const json& j) {
  const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
  std::vector<MatC> coeffs;
  for (const auto& c : j.at("coeffs")) coeffs.push_back(matrix_from_json(c, rows, cols));
  if (coeffs.empty()) throw Error(ErrorCode::ConfigError, "io", "pencil needs a constant coefficient");
  return LinearPencil(std::move(coeffs));
}

json flr_to_json(const Flr& rho) {
  return {{"arity", rho.arity()},          {"size", rho.size()},
          {"out_rows", rho.out_rows()},    {"out_cols", rho.out_cols()},
          {"u", matrix_to_json(rho.u)},    {"q", pencil_to_json(rho.q)},
          {"v", matrix_to_json(rho.v)}};
}

Flr flr_from_json(const json& j) {
  const Index n = j.at("size").get<Index>();
  return {matrix_from_json(j.at("u"), j.at("out_rows").get<Index>(), n), pencil_from_json(j.at("q")),
          matrix_from_json(j.at("v"), n, j.at("out_cols").get<Index>())};
}

json realization_to_json(const Realization& r) {
  json a = json::array();
  for (const auto& m : r.a) a.push_back(matrix_to_json(m));
  return {{"arity", r.arity()},
          {"state_dim", r.state_dim()},
          {"out_rows", r.out_rows()},
          {"out_cols", r.out_cols()},
          {"monic", r.is_monic()},
          {"selfadjoint", r.is_selfadjoint()},
          {"d", matrix_to_json(r.d)},
          {"c", matrix_to_json(r.c)},
          {"j", matrix_to_json(r.j)},
          {"a", a},
          {"b", matrix_to_json(r.b)}};
}

Realization realization_from_json(const json& j) {
  const Index n = j.at("state_dim").get<Index>();
  const Index d1 = j.at("out_rows").get<Index>(), d2 = j.at("out_cols").get<Index>();
  std::vector<MatC> a;
  for (const auto& m : j.at("a")) a.push_back(matrix_from_json(m, n, n));
  return make_realization(matrix_from_json(j.at("d"), d1, d2), matrix_from_json(j.at("c"), d1, n),
                          matrix_from_json(j.at("j"), n, n), std::move(a),
                          matrix_from_json(j.at("b"), n, d2));
}

json shifted_pencil_to_json(const ShiftedPencil& p) {
  json out = pencil_to_json(p.pencil);
  out["corner"] = p.corner;
  return out;
}

json series_to_json(const SeriesTable& s) {
  json coeffs = json::array();
  for (const auto& [word, c] : s.coeffs) {
    coeffs.push_back({{"word", word}, {"re", c.real()}, {"im", c.imag()}});
  }
  return {{"arity", s.arity}, {"degree", s.degree}, {"coeffs", coeffs}};
}

std::vector<double> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "io", "cannot open samples file", {{"path", path.string()}});
  std::vector<double> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    std::string cell = comma == std::string::npos ? line : line.substr(0, comma);
    std::istringstream ss(cell);
    double v;
    if (ss >> v) {
      out.push_back(v);
    } else if (!first && !cell.empty()) {
      throw Error(ErrorCode::IoError, "io", "unreadable sample", {{"path", path.string()}, {"line", line}});
    }
    first = false;
  }
  return out;
}

void write_density_csv(const std::filesystem::path& path, const DensityGrid& d) {
  auto out = open_out(path);
  out << "t,density\n";
  for (std::size_t i = 0; i < d.t.size(); ++i) out << format_double(d.t[i]) << ',' << format_double(d.density[i]) << '\n';
}

void write_brown_csv(const std::filesystem::path& path, const BrownGrid& b) {
  auto out = open_out(path);
  out << "x,y,density\n";
  for (std::size_t iy = 0; iy < b.y.size(); ++iy)
    for (std::size_t ix = 0; ix < b.x.size(); ++ix)
      out << format_double(b.x[ix]) << ',' << format_double(b.y[iy]) << ',' << format_double(b.at(iy, ix)) << '\n';
}

void write_pool_csv(const std::filesystem::path& path, const SpectrumPool& pool) {
  auto out = open_out(path);
  if (!pool.complex.empty()) {
    out << "re,im\n";
    for (Complex z : pool.complex) out << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
  } else {
    out << "value\n";
    for (double v : pool.real) out << format_double(v) << '\n';
  }
}

json density_metadata(const DensityGrid& d) {
  return {{"epsilon", d.eps_used},          {"eta", d.eta},
          {"mass", d.mass},                 {"clipped_mass", d.clipped_mass},
          {"iterations_max_seen", d.iterations_max_seen}, {"gaps", d.gaps}};
}

json brown_metadata(const BrownGrid& b) {
  return {{"epsilon", b.eps},
          {"mass", b.mass},
          {"clipped_mass", b.clipped_mass},
          {"imag_residue_max", b.imag_residue_max},
          {"iterations_max_seen", b.iterations_max_seen},
          {"gaps", b.gaps}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "io", "cannot open file", {{"path", path.string()}});
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "io", std::string("invalid JSON: ") + e.what(), {{"path", path.string()}});
  }
}

}  // namespace ncrat
