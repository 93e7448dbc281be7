// ncrat command-line front end.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "ncrat/algorithms.hpp"
#include "ncrat/errors.hpp"
#include "ncrat/io.hpp"
#include "ncrat/linrep.hpp"
#include "ncrat/ncexpr.hpp"
#include "ncrat/realization.hpp"
#include "ncrat/rmt.hpp"

namespace fs = std::filesystem;
using namespace ncrat;

namespace {

struct Options {
  std::string expr;
  std::string expr_file;
  std::string expr2;
  int arity = 0;
  std::string laws;
  std::string grid;
  double eta = 1e-3;
  double eps_final = 1e-7;
  double brown_eps = 0.01;
  double tol = 1e-11;
  std::uint64_t seed = 0;
  std::string out = ".";
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string path = "auto";
  std::string config;
  bool cut_down = false;
  bool prune = false;
  bool brown = false;
  int degree = 4;
  int trials = 100;
  std::vector<Index> sizes{1, 2, 3};
  Index n = 1000;
  int reps = 5;
  int bins = 60;
  double quantile = 0.05;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r\n") - a + 1);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::IoError, "cli", "cannot read file", {{"path", p.string()}});
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string expression_text(const Options& o) {
  if (!o.expr.empty() && !o.expr_file.empty()) {
    throw Error(ErrorCode::ConfigError, "cli", "give either --expr or --expr-file");
  }
  if (!o.expr_file.empty()) return trim(slurp(o.expr_file));
  if (o.expr.empty()) throw Error(ErrorCode::ConfigError, "cli", "an expression is required");
  return trim(o.expr);
}

bool is_matrix_text(const std::string& text) { return !text.empty() && text.front() == '['; }

// Largest variable index mentioned, found by parsing with a generous arity.
int infer_arity(const std::string& text) {
  if (is_matrix_text(text)) {
    int m = 0;
    for (const auto& row : json::parse(text))
      for (const auto& e : row) m = std::max(m, parse_expr(e.get<std::string>(), 1 << 20).max_var());
    return std::max(1, m);
  }
  return std::max(1, parse_expr(text, 1 << 20).max_var());
}

MatNcExpr parse_matrix(const std::string& text, int arity) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, "cli", std::string("matrix expression is not JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw Error(ErrorCode::ConfigError, "cli", "matrix expression must be an array of rows");
  }
  const Index rows = static_cast<Index>(j.size()), cols = static_cast<Index>(j[0].size());
  MatNcExpr m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (static_cast<Index>(j[i].size()) != cols) {
      throw Error(ErrorCode::ConfigError, "cli", "matrix rows differ in length");
    }
    for (Index k = 0; k < cols; ++k) m.at(i, k) = parse_expr(j[i][k].get<std::string>(), arity);
  }
  return m;
}

RealizationPath parse_path(const std::string& s) {
  if (s == "saflr") return RealizationPath::SaFlr;
  if (s == "minimal") return RealizationPath::Minimal;
  if (s == "auto") return RealizationPath::Auto;
  throw Error(ErrorCode::ConfigError, "cli", "unknown realization path", {{"path", s}});
}

std::vector<Law> load_laws(const Options& o, int arity) {
  if (o.laws.empty()) throw Error(ErrorCode::ConfigError, "cli", "--laws is required");
  const std::string t = trim(o.laws);
  json j;
  fs::path base;
  if (!t.empty() && (t.front() == '[' || t.front() == '{')) {
    try {
      j = json::parse(t);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, "cli", std::string("laws are not valid JSON: ") + e.what());
    }
  } else {
    j = read_json(t);
    base = fs::path(t).parent_path();
  }
  std::vector<Law> laws = laws_from_json(j, base);
  if (static_cast<int>(laws.size()) != arity) {
    throw Error(ErrorCode::ConfigError, "cli", "law count must equal the arity",
                {{"laws", laws.size()}, {"arity", arity}});
  }
  return laws;
}

struct Axis {
  double lo, hi;
  std::size_t n;
};

Axis parse_axis(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  try {
    if (parts.size() == 3) return {std::stod(parts[0]), std::stod(parts[1]), std::stoul(parts[2])};
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ConfigError, "cli", "grid axis must look like lo:hi:n", {{"axis", s}});
}

PipelineOptions pipeline(const Options& o) {
  PipelineOptions p;
  p.path = parse_path(o.path);
  p.schedule.final_eps = o.eps_final;
  p.subordination.tol = o.tol;
  p.workers = o.workers;
  return p;
}

std::vector<Ensemble> ensembles_for(const std::vector<Law>& laws, Index n) {
  std::vector<Ensemble> out;
  for (const auto& l : laws) out.push_back(Ensemble::for_law(n, l));
  return out;
}

fs::path out_dir(const Options& o) {
  fs::path d(o.out);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw Error(ErrorCode::IoError, "cli", "cannot create output directory", {{"path", d.string()}});
  return d;
}

// Bad input exits with 2, failures inside a pipeline with 1.
bool is_input_error(ErrorCode c) {
  return c == ErrorCode::ConfigError || c == ErrorCode::SyntaxError || c == ErrorCode::ArityError ||
         c == ErrorCode::IoError || c == ErrorCode::NotSelfadjointInput;
}

void emit(const json& result) { std::cout << result.dump(2) << '\n'; }

// 1-D grid: explicit lo:hi:n, a bare point count, or auto-ranged from a small simulation.
std::vector<double> density_grid(const Options& o, const NcExpr& r, const std::vector<Law>& laws) {
  std::size_t n = 600;
  if (!o.grid.empty() && o.grid.find(':') != std::string::npos) {
    const Axis a = parse_axis(o.grid);
    return uniform_grid(a.lo, a.hi, a.n);
  }
  if (!o.grid.empty()) n = std::stoul(o.grid);
  const SpectrumPool pool = empirical_spectrum(r, ensembles_for(laws, 200), 1, o.seed, true);
  double lo = pool.real.front(), hi = pool.real.back();
  double w = hi - lo;
  if (w <= 1e-12) w = 2.0;
  return uniform_grid(lo - 0.1 * w, hi + 0.1 * w, n);
}

std::pair<std::vector<double>, std::vector<double>> brown_grid(const Options& o, const NcExpr& r,
                                                               const std::vector<Law>& laws) {
  if (!o.grid.empty() && o.grid.find(':') != std::string::npos) {
    const auto comma = o.grid.find(',');
    const Axis ax = parse_axis(o.grid.substr(0, comma));
    const Axis ay = comma == std::string::npos ? ax : parse_axis(o.grid.substr(comma + 1));
    return {uniform_grid(ax.lo, ax.hi, ax.n), uniform_grid(ay.lo, ay.hi, ay.n)};
  }
  std::size_t n = o.grid.empty() ? 101 : std::stoul(o.grid);
  const SpectrumPool pool = empirical_spectrum(r, ensembles_for(laws, 200), 1, o.seed, false);
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (Complex z : pool.complex) {
    xlo = std::min(xlo, z.real());
    xhi = std::max(xhi, z.real());
    ylo = std::min(ylo, z.imag());
    yhi = std::max(yhi, z.imag());
  }
  const double w = std::max({xhi - xlo, yhi - ylo, 1e-3});
  const double mx = 0.1 * std::max(xhi - xlo, 0.5 * w), my = 0.1 * std::max(yhi - ylo, 0.5 * w);
  return {uniform_grid(xlo - mx, xhi + mx, n), uniform_grid(ylo - my, yhi + my, n)};
}

int run(const std::string& mode, const Options& o) {
  const std::string text = expression_text(o);
  const int arity = o.arity > 0 ? o.arity : infer_arity(text);
  const fs::path dir = out_dir(o);

  if (mode == "linearize") {
    Flr rho = is_matrix_text(text) ? build_flr(parse_matrix(text, arity), arity)
                                   : build_flr(parse_expr(text, arity), arity);
    if (o.prune) rho = prune_flr(rho, o.seed);
    write_json(dir / "flr.json", flr_to_json(rho));
    emit({{"mode", mode}, {"size", rho.size()}, {"file", (dir / "flr.json").string()}});
    return 0;
  }

  if (mode == "realize") {
    Realization real = is_matrix_text(text) ? realization_of(parse_matrix(text, arity), arity, o.prune)
                                            : realization_of(parse_expr(text, arity), arity, o.prune);
    if (o.cut_down) real = cut_down(real);
    write_json(dir / "realization.json", realization_to_json(real));
    emit({{"mode", mode}, {"state_dim", real.state_dim()}, {"file", (dir / "realization.json").string()}});
    return 0;
  }

  if (is_matrix_text(text)) {
    throw Error(ErrorCode::ConfigError, "cli", "this mode needs a scalar expression", {{"mode", mode}});
  }
  const NcExpr r = parse_expr(text, arity);

  if (mode == "series") {
    const SeriesTable s = series_expand(r, o.degree, arity);
    write_json(dir / "series.json", series_to_json(s));
    emit({{"mode", mode}, {"coefficients", s.coeffs.size()}, {"file", (dir / "series.json").string()}});
    return 0;
  }

  if (mode == "equiv") {
    if (o.expr2.empty()) throw Error(ErrorCode::ConfigError, "cli", "equiv needs --expr2");
    const int a2 = o.arity > 0 ? o.arity : std::max(arity, infer_arity(o.expr2));
    const NcExpr r1 = parse_expr(text, a2), r2 = parse_expr(trim(o.expr2), a2);
    EquivOptions eo;
    eo.sizes = o.sizes;
    eo.trials = o.trials;
    eo.seed = o.seed;
    const EquivResult res = matrix_equiv(r1, r2, a2, eo);
    json j = {{"verdict", std::string(to_string(res.verdict))},
              {"in_domain", res.in_domain},
              {"total", res.total},
              {"max_deviation", res.max_deviation}};
    if (res.witness) {
      json w = json::array();
      for (const auto& m : *res.witness) w.push_back(matrix_to_json(m));
      j["witness"] = w;
    }
    write_json(dir / "equiv.json", j);
    emit(j);
    return 0;
  }

  const std::vector<Law> laws = load_laws(o, arity);
  const PipelineOptions popts = pipeline(o);

  if (mode == "dist" || (mode == "rmt-compare" && !o.brown)) {
    const std::vector<double> t = density_grid(o, r, laws);
    const DensityGrid d = compute_distribution(r, arity, laws, t, o.eta, popts);
    write_density_csv(dir / "density.csv", d);
    write_json(dir / "density.json", density_metadata(d));
    if (mode == "dist") {
      emit({{"mode", mode}, {"mass", d.mass}, {"gaps", d.gaps.size()}, {"file", (dir / "density.csv").string()}});
      return 0;
    }
    const SpectrumPool pool = empirical_spectrum(r, ensembles_for(laws, o.n), o.reps, o.seed, true, o.workers);
    write_pool_csv(dir / "pool.csv", pool);
    const DensityComparison c = compare_density(d, pool.real, o.bins);
    const json j = {{"l1", c.l1}, {"ks", c.ks}, {"discarded", pool.discarded}, {"draws", pool.draws}};
    write_json(dir / "metrics.json", j);
    emit(j);
    return 0;
  }

  if (mode == "brown" || mode == "rmt-compare") {
    const auto [x, y] = brown_grid(o, r, laws);
    const BrownGrid b = compute_brown(r, arity, laws, x, y, o.brown_eps, popts);
    write_brown_csv(dir / "brown.csv", b);
    write_json(dir / "brown.json", brown_metadata(b));
    if (mode == "brown") {
      emit({{"mode", mode}, {"mass", b.mass}, {"gaps", b.gaps.size()}, {"file", (dir / "brown.csv").string()}});
      return 0;
    }
    const SpectrumPool pool = empirical_spectrum(r, ensembles_for(laws, o.n), o.reps, o.seed, false, o.workers);
    write_pool_csv(dir / "pool.csv", pool);
    const double cov = brown_coverage(b, pool.complex, o.quantile);
    const json j = {{"coverage", cov}, {"discarded", pool.discarded}, {"draws", pool.draws}};
    write_json(dir / "metrics.json", j);
    emit(j);
    return 0;
  }
  throw Error(ErrorCode::ConfigError, "cli", "unknown mode", {{"mode", mode}});
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--expr", o.expr, "Expression text, or a JSON array of rows of expressions");
  sub->add_option("--expr-file", o.expr_file, "File holding the expression");
  sub->add_option("--arity", o.arity, "Number of variables (default: largest index used)");
  sub->add_option("--laws", o.laws, "Law JSON (inline or a file path), one per variable");
  sub->add_option("--grid", o.grid, "lo:hi:n, or xlo:xhi:nx,ylo:yhi:ny for brown, or a point count");
  sub->add_option("--eta", o.eta, "Stieltjes inversion offset");
  sub->add_option("--eps-final", o.eps_final, "Smallest corner epsilon");
  sub->add_option("--brown-eps", o.brown_eps, "Brown regularization epsilon");
  sub->add_option("--tol", o.tol, "Fixed-point tolerance");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--workers", o.workers, "Worker threads");
  sub->add_option("--path", o.path, "Realization path: saflr, minimal or auto");
  sub->add_option("--config", o.config, "JSON config file; flags take precedence");
}

// Fills options absent from the command line with values from the config file.
void apply_config(CLI::App* sub, const std::string& file) {
  if (file.empty()) return;
  const json cfg = read_json(file);
  if (!cfg.is_object()) throw Error(ErrorCode::ConfigError, "cli", "config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw Error(ErrorCode::ConfigError, "cli", "unknown config key", {{"key", key}});
    if (opt->count() > 0) continue;
    std::vector<std::string> args;
    if (value.is_array() && key != "laws") {
      for (const auto& v : value) args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else {
      args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    opt->clear();
    for (auto& a : args) opt->add_result(a);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributions and Brown measures of noncommutative rational expressions"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"linearize", "Write the formal linear representation"},
      {"realize", "Write a descriptor realization"},
      {"dist", "Density of a selfadjoint expression on a grid"},
      {"brown", "Brown measure density on a rectangular grid"},
      {"rmt-compare", "Compare the density with random matrix eigenvalues"},
      {"equiv", "Test two expressions for equivalence by random evaluation"},
      {"series", "Power series coefficients around zero"}};
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    add_common(sub, o);
    subs.emplace_back(name, sub);
  }
  auto find = [&](const char* name) {
    for (auto& [n, s] : subs)
      if (n == name) return s;
    return static_cast<CLI::App*>(nullptr);
  };
  find("realize")->add_flag("--cut-down", o.cut_down, "Reduce to a minimal realization");
  find("realize")->add_flag("--prune", o.prune, "Prune the FLR first");
  find("linearize")->add_flag("--prune", o.prune, "Prune the FLR");
  find("series")->add_option("--degree", o.degree, "Largest word length");
  find("equiv")->add_option("--expr2", o.expr2, "Second expression");
  find("equiv")->add_option("--trials", o.trials, "Trials per size");
  find("equiv")->add_option("--sizes", o.sizes, "Matrix sizes");
  CLI::App* cmp = find("rmt-compare");
  cmp->add_flag("--brown", o.brown, "Compare a Brown grid against complex eigenvalues");
  cmp->add_option("--n", o.n, "Matrix size");
  cmp->add_option("--reps", o.reps, "Independent draws");
  cmp->add_option("--bins", o.bins, "Histogram bins");
  cmp->add_option("--quantile", o.quantile, "Density quantile for coverage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const Error err(ErrorCode::ConfigError, "cli", e.what());
    std::cerr << err.to_json().dump() << '\n';
    return 2;
  }

  try {
    for (auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      apply_config(sub, o.config);
      return run(name, o);
    }
  } catch (const Error& e) {
    std::cerr << e.to_json().dump() << '\n';
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    const Error err(ErrorCode::ConfigError, "cli", e.what());
    std::cerr << err.to_json().dump() << '\n';
    return 2;
  }
  return 2;
}
