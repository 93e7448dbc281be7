#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "ncrat/errors.hpp"
#include "ncrat/io.hpp"
#include "support/oracles.hpp"

namespace ncrat {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  fs::path p = fs::temp_directory_path() / "ncrat_io_test";
  fs::create_directories(p);
  return p;
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Io, MatrixRoundTrip) {
  Rng rng = make_rng({71});
  MatC m = random_gaussian(3, 2, rng);
  MatC back = matrix_from_json(json::parse(matrix_to_json(m).dump()));
  EXPECT_EQ(back, m);
  MatC real = matrix_from_json(json::parse("[[1, 2], [3, 4]]"));
  EXPECT_EQ(real(1, 0), Complex(3, 0));
  EXPECT_THROW(matrix_from_json(json::parse("[[1, 2], [3]]")), Error);
  EXPECT_THROW(matrix_from_json(json::parse("[[1, 2]]"), 2, 2), Error);
}

TEST(Io, Laws) {
  Law s = law_from_json(json::parse(R"({"type":"semicircle","variance":2})"));
  EXPECT_EQ(s.kind(), Law::Kind::Semicircle);
  EXPECT_DOUBLE_EQ(s.params()[1], 2.0);
  Law mp = law_from_json(json::parse(R"({"type":"marchenko_pastur","lambda":0.5,"scale":3})"));
  EXPECT_DOUBLE_EQ(mp.params()[0], 0.5);
  std::vector<Law> two = laws_from_json(json::parse(R"([{"type":"semicircle"},
    {"type":"atomic","atoms":[0,1],"weights":[0.5,0.5]}])"));
  EXPECT_EQ(two.size(), 2u);
  EXPECT_EQ(two[1].atoms().size(), 2u);
  try {
    law_from_json(json::parse(R"({"type":"cauchy"})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Io, EmpiricalLawFromFile) {
  fs::path dir = scratch_dir();
  {
    std::ofstream f(dir / "samples.csv");
    f << "value\n1.0\n2.0\n3.0\n";
  }
  EXPECT_EQ(read_samples_csv(dir / "samples.csv"), (std::vector<double>{1, 2, 3}));
  Law e = law_from_json(json::parse(R"({"type":"empirical","samples_file":"samples.csv"})"), dir);
  EXPECT_EQ(e.atoms().size(), 3u);
  EXPECT_THROW(read_samples_csv(dir / "missing.csv"), Error);
}

TEST(Io, FlrAndRealizationRoundTrip) {
  Flr rho = build_flr(parse_expr("x1*inv(2-x2)", 2), 2);
  Flr back = flr_from_json(json::parse(flr_to_json(rho).dump()));
  Rng rng = make_rng({72});
  MatTuple x = random_hermitian_tuple(2, 2, rng);
  EXPECT_EQ(eval_flr(back, x), eval_flr(rho, x));

  Realization re = flr_to_realization(rho, MatC::Zero(1, 1));
  Realization rb = realization_from_json(json::parse(realization_to_json(re).dump()));
  EXPECT_EQ(eval_realization(rb, x), eval_realization(re, x));

  LinearPencil p = rho.q;
  EXPECT_EQ(pencil_from_json(pencil_to_json(p)).coeffs(), p.coeffs());
}

TEST(Io, CsvWriters) {
  fs::path dir = scratch_dir();
  DensityGrid d;
  d.t = {0.0, 0.5};
  d.density = {0.25, std::nan("")};
  d.gaps = {1};
  write_density_csv(dir / "d.csv", d);
  std::ifstream f(dir / "d.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "t,density");
  std::getline(f, line);
  EXPECT_EQ(line, "0,0.25");
  json meta = density_metadata(d);
  EXPECT_EQ(meta.at("gaps").size(), 1u);

  write_json(dir / "m.json", meta);
  EXPECT_EQ(read_json(dir / "m.json"), meta);
}

TEST(Io, SeriesJson) {
  SeriesTable s = series_expand(parse_expr("inv(1-x1)", 1), 2, 1);
  json j = series_to_json(s);
  EXPECT_EQ(j.at("degree"), 2);
  EXPECT_EQ(j.at("coeffs").size(), 3u);
}

}  // namespace
}  // namespace ncrat
