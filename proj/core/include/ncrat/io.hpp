#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncrat/algorithms.hpp"
#include "ncrat/freeprob.hpp"
#include "ncrat/linrep.hpp"
#include "ncrat/ncexpr.hpp"
#include "ncrat/realization.hpp"
#include "ncrat/rmt.hpp"

namespace ncrat {

using json = nlohmann::json;

// 17 significant digits, so values read back bit-identical.
std::string format_double(double v);

// Array of rows of [re, im] pairs; plain numbers are read as real entries.
// Negative rows/cols take the shape from the data.
json matrix_to_json(const MatC& m);
MatC matrix_from_json(const json& j, Index rows = -1, Index cols = -1);

// samples_file paths are resolved against base_dir.
Law law_from_json(const json& j, const std::filesystem::path& base_dir = {});
std::vector<Law> laws_from_json(const json& j, const std::filesystem::path& base_dir = {});

json pencil_to_json(const LinearPencil& p);
LinearPencil pencil_from_json(const json& j);
json flr_to_json(const Flr& rho);
Flr flr_from_json(const json& j);
json realization_to_json(const Realization& r);
Realization realization_from_json(const json& j);
json shifted_pencil_to_json(const ShiftedPencil& p);
json series_to_json(const SeriesTable& s);

// One number per line after an optional header line.
std::vector<double> read_samples_csv(const std::filesystem::path& path);

void write_density_csv(const std::filesystem::path& path, const DensityGrid& d);
void write_brown_csv(const std::filesystem::path& path, const BrownGrid& b);
void write_pool_csv(const std::filesystem::path& path, const SpectrumPool& pool);
json density_metadata(const DensityGrid& d);
json brown_metadata(const BrownGrid& b);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace ncrat
