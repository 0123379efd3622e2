#pragma once

// File formats.
//
//   matrix CSV   headerless, row-major, comma-separated decimals, %.12g
//   S table CSV  header "r,s", one row per rank, %.12g
//   JSON         S tables, selection / CV reports, experiment configs and
//                results (schemas under schemas/)
//   records CSV  header "replicate,estimator,ratio,r_hat,rho,b"; flagged
//                ratios are written as NA

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "lowrank/kyfan.hpp"
#include "lowrank/matrix.hpp"
#include "lowrank/selection.hpp"
#include "lowrank/simulation.hpp"

namespace lowrank::io {

using Json = nlohmann::ordered_json;

// Shortest "%.12g" rendering; the precision every text output uses.
std::string format_number(double value);

Matrix parse_matrix_csv(std::istream& in, const std::string& source = "<stream>");
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

void write_skf_csv(std::ostream& out, const kyfan::SkfTable& table);
Json to_json(const kyfan::SkfTable& table);
Json to_json(const selection::SelectionReport& report);
Json to_json(const selection::CvResult& result);

sim::ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const sim::ExperimentConfig& config);
Json to_json(const sim::ExperimentResult& result);
void write_records_csv(std::ostream& out, const sim::ExperimentResult& result);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lowrank::io
