#pragma once

// Text formats for datasets, checkpoints, histories, records, sweeps and
// matrices. Writers produce canonical text (doubles at 17 significant
// digits, booleans as 0/1, '\n' line ends); parsers validate the schema and
// throw DataError naming the source and line.

#include "hypatk/analysis.hpp"
#include "hypatk/attacks.hpp"
#include "hypatk/model.hpp"
#include "hypatk/sampling.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hypatk::io {

namespace fs = std::filesystem;

std::string format_double(double v);

std::string read_text(const fs::path& path);
// Creates parent directories. DataError with the path on failure.
void write_text(const fs::path& path, std::string_view text);

// Minimal CSV table: one header row, comma-separated, no quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(std::string_view text, std::string_view source);
// DataError unless the header matches exactly.
void expect_header(const CsvTable& table, const std::vector<std::string>& header, std::string_view source);

double parse_double(std::string_view field, std::string_view source, std::size_t line);
long long parse_int(std::string_view field, std::string_view source, std::size_t line);

// Header x0,...,x{n-1},label.
std::string dataset_csv(const sampling::LabeledDataset& data);
sampling::LabeledDataset parse_dataset_csv(std::string_view text, std::string_view source,
                                           geometry::Curvature c, sampling::Split split);

std::string model_json(const model::MlrParams& params);
model::MlrParams parse_model_json(std::string_view text, std::string_view source);

std::string history_csv(const std::vector<model::EpochStats>& history);
std::vector<model::EpochStats> parse_history_csv(std::string_view text, std::string_view source);

std::string records_csv(const std::vector<attacks::PredictionRecord>& records);
std::vector<attacks::PredictionRecord> parse_records_csv(std::string_view text, std::string_view source);

std::string sweep_csv(const analysis::SweepResult& sweep);
analysis::SweepResult parse_sweep_csv(std::string_view text, std::string_view source);

// Columns named by class label, then row_count.
std::string matrix_csv(const analysis::MisclassMatrix& m);
analysis::MisclassMatrix parse_matrix_csv(std::string_view text, std::string_view source);
// Columns named by class label.
std::string comparative_csv(const Eigen::MatrixXd& m);

}  // namespace hypatk::io
