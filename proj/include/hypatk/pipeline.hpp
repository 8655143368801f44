#pragma once

// The four batch commands. Each reads its inputs from config.output_dir,
// writes its artifacts there, re-reads every written file through the
// schema parsers, and throws hypatk::Error subclasses on failure.
//
// Layout under output_dir:
//   train.csv, test.csv                    generate
//   model.json, history.csv                train
//   records_<attack>_<objective>.csv,
//   sweep.csv [, sweep.svg]                sweep
//   matrices/<attack>_<objective>_eps<e>.csv,
//   comparative.csv, raster.txt [, raster.svg], report.json
//                                          report

#include "hypatk/config.hpp"

#include <filesystem>
#include <ostream>
#include <string>

namespace hypatk::pipeline {

namespace files {
inline constexpr const char* kTrain = "train.csv";
inline constexpr const char* kTest = "test.csv";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kHistory = "history.csv";
inline constexpr const char* kSweep = "sweep.csv";
inline constexpr const char* kSweepSvg = "sweep.svg";
inline constexpr const char* kMatrixDir = "matrices";
inline constexpr const char* kComparative = "comparative.csv";
inline constexpr const char* kRasterText = "raster.txt";
inline constexpr const char* kRasterSvg = "raster.svg";
inline constexpr const char* kReport = "report.json";

std::string records(attacks::Family family, model::ObjectiveKind objective);
std::string matrix(attacks::Family family, model::ObjectiveKind objective, double epsilon);
}  // namespace files

void cmd_generate(const config::RunConfig& cfg, std::ostream& log);
void cmd_train(const config::RunConfig& cfg, std::ostream& log);
void cmd_sweep(const config::RunConfig& cfg, std::ostream& log);
void cmd_report(const config::RunConfig& cfg, std::ostream& log);

}  // namespace hypatk::pipeline
