#pragma once

// JSON run configuration. Every field is optional; defaults reproduce the
// synthetic benchmark (4 classes at radius 1.5, variance 0.25, 10000 samples
// per class and split, 100 epochs of Riemannian SGD at lr 5e-5 with batch
// 4096, PGD with T = 10 and alpha = 0.5 eps). Unknown keys are rejected.

#include "hypatk/analysis.hpp"
#include "hypatk/model.hpp"
#include "hypatk/sampling.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace hypatk::config {

// Records of one attack family, optionally restricted to one objective.
struct GroupSelector {
    attacks::Family family = attacks::Family::HyperbolicFgm;
    std::optional<model::ObjectiveKind> objective;

    std::string describe() const;
};

struct ReportConfig {
    GroupSelector compare_a{attacks::Family::HyperbolicFgm, std::nullopt};
    GroupSelector compare_b{attacks::Family::EuclideanFgm, std::nullopt};
    int raster_resolution = 101;
};

struct RunConfig {
    sampling::DatasetSpec dataset;
    model::TrainConfig train;
    analysis::SweepGrid sweep;
    ReportConfig report;
    std::filesystem::path output_dir = "hypatk_out";
    bool emit_svg = false;

    // Default grid: both FGM families, all objectives, eps = 0.25, 0.5, ..., 2.0.
    RunConfig();
    void validate() const;
};

RunConfig parse_config(std::string_view text, std::string_view source);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace hypatk::config
