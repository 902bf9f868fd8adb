#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fbdiff/explicit_solver.hpp"
#include "fbdiff/grid.hpp"
#include "fbdiff/noise_metrics.hpp"

namespace fbdiff {

/// Reads a plain (P2) or binary (P5) PGM with maxval 255. Malformed input
/// raises std::runtime_error naming the byte offset.
ImageGrid read_pgm(const std::filesystem::path& path);

/// Writes P5 (binary=true) or P2. Values are rounded half-to-even and
/// clamped to [0, 255].
void write_pgm(const ImageGrid& grid, const std::filesystem::path& path,
               bool binary = true);

enum class SyntheticKind { piecewise_constant_shapes, step, ramp };

SyntheticKind synthetic_kind_from_string(const std::string& name);

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::step;
    int rows = 64;
    int cols = 64;
    std::vector<double> levels{50.0, 200.0};
};

/// Deterministic test image: a left/right step, a linear ramp in x, or a
/// piecewise-constant arrangement of rectangles and a disk at the given
/// gray levels (all >= 1).
ImageGrid make_synthetic(const SyntheticSpec& spec);

struct ExperimentConfig {
    std::optional<std::filesystem::path> input;
    std::optional<SyntheticSpec> synthetic;
    NoiseSpec noise{};
    SolverConfig solver{};
    std::filesystem::path out_dir = "out";
    bool emit_history = true;
};

struct ExperimentSummary {
    QualityReport noisy;
    QualityReport denoised;
    int iterations = 0;
    double min_alpha = 0.0;
};

/// Pipeline: load or synthesize the clean image, apply seeded Gamma noise,
/// build the indicator, run the solver, write denoised/noisy/alpha images
/// plus the per-iteration history CSV, print a summary line.
ExperimentSummary run_experiment_collect(const ExperimentConfig& cfg);

/// Same, but returns a process exit status instead of throwing.
int run_experiment(const ExperimentConfig& cfg);

/// History CSV with columns iter,psnr,mae,min,max,mean.
void write_history_csv(const std::vector<StepReport>& history,
                       const std::filesystem::path& path);

} // namespace fbdiff
