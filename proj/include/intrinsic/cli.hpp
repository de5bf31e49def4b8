// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the intrinsic project.

#pragma once

#include <string>
#include <vector>

#include "intrinsic/decompose.hpp"
#include "intrinsic/image_io.hpp"

namespace intrinsic::cli {

/// Shared configuration of the image-producing subcommands.
struct RunConfig {
    std::string input;
    std::string r_prior;
    std::string output_dir;
    SolverParams params;
    Rescale display_rescale = Rescale::clip;
    bool emit_trace = false;
};

/// One row of the bench CSV.
struct BenchEntry {
    std::string image_id;
    double whdr = 0.0;
    double wall_time_s = 0.0;
    int iterations = 0;
};

// Exit codes: 0 success, 2 validation/parse failures, 3 I/O failures,
// 4 undefined evaluations (zero weight, empty dataset), 1 anything else.
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitEval = 4;

int cmd_decompose(const RunConfig& cfg);
int cmd_enhance(const RunConfig& cfg, double gamma);
int cmd_recolor(const RunConfig& cfg, const std::string& mask_path,
                const std::string& swatch);
int cmd_eval_whdr(const std::string& pred_path, const std::string& judgments_path,
                  double delta);
int cmd_bench(const std::string& dataset_dir, const std::string& priors_dir,
              const SolverParams& params, const std::string& out_csv, int workers);

/// Parse arguments (excluding the program name) and run the selected
/// subcommand. Returns the process exit status.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

}  // namespace intrinsic::cli
