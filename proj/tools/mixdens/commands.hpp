#pragma once

#include <CLI11.hpp>

namespace mixdens::cli {

void register_simulate(CLI::App& app);
void register_fit(CLI::App& app);
void register_posterior(CLI::App& app);
void register_evaluate(CLI::App& app);
void register_coverage(CLI::App& app);
void register_cv(CLI::App& app);
void register_sensitivity(CLI::App& app);

}  // namespace mixdens::cli
