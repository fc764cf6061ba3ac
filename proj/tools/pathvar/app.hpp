#pragma once

namespace pathvar::cli {

/// Command-line entry point: `pathvar run <config.json> [--output-dir DIR]
/// [--seed S] [--threads K]`. Exit codes: 0 pass, 2 assertion failure,
/// 1 configuration or runtime error.
int main_entry(int argc, char** argv);

}  // namespace pathvar::cli
