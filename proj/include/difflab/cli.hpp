// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace difflab {

inline constexpr const char* kVersion = "0.1.0";

/// The `difflab` command line, callable in-process. `args` excludes the
/// program name. Returns the process exit code: 0 on success, 1 on
/// configuration, I/O or numeric failures, 2 on usage errors, 3 when a
/// replay does not reproduce the recorded outputs.
///
/// Every command writes manifest.json into its output directory: command,
/// arguments, config hash, library version, master seed, wall time and a
/// digest of every deterministic output file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct GammaGrid {
  double start = 0.0, stop = 0.0, step = 0.0;
  std::vector<double> values() const;
};

/// Parses "start:stop:step"; count = floor((stop - start) / step) + 1.
GammaGrid parse_gamma_grid(const std::string& spec);

}  // namespace difflab
