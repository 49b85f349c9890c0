#pragma once

// Data behind each published figure, one CSV per panel plus a manifest.

#include "qfb/csv.hpp"
#include "qfb/dynamics.hpp"
#include "qfb/sweep.hpp"

#include <string>
#include <vector>

namespace qfb {

struct FigureOptions {
  EvolveOptions evolve{};
  std::size_t grid_n = 81;
  double t_max = 10.0;
  /// Comment lines copied into every file (tool, version, command echo).
  std::vector<std::string> header;
};

const std::vector<std::string>& figure_ids();

/// Long-format table: one column per axis then the value; missing cells are
/// NaN and their reasons are listed in the comments.
CsvTable to_csv(const SweepTable& t, const std::string& value_name,
                const std::vector<std::string>& header = {});

/// Writes fig{N}_panel{k}.csv and fig{N}_manifest.txt into outdir and
/// returns the paths written. Throws UsageError for an unknown id and
/// IoError when outdir is not writable.
std::vector<std::string> reproduce_figure(const std::string& id, const std::string& outdir,
                                          const FigureOptions& opt = {});

}  // namespace qfb
