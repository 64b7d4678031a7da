#pragma once

#include <string>

#include "widthlab/csv.hpp"

namespace widthlab::svg {

// All plots render to a standalone 800x500 SVG 1.1 document with no
// external references; byte output is deterministic for a given table.
enum class PlotKind {
  // Log-x line plot of mean_dist vs width, one marker-per-point series per
  // (dataset, seed). Needs columns: width, seed, mean_dist; rows with an
  // `ok` column not equal to 1 are skipped.
  kConvergence,
  // Mean +/- 1 SD bands over a shared x column. Autodetects every
  // "<name>_mean" column with a matching "<name>_var" and draws one band
  // per pair. Needs column: x.
  kBand,
  // Histogram bars. Needs columns: width, bin_left, bin_right, count; one
  // translucent series per width.
  kBars,
};

// Parses "convergence" | "band" | "bars"; throws std::invalid_argument.
PlotKind plot_kind_from_name(const std::string& name);

// Renders the table; throws std::runtime_error naming the missing columns
// when the schema does not match the kind. An empty table renders a valid
// axes-only document.
std::string render_plot(const csv::Table& table, PlotKind kind,
                        const std::string& title = "");

// render_plot + write to file.
void write_plot(const std::string& path, const csv::Table& table, PlotKind kind,
                const std::string& title = "");

}  // namespace widthlab::svg
