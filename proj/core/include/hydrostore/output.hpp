#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "hydrostore/diagnostics.hpp"
#include "hydrostore/state.hpp"

namespace hydrostore {

/// Column order of the time-series CSV.
inline constexpr const char* kTimeseriesHeader =
    "t,mass,energy,J,phi1,phi2,min_chi,max_chi,min_u,min_theta,energy_res,dissip_res,outer_iters";

/// Printf-style %.17g, which round-trips every double through strtod.
std::string format_double(double v);

/// One CSV row per record; unavailable entries print as NA. Byte-identical for
/// identical input.
void write_timeseries(std::span<const DiagnosticsRecord> records, const std::filesystem::path& path);

/// One comment line with t and the grid layout, a header, then one row per node in
/// lexicographic order: x[,y],e,theta,chi,xi,u,p.
void write_snapshot(const State& state, const std::filesystem::path& path);

/// Inverse of write_snapshot. Throws ValidationError on a grid mismatch and
/// ParseError (with line) on malformed or truncated files.
State read_snapshot(const std::filesystem::path& path, const GridPtr& grid);

}  // namespace hydrostore
