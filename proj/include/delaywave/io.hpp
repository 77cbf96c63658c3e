#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "delaywave/core.hpp"

namespace delaywave {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

std::string energy_csv(std::span<const EnergySample> samples);
void write_energy_csv(const std::filesystem::path& path,
                      std::span<const EnergySample> samples);

// Snapshot format: one "# t=<time>" comment line, then "x,u,v" rows
// (1D) or "x,y,u,v" rows (2D).
std::string snapshot_csv(double t, const Grid1D& grid,
                         std::span<const double> u, std::span<const double> v);
std::string snapshot_csv(double t, const Grid2D& grid,
                         std::span<const double> u, std::span<const double> v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace delaywave
