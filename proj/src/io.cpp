#include "delaywave/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace delaywave {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

std::string energy_csv(std::span<const EnergySample> samples) {
  std::string out;
  out += "t,e_standard,e_delay,e_total,s_func,mult_term,lyap,boundary_diss\n";
  for (const auto& s : samples) {
    out += format_double(s.t);
    out += ',';
    out += format_double(s.e_standard);
    out += ',';
    out += format_double(s.e_delay);
    out += ',';
    out += format_double(s.e_total);
    out += ',';
    out += format_double(s.s_func);
    out += ',';
    out += format_double(s.mult_term);
    out += ',';
    out += format_double(s.lyap);
    out += ',';
    out += format_double(s.boundary_diss);
    out += '\n';
  }
  return out;
}

void write_energy_csv(const std::filesystem::path& path,
                      std::span<const EnergySample> samples) {
  write_text(path, energy_csv(samples));
}

std::string snapshot_csv(double t, const Grid1D& grid,
                         std::span<const double> u, std::span<const double> v) {
  std::string out = "# t=" + format_double(t) + "\n";
  for (int i = 0; i < grid.nx; ++i) {
    out += format_double(grid.x(i));
    out += ',';
    out += format_double(u[i]);
    out += ',';
    out += format_double(v[i]);
    out += '\n';
  }
  return out;
}

std::string snapshot_csv(double t, const Grid2D& grid,
                         std::span<const double> u, std::span<const double> v) {
  std::string out = "# t=" + format_double(t) + "\n";
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const auto k = grid.idx(i, j);
      out += format_double(grid.x(i));
      out += ',';
      out += format_double(grid.y(j));
      out += ',';
      out += format_double(u[k]);
      out += ',';
      out += format_double(v[k]);
      out += '\n';
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace delaywave
