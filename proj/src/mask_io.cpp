#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "obscert/errors.hpp"
#include "obscert/geometry.hpp"

namespace obscert {

void write_mask(std::ostream& out, const MeasurableSet& set) {
  const Grid& grid = set.grid();
  char cell[96];
  std::snprintf(cell, sizeof cell, "# cell %.17g %.17g", grid.h(0), grid.h(1));
  out << "P1\n" << cell << '\n' << grid.cells(0) << ' ' << grid.cells(1) << '\n';
  for (int j = 0; j < grid.cells(1); ++j) {
    std::string row;
    row.reserve(2 * static_cast<std::size_t>(grid.cells(0)));
    for (int i = 0; i < grid.cells(0); ++i) {
      if (i > 0) row.push_back(' ');
      row.push_back(set.contains_cell(grid.index(i, j)) ? '1' : '0');
    }
    out << row << '\n';
  }
}

namespace {

// Reads the next header token, collecting `# cell` comments on the way.
std::string next_token(std::istream& in, double cell_size[2], bool& has_cell) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      std::istringstream comment(line);
      std::string key;
      if (comment >> key && key == "cell" && comment >> cell_size[0] >> cell_size[1])
        has_cell = true;
      if (!token.empty()) return token;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

MeasurableSet read_mask(std::istream& in, const Grid& grid) {
  double cell_size[2] = {0.0, 0.0};
  bool has_cell = false;
  if (next_token(in, cell_size, has_cell) != "P1")
    throw Error(Stage::config, "mask: expected a plain PBM (P1) file");
  int nx = 0;
  int ny = 0;
  try {
    nx = std::stoi(next_token(in, cell_size, has_cell));
    ny = std::stoi(next_token(in, cell_size, has_cell));
  } catch (const std::exception&) {
    throw Error(Stage::config, "mask: malformed dimensions");
  }
  if (nx != grid.cells(0) || ny != grid.cells(1))
    throw Error(Stage::config, "mask: dimensions " + std::to_string(nx) + "x" +
                                   std::to_string(ny) + " do not match the grid");
  if (has_cell && (!close(cell_size[0], grid.h(0)) || !close(cell_size[1], grid.h(1))))
    throw Error(Stage::config, "mask: cell size does not match the grid");

  std::vector<std::uint8_t> mask(grid.size(), 0);
  std::size_t filled = 0;
  char c;
  while (filled < mask.size() && in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (c == '0' || c == '1') {
      const std::size_t i = filled % static_cast<std::size_t>(nx);
      const std::size_t j = filled / static_cast<std::size_t>(nx);
      mask[grid.index(static_cast<int>(i), static_cast<int>(j))] = c == '1' ? 1 : 0;
      ++filled;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw Error(Stage::config, std::string("mask: unexpected character '") + c + "'");
    }
  }
  if (filled != mask.size()) throw Error(Stage::config, "mask: truncated raster");
  return MeasurableSet(grid, std::move(mask));
}

}  // namespace obscert
