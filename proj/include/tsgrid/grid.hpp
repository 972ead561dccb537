#pragma once

// N-dimensional index surface over the load-sweep lattice. Row-major
// storage over axes sorted by load id; gaps are NaN markers.

#include <cmath>
#include <string>
#include <vector>

#include "tsgrid/network.hpp"

namespace tsgrid {

struct IndexGrid {
  std::string index_name;
  int fault_id = 0;
  std::vector<int> axis_load_ids;                  // one per dimension
  std::vector<std::vector<double>> axis_coords;    // strictly increasing fractions
  std::vector<double> values;                      // row-major, NaN = gap

  int dims() const { return static_cast<int>(axis_coords.size()); }

  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& ax : axis_coords) s *= ax.size();
    return s;
  }

  std::size_t flat_index(const std::vector<std::size_t>& coord) const {
    std::size_t idx = 0;
    for (std::size_t d = 0; d < axis_coords.size(); ++d)
      idx = idx * axis_coords[d].size() + coord[d];
    return idx;
  }

  bool has_gaps() const {
    for (double v : values)
      if (std::isnan(v)) return true;
    return false;
  }

  std::vector<std::size_t> gap_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (std::isnan(values[i])) out.push_back(i);
    return out;
  }
};

}  // namespace tsgrid
