#pragma once

#include <cstddef>
#include <vector>

namespace mrc {
namespace detail {

template <typename Fn>
void lattice_recurse(std::vector<double>& point, std::size_t cell, std::size_t remaining,
                     double inv_steps, Fn& fn) {
  if (cell + 1 == point.size()) {
    point[cell] = static_cast<double>(remaining) * inv_steps;
    fn(static_cast<const std::vector<double>&>(point));
    return;
  }
  for (std::size_t k = 0; k <= remaining; ++k) {
    point[cell] = static_cast<double>(k) * inv_steps;
    lattice_recurse(point, cell + 1, remaining - k, inv_steps, fn);
  }
}

}  // namespace detail

template <typename Fn>
void for_each_simplex_point(std::size_t cells, std::size_t steps, Fn&& fn) {
  if (cells == 0) return;
  std::vector<double> point(cells, 0.0);
  detail::lattice_recurse(point, 0, steps, 1.0 / static_cast<double>(steps), fn);
}

}  // namespace mrc
