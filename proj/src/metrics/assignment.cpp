#include <algorithm>
#include <limits>
#include <string>

#include "rosecdl/errors.hpp"
#include "rosecdl/metrics.hpp"

namespace rosecdl {

// Shortest augmenting path Hungarian method with potentials, on costs
// -weights. Rows and columns are 1-based inside the loop; index 0 is the
// virtual source column.
std::vector<std::size_t> max_weight_assignment(std::span<const double> weights, std::size_t rows,
                                               std::size_t cols) {
  if (rows > cols) throw DimensionError("assignment needs rows <= cols");
  if (weights.size() != rows * cols) throw DimensionError("assignment weight matrix size mismatch");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> match(cols + 1, 0), way(cols + 1, 0);
  auto cost = [&](std::size_t i, std::size_t j) { return -weights[(i - 1) * cols + (j - 1)]; };

  for (std::size_t i = 1; i <= rows; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> out(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (match[j] != 0) out[match[j] - 1] = j - 1;
  }
  return out;
}

}  // namespace rosecdl
