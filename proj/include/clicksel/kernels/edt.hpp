#pragma once

#include <cstdint>
#include <limits>

#include "clicksel/image.hpp"
#include "clicksel/kernels/exec.hpp"

namespace clicksel::kernels {

/// Marks cells whose nearest seed does not exist (seed set empty).
inline constexpr std::int64_t kNoSeed = std::numeric_limits<std::int64_t>::max();

/// Exact squared Euclidean distance from every cell to the nearest nonzero
/// cell of `seeds`. Separable two-pass transform: a 1-D scan down each
/// column, then a lower-envelope pass along each row. All arithmetic is in
/// integers, so the result is exact. Cells get kNoSeed if there are no seeds.
Grid<std::int64_t> squared_edt(const Grid<std::uint8_t>& seeds, Exec exec = Exec::parallel);

/// Same transform with a ring of seeds one cell outside the grid, i.e. the
/// image frame counts as a source.
Grid<std::int64_t> squared_edt_framed(const Grid<std::uint8_t>& seeds,
                                      Exec exec = Exec::parallel);

}  // namespace clicksel::kernels
