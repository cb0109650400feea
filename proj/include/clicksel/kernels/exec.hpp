#pragma once

namespace clicksel::kernels {

/// Selects between the OpenMP kernel and its single-threaded twin.
enum class Exec { serial, parallel };

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();
void set_threads(int count);

}  // namespace clicksel::kernels
