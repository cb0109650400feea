#include "clicksel/kernels/conv.hpp"

#include <Eigen/Core>

#include <algorithm>

namespace clicksel::kernels {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
void im2col(const ConvShape& s, std::span<const T> input, std::span<T> cols) {
  const int h = s.height;
  const int w = s.width;
  const int d = s.dilation;
  const int rows = s.in_channels * 9;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < rows; ++row) {
    const int ci = row / 9;
    const int dy = (row % 9 / 3 - 1) * d;
    const int dx = (row % 3 - 1) * d;
    const T* src = input.data() + static_cast<std::size_t>(ci) * s.plane();
    T* dst = cols.data() + static_cast<std::size_t>(row) * s.plane();
    const int x0 = std::max(0, -dx);
    const int x1 = std::min(w, w - dx);
    for (int y = 0; y < h; ++y) {
      T* out = dst + static_cast<std::size_t>(y) * w;
      const int sy = y + dy;
      if (sy < 0 || sy >= h || x0 >= x1) {
        std::fill(out, out + w, T(0));
        continue;
      }
      std::fill(out, out + x0, T(0));
      const T* in = src + static_cast<std::size_t>(sy) * w + dx;
      std::copy(in + x0, in + x1, out + x0);
      std::fill(out + x1, out + w, T(0));
    }
  }
}

template <typename T>
void col2im(const ConvShape& s, std::span<const T> cols, std::span<T> grad_input) {
  const int h = s.height;
  const int w = s.width;
  const int d = s.dilation;
  std::fill(grad_input.begin(), grad_input.end(), T(0));
  // Each input channel owns nine consecutive column rows, so channels never collide.
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < s.in_channels; ++ci) {
    T* dst = grad_input.data() + static_cast<std::size_t>(ci) * s.plane();
    for (int k = 0; k < 9; ++k) {
      const int dy = (k / 3 - 1) * d;
      const int dx = (k % 3 - 1) * d;
      const T* src = cols.data() + static_cast<std::size_t>(ci * 9 + k) * s.plane();
      const int x0 = std::max(0, -dx);
      const int x1 = std::min(w, w - dx);
      for (int y = 0; y < h; ++y) {
        const int sy = y + dy;
        if (sy < 0 || sy >= h) continue;
        const T* g = src + static_cast<std::size_t>(y) * w;
        T* o = dst + static_cast<std::size_t>(sy) * w + dx;
        for (int x = x0; x < x1; ++x) o[x] += g[x];
      }
    }
  }
}

}  // namespace

template <typename T>
void conv2d_forward(const ConvShape& s, std::span<const T> input, std::span<const T> weights,
                    std::span<const T> bias, std::span<T> output, ConvWorkspace<T>& ws) {
  const auto hw = static_cast<Eigen::Index>(s.plane());
  const auto k = static_cast<Eigen::Index>(s.in_channels) * 9;
  ws.columns.resize(static_cast<std::size_t>(k * hw));
  im2col<T>(s, input, ws.columns);

  ConstMatrixMap<T> wmat(weights.data(), s.out_channels, k);
  ConstMatrixMap<T> cols(ws.columns.data(), k, hw);
  MatrixMap<T> out(output.data(), s.out_channels, hw);
  out.noalias() = wmat * cols;
  for (int co = 0; co < s.out_channels; ++co) out.row(co).array() += bias[co];
}

template <typename T>
void conv2d_backward(const ConvShape& s, std::span<const T> weights,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weights, std::span<T> grad_bias, ConvWorkspace<T>& ws) {
  const auto hw = static_cast<Eigen::Index>(s.plane());
  const auto k = static_cast<Eigen::Index>(s.in_channels) * 9;

  ConstMatrixMap<T> gout(grad_output.data(), s.out_channels, hw);
  ConstMatrixMap<T> cols(ws.columns.data(), k, hw);
  MatrixMap<T> gw(grad_weights.data(), s.out_channels, k);
  gw.noalias() += gout * cols.transpose();
  // Plain loop: Eigen's vectorized sum peels by runtime alignment, so its
  // rounding would depend on where the buffer was allocated.
  for (int co = 0; co < s.out_channels; ++co) {
    const T* g = grad_output.data() + static_cast<std::size_t>(co) * s.plane();
    T acc = 0;
    for (std::size_t i = 0; i < s.plane(); ++i) acc += g[i];
    grad_bias[co] += acc;
  }

  if (grad_input.empty()) return;
  ConstMatrixMap<T> wmat(weights.data(), s.out_channels, k);
  ws.grad_columns.resize(static_cast<std::size_t>(k * hw));
  MatrixMap<T> gcols(ws.grad_columns.data(), k, hw);
  gcols.noalias() = wmat.transpose() * gout;
  col2im<T>(s, ws.grad_columns, grad_input);
}

template <typename T>
void conv2d_forward_reference(const ConvShape& s, std::span<const T> input,
                              std::span<const T> weights, std::span<const T> bias,
                              std::span<T> output) {
  const int h = s.height;
  const int w = s.width;
  for (int co = 0; co < s.out_channels; ++co)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        T acc = bias[co];
        for (int ci = 0; ci < s.in_channels; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + (ky - 1) * s.dilation;
              const int sx = x + (kx - 1) * s.dilation;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += weights[((co * s.in_channels + ci) * 3 + ky) * 3 + kx] *
                     input[(static_cast<std::size_t>(ci) * h + sy) * w + sx];
            }
        output[(static_cast<std::size_t>(co) * h + y) * w + x] = acc;
      }
}

template <typename T>
void conv2d_backward_reference(const ConvShape& s, std::span<const T> input,
                               std::span<const T> weights, std::span<const T> grad_output,
                               std::span<T> grad_input, std::span<T> grad_weights,
                               std::span<T> grad_bias) {
  const int h = s.height;
  const int w = s.width;
  std::fill(grad_input.begin(), grad_input.end(), T(0));
  for (int co = 0; co < s.out_channels; ++co)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const T g = grad_output[(static_cast<std::size_t>(co) * h + y) * w + x];
        grad_bias[co] += g;
        for (int ci = 0; ci < s.in_channels; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + (ky - 1) * s.dilation;
              const int sx = x + (kx - 1) * s.dilation;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              const auto wi = static_cast<std::size_t>(((co * s.in_channels + ci) * 3 + ky) * 3 + kx);
              const auto ii = (static_cast<std::size_t>(ci) * h + sy) * w + sx;
              grad_weights[wi] += g * input[ii];
              if (!grad_input.empty()) grad_input[ii] += g * weights[wi];
            }
      }
}

#define CLICKSEL_INSTANTIATE_CONV(T)                                                         \
  template void conv2d_forward<T>(const ConvShape&, std::span<const T>, std::span<const T>, \
                                  std::span<const T>, std::span<T>, ConvWorkspace<T>&);      \
  template void conv2d_backward<T>(const ConvShape&, std::span<const T>, std::span<const T>, \
                                   std::span<T>, std::span<T>, std::span<T>,                 \
                                   ConvWorkspace<T>&);                                       \
  template void conv2d_forward_reference<T>(const ConvShape&, std::span<const T>,            \
                                            std::span<const T>, std::span<const T>,          \
                                            std::span<T>);                                   \
  template void conv2d_backward_reference<T>(const ConvShape&, std::span<const T>,           \
                                             std::span<const T>, std::span<const T>,         \
                                             std::span<T>, std::span<T>, std::span<T>);

CLICKSEL_INSTANTIATE_CONV(float)
CLICKSEL_INSTANTIATE_CONV(double)

#undef CLICKSEL_INSTANTIATE_CONV

}  // namespace clicksel::kernels
