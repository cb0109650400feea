#pragma once

#include <span>
#include <vector>

namespace clicksel::kernels {

// 3×3 convolution, stride 1, zero padding equal to the dilation, so the
// output keeps the input's H×W. Tensors are planar CHW; weights are laid out
// [out][in][ky][kx].
struct ConvShape {
  int in_channels = 0;
  int out_channels = 0;
  int height = 0;
  int width = 0;
  int dilation = 1;

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  std::size_t input_size() const { return plane() * in_channels; }
  std::size_t output_size() const { return plane() * out_channels; }
  std::size_t weight_size() const { return static_cast<std::size_t>(in_channels) * out_channels * 9; }
};

template <typename T>
struct ConvWorkspace {
  std::vector<T> columns;
  std::vector<T> grad_columns;
};

/// im2col + GEMM, OpenMP-parallel over column blocks.
template <typename T>
void conv2d_forward(const ConvShape& shape, std::span<const T> input, std::span<const T> weights,
                    std::span<const T> bias, std::span<T> output, ConvWorkspace<T>& ws);

/// Accumulates into grad_weights and grad_bias; overwrites grad_input unless it is empty.
/// `ws.columns` must still hold the im2col buffer of the matching forward call.
template <typename T>
void conv2d_backward(const ConvShape& shape, std::span<const T> weights,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weights, std::span<T> grad_bias, ConvWorkspace<T>& ws);

/// Direct seven-loop reference used by the tests and the benchmark.
template <typename T>
void conv2d_forward_reference(const ConvShape& shape, std::span<const T> input,
                              std::span<const T> weights, std::span<const T> bias,
                              std::span<T> output);

template <typename T>
void conv2d_backward_reference(const ConvShape& shape, std::span<const T> input,
                               std::span<const T> weights, std::span<const T> grad_output,
                               std::span<T> grad_input, std::span<T> grad_weights,
                               std::span<T> grad_bias);

}  // namespace clicksel::kernels
