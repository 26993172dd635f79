#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pulsediff::diffusion {

enum class PriorMode { input, none };

PriorMode parse_prior_mode(std::string_view name);
std::string_view to_string(PriorMode mode);

struct DenoiserConfig {
  std::size_t residual_blocks = 4;
  std::size_t channels = 32;
  std::size_t kernel = 3;
  std::size_t dilation_cycle = 4;
  std::size_t step_embed_dim = 64;
  std::size_t prior_channels = 16;
  PriorMode prior_mode = PriorMode::input;

  void validate() const;
  /// x_t, observed values, mask, then the prior rows when prior_mode=input.
  std::size_t input_channels() const;
  std::size_t dilation(std::size_t block) const;
};

/// A named slice of the flat parameter vector, viewed as a column-major
/// rows x cols matrix.
struct TensorSlot {
  std::string name;
  std::size_t offset;
  std::size_t rows;
  std::size_t cols;
  std::size_t size() const { return rows * cols; }
};

std::vector<TensorSlot> parameter_layout(const DenoiserConfig& cfg);
std::size_t parameter_count(const DenoiserConfig& cfg);

struct DenoiserParams {
  DenoiserConfig config;
  Eigen::VectorXd theta;
};

/// Kernels and biases uniform in +-1/sqrt(fan_in); the output head starts at
/// zero so the initial noise estimate is identically zero.
DenoiserParams init_params(const DenoiserConfig& cfg, std::uint64_t seed);

/// Conditioning inputs, each of length L. prior_rows is K x L row-major and
/// ignored when the network was configured with prior_mode=none.
struct Conditioning {
  std::span<const double> x_obs;
  std::span<const std::uint8_t> mask;
  std::span<const double> prior_rows;
  std::size_t prior_k = 0;
};

/// Noise estimate of a DiffWave-style network: 1x1 input projection,
/// residual blocks of gated dilated convolutions with the embedded step added
/// to each block input, and a two-layer 1x1 head over the summed skips.
std::vector<double> denoiser_forward(const DenoiserParams& params, std::span<const double> x_t, std::size_t t,
                                     const Conditioning& cond);

/// Forward pass followed by backpropagation. grad_output_fn maps the
/// network output to dLoss/dOutput; grad holds dLoss/dtheta.
struct ForwardGrad {
  std::vector<double> output;
  Eigen::VectorXd grad;
};

ForwardGrad denoiser_forward_backward(
    const DenoiserParams& params, std::span<const double> x_t, std::size_t t, const Conditioning& cond,
    const std::function<std::vector<double>(std::span<const double>)>& grad_output_fn);

}  // namespace pulsediff::diffusion
