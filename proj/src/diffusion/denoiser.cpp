#include "pulsediff/diffusion/denoiser.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pulsediff/error.hpp"
#include "pulsediff/rng.hpp"

namespace pulsediff::diffusion {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMap = Eigen::Map<const MatrixXd>;
using MutMap = Eigen::Map<MatrixXd>;

PriorMode parse_prior_mode(std::string_view name) {
  if (name == "input") return PriorMode::input;
  if (name == "none") return PriorMode::none;
  throw Error(Errc::invalid_argument, "unknown prior mode '" + std::string(name) + "'");
}

std::string_view to_string(PriorMode mode) { return mode == PriorMode::input ? "input" : "none"; }

void DenoiserConfig::validate() const {
  if (residual_blocks < 1 || channels < 1 || dilation_cycle < 1) {
    throw Error(Errc::invalid_argument, "denoiser sizes must be positive");
  }
  if (kernel != 3) throw Error(Errc::invalid_argument, "only kernel size 3 is supported");
  if (step_embed_dim < 2 || step_embed_dim % 2 != 0) {
    throw Error(Errc::invalid_argument, "step embedding dimension must be even and >= 2");
  }
  if (prior_mode == PriorMode::input && prior_channels < 1) {
    throw Error(Errc::invalid_argument, "prior_mode=input needs at least one prior channel");
  }
}

std::size_t DenoiserConfig::input_channels() const {
  return 3 + (prior_mode == PriorMode::input ? prior_channels : 0);
}

std::size_t DenoiserConfig::dilation(std::size_t block) const {
  return std::size_t{1} << (block % dilation_cycle);
}

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Slot order is fixed; Layout relies on it when binding views.
enum SlotId : std::size_t {
  kEmbW1, kEmbB1, kEmbW2, kEmbB2, kInW, kInB, kSkipW, kSkipB, kOutW, kOutB, kFirstBlock
};
constexpr std::size_t kSlotsPerBlock = 6;  // step.w, step.b, conv.w, conv.b, out.w, out.b

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<TensorSlot> parameter_layout(const DenoiserConfig& cfg) {
  cfg.validate();
  const std::size_t e = cfg.step_embed_dim;
  const std::size_t c = cfg.channels;
  std::vector<TensorSlot> slots;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    slots.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  add("embed.fc1.weight", e, e);
  add("embed.fc1.bias", e, 1);
  add("embed.fc2.weight", e, e);
  add("embed.fc2.bias", e, 1);
  add("input.weight", c, cfg.input_channels());
  add("input.bias", c, 1);
  add("skip.weight", c, c);
  add("skip.bias", c, 1);
  add("output.weight", 1, c);
  add("output.bias", 1, 1);
  for (std::size_t b = 0; b < cfg.residual_blocks; ++b) {
    const std::string p = "blocks." + std::to_string(b) + ".";
    add(p + "step.weight", c, e);
    add(p + "step.bias", c, 1);
    add(p + "conv.weight", 2 * c, 3 * c);  // taps at -d, 0, +d side by side
    add(p + "conv.bias", 2 * c, 1);
    add(p + "out.weight", 2 * c, c);
    add(p + "out.bias", 2 * c, 1);
  }
  return slots;
}

std::size_t parameter_count(const DenoiserConfig& cfg) {
  const auto slots = parameter_layout(cfg);
  return slots.back().offset + slots.back().size();
}

DenoiserParams init_params(const DenoiserConfig& cfg, std::uint64_t seed) {
  const auto slots = parameter_layout(cfg);
  DenoiserParams p{cfg, VectorXd::Zero(static_cast<Index>(parameter_count(cfg)))};
  Rng rng = make_rng(seed, "denoiser.init");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i == kOutW || i == kOutB) continue;
    const TensorSlot& s = slots[i];
    // Biases share the fan-in of the weight slot just before them.
    const TensorSlot& w = s.cols == 1 && i > 0 ? slots[i - 1] : s;
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t j = 0; j < s.size(); ++j) p.theta[static_cast<Index>(s.offset + j)] = dist(rng);
  }
  return p;
}

namespace {

// Matrix views over a parameter-shaped vector (parameters or gradient).
template <typename MapT, typename Ptr>
struct Layout {
  struct Block {
    MapT step_w, step_b, conv_w, conv_b, out_w, out_b;
  };
  MapT emb_w1, emb_b1, emb_w2, emb_b2, in_w, in_b, skip_w, skip_b, out_w, out_b;
  std::vector<Block> blocks;

  static MapT view(Ptr base, const TensorSlot& s) {
    return MapT(base + s.offset, static_cast<Index>(s.rows), static_cast<Index>(s.cols));
  }

  Layout(Ptr base, const std::vector<TensorSlot>& s, std::size_t n_blocks)
      : emb_w1(view(base, s[kEmbW1])),
        emb_b1(view(base, s[kEmbB1])),
        emb_w2(view(base, s[kEmbW2])),
        emb_b2(view(base, s[kEmbB2])),
        in_w(view(base, s[kInW])),
        in_b(view(base, s[kInB])),
        skip_w(view(base, s[kSkipW])),
        skip_b(view(base, s[kSkipB])),
        out_w(view(base, s[kOutW])),
        out_b(view(base, s[kOutB])) {
    blocks.reserve(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t k = kFirstBlock + b * kSlotsPerBlock;
      blocks.push_back({view(base, s[k]), view(base, s[k + 1]), view(base, s[k + 2]), view(base, s[k + 3]),
                        view(base, s[k + 4]), view(base, s[k + 5])});
    }
  }
};

using ParamLayout = Layout<ConstMap, const double*>;
using GradLayout = Layout<MutMap, double*>;

VectorXd step_embedding(std::size_t t, std::size_t dim) {
  const std::size_t half = dim / 2;
  VectorXd e(static_cast<Index>(dim));
  for (std::size_t j = 0; j < half; ++j) {
    const double exponent = half > 1 ? 4.0 * static_cast<double>(j) / static_cast<double>(half - 1) : 0.0;
    const double arg = static_cast<double>(t) * std::pow(10.0, exponent);
    e[static_cast<Index>(j)] = std::sin(arg);
    e[static_cast<Index>(j + half)] = std::cos(arg);
  }
  return e;
}

VectorXd swish(const VectorXd& u) { return u.unaryExpr([](double x) { return x * sigmoid(x); }); }

VectorXd swish_grad(const VectorXd& u) {
  return u.unaryExpr([](double x) {
    const double s = sigmoid(x);
    return s + x * s * (1.0 - s);
  });
}

// Same-padded dilated convolution with three taps at offsets -d, 0, +d.
void dilated_conv(const ConstMap& w, const MatrixXd& y, std::size_t dilation, MatrixXd& z) {
  const Index c = y.rows();
  const Index n = y.cols();
  const auto d = static_cast<Index>(dilation);
  z.noalias() += w.middleCols(c, c) * y;
  if (d < n) {
    z.rightCols(n - d).noalias() += w.leftCols(c) * y.leftCols(n - d);
    z.leftCols(n - d).noalias() += w.rightCols(c) * y.rightCols(n - d);
  }
}

}  // namespace

namespace detail {

struct BlockCache {
  MatrixXd h_in;   // block input, C x L
  MatrixXd y;      // input plus step projection
  MatrixXd act_a;  // tanh half
  MatrixXd act_g;  // sigmoid half
  MatrixXd gated;
};

struct ForwardCache {
  VectorXd e0, u1, h1, u2, h2;
  MatrixXd input, u_in;
  std::vector<BlockCache> blocks;
  MatrixXd skip_scaled, u_skip, r;
};

}  // namespace detail

namespace {

MatrixXd build_input(const DenoiserConfig& cfg, std::span<const double> x_t, const Conditioning& cond) {
  const std::size_t n = x_t.size();
  if (n == 0) throw Error(Errc::invalid_argument, "denoiser input is empty");
  if (cond.x_obs.size() != n || cond.mask.size() != n) {
    throw Error(Errc::invalid_argument, "conditioning length does not match x_t");
  }
  const bool with_prior = cfg.prior_mode == PriorMode::input;
  if (with_prior && (cond.prior_k != cfg.prior_channels || cond.prior_rows.size() != cond.prior_k * n)) {
    throw Error(Errc::invalid_argument, "prior has " + std::to_string(cond.prior_k) + " rows, network expects " +
                                            std::to_string(cfg.prior_channels));
  }
  MatrixXd in(static_cast<Index>(cfg.input_channels()), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Index>(i);
    in(0, col) = x_t[i];
    in(1, col) = cond.x_obs[i];
    in(2, col) = cond.mask[i] ? 1.0 : 0.0;
  }
  if (with_prior) {
    for (std::size_t k = 0; k < cond.prior_k; ++k) {
      for (std::size_t i = 0; i < n; ++i) in(static_cast<Index>(3 + k), static_cast<Index>(i)) = cond.prior_rows[k * n + i];
    }
  }
  return in;
}

}  // namespace

namespace detail {

std::vector<double> forward_impl(const DenoiserParams& params, std::span<const double> x_t, std::size_t t,
                                 const Conditioning& cond, ForwardCache* cache) {
  const DenoiserConfig& cfg = params.config;
  const auto slots = parameter_layout(cfg);
  if (static_cast<std::size_t>(params.theta.size()) != slots.back().offset + slots.back().size()) {
    throw Error(Errc::invalid_argument, "parameter vector does not match the denoiser config");
  }
  const ParamLayout P(params.theta.data(), slots, cfg.residual_blocks);

  MatrixXd input = build_input(cfg, x_t, cond);

  const VectorXd e0 = step_embedding(t, cfg.step_embed_dim);
  const VectorXd u1 = P.emb_w1 * e0 + P.emb_b1.col(0);
  const VectorXd h1 = swish(u1);
  const VectorXd u2 = P.emb_w2 * h1 + P.emb_b2.col(0);
  const VectorXd h2 = swish(u2);

  MatrixXd u_in = P.in_w * input;
  u_in.colwise() += P.in_b.col(0);
  MatrixXd h = u_in.cwiseMax(0.0);

  const Index c = static_cast<Index>(cfg.channels);
  const Index n = input.cols();
  MatrixXd skip = MatrixXd::Zero(c, n);
  if (cache) cache->blocks.resize(cfg.residual_blocks);

  for (std::size_t b = 0; b < cfg.residual_blocks; ++b) {
    const auto& B = P.blocks[b];
    const VectorXd step = B.step_w * h2 + B.step_b.col(0);
    MatrixXd y = h;
    y.colwise() += step;

    MatrixXd z(2 * c, n);
    z.colwise() = B.conv_b.col(0);
    dilated_conv(B.conv_w, y, cfg.dilation(b), z);

    MatrixXd act_a = z.topRows(c).array().tanh();
    MatrixXd act_g = z.bottomRows(c).unaryExpr([](double v) { return sigmoid(v); });
    MatrixXd gated = act_a.cwiseProduct(act_g);

    MatrixXd o = B.out_w * gated;
    o.colwise() += B.out_b.col(0);

    MatrixXd h_next = (h + o.topRows(c)) * kInvSqrt2;
    skip += o.bottomRows(c);
    if (cache) {
      auto& bc = cache->blocks[b];
      bc.h_in = std::move(h);
      bc.y = std::move(y);
      bc.act_a = std::move(act_a);
      bc.act_g = std::move(act_g);
      bc.gated = std::move(gated);
    }
    h = std::move(h_next);
  }

  MatrixXd skip_scaled = skip / std::sqrt(static_cast<double>(cfg.residual_blocks));
  MatrixXd u_skip = P.skip_w * skip_scaled;
  u_skip.colwise() += P.skip_b.col(0);
  MatrixXd r = u_skip.cwiseMax(0.0);
  Eigen::RowVectorXd out = P.out_w * r;
  out.array() += P.out_b(0, 0);

  if (cache) {
    cache->e0 = e0;
    cache->u1 = u1;
    cache->h1 = h1;
    cache->u2 = u2;
    cache->h2 = h2;
    cache->input = std::move(input);
    cache->u_in = std::move(u_in);
    cache->skip_scaled = std::move(skip_scaled);
    cache->u_skip = std::move(u_skip);
    cache->r = std::move(r);
  }
  return std::vector<double>(out.data(), out.data() + out.size());
}

VectorXd backward_impl(const DenoiserParams& params, const ForwardCache& cache, std::span<const double> grad_output) {
  const DenoiserConfig& cfg = params.config;
  const auto slots = parameter_layout(cfg);
  const ParamLayout P(params.theta.data(), slots, cfg.residual_blocks);
  VectorXd grad = VectorXd::Zero(params.theta.size());
  GradLayout G(grad.data(), slots, cfg.residual_blocks);

  const Index c = static_cast<Index>(cfg.channels);
  const Index n = cache.input.cols();
  if (static_cast<Index>(grad_output.size()) != n) throw Error(Errc::invalid_argument, "output gradient length mismatch");
  const Eigen::Map<const Eigen::RowVectorXd> d_out(grad_output.data(), n);

  // Head.
  G.out_w.noalias() = d_out * cache.r.transpose();
  G.out_b(0, 0) = d_out.sum();
  MatrixXd d_u_skip = (P.out_w.transpose() * d_out).cwiseProduct((cache.u_skip.array() > 0.0).cast<double>().matrix());
  G.skip_w.noalias() = d_u_skip * cache.skip_scaled.transpose();
  G.skip_b.col(0) = d_u_skip.rowwise().sum();
  const MatrixXd d_skip = (P.skip_w.transpose() * d_u_skip) / std::sqrt(static_cast<double>(cfg.residual_blocks));

  VectorXd d_h2 = VectorXd::Zero(static_cast<Index>(cfg.step_embed_dim));
  MatrixXd d_h = MatrixXd::Zero(c, n);  // gradient w.r.t. the output of the current block

  for (std::size_t bi = cfg.residual_blocks; bi-- > 0;) {
    const auto& B = P.blocks[bi];
    auto& GB = G.blocks[bi];
    const auto& bc = cache.blocks[bi];

    MatrixXd d_o(2 * c, n);
    d_o.topRows(c) = d_h * kInvSqrt2;
    d_o.bottomRows(c) = d_skip;
    GB.out_w.noalias() = d_o * bc.gated.transpose();
    GB.out_b.col(0) = d_o.rowwise().sum();
    const MatrixXd d_gated = B.out_w.transpose() * d_o;

    MatrixXd d_z(2 * c, n);
    d_z.topRows(c) = d_gated.cwiseProduct(bc.act_g).cwiseProduct((1.0 - bc.act_a.array().square()).matrix());
    d_z.bottomRows(c) = d_gated.cwiseProduct(bc.act_a).cwiseProduct(
        bc.act_g.cwiseProduct((1.0 - bc.act_g.array()).matrix()));
    GB.conv_b.col(0) = d_z.rowwise().sum();

    MatrixXd d_y = B.conv_w.middleCols(c, c).transpose() * d_z;
    GB.conv_w.middleCols(c, c).noalias() = d_z * bc.y.transpose();
    const auto d = static_cast<Index>(cfg.dilation(bi));
    if (d < n) {
      GB.conv_w.leftCols(c).noalias() = d_z.rightCols(n - d) * bc.y.leftCols(n - d).transpose();
      d_y.leftCols(n - d).noalias() += B.conv_w.leftCols(c).transpose() * d_z.rightCols(n - d);
      GB.conv_w.rightCols(c).noalias() = d_z.leftCols(n - d) * bc.y.rightCols(n - d).transpose();
      d_y.rightCols(n - d).noalias() += B.conv_w.rightCols(c).transpose() * d_z.leftCols(n - d);
    }

    const VectorXd d_step = d_y.rowwise().sum();
    GB.step_w.noalias() = d_step * cache.h2.transpose();
    GB.step_b.col(0) = d_step;
    d_h2.noalias() += B.step_w.transpose() * d_step;

    d_h = d_h * kInvSqrt2 + d_y;
  }

  const MatrixXd d_u_in = d_h.cwiseProduct((cache.u_in.array() > 0.0).cast<double>().matrix());
  G.in_w.noalias() = d_u_in * cache.input.transpose();
  G.in_b.col(0) = d_u_in.rowwise().sum();

  const VectorXd d_u2 = d_h2.cwiseProduct(swish_grad(cache.u2));
  G.emb_w2.noalias() = d_u2 * cache.h1.transpose();
  G.emb_b2.col(0) = d_u2;
  const VectorXd d_u1 = (P.emb_w2.transpose() * d_u2).cwiseProduct(swish_grad(cache.u1));
  G.emb_w1.noalias() = d_u1 * cache.e0.transpose();
  G.emb_b1.col(0) = d_u1;
  return grad;
}

}  // namespace detail

std::vector<double> denoiser_forward(const DenoiserParams& params, std::span<const double> x_t, std::size_t t,
                                     const Conditioning& cond) {
  return detail::forward_impl(params, x_t, t, cond, nullptr);
}

ForwardGrad denoiser_forward_backward(
    const DenoiserParams& params, std::span<const double> x_t, std::size_t t, const Conditioning& cond,
    const std::function<std::vector<double>(std::span<const double>)>& grad_output_fn) {
  detail::ForwardCache cache;
  ForwardGrad out;
  out.output = detail::forward_impl(params, x_t, t, cond, &cache);
  const std::vector<double> g = grad_output_fn(out.output);
  out.grad = detail::backward_impl(params, cache, g);
  return out;
}

}  // namespace pulsediff::diffusion
