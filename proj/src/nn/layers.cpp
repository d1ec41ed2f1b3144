#include "sdsr/nn/layers.hpp"

#include <Eigen/Core>

#include <cmath>

#include "sdsr/core/errors.hpp"

namespace sdsr::nn {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, int cin, int cout, int ksize, int stride, Rng& init_rng,
               double init_gain)
    : name_(std::move(name)),
      cin_(cin),
      cout_(cout),
      k_(ksize),
      stride_(stride),
      pad_(ksize / 2),
      w_(name_ + ".w", Shape{cout, cin, ksize, ksize}),
      b_(name_ + ".b", Shape{1, cout, 1, 1}) {
  if (stride != 1 && stride != 2) throw SizingError(name_ + ": stride must be 1 or 2");
  const double std = init_gain * std::sqrt(2.0 / double(cin * ksize * ksize));
  fill_gaussian(w_.value, init_rng, std);
}

void Conv2d::im2col(const Tensor& x, int n, std::vector<double>& col, int ho, int wo) const {
  const int hw = ho * wo;
  const int hi = x.h(), wi = x.w();
  col.assign(size_t(cin_) * k_ * k_ * hw, 0.0);
  for (int ci = 0; ci < cin_; ++ci) {
    const double* src = x.plane(n, ci);
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        double* dst = col.data() + size_t((ci * k_ + ky) * k_ + kx) * hw;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride_ + ky - pad_;
          if (iy < 0 || iy >= hi) continue;
          const double* srow = src + size_t(iy) * wi;
          double* drow = dst + size_t(oy) * wo;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride_ + kx - pad_;
            if (ix >= 0 && ix < wi) drow[ox] = srow[ix];
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x, Rng*) {
  if (x.c() != cin_)
    throw SizingError(name_ + ": expected " + std::to_string(cin_) + " input channels, got " +
                      std::to_string(x.c()));
  x_ = x;
  const int ho = out_size(x.h()), wo = out_size(x.w());
  const int hw = ho * wo, kdim = cin_ * k_ * k_;
  Tensor y(x.n(), cout_, ho, wo);

  CMapRM wmat(w_.value.data(), cout_, kdim);
  for (int n = 0; n < x.n(); ++n) {
    im2col(x, n, col_, ho, wo);
    CMapRM col(col_.data(), kdim, hw);
    MapRM out(y.plane(n, 0), cout_, hw);
    out.noalias() = wmat * col;
    for (int co = 0; co < cout_; ++co) out.row(co).array() += b_.value[co];
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
  const int ho = gy.h(), wo = gy.w();
  const int hw = ho * wo, kdim = cin_ * k_ * k_;
  const int hi = x_.h(), wi = x_.w();
  Tensor gx = Tensor::zeros_like(x_);

  MapRM dw(w_.grad.data(), cout_, kdim);
  CMapRM wmat(w_.value.data(), cout_, kdim);
  std::vector<double> dcol(size_t(kdim) * hw);

  for (int n = 0; n < gy.n(); ++n) {
    CMapRM g(gy.plane(n, 0), cout_, hw);
    im2col(x_, n, col_, ho, wo);
    CMapRM col(col_.data(), kdim, hw);
    dw.noalias() += g * col.transpose();
    for (int co = 0; co < cout_; ++co) b_.grad[co] += g.row(co).sum();

    MapRM dc(dcol.data(), kdim, hw);
    dc.noalias() = wmat.transpose() * g;
    // col2im scatter
    for (int ci = 0; ci < cin_; ++ci) {
      double* dst = gx.plane(n, ci);
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          const double* src = dcol.data() + size_t((ci * k_ + ky) * k_ + kx) * hw;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride_ + ky - pad_;
            if (iy < 0 || iy >= hi) continue;
            double* drow = dst + size_t(iy) * wi;
            const double* srow = src + size_t(oy) * wo;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride_ + kx - pad_;
              if (ix >= 0 && ix < wi) drow[ix] += srow[ox];
            }
          }
        }
      }
    }
  }
  return gx;
}

void Conv2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&w_);
  out.push_back(&b_);
}

// ------------------------------------------------------------- LeakyReLU

Tensor LeakyReLU::forward(const Tensor& x, Rng*) {
  x_ = x;
  Tensor y = x;
  double* p = y.data();
  for (int64_t i = 0, n = y.numel(); i < n; ++i)
    if (p[i] < 0.0) p[i] *= slope_;
  return y;
}

Tensor LeakyReLU::backward(const Tensor& gy) {
  Tensor gx = gy;
  double* g = gx.data();
  const double* p = x_.data();
  for (int64_t i = 0, n = gx.numel(); i < n; ++i)
    if (p[i] < 0.0) g[i] *= slope_;
  return gx;
}

// -------------------------------------------------------- NoiseInjection

NoiseInjection::NoiseInjection(std::string name, int channels, SigmaMode mode, Rng* head_init_rng)
    : name_(std::move(name)),
      channels_(channels),
      mode_(mode),
      sigma_(name_ + ".sigma", Shape{1, channels, 1, 1}) {
  if (mode_ == SigmaMode::kInputDependent) {
    if (!head_init_rng)
      throw ConfigError(name_ + ": input-dependent sigma needs an init rng for its head");
    head_ = std::make_unique<Conv2d>(name_ + ".head", channels, channels, 1, 1, *head_init_rng,
                                     0.1);
    // start near the deterministic baseline: softplus(-4) ~ 0.018
    head_->bias().value.fill(-4.0);
  }
}

void NoiseInjection::set_sigma(double v) { sigma_.value.fill(v); }

Tensor NoiseInjection::forward(const Tensor& x, Rng* rng) {
  if (x.c() != channels_)
    throw SizingError(name_ + ": feature channels " + std::to_string(x.c()) +
                      " do not match sigma length " + std::to_string(channels_));
  if (!rng) throw NumericError(name_ + ": sampling requires an rng");

  eps_ = Tensor(x.shape());
  fill_gaussian(eps_, *rng);
  Tensor y = x;

  if (mode_ == SigmaMode::kSharedSpatial) {
    const int64_t plane = int64_t(x.h()) * x.w();
    for (int n = 0; n < x.n(); ++n)
      for (int c = 0; c < channels_; ++c) {
        const double s = sigma_.value[c];
        double* py = y.plane(n, c);
        const double* pe = eps_.plane(n, c);
        for (int64_t i = 0; i < plane; ++i) py[i] += s * pe[i];
      }
  } else {
    const Tensor pre = head_->forward(x, nullptr);
    gate_ = Tensor(pre.shape());
    double* py = y.data();
    double* pg = gate_.data();
    const double* pp = pre.data();
    const double* pe = eps_.data();
    for (int64_t i = 0, n = y.numel(); i < n; ++i) {
      pg[i] = sigmoid(pp[i]);  // softplus' = sigmoid
      py[i] += softplus(pp[i]) * pe[i];
    }
  }
  return y;
}

Tensor NoiseInjection::backward(const Tensor& gy) {
  if (mode_ == SigmaMode::kSharedSpatial) {
    const int64_t plane = int64_t(gy.h()) * gy.w();
    for (int n = 0; n < gy.n(); ++n)
      for (int c = 0; c < channels_; ++c) {
        const double* pg = gy.plane(n, c);
        const double* pe = eps_.plane(n, c);
        double acc = 0.0;
        for (int64_t i = 0; i < plane; ++i) acc += pg[i] * pe[i];
        sigma_.grad[c] += acc;
      }
    return gy;
  }
  Tensor dpre(gate_.shape());
  const double* pg = gy.data();
  const double* pe = eps_.data();
  const double* pgate = gate_.data();
  double* pd = dpre.data();
  for (int64_t i = 0, n = gy.numel(); i < n; ++i) pd[i] = pg[i] * pe[i] * pgate[i];
  Tensor gx = head_->backward(dpre);
  double* px = gx.data();
  for (int64_t i = 0, n = gx.numel(); i < n; ++i) px[i] += pg[i];
  return gx;
}

void NoiseInjection::collect_params(std::vector<Param*>& out) {
  if (!trainable_) return;
  if (mode_ == SigmaMode::kSharedSpatial) {
    out.push_back(&sigma_);
  } else {
    head_->collect_params(out);
  }
}

// ---------------------------------------------------------- PixelShuffle

Tensor PixelShuffle::forward(const Tensor& x, Rng*) {
  if (x.c() % (r_ * r_) != 0)
    throw SizingError(name_ + ": channels not divisible by r^2");
  const int co = x.c() / (r_ * r_);
  Tensor y(x.n(), co, x.h() * r_, x.w() * r_);
  for (int n = 0; n < x.n(); ++n)
    for (int c = 0; c < co; ++c)
      for (int dy = 0; dy < r_; ++dy)
        for (int dx = 0; dx < r_; ++dx) {
          const double* src = x.plane(n, c * r_ * r_ + dy * r_ + dx);
          double* dst = y.plane(n, c);
          for (int iy = 0; iy < x.h(); ++iy)
            for (int ix = 0; ix < x.w(); ++ix)
              dst[(iy * r_ + dy) * y.w() + ix * r_ + dx] = src[iy * x.w() + ix];
        }
  return y;
}

Tensor PixelShuffle::backward(const Tensor& gy) {
  const int co = gy.c();
  const int hi = gy.h() / r_, wi = gy.w() / r_;
  Tensor gx(gy.n(), co * r_ * r_, hi, wi);
  for (int n = 0; n < gy.n(); ++n)
    for (int c = 0; c < co; ++c)
      for (int dy = 0; dy < r_; ++dy)
        for (int dx = 0; dx < r_; ++dx) {
          double* dst = gx.plane(n, c * r_ * r_ + dy * r_ + dx);
          const double* src = gy.plane(n, c);
          for (int iy = 0; iy < hi; ++iy)
            for (int ix = 0; ix < wi; ++ix)
              dst[iy * wi + ix] = src[(iy * r_ + dy) * gy.w() + ix * r_ + dx];
        }
  return gx;
}

// --------------------------------------------------------------- Clamp01

Tensor Clamp01::forward(const Tensor& x, Rng*) {
  x_ = x;
  return clamp01(x);
}

Tensor Clamp01::backward(const Tensor& gy) {
  Tensor gx = gy;
  double* g = gx.data();
  const double* p = x_.data();
  for (int64_t i = 0, n = gx.numel(); i < n; ++i)
    if (p[i] <= 0.0 || p[i] >= 1.0) g[i] = 0.0;
  return gx;
}

// --------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(std::string name, int channels, Rng& init_rng)
    : name_(std::move(name)),
      conv1_(name_ + ".c1", channels, channels, 3, 1, init_rng),
      conv2_(name_ + ".c2", channels, channels, 3, 1, init_rng, 0.5),
      act_(0.2, name_ + ".act") {}

Tensor ResidualBlock::forward(const Tensor& x, Rng* rng) {
  Tensor body = conv2_.forward(act_.forward(conv1_.forward(x, rng), rng), rng);
  double* p = body.data();
  const double* px = x.data();
  for (int64_t i = 0, n = body.numel(); i < n; ++i) p[i] += px[i];
  return body;
}

Tensor ResidualBlock::backward(const Tensor& gy) {
  Tensor gbody = conv1_.backward(act_.backward(conv2_.backward(gy)));
  double* p = gbody.data();
  const double* pg = gy.data();
  for (int64_t i = 0, n = gbody.numel(); i < n; ++i) p[i] += pg[i];
  return gbody;
}

void ResidualBlock::collect_params(std::vector<Param*>& out) {
  conv1_.collect_params(out);
  conv2_.collect_params(out);
}

// ------------------------------------------------- ChannelAttentionBlock

ChannelAttentionBlock::ChannelAttentionBlock(std::string name, int channels, int reduction,
                                             Rng& init_rng)
    : name_(std::move(name)),
      channels_(channels),
      conv1_(name_ + ".c1", channels, channels, 3, 1, init_rng),
      conv2_(name_ + ".c2", channels, channels, 3, 1, init_rng, 0.5),
      fc1_(name_ + ".fc1", channels, std::max(1, channels / reduction), 1, 1, init_rng),
      fc2_(name_ + ".fc2", std::max(1, channels / reduction), channels, 1, 1, init_rng),
      act_(0.2, name_ + ".act") {}

Tensor ChannelAttentionBlock::forward(const Tensor& x, Rng* rng) {
  u_ = conv2_.forward(act_.forward(conv1_.forward(x, rng), rng), rng);
  const int64_t plane = int64_t(u_.h()) * u_.w();

  Tensor g0(u_.n(), channels_, 1, 1);
  for (int n = 0; n < u_.n(); ++n)
    for (int c = 0; c < channels_; ++c) {
      const double* p = u_.plane(n, c);
      double acc = 0.0;
      for (int64_t i = 0; i < plane; ++i) acc += p[i];
      g0.at(n, c, 0, 0) = acc / double(plane);
    }

  Tensor t1 = fc1_.forward(g0, rng);
  relu_mask_ = Tensor(t1.shape());
  for (int64_t i = 0, n = t1.numel(); i < n; ++i) {
    relu_mask_[i] = t1[i] > 0.0 ? 1.0 : 0.0;
    if (t1[i] < 0.0) t1[i] = 0.0;
  }
  Tensor t2 = fc2_.forward(t1, rng);
  gate_ = Tensor(t2.shape());
  for (int64_t i = 0, n = t2.numel(); i < n; ++i) gate_[i] = sigmoid(t2[i]);

  Tensor y = x;
  for (int n = 0; n < y.n(); ++n)
    for (int c = 0; c < channels_; ++c) {
      const double a = gate_.at(n, c, 0, 0);
      double* py = y.plane(n, c);
      const double* pu = u_.plane(n, c);
      for (int64_t i = 0; i < plane; ++i) py[i] += a * pu[i];
    }
  return y;
}

Tensor ChannelAttentionBlock::backward(const Tensor& gy) {
  const int64_t plane = int64_t(u_.h()) * u_.w();

  Tensor da(gy.n(), channels_, 1, 1);
  Tensor du(u_.shape());
  for (int n = 0; n < gy.n(); ++n)
    for (int c = 0; c < channels_; ++c) {
      const double a = gate_.at(n, c, 0, 0);
      const double* pg = gy.plane(n, c);
      const double* pu = u_.plane(n, c);
      double* pdu = du.plane(n, c);
      double acc = 0.0;
      for (int64_t i = 0; i < plane; ++i) {
        acc += pg[i] * pu[i];
        pdu[i] = pg[i] * a;
      }
      da.at(n, c, 0, 0) = acc;
    }

  Tensor dt2(da.shape());
  for (int64_t i = 0, n = dt2.numel(); i < n; ++i) {
    const double a = gate_[i];
    dt2[i] = da[i] * a * (1.0 - a);
  }
  Tensor dt1 = fc2_.backward(dt2);
  for (int64_t i = 0, n = dt1.numel(); i < n; ++i) dt1[i] *= relu_mask_[i];
  Tensor dg0 = fc1_.backward(dt1);

  for (int n = 0; n < du.n(); ++n)
    for (int c = 0; c < channels_; ++c) {
      const double g = dg0.at(n, c, 0, 0) / double(plane);
      double* pdu = du.plane(n, c);
      for (int64_t i = 0; i < plane; ++i) pdu[i] += g;
    }

  Tensor gbody = conv1_.backward(act_.backward(conv2_.backward(du)));
  double* p = gbody.data();
  const double* pg = gy.data();
  for (int64_t i = 0, n = gbody.numel(); i < n; ++i) p[i] += pg[i];
  return gbody;
}

void ChannelAttentionBlock::collect_params(std::vector<Param*>& out) {
  conv1_.collect_params(out);
  conv2_.collect_params(out);
  fc1_.collect_params(out);
  fc2_.collect_params(out);
}

}  // namespace sdsr::nn
