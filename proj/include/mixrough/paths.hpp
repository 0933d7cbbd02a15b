#pragma once

// Gaussian driving paths: Brownian motion, fractional Brownian motion (H > 1/2),
// the moving-window smoothed fBm and grid Hölder seminorms.

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "mixrough/errors.hpp"
#include "mixrough/grid.hpp"

namespace mixrough {

/// R_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
inline double fbm_covariance(double hurst, double s, double t) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("fbm_covariance: H must lie in (0, 1)");
  if (!(s >= 0.0 && t >= 0.0)) throw DomainError("fbm_covariance: times must be non-negative");
  const double e = 2.0 * hurst;
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

struct FbmParams {
  double hurst;
  std::size_t components;

  void validate() const {
    if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("FbmParams: H must lie in (1/2, 1)");
  }
};

/// Brownian motion with m independent components, W_0 = 0.
inline SamplePath sample_brownian(const TimeGrid& grid, std::size_t m, RngSeed seed) {
  SamplePath path(grid, m);
  if (m == 0) return path;
  auto engine = make_engine(seed, DriverTag::Brownian);
  std::normal_distribution<double> normal;
  const double scale = std::sqrt(grid.spacing());
  for (std::size_t c = 0; c < m; ++c) {
    auto w = path.values(c);
    w[0] = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) w[k + 1] = w[k] + scale * normal(engine);
  }
  return path;
}

enum class FbmMethod { Auto, Circulant, Dense };

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* plan) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
};

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n) {
  auto* p = fftw_alloc_complex(n);
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

// Autocovariance of unit-spacing fractional Gaussian noise at lag k.
inline double fgn_autocovariance(double hurst, std::size_t lag) {
  const double e = 2.0 * hurst;
  const double k = static_cast<double>(lag);
  return 0.5 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(std::abs(k - 1.0), e));
}

}  // namespace detail

/// Exact sampler for fBm at the nodes of a fixed grid.
///
/// The default route embeds the covariance of the increment sequence into a
/// circulant matrix of size 2N and draws through one FFT per component. When the
/// embedding has materially negative eigenvalues the sampler switches to a dense
/// factorization of [R_H(t_j, t_k)], regularizing by eigenvalue clipping if the
/// Cholesky factorization fails. Construction is costly; sample() is const and
/// may be called concurrently.
class FbmSampler {
 public:
  FbmSampler(TimeGrid grid, double hurst, FbmMethod method = FbmMethod::Auto)
      : grid_(grid), hurst_(hurst) {
    FbmParams{hurst, 1}.validate();
    if (method == FbmMethod::Dense) {
      build_dense();
      return;
    }
    if (!build_circulant()) {
      if (method == FbmMethod::Circulant) {
        throw GenerationError("FbmSampler: circulant embedding is not non-negative definite");
      }
      warnings_.push_back("circulant embedding has negative eigenvalues; using dense factorization");
      build_dense();
    }
  }

  FbmSampler(const FbmSampler&) = delete;
  FbmSampler& operator=(const FbmSampler&) = delete;

  const TimeGrid& grid() const noexcept { return grid_; }
  double hurst() const noexcept { return hurst_; }
  FbmMethod method() const noexcept { return method_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  SamplePath sample(std::size_t components, RngSeed seed) const {
    SamplePath path(grid_, components);
    if (components == 0) return path;
    auto engine = make_engine(seed, DriverTag::Fractional);
    std::normal_distribution<double> normal;
    const std::size_t n = grid_.steps();
    if (method_ == FbmMethod::Circulant) {
      const std::size_t size = 2 * n;
      auto in = detail::fftw_buffer(size);
      auto out = detail::fftw_buffer(size);
      const double scale = std::pow(grid_.spacing(), hurst_);
      for (std::size_t c = 0; c < components; ++c) {
        for (std::size_t k = 0; k < size; ++k) {
          in[k][0] = root_eigen_[k] * normal(engine);
          in[k][1] = root_eigen_[k] * normal(engine);
        }
        fftw_execute_dft(plan_.get(), in.get(), out.get());
        auto b = path.values(c);
        b[0] = 0.0;
        for (std::size_t k = 0; k < n; ++k) b[k + 1] = b[k] + scale * out[k][0];
      }
    } else {
      Eigen::VectorXd z(static_cast<Eigen::Index>(factor_.cols()));
      for (std::size_t c = 0; c < components; ++c) {
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(engine);
        const Eigen::VectorXd x = factor_ * z;
        auto b = path.values(c);
        b[0] = 0.0;
        for (std::size_t k = 0; k < n; ++k) b[k + 1] = x[static_cast<Eigen::Index>(k)];
      }
    }
    return path;
  }

 private:
  bool build_circulant() {
    const std::size_t n = grid_.steps();
    const std::size_t size = 2 * n;
    auto in = detail::fftw_buffer(size);
    auto out = detail::fftw_buffer(size);
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      plan_.reset(fftw_plan_dft_1d(static_cast<int>(size), in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE));
    }
    if (!plan_) throw GenerationError("FbmSampler: FFT plan creation failed");

    for (std::size_t k = 0; k <= n; ++k) {
      in[k][0] = detail::fgn_autocovariance(hurst_, k);
      in[k][1] = 0.0;
    }
    for (std::size_t k = 1; k < n; ++k) {
      in[size - k][0] = in[k][0];
      in[size - k][1] = 0.0;
    }
    fftw_execute_dft(plan_.get(), in.get(), out.get());

    double largest = 0.0, smallest = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      largest = std::max(largest, out[k][0]);
      smallest = std::min(smallest, out[k][0]);
    }
    if (smallest < -1e-10 * largest) return false;

    root_eigen_.resize(size);
    for (std::size_t k = 0; k < size; ++k) {
      root_eigen_[k] = std::sqrt(std::max(out[k][0], 0.0) / static_cast<double>(size));
    }
    method_ = FbmMethod::Circulant;
    return true;
  }

  void build_dense() {
    const auto n = static_cast<Eigen::Index>(grid_.steps());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k <= j; ++k) {
        cov(j, k) = cov(k, j) = fbm_covariance(hurst_, grid_.time(static_cast<std::size_t>(j + 1)),
                                               grid_.time(static_cast<std::size_t>(k + 1)));
      }
    }
    method_ = FbmMethod::Dense;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw GenerationError("FbmSampler: eigendecomposition failed");
    Eigen::VectorXd values = eig.eigenvalues();
    const double total = values.sum();
    values = values.cwiseMax(0.0);
    if (!(values.maxCoeff() > 0.0) || !(total > 0.0)) {
      throw GenerationError("FbmSampler: covariance is not positive after regularization");
    }
    values *= total / values.sum();
    factor_ = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
    warnings_.push_back("dense covariance regularized by eigenvalue clipping");
  }

  TimeGrid grid_;
  double hurst_;
  FbmMethod method_ = FbmMethod::Circulant;
  std::vector<std::string> warnings_;
  std::vector<double> root_eigen_;
  std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> plan_;
  Eigen::MatrixXd factor_;
};

/// One-shot fBm draw. Build an FbmSampler directly when drawing many paths on one grid.
inline SamplePath sample_fbm(const TimeGrid& grid, const FbmParams& params, RngSeed seed,
                             FbmMethod method = FbmMethod::Auto) {
  params.validate();
  return FbmSampler(grid, params.hurst, method).sample(params.components, seed);
}

namespace detail {

// Number of grid cells spanned by the window 1/n; throws when not grid aligned.
inline std::size_t window_cells(const TimeGrid& grid, std::size_t n) {
  require(n >= 1, "smoothing: n must be positive");
  const double cells = static_cast<double>(grid.steps()) / (static_cast<double>(n) * grid.horizon());
  const double rounded = std::round(cells);
  require(rounded >= 1.0 && std::abs(cells - rounded) <= 1e-9 * cells,
          "smoothing: window 1/n is not an integer multiple of the grid spacing");
  return static_cast<std::size_t>(rounded);
}

}  // namespace detail

/// B^n_t = n * integral of B over [(t - 1/n) v 0, t], trapezoid rule on the grid.
inline SamplePath smooth_fbm(const SamplePath& path, std::size_t n) {
  const std::size_t w = detail::window_cells(path.grid(), n);
  const std::size_t steps = path.grid().steps();
  const double inv_w = 1.0 / static_cast<double>(w);
  SamplePath out(path.grid(), path.components());
  std::vector<double> cell(steps);
  for (std::size_t c = 0; c < path.components(); ++c) {
    auto b = path.values(c);
    auto s = out.values(c);
    for (std::size_t j = 0; j < steps; ++j) cell[j] = 0.5 * (b[j] + b[j + 1]);
    s[0] = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
      double acc = 0.0;
      for (std::size_t j = (k > w ? k - w : 0); j < k; ++j) acc += cell[j];
      s[k] = acc * inv_w;
    }
  }
  return out;
}

/// Time derivative of the smoothed path: n * (B_t - B_{(t - 1/n) v 0}).
inline SamplePath smoothed_derivative(const SamplePath& path, std::size_t n) {
  const std::size_t w = detail::window_cells(path.grid(), n);
  const double rate = static_cast<double>(n);
  SamplePath out(path.grid(), path.components());
  for (std::size_t c = 0; c < path.components(); ++c) {
    auto b = path.values(c);
    auto d = out.values(c);
    for (std::size_t k = 0; k < b.size(); ++k) d[k] = rate * (b[k] - b[k > w ? k - w : 0]);
  }
  return out;
}

/// Grids up to this many steps use every node pair in seminorm kernels.
inline constexpr std::size_t kExactSeminormSteps = std::size_t{1} << 13;

/// max over node pairs j < k of |f(t_k) - f(t_j)| / (t_k - t_j)^gamma.
///
/// All pairs up to kExactSeminormSteps, dyadic lags above.
inline double holder_seminorm(const SamplePath& path, std::size_t component, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("holder_seminorm: gamma must lie in (0, 1]");
  const auto f = path.values(component);
  const std::size_t steps = path.grid().steps();
  const double dt = path.grid().spacing();
  const bool exact = steps <= kExactSeminormSteps;
  double best = 0.0;
  for (std::size_t lag = 1; lag <= steps; lag = exact ? lag + 1 : lag * 2) {
    double widest = 0.0;
    for (std::size_t j = 0; j + lag <= steps; ++j) widest = std::max(widest, std::abs(f[j + lag] - f[j]));
    best = std::max(best, widest / std::pow(static_cast<double>(lag) * dt, gamma));
  }
  return best;
}

}  // namespace mixrough
