#include "gsm/solver.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "gsm/error.hpp"

namespace gsm {

DiffusionOperator::DiffusionOperator(ForwardOperator forward, double sigma, EdgeWeightField xi0)
    : forward_(std::move(forward)), sigma_(sigma), xi0_(std::move(xi0)) {
  if (!(sigma > 0.0)) throw ConfigError("noise sigma must be positive");
}

void DiffusionOperator::apply(std::span<const double> u, std::span<double> out,
                              std::span<double> scratch) const {
  const int w = width();
  const int h = height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const double dw = data_weight();
  if (forward_.kind() == ForwardOperator::Kind::identity) {
    for (std::size_t i = 0; i < n; ++i) out[i] = dw * u[i];
  } else {
    auto au = scratch.subspan(0, n);
    auto atau = scratch.subspan(n, n);
    forward_.apply(u, au, w, h);
    forward_.adjoint_apply(au, atau, w, h);
    for (std::size_t i = 0; i < n; ++i) out[i] = dw * atau[i];
  }
  // -div(xi0 grad u), one flux per forward difference.
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row + x;
      const double weight = xi0_[i];
      if (weight == 0.0) continue;
      if (x + 1 < w) {
        const double f = weight * (u[i + 1] - u[i]);
        out[i] -= f;
        out[i + 1] += f;
      }
      if (y + 1 < h) {
        const double f = weight * (u[i + w] - u[i]);
        out[i] -= f;
        out[i + w] += f;
      }
    }
  }
}

ImageGrid DiffusionOperator::apply(const ImageGrid& u) const {
  if (u.width() != width() || u.height() != height()) {
    throw DimensionError("apply_lambda: image does not match the operator grid");
  }
  ImageGrid out(u.width(), u.height(), u.channels());
  std::vector<double> scratch(2 * u.pixel_count());
  for (int c = 0; c < u.channels(); ++c) apply(u.channel(c), out.channel(c), scratch);
  return out;
}

ImageGrid DiffusionOperator::rhs(const ImageGrid& observed) const {
  if (observed.width() != width() || observed.height() != height()) {
    throw DimensionError("rhs: image does not match the operator grid");
  }
  ImageGrid m = forward_.adjoint_apply(observed);
  for (double& v : m.values()) v *= data_weight();
  return m;
}

EdgeWeightField DiffusionOperator::diagonal() const {
  EdgeWeightField d = forward_.column_norms_sq(width(), height());
  const EdgeWeightField s = diffusion_diagonal(xi0_);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = data_weight() * d[i] + s[i];
  return d;
}

namespace {

CgStats cg_channel(const DiffusionOperator& op, std::span<const double> b, std::span<double> x,
                   const CgSettings& settings, const std::vector<double>* inv_diag) {
  const std::size_t n = b.size();
  const int max_iter = settings.max_iter > 0 ? settings.max_iter : static_cast<int>(10 * n);
  std::vector<double> r(n), z(n), p(n), q(n), scratch(2 * n);

  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }
  const double target = settings.tol * b_norm;

  op.apply(x, q, scratch);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  auto precondition = [&] {
    if (inv_diag) {
      for (std::size_t i = 0; i < n; ++i) z[i] = (*inv_diag)[i] * r[i];
    } else {
      std::copy(r.begin(), r.end(), z.begin());
    }
  };
  double r_norm = std::sqrt(dot(r, r));
  if (r_norm <= target) return {0, r_norm / b_norm};

  precondition();
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    op.apply(p, q, scratch);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      throw ConvergenceError("conjugate gradients: operator is not positive definite", it,
                             r_norm / b_norm);
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    r_norm = std::sqrt(dot(r, r));
    if (r_norm <= target) return {it, r_norm / b_norm};
    precondition();
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceError("conjugate gradients did not converge (relative residual " +
                             std::to_string(r_norm / b_norm) + ")",
                         max_iter, r_norm / b_norm);
}

}  // namespace

ImageGrid cg_solve(const DiffusionOperator& op, const ImageGrid& b, const CgSettings& settings,
                   const ImageGrid* initial, CgStats* stats) {
  if (b.width() != op.width() || b.height() != op.height()) {
    throw DimensionError("cg_solve: right-hand side does not match the operator grid");
  }
  if (!(settings.tol > 0.0)) throw ConfigError("cg tolerance must be positive");
  ImageGrid x = initial ? *initial : ImageGrid(b.width(), b.height(), b.channels());
  if (!x.same_shape(b)) throw DimensionError("cg_solve: initial guess shape mismatch");

  std::vector<double> inv_diag;
  if (settings.jacobi) {
    const EdgeWeightField d = op.diagonal();
    inv_diag.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) inv_diag[i] = 1.0 / d[i];
  }
  CgStats total;
  for (int c = 0; c < b.channels(); ++c) {
    const CgStats s =
        cg_channel(op, b.channel(c), x.channel(c), settings, settings.jacobi ? &inv_diag : nullptr);
    total.iterations += s.iterations;
    total.relative_residual = std::max(total.relative_residual, s.relative_residual);
  }
  if (stats) *stats = total;
  return x;
}

DenseOracle::DenseOracle(const DiffusionOperator& op) : width_(op.width()), height_(op.height()) {
  const int n = width_ * height_;
  if (n > max_pixels) throw ConfigError("dense oracle limited to 64 pixels");
  matrix_.resize(n, n);
  std::vector<double> e(n), col(n), scratch(2 * n);
  for (int j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    op.apply(e, col, scratch);
    for (int i = 0; i < n; ++i) matrix_(i, j) = col[i];
  }
  llt_.compute(matrix_);
  if (llt_.info() != Eigen::Success) throw ConvergenceError("dense oracle: matrix not SPD", 0, 0.0);
}

Eigen::VectorXd DenseOracle::solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

ImageGrid DenseOracle::solve(const ImageGrid& b) const {
  if (b.width() != width_ || b.height() != height_) throw DimensionError("dense oracle: shape mismatch");
  ImageGrid out(b.width(), b.height(), b.channels());
  for (int c = 0; c < b.channels(); ++c) {
    const auto in = b.channel(c);
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(in.data(), static_cast<Eigen::Index>(in.size()));
    const Eigen::VectorXd sol = solve(v);
    auto dst = out.channel(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = sol[static_cast<Eigen::Index>(i)];
  }
  return out;
}

double DenseOracle::log_det() const {
  const Eigen::MatrixXd& l = llt_.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += 2.0 * std::log(l(i, i));
  return s;
}

Eigen::MatrixXd DenseOracle::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(matrix_.rows(), matrix_.cols()));
}

Eigen::VectorXd DenseOracle::inverse_diagonal() const { return inverse().diagonal(); }

}  // namespace gsm
