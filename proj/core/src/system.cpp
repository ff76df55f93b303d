#include "cfrelax/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cfrelax/error.hpp"

namespace cfrelax {
namespace {

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.row_major()) s += v * v;
  return std::sqrt(s);
}

double off_diagonal(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

Eigensystem symmetric_eigen(const Matrix& input, int max_sweeps) {
  const std::size_t m = input.rows();
  if (input.cols() != m) throw Error(ErrorKind::BadParameter, "eigensolver needs a square matrix");

  Matrix a = input;
  Matrix v = Matrix::identity(m);
  const double threshold = 1e-13 * frobenius(input);

  bool converged = off_diagonal(a) <= threshold;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diagonal(a) <= threshold;
  }
  if (!converged) {
    std::ostringstream os;
    os << "Jacobi did not converge in " << max_sweeps << " sweeps";
    throw Error(ErrorKind::EigFailure, os.str());
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  Eigensystem out{Matrix(m, m), Vector(m)};
  for (std::size_t col = 0; col < m; ++col) {
    const std::size_t src = order[col];
    out.values[col] = a(src, src);
    double sign = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (std::abs(v(k, src)) > 1e-14) {
        sign = v(k, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t k = 0; k < m; ++k) out.vectors(k, col) = sign * v(k, src);
  }
  return out;
}

FriedrichsSystem::FriedrichsSystem(std::vector<Matrix> matrices, std::string label)
    : matrices_(std::move(matrices)), label_(std::move(label)) {
  if (matrices_.empty() || matrices_.size() > 2)
    throw Error(ErrorKind::BadParameter, "space dimension must be 1 or 2");
  state_dim_ = matrices_.front().rows();
  if (state_dim_ == 0) throw Error(ErrorKind::BadParameter, "state dimension must be positive");
  for (std::size_t j = 0; j < matrices_.size(); ++j) {
    const Matrix& b = matrices_[j];
    if (b.rows() != state_dim_ || b.cols() != state_dim_)
      throw Error(ErrorKind::BadParameter, "coefficient matrices must all be m x m");
    for (double x : b.row_major())
      if (!std::isfinite(x)) throw Error(ErrorKind::BadParameter, "coefficient matrix not finite");
    const double asym = (b - b.transposed()).max_abs();
    if (asym > 1e-12) {
      std::ostringstream os;
      os << "B_" << (j + 1) << " is not symmetric (max |B - B^T| = " << asym << ")";
      throw Error(ErrorKind::NonSymmetric, os.str());
    }
    eigen_.push_back(symmetric_eigen(b));
    for (double lambda : eigen_.back().values) speed_bound_ = std::max(speed_bound_, std::abs(lambda));
  }
}

double speed_bound(const FriedrichsSystem& sys) { return sys.speed_bound(); }

const Eigensystem& characteristic_decompose(const FriedrichsSystem& sys, std::size_t direction) {
  if (direction >= sys.space_dim()) throw Error(ErrorKind::BadParameter, "direction out of range");
  return sys.eigen(direction);
}

namespace {

Matrix shear_matrix(double mu) {
  const double c = std::sqrt(mu);
  return Matrix(2, 2, {0.0, -c, -c, 0.0});
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorKind::BadParameter, std::string(name) + " must be positive and finite");
}

}  // namespace

ModelInstance build(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) -> ModelInstance {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, model::Advection>) {
          std::vector<Matrix> b;
          for (double c : s.speeds) {
            if (!std::isfinite(c)) throw Error(ErrorKind::BadParameter, "advection speed not finite");
            b.emplace_back(1, 1, std::vector<double>{c});
          }
          return {FriedrichsSystem(std::move(b), "advection"), std::nullopt};
        } else if constexpr (std::is_same_v<T, model::Wave1D>) {
          require_positive(s.mu, "mu");
          return {FriedrichsSystem({shear_matrix(s.mu)}, "wave_1d"), std::nullopt};
        } else if constexpr (std::is_same_v<T, model::ElastoPlastic1D>) {
          require_positive(s.mu, "mu");
          require_positive(s.sigma_y, "sigma_y");
          const double bound = s.sigma_y / std::sqrt(s.mu);
          auto yield = ConvexSet::cylinder(2, {1}, ConvexSet::slab(1, 0, -bound, bound));
          return {FriedrichsSystem({shear_matrix(s.mu)}, "elastoplastic_1d"), std::move(yield)};
        } else {
          FriedrichsSystem sys(s.matrices, "custom");
          if (s.constraint && s.constraint->dim() != sys.state_dim())
            throw Error(ErrorKind::BadParameter, "custom constraint dimension must equal m");
          return {std::move(sys), s.constraint};
        }
      },
      spec);
}

Vector shear_to_state(double mu, double velocity, double stress) {
  return {velocity, stress / std::sqrt(mu)};
}

Vector state_to_shear(double mu, std::span<const double> state) {
  return {state[0], state[1] * std::sqrt(mu)};
}

}  // namespace cfrelax
