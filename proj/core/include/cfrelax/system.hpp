#pragma once

// Constant-coefficient Friedrichs systems  dW/dt + sum_j B_j dW/dx_j = 0
// with symmetric B_j, their characteristic data, and model constructors.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cfrelax/convex.hpp"
#include "cfrelax/linalg.hpp"

namespace cfrelax {

/// Orthogonal eigendecomposition B = Q diag(values) Q^T.
/// Eigenvalues ascending; each eigenvector's first nonzero entry positive.
struct Eigensystem {
  Matrix vectors;  ///< columns are eigenvectors
  Vector values;
};

/// Cyclic Jacobi for small symmetric matrices. Throws EigFailure when the
/// off-diagonal Frobenius norm does not drop below 1e-13 * ||A||_F.
Eigensystem symmetric_eigen(const Matrix& a, int max_sweeps = 100);

class FriedrichsSystem {
 public:
  /// Validates symmetry (||B - B^T||_max <= 1e-12) and decomposes each B_j.
  FriedrichsSystem(std::vector<Matrix> matrices, std::string label = "custom");

  std::size_t space_dim() const { return matrices_.size(); }
  std::size_t state_dim() const { return state_dim_; }
  const Matrix& matrix(std::size_t direction) const { return matrices_.at(direction); }
  const std::vector<Matrix>& matrices() const { return matrices_; }
  const Eigensystem& eigen(std::size_t direction) const { return eigen_.at(direction); }
  /// Largest spectral radius over all directions.
  double speed_bound() const { return speed_bound_; }
  const std::string& label() const { return label_; }

 private:
  std::vector<Matrix> matrices_;
  std::vector<Eigensystem> eigen_;
  std::size_t state_dim_ = 0;
  double speed_bound_ = 0.0;
  std::string label_;
};

double speed_bound(const FriedrichsSystem& sys);
/// Zero-based direction index.
const Eigensystem& characteristic_decompose(const FriedrichsSystem& sys, std::size_t direction);

namespace model {

/// Scalar transport with one speed per direction.
struct Advection {
  std::vector<double> speeds;
};

/// Linear anti-plane shear wave, state (v, w = sigma / sqrt(mu)).
struct Wave1D {
  double mu = 1.0;
};

/// Wave1D with the yield constraint |sigma| <= sigma_y.
struct ElastoPlastic1D {
  double mu = 1.0;
  double sigma_y = 1.0;
};

struct Custom {
  std::vector<Matrix> matrices;
  std::optional<ConvexSet> constraint;
};

}  // namespace model

using ModelSpec = std::variant<model::Advection, model::Wave1D, model::ElastoPlastic1D, model::Custom>;

struct ModelInstance {
  FriedrichsSystem system;
  /// Constraint defined by the model itself, if any; otherwise the caller
  /// supplies one.
  std::optional<ConvexSet> constraint;
};

ModelInstance build(const ModelSpec& spec);

// The 1D shear model uses  dv/dt - dsigma/dx = 0,  dsigma/dt - mu dv/dx = 0,
// symmetrised by w = sigma / sqrt(mu).
Vector shear_to_state(double mu, double velocity, double stress);
/// Inverse of shear_to_state: returns (v, sigma).
Vector state_to_shear(double mu, std::span<const double> state);

}  // namespace cfrelax
