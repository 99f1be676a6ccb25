#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace totalproj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Thrown when a normal-equation or Bellman solve hits a (near-)singular matrix.
struct SingularSystem : std::runtime_error {
  explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

// A transition matrix row failed row-stochastic validation.
struct NotStochastic : std::runtime_error {
  explicit NotStochastic(const std::string& what) : std::runtime_error(what) {}
};

// Power iteration did not reach the residual target (non-ergodic chain).
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

// A reachable state pair has phi_s ~ gamma*phi_s', so 1/||dphi|| is undefined.
struct DegeneratePair : std::runtime_error {
  explicit DegeneratePair(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kConditionLimit = 1e12;

// Solves M x = b for symmetric positive (semi)definite M coming from normal
// equations. Rejects ill-conditioned systems instead of returning garbage.
Vector guarded_spd_solve(const Matrix& m, const Vector& b, const char* context);

}  // namespace totalproj
