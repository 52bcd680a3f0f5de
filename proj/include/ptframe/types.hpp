#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace ptframe {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Thrown where the model itself degenerates (coalescing supermodes, spectral
// singularities), as opposed to plain invalid input; the command-line layer
// maps it to its own process exit code.
class singular_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Which generator a spectrum refers to: the bare one (initial frame, "IF") or
// the one seen from the equilibrium frame ("EF").
enum class Frame { initial, equilibrium };

inline const char* to_string(Frame f) { return f == Frame::initial ? "IF" : "EF"; }

}  // namespace ptframe
