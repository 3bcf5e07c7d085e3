#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sshbell {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;

/// Thrown on invalid user-facing configuration (maps to CLI exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a numerical tolerance is violated (maps to CLI exit code 3).
struct tolerance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shannon entropy in bits of a probability vector; 0*log(0) == 0.
inline double entropy_bits(const VectorXd& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) s -= p[i] * std::log2(p[i]);
    }
    return s;
}

inline double sqr(double x) { return x * x; }

}  // namespace sshbell
