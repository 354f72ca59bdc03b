#pragma once

#include <complex>
#include <Eigen/Dense>

namespace shearlab {

using Real = double;
using Complex = std::complex<Real>;
using RealVec = Eigen::VectorXd;
using ComplexVec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using ComplexMat = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Complex field sampled on the nodes of a Grid.
using Field = ComplexVec;

inline constexpr Real kPi = 3.14159265358979323846;
inline constexpr Real kE = 2.71828182845904523536;

}  // namespace shearlab
