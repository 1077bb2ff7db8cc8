#ifndef EBHMM_TYPES_HPP
#define EBHMM_TYPES_HPP

#include <Eigen/Dense>

namespace ebhmm {

using Scalar = double;
using Index = Eigen::Index;

using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using ArrayXb = Eigen::Array<bool, Eigen::Dynamic, 1>;

}  // namespace ebhmm

#endif
