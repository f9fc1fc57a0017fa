#pragma once

#include <Eigen/Dense>

#include "mixdens/grid.hpp"
#include "mixdens/kernels.hpp"

namespace mixdens {

/// Row i of F dotted with w, accumulated strictly left to right. One code
/// path for every likelihood evaluation in the library keeps seeded runs
/// bit-reproducible.
double mixture_row_dot(const Eigen::MatrixXd& F, int row,
                       const Eigen::VectorXd& w);

/// Average negative log mixture likelihood: -(1/n) sum_i log(sum_j F_ij w_j).
/// Throws numeric_error when some row mixes to zero.
double mixture_nll(const KernelMatrix& F, const MixingPMF& pmf);
double mixture_nll(const Eigen::MatrixXd& F, const Eigen::VectorXd& w);

/// Max-subtracted softmax; safe for logits of any magnitude.
Eigen::VectorXd softmax(const Eigen::VectorXd& x);

/// The logit shift h(p) = log(2m p / eps + 1) pushed back through softmax.
/// The result approximates p with sup-norm error at most 1 / (1 + 2/eps),
/// which shows any PMF on the grid is reachable through a softmax head.
MixingPMF softmax_shift_construct(const MixingPMF& p, double eps);

/// The sup-norm error ceiling attained by softmax_shift_construct.
inline double softmax_shift_bound(double eps) { return 1.0 / (1.0 + 2.0 / eps); }

}  // namespace mixdens
