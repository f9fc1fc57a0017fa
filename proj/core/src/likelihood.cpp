#include "mixdens/likelihood.hpp"

#include <cmath>
#include <string>

#include "mixdens/errors.hpp"

namespace mixdens {

double mixture_row_dot(const Eigen::MatrixXd& F, int row,
                       const Eigen::VectorXd& w) {
  double acc = 0.0;
  for (int j = 0; j < w.size(); ++j) acc += F(row, j) * w[j];
  return acc;
}

double mixture_nll(const Eigen::MatrixXd& F, const Eigen::VectorXd& w) {
  if (F.cols() != w.size())
    throw input_error("mixture_nll: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < F.rows(); ++i) {
    const double r = mixture_row_dot(F, i, w);
    if (!(r > 0.0) || !std::isfinite(r))
      throw numeric_error("mixture_nll: observation " + std::to_string(i) +
                          " has zero or nonfinite mixture density");
    acc += std::log(r);
  }
  return -acc / static_cast<double>(F.rows());
}

double mixture_nll(const KernelMatrix& F, const MixingPMF& pmf) {
  return mixture_nll(F.values(), pmf.weights());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw input_error("softmax: empty input");
  if (!x.allFinite()) throw input_error("softmax: input must be finite");
  const double shift = x.maxCoeff();
  Eigen::VectorXd out = (x.array() - shift).exp();
  out /= out.sum();
  return out;
}

MixingPMF softmax_shift_construct(const MixingPMF& p, double eps) {
  if (!(eps > 0.0)) throw input_error("softmax_shift_construct: eps must be positive");
  const int m = p.size();
  Eigen::VectorXd logits(m);
  for (int j = 0; j < m; ++j)
    logits[j] = std::log(2.0 * m * p.weights()[j] / eps + 1.0);
  return MixingPMF(p.grid(), softmax(logits));
}

}  // namespace mixdens
