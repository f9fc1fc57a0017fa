#include <doctest.h>

#include <cmath>

#include "mixdens/errors.hpp"
#include "mixdens/kernels.hpp"
#include "mixdens/likelihood.hpp"
#include "mixdens/rng.hpp"
#include "test_helpers.hpp"

using namespace mixdens;

TEST_SUITE_BEGIN("density_core");

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid::from_points(std::vector<double>{}), input_error);
  CHECK_THROWS_AS(Grid::from_points(std::vector<double>{1.0, 1.0}), input_error);
  CHECK_THROWS_AS(Grid::from_points(std::vector<double>{2.0, 1.0}), input_error);
  CHECK_THROWS_AS(Grid::from_points(std::vector<double>{0.0, NAN}), input_error);

  Eigen::MatrixXd dup(2, 2);
  dup << 1.0, 2.0, 1.0, 2.0;
  CHECK_THROWS_AS(Grid{dup}, input_error);

  const Grid g = Grid::equispaced(0.0, 1.0, 3);
  CHECK(g.at(0) == 0.0);
  CHECK(g.at(1) == doctest::Approx(0.5));
  CHECK(g.at(2) == 1.0);
}

TEST_CASE("pmf invariants") {
  const Grid g = Grid::equispaced(0.0, 1.0, 3);
  Eigen::VectorXd bad(3);
  bad << 0.5, 0.6, -0.1;
  CHECK_THROWS_AS(MixingPMF(g, bad), input_error);
  bad << 0.5, 0.6, 0.1;  // sums to 1.2
  CHECK_THROWS_AS(MixingPMF(g, bad), input_error);

  const MixingPMF u = MixingPMF::uniform(g);
  CHECK(u.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernel density closed forms") {
  CHECK(kernel_density(KernelSpec::normal_location(1.0), 0.0, 0.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(kernel_density(KernelSpec::poisson(), 2.0, 2.0) ==
        doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
  CHECK(kernel_density(KernelSpec::log_normal(0.2), 1.0, 0.0) ==
        doctest::Approx(1.9947114020071635).epsilon(1e-12));
}

TEST_CASE("kernel domain violations") {
  CHECK_THROWS_AS(kernel_density(KernelSpec::poisson(), -1.0, 2.0), input_error);
  CHECK_THROWS_AS(kernel_density(KernelSpec::poisson(), 1.5, 2.0), input_error);
  CHECK_THROWS_AS(kernel_density(KernelSpec::poisson(), 1.0, 0.0), input_error);
  CHECK_THROWS_AS(kernel_density(KernelSpec::log_normal(0.2), -1.0, 0.0), input_error);
  CHECK_THROWS_AS(KernelSpec::normal_location(0.0), input_error);
  CHECK_THROWS_AS(KernelSpec::normal_location(-1.0), input_error);

  // Variance coordinate of the paired kernel must be positive.
  const KernelSpec ls = KernelSpec::normal_location_scale();
  const double y[2] = {0.0, 1.0};
  const double th[2] = {0.0, -1.0};
  CHECK_THROWS_AS(kernel_log_density(ls, y, th), input_error);
}

TEST_CASE("paired location-scale kernel factorizes") {
  const KernelSpec ls = KernelSpec::normal_location_scale();
  const double y[2] = {0.3, -0.8};
  const double th[2] = {0.5, 2.0};
  const double sd = std::sqrt(th[1]);
  const double expected =
      kernel_density(KernelSpec::normal_location(sd), y[0], th[0]) *
      kernel_density(KernelSpec::normal_location(sd), y[1], th[0]);
  CHECK(kernel_density(ls, y, th) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kernel matrix basics") {
  const Grid g1 = Grid::from_points(std::vector<double>{0.0});
  const std::vector<double> y1{0.0};
  const KernelMatrix single =
      build_kernel_matrix(KernelSpec::normal_location(1.0), y1, g1);
  CHECK(single.values()(0, 0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));

  const Grid g2 = Grid::from_points(std::vector<double>{0.0, 1.0});
  const std::vector<double> y2{0.0, 1.0};
  const KernelMatrix sym =
      build_kernel_matrix(KernelSpec::normal_location(1.0), y2, g2);
  CHECK(sym.values()(0, 1) == doctest::Approx(0.24197072451914337).epsilon(1e-12));
  CHECK(sym.values()(0, 1) == sym.values()(1, 0));
}

TEST_CASE("kernel matrix matches elementwise recomputation") {
  Rng rng(42);
  const Grid grid = Grid::from_points(std::vector<double>{0.5, 1.5, 3.0, 7.0});
  std::vector<double> y;
  for (int i = 0; i < 5; ++i) y.push_back(static_cast<double>(rng.poisson(3.0)));
  const KernelSpec spec = KernelSpec::poisson();
  const KernelMatrix F = build_kernel_matrix(spec, y, grid);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(F.values()(i, j) ==
            doctest::Approx(kernel_density(spec, y[i], grid.at(j))).epsilon(1e-12));
}

TEST_CASE("kernel matrix rejects an all-zero row naming the observation") {
  // A count of 1000 against a tiny rate underflows to zero density.
  const Grid grid = Grid::from_points(std::vector<double>{1e-8});
  const std::vector<double> y{1000.0};
  try {
    build_kernel_matrix(KernelSpec::poisson(), y, grid);
    FAIL("expected data_error");
  } catch (const data_error& e) {
    CHECK(std::string(e.what()).find("observation 0") != std::string::npos);
  }
}

TEST_CASE("normal kernel rows rise then fall along the grid") {
  const Grid grid = Grid::equispaced(-4.0, 4.0, 41);
  const std::vector<double> y{-1.3, 0.2, 2.9};
  const KernelMatrix F = build_kernel_matrix(KernelSpec::normal_location(1.0), y, grid);
  for (int i = 0; i < F.rows(); ++i) {
    int switches = 0;
    for (int j = 0; j + 1 < F.cols(); ++j) {
      const bool rising = F.values()(i, j + 1) > F.values()(i, j);
      if (j > 0) {
        const bool was_rising = F.values()(i, j) > F.values()(i, j - 1);
        if (was_rising != rising) ++switches;
      }
    }
    CHECK(switches <= 1);  // unimodal row
  }
}

TEST_CASE("mixture_nll closed forms and oracle") {
  const Grid g1 = Grid::from_points(std::vector<double>{0.0});
  Eigen::MatrixXd f1(1, 1);
  f1 << 1.0;
  CHECK(mixture_nll(KernelMatrix(f1), MixingPMF::uniform(g1)) == 0.0);

  const Grid g2 = Grid::from_points(std::vector<double>{0.0, 1.0});
  Eigen::MatrixXd f2(2, 2);
  f2 << 0.5, 0.5, 0.5, 0.5;
  CHECK(mixture_nll(KernelMatrix(f2), MixingPMF::uniform(g2)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Rng rng(7);
  Eigen::MatrixXd f3(6, 3);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) f3(i, j) = rng.uniform_pos();
  const Grid g3 = Grid::from_points(std::vector<double>{-1.0, 0.0, 1.0});
  const MixingPMF pmf = testutil::random_pmf(g3, rng);

  double direct = 0.0;
  for (int i = 0; i < 6; ++i) {
    double r = 0.0;
    for (int j = 0; j < 3; ++j) r += f3(i, j) * pmf.weights()[j];
    direct += std::log(r);
  }
  direct = -direct / 6.0;
  CHECK(mixture_nll(KernelMatrix(f3), pmf) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("mixture_nll permutation invariance") {
  Rng rng(11);
  Eigen::MatrixXd f(5, 4);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) f(i, j) = rng.uniform_pos();
  const Grid g = Grid::from_points(std::vector<double>{0.0, 1.0, 2.0, 3.0});
  const MixingPMF pmf = testutil::random_pmf(g, rng);

  const std::vector<int> perm{2, 0, 3, 1};
  Eigen::MatrixXd fp(5, 4);
  Eigen::VectorXd wp(4);
  for (int j = 0; j < 4; ++j) {
    fp.col(j) = f.col(perm[static_cast<std::size_t>(j)]);
    wp[j] = pmf.weights()[perm[static_cast<std::size_t>(j)]];
  }
  CHECK(mixture_nll(f, pmf.weights()) ==
        doctest::Approx(mixture_nll(fp, wp)).epsilon(1e-12));
}

TEST_CASE("mixture_nll rejects a zero row mixture") {
  Eigen::MatrixXd f(1, 2);
  f << 0.0, 1.0;  // valid matrix, but mass sits where the density vanishes
  const Grid g = Grid::from_points(std::vector<double>{0.0, 1.0});
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  CHECK_THROWS_AS(mixture_nll(KernelMatrix(f), MixingPMF(g, w)), numeric_error);
}

TEST_CASE("softmax closed forms, positivity, and shift invariance") {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd u = softmax(z);
  for (int j = 0; j < 3; ++j) CHECK(u[j] == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Eigen::VectorXd logs(3);
  logs << std::log(1.0), std::log(2.0), std::log(5.0);
  const Eigen::VectorXd p = softmax(logs);
  CHECK(p[0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.625).epsilon(1e-12));

  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd x(8);
    for (int j = 0; j < 8; ++j) x[j] = rng.uniform(-30.0, 30.0);
    const Eigen::VectorXd base = softmax(x);
    CHECK(base.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 0; j < 8; ++j) {
      CHECK(base[j] > 0.0);
      CHECK(base[j] <= 1.0);
    }
    const Eigen::VectorXd shifted = softmax(x.array() + 1000.0);
    for (int j = 0; j < 8; ++j)
      CHECK(shifted[j] == doctest::Approx(base[j]).epsilon(1e-12));

    // Huge shifts exercise the overflow guard alone once the inputs are
    // quantized so that x + c carries no representation rounding of its own.
    Eigen::VectorXd q(8);
    for (int j = 0; j < 8; ++j) q[j] = std::round(x[j] * 1024.0) / 1024.0;
    const Eigen::VectorXd qbase = softmax(q);
    const Eigen::VectorXd qshift = softmax(q.array() + 1e6);
    for (int j = 0; j < 8; ++j)
      CHECK(qshift[j] == doctest::Approx(qbase[j]).epsilon(1e-12));
  }
}

TEST_CASE("softmax shift construction hits the proof bound") {
  const Grid g4 = Grid::equispaced(0.0, 1.0, 4);
  const MixingPMF uniform4 = MixingPMF::uniform(g4);
  const MixingPMF back = softmax_shift_construct(uniform4, 0.37);
  for (int j = 0; j < 4; ++j)
    CHECK(back.weights()[j] == doctest::Approx(0.25).epsilon(1e-15));

  // Two-point PMF with a hard zero, worked by hand.
  const Grid g2 = Grid::from_points(std::vector<double>{0.0, 1.0});
  Eigen::VectorXd w(2);
  w << 1.0, 0.0;
  const MixingPMF spike(g2, w);
  const MixingPMF built = softmax_shift_construct(spike, 0.1);
  CHECK(built.weights()[0] == doctest::Approx(41.0 / 42.0).epsilon(1e-12));
  CHECK(built.weights()[1] == doctest::Approx(1.0 / 42.0).epsilon(1e-12));
  const double err = std::abs(built.weights()[0] - 1.0);
  CHECK(err <= softmax_shift_bound(0.1));

  Rng rng(99);
  const Grid g100 = Grid::equispaced(-3.0, 3.0, 100);
  for (int rep = 0; rep < 100; ++rep) {
    const MixingPMF p = testutil::random_pmf(g100, rng, rep % 2 ? 0.3 : 0.0);
    for (const double eps : {0.1, 0.01}) {
      const MixingPMF q = softmax_shift_construct(p, eps);
      const double sup = (q.weights() - p.weights()).cwiseAbs().maxCoeff();
      CHECK(sup <= softmax_shift_bound(eps));
    }
  }
}

TEST_SUITE_END();
