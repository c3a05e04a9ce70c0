#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jsp/model.hpp"

#include <random>

using namespace jsp;

namespace {

ProblemInstance make_instance(const CMatrix& h, double sigma2, double p_total) {
  ProblemInstance inst;
  inst.H = h;
  inst.sigma2 = sigma2;
  inst.p_total = p_total;
  const int n = inst.n_users();
  inst.alpha = Vector::Ones(n);
  inst.beta = Vector::Ones(n);
  inst.eps = Vector::Zero(n);
  return inst;
}

}  // namespace

TEST_CASE("channel generation is deterministic per seed") {
  const auto a = generate_channel(4, 3, 1234);
  const auto b = generate_channel(4, 3, 1234);
  const auto c = generate_channel(4, 3, 1235);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.rows() == 4);
  CHECK(a.cols() == 3);
}

TEST_CASE("channel entries have unit mean power") {
  const int n = 10000;
  const auto h = generate_channel(n, 1, 77);
  const double mean = h.array().abs2().mean();
  // |h|^2 is exponential(1); the sample mean has sd 1/sqrt(n).
  CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sinr on orthogonal channels has no interference") {
  CMatrix h(2, 2);
  h << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0);
  auto inst = make_instance(h, 1.0, 8.0);
  CMatrix w(2, 2);
  w << Complex(2, 0), Complex(0, 0), Complex(0, 0), Complex(2, 0);
  CHECK(sinr(inst, w, 0) == doctest::Approx(4.0));
  CHECK(sinr(inst, w, 1) == doctest::Approx(4.0));
  CHECK(interference(inst, w, 0) == doctest::Approx(1.0));
  CHECK(total_power(w) == doctest::Approx(8.0));
}

TEST_CASE("sinr with identical channels splits power") {
  CMatrix h(2, 2);
  h << Complex(1, 0), Complex(0, 0), Complex(1, 0), Complex(0, 0);
  auto inst = make_instance(h, 1.0, 2.0);
  CMatrix w(2, 2);
  w << Complex(1, 0), Complex(1, 0), Complex(0, 0), Complex(0, 0);
  CHECK(sinr(inst, w, 0) == doctest::Approx(0.5));
}

TEST_CASE("sinr and interference match a scalar-loop oracle") {
  const int n = 5, m = 3;
  auto inst = make_instance(generate_channel(n, m, 42), 0.7, 5.0);
  CMatrix w = generate_channel(m, n, 43);  // arbitrary complex precoders
  for (int i = 0; i < n; ++i) {
    double denom = inst.sigma2;
    double num = 0.0;
    for (int j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (int k = 0; k < m; ++k) acc += inst.H(i, k) * w(k, j);
      if (j == i)
        num = std::norm(acc);
      else
        denom += std::norm(acc);
    }
    CHECK(interference(inst, w, i) == doctest::Approx(denom).epsilon(1e-12));
    CHECK(sinr(inst, w, i) == doctest::Approx(num / denom).epsilon(1e-12));
  }
}

TEST_CASE("rate values at simple SINRs") {
  CMatrix h(1, 1);
  h << Complex(1, 0);
  auto inst = make_instance(h, 1.0, 4.0);
  CMatrix w(1, 1);
  w << Complex(0, 0);
  CHECK(rate(inst, w, 0) == doctest::Approx(0.0));  // sinr 0
  w(0, 0) = Complex(std::sqrt(3.0), 0);
  CHECK(rate(inst, w, 0) == doctest::Approx(2.0));  // sinr 3
  w(0, 0) = Complex(1, 0);
  CHECK(rate(inst, w, 0) == doctest::Approx(1.0));  // sinr 1
}

TEST_CASE("interference of all-zero precoders is the noise floor") {
  auto inst = make_instance(generate_channel(3, 2, 5), 2.5, 1.0);
  CMatrix w = CMatrix::Zero(2, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(interference(inst, w, i) == doctest::Approx(2.5));
    CHECK(sinr(inst, w, i) == doctest::Approx(0.0));
  }
}

TEST_CASE("total_power matches an elementwise oracle") {
  CMatrix w = generate_channel(4, 6, 9);
  double acc = 0.0;
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) acc += std::norm(w(i, j));
  CHECK(total_power(w) == doctest::Approx(acc).epsilon(1e-13));
  CHECK(total_power(CMatrix::Zero(3, 3)) == doctest::Approx(0.0));
}

TEST_CASE("rate increases with sinr and dropping interferers never hurts") {
  std::mt19937_64 seeds(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4, m = 3;
    auto inst = make_instance(generate_channel(n, m, seeds()), 1.0, 4.0);
    CMatrix w = generate_channel(m, n, seeds());
    for (int i = 0; i < n; ++i) {
      const double base = sinr(inst, w, i);
      CHECK(rate(inst, w, i) >= 0.0);
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        CMatrix wz = w;
        wz.col(j).setZero();
        CHECK(sinr(inst, wz, i) >= base - 1e-12);
      }
    }
  }
}

TEST_CASE("sinr is invariant under joint power/noise rescaling") {
  auto inst = make_instance(generate_channel(3, 2, 11), 1.3, 4.0);
  CMatrix w = generate_channel(2, 3, 12);
  const double c = 1.7;
  auto scaled = inst;
  scaled.sigma2 = inst.sigma2 * c * c;
  for (int i = 0; i < 3; ++i)
    CHECK(sinr(scaled, CMatrix(c * w), i) == doctest::Approx(sinr(inst, w, i)).epsilon(1e-12));
}

TEST_CASE("total_power and sinr are invariant under a common antenna rotation") {
  const int n = 3, m = 3;
  auto inst = make_instance(generate_channel(n, m, 21), 1.0, 4.0);
  CMatrix w = generate_channel(m, n, 22);
  const CMatrix u = Eigen::HouseholderQR<CMatrix>(generate_channel(m, m, 23))
                        .householderQ();
  auto rotated = inst;
  rotated.H = inst.H * u.adjoint();
  const CMatrix wr = u * w;
  CHECK(total_power(wr) == doctest::Approx(total_power(w)).epsilon(1e-12));
  for (int i = 0; i < n; ++i)
    CHECK(sinr(rotated, wr, i) == doctest::Approx(sinr(inst, w, i)).epsilon(1e-10));
}

TEST_CASE("instance validation rejects broken inputs") {
  auto inst = make_instance(generate_channel(2, 2, 1), 1.0, 1.0);
  CHECK_NOTHROW(inst.validate());
  auto bad = inst;
  bad.sigma2 = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = inst;
  bad.alpha[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = inst;
  bad.eps[1] = -0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(generate_channel(0, 1, 1), std::invalid_argument);
}
