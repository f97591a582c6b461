#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <random>

#include "chg/potential.hpp"
#include "doctest.h"

using namespace chg;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("double well values and derivatives") {
  const PotentialSpec dw = PotentialSpec::double_well();
  auto v0 = eval(dw, 0.0);
  CHECK(v0.phi == doctest::Approx(0.25));
  CHECK(v0.dphi == doctest::Approx(0.0));
  CHECK(v0.d2phi == doctest::Approx(-1.0));
  CHECK(v0.d3phi == doctest::Approx(0.0));

  auto v1 = eval(dw, 1.0);
  CHECK(v1.phi == doctest::Approx(0.0));
  CHECK(v1.dphi == doctest::Approx(0.0));
  CHECK(v1.d2phi == doctest::Approx(2.0));
  CHECK(v1.d3phi == doctest::Approx(6.0));

  auto v2 = eval(dw, 2.0);
  CHECK(v2.phi == doctest::Approx(2.25));
  CHECK(v2.dphi == doctest::Approx(6.0));
  CHECK(v2.d2phi == doctest::Approx(11.0));
  CHECK(v2.d3phi == doctest::Approx(12.0));
}

TEST_CASE("derivatives agree with centered differences") {
  const PotentialSpec p = PotentialSpec::polynomial({0.3, -1.2, 0.0, 0.5, 0.25, -0.01});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng);
    const auto vm = eval(p, s - h), vp = eval(p, s + h), v = eval(p, s);
    const double scale = std::max(1.0, std::abs(v.dphi));
    CHECK(std::abs((vp.phi - vm.phi) / (2 * h) - v.dphi) / scale < 1e-6);
    CHECK(std::abs((vp.dphi - vm.dphi) / (2 * h) - v.d2phi) / std::max(1.0, std::abs(v.d2phi)) <
          1e-6);
    CHECK(std::abs((vp.d2phi - vm.d2phi) / (2 * h) - v.d3phi) / std::max(1.0, std::abs(v.d3phi)) <
          1e-6);
  }
}

TEST_CASE("stabilization default is the curvature maximum on [-1.5, 1.5]") {
  const PotentialSpec dw = PotentialSpec::double_well();
  CHECK(stabilization_slope(dw) == doctest::Approx(5.75).epsilon(1e-9));  // 3*1.5^2 - 1

  const auto s0 = split_linearized(dw, 0.0);
  CHECK(s0.value == doctest::Approx(0.0));
  CHECK(s0.slope == doctest::Approx(5.75).epsilon(1e-9));
  const auto s1 = split_linearized(dw, 1.0);
  CHECK(s1.value == doctest::Approx(0.0));

  PotentialSpec fixed = dw;
  fixed.stabilization = 2.0;
  CHECK(split_linearized(fixed, 0.0).slope == 2.0);
  fixed.stabilization = 0.0;  // S = 0 requests are accepted
  CHECK(split_linearized(fixed, 0.0).slope == 0.0);
}

TEST_CASE("growth certificate: double well passes with (alpha,gamma,theta) = (2,1,3/4)") {
  const PotentialSpec dw = PotentialSpec::double_well();
  const GrowthReport rep = validate_growth(dw, 10.0, 3, 1.0, kInf);
  CHECK(rep.all_pass());
  CHECK(rep.alpha == doctest::Approx(2.0));
  CHECK(rep.gamma == doctest::Approx(1.0));
  CHECK(rep.theta == doctest::Approx(0.75));
  CHECK(rep.c0 == doctest::Approx(0.0));  // Phi >= 0, any eta admissible
  CHECK(rep.eta_min == doctest::Approx(0.0));
  CHECK(rep.analytic);
}

TEST_CASE("growth certificate: s^6 fails the third-derivative bound for n=3") {
  const PotentialSpec p6 = PotentialSpec::polynomial({0, 0, 0, 0, 0, 0, 1.0});
  const GrowthReport rep = validate_growth(p6, 10.0, 3, 1.0, kInf);
  CHECK(rep.gamma == doctest::Approx(3.0));
  CHECK_FALSE(rep.third_pass);
  CHECK_FALSE(rep.all_pass());
  // same potential is fine in low dimension
  const GrowthReport rep2 = validate_growth(p6, 10.0, 2, 1.0, kInf);
  CHECK(rep2.third_pass);
}

TEST_CASE("growth certificate: concave quadratic needs eta >= 2") {
  const PotentialSpec conc = PotentialSpec::polynomial({0.0, 0.0, -1.0});  // -s^2
  const double lambda1 = M_PI * M_PI;                                      // unit interval
  const GrowthReport fail = validate_growth(conc, 10.0, 1, 1.0, lambda1);
  CHECK_FALSE(fail.lower_bound_pass);
  CHECK(fail.eta_min == doctest::Approx(2.0));
  const GrowthReport pass = validate_growth(conc, 10.0, 1, 2.0, lambda1);
  CHECK(pass.lower_bound_pass);  // eta = 2 < pi^2
}

TEST_CASE("growth certificate is monotone in the scan radius for polynomials") {
  for (const auto& coeffs :
       {std::vector<double>{0.25, 0, -0.5, 0, 0.25}, std::vector<double>{0, 0, 0, 0, 0, 0, 1.0},
        std::vector<double>{1.0, -2.0, 0.5, 0.0, 0.125}}) {
    const PotentialSpec p = PotentialSpec::polynomial(coeffs);
    const GrowthReport a = validate_growth(p, 10.0, 3, 1.0, kInf);
    const GrowthReport b = validate_growth(p, 40.0, 3, 1.0, kInf);
    CHECK(a.lower_bound_pass == b.lower_bound_pass);
    CHECK(a.gradient_pass == b.gradient_pass);
    CHECK(a.hessian_pass == b.hessian_pass);
    CHECK(a.third_pass == b.third_pass);
  }
}

TEST_CASE("scan range below 10 is rejected") {
  CHECK_THROWS_AS((void)validate_growth(PotentialSpec::double_well(), 5.0, 2, 1.0, kInf),
                  std::invalid_argument);
}

TEST_CASE("taylor shift evaluates Phi(s + c)") {
  const PotentialSpec dw = PotentialSpec::double_well();
  const PotentialSpec sh = shifted(dw, 0.37);
  for (double s : {-2.0, -0.5, 0.0, 1.1, 3.0}) {
    CHECK(eval(sh, s).phi == doctest::Approx(eval(dw, s + 0.37).phi).epsilon(1e-12));
    CHECK(eval(sh, s).dphi == doctest::Approx(eval(dw, s + 0.37).dphi).epsilon(1e-12));
  }
}
