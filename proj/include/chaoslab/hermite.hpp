#pragma once

// Hermite polynomials use the probabilists' convention throughout:
//
//   H_k(x) = (-1)^k e^{x^2/2} d^k/dx^k e^{-x^2/2},
//   H_0 = 1, H_1 = x, H_{k+1}(x) = x H_k(x) - k H_{k-1}(x),
//
// orthogonal under the standard Gaussian with E H_k(g)^2 = k!. The
// physicists' polynomials (weight e^{-x^2}, H_1 = 2x) are NOT used anywhere.

#include <functional>
#include <vector>

namespace chaoslab {

inline constexpr int kMaxHermiteDegree = 12;

double hermite(int k, double x);

/// E H_k(g)^2 = k! for a standard Gaussian g.
double hermite_second_moment(int k);

/// Gauss-Hermite rule for expectations under N(0,1): weights sum to one and
/// sum_i w_i p(x_i) = E p(g) exactly for polynomials of degree < 2*order.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  double expectation(const std::function<double(double)>& f) const;
};

/// Cached per order; safe to call concurrently.
const GaussHermiteRule& gauss_hermite(int order);

using ScalarFunction = std::function<double(double)>;

/// |E H_k(g) F(g) - E H_{k-1}(g) F'(g)| by quadrature at `order`. Throws
/// NonConvergenceError when orders `order` and `order + 1` disagree on either
/// side by more than 1e-8.
double hermite_ibp_residual(int k, const ScalarFunction& f, const ScalarFunction& df,
                            int quadrature_order);

namespace testing {
/// Fault-injection hook for the self-test: perturbs every hermite() value.
void set_hermite_fault(bool enabled);
}  // namespace testing

}  // namespace chaoslab
