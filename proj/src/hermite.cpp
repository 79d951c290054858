#include "chaoslab/hermite.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "chaoslab/errors.hpp"

namespace chaoslab {

namespace {

std::atomic<bool> g_hermite_fault{false};

void check_degree(int k) {
  if (k < 0 || k > kMaxHermiteDegree)
    throw std::invalid_argument("hermite degree must lie in [0, " +
                                std::to_string(kMaxHermiteDegree) + "], got " + std::to_string(k));
}

// Orthonormal Hermite values h_{n-1}(x), h_n(x) with h_k = H_k / sqrt(k!).
std::pair<double, double> orthonormal_pair(int n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < n; ++k) {
    const double next = (x * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
    prev = cur;
    cur = next;
  }
  return {prev, cur};
}

// Golub-Welsch eigenvalues of the Jacobi matrix, polished by Newton on h_n;
// weights from the Christoffel formula w_i = 1 / (n h_{n-1}(x_i)^2).
GaussHermiteRule build_rule(int order) {
  const int n = order;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) {
      const auto [hm1, hn] = orthonormal_pair(n, x);
      x -= hn / (std::sqrt(double(n)) * hm1);
    }
    const double hm1 = orthonormal_pair(n, x).first;
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (double(n) * hm1 * hm1);
  }
  return rule;
}

}  // namespace

double hermite(int k, double x) {
  check_degree(k);
  double prev = 1.0;
  double cur = x;
  if (k == 0) {
    cur = 1.0;
  } else {
    for (int j = 1; j < k; ++j) {
      const double next = x * cur - double(j) * prev;
      prev = cur;
      cur = next;
    }
  }
  if (g_hermite_fault.load(std::memory_order_relaxed)) cur += 1e-3;
  return cur;
}

double hermite_second_moment(int k) {
  check_degree(k);
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= double(j);
  return f;
}

double GaussHermiteRule::expectation(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
  return sum;
}

const GaussHermiteRule& gauss_hermite(int order) {
  if (order < 1 || order > 400)
    throw std::invalid_argument("gauss_hermite: order must lie in [1, 400]");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(order));
  return *slot;
}

double hermite_ibp_residual(int k, const ScalarFunction& f, const ScalarFunction& df,
                            int quadrature_order) {
  if (k < 1) throw std::invalid_argument("hermite_ibp_residual: k must be positive");
  check_degree(k);
  if (quadrature_order < 40)
    throw std::invalid_argument("hermite_ibp_residual: quadrature order must be at least 40");

  auto sides = [&](int order) {
    const GaussHermiteRule& rule = gauss_hermite(order);
    const double lhs = rule.expectation([&](double x) { return hermite(k, x) * f(x); });
    const double rhs = rule.expectation([&](double x) { return hermite(k - 1, x) * df(x); });
    return std::pair{lhs, rhs};
  };
  const auto [lhs, rhs] = sides(quadrature_order);
  const auto [lhs_next, rhs_next] = sides(quadrature_order + 1);
  constexpr double kAgreement = 1e-8;
  if (std::abs(lhs - lhs_next) > kAgreement || std::abs(rhs - rhs_next) > kAgreement)
    throw NonConvergenceError("hermite_ibp_residual: quadrature orders " +
                              std::to_string(quadrature_order) + " and " +
                              std::to_string(quadrature_order + 1) + " disagree beyond 1e-8");
  return std::abs(lhs - rhs);
}

namespace testing {
void set_hermite_fault(bool enabled) { g_hermite_fault.store(enabled); }
}  // namespace testing

}  // namespace chaoslab
