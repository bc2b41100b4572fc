#ifndef DOTIN_TESTS_GRADCHECK_HPP
#define DOTIN_TESTS_GRADCHECK_HPP

// Central finite differences against tape gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dotin/autodiff.hpp"

namespace dotin::testing {

using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

inline Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Tensor t(rows, cols);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

/// Largest relative error |g - fd| / max(1, |g|, |fd|) over every input entry.
inline double gradcheck(const ScalarFn& fn, std::vector<Tensor> inputs, double h = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.variable(t));
  const Var loss = fn(tape, vars);
  tape.backward(loss);
  std::vector<Tensor> analytic;
  for (const auto& v : vars) analytic.push_back(v.grad());

  auto eval = [&](const std::vector<Tensor>& xs) {
    Tape t;
    std::vector<Var> vs;
    for (const auto& x : xs) vs.push_back(t.constant(x));
    return fn(t, vs).value().item();
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double saved = inputs[i][j];
      inputs[i][j] = saved + h;
      const double up = eval(inputs);
      inputs[i][j] = saved - h;
      const double down = eval(inputs);
      inputs[i][j] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double g = analytic[i][j];
      worst = std::max(worst, std::abs(g - fd) / std::max({1.0, std::abs(g), std::abs(fd)}));
    }
  }
  return worst;
}

}  // namespace dotin::testing

#endif  // DOTIN_TESTS_GRADCHECK_HPP
