#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace shrinksel::quad {

template <std::size_t K>
using Vec = std::array<double, K>;

template <std::size_t K>
struct Result {
  Vec<K> value{};
  Vec<K> error{};
  bool converged = false;
  std::size_t evaluations = 0;
};

struct Tolerance {
  double rel = 1e-6;
  double abs = 0.0;
  std::size_t max_intervals = 1000;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the Kronrod nodes with odd index (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t K>
struct Segment {
  double a = 0.0;
  double b = 0.0;
  Vec<K> value{};
  Vec<K> error{};
  double priority = 0.0;
  bool operator<(const Segment& other) const { return priority < other.priority; }
};

template <std::size_t K, class F>
Segment<K> gauss_kronrod(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Vec<K> kronrod{};
  Vec<K> gauss{};
  auto accumulate = [&](const Vec<K>& v, double wk, double wg) {
    for (std::size_t c = 0; c < K; ++c) {
      kronrod[c] += wk * v[c];
      gauss[c] += wg * v[c];
    }
  };
  accumulate(f(centre), kKronrodWeights[7], kGaussWeights[3]);
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double wg = (i % 2 == 1) ? kGaussWeights[i / 2] : 0.0;
    accumulate(f(centre - dx), kKronrodWeights[i], wg);
    accumulate(f(centre + dx), kKronrodWeights[i], wg);
  }
  Segment<K> seg;
  seg.a = a;
  seg.b = b;
  for (std::size_t c = 0; c < K; ++c) {
    seg.value[c] = half * kronrod[c];
    seg.error[c] = std::abs(half * (kronrod[c] - gauss[c]));
  }
  return seg;
}

}  // namespace detail

/// Globally adaptive vector-valued Gauss-Kronrod (G7/K15) integration of
/// f: double -> Vec<K> over [a, b]. The interval with the largest scaled
/// error is bisected until every one of the first `Checked` components
/// meets max(tol.abs, tol.rel * |I_c|).
template <std::size_t K, std::size_t Checked = K, class F>
Result<K> integrate(F&& f, double a, double b, const Tolerance& tol) {
  static_assert(Checked <= K);
  std::priority_queue<detail::Segment<K>> heap;
  Result<K> result;

  auto scaled_priority = [&](detail::Segment<K>& seg, const Vec<K>& total) {
    double worst = 0.0;
    for (std::size_t c = 0; c < Checked; ++c) {
      const double target = std::max(tol.abs, tol.rel * std::abs(total[c]));
      const double ratio = target > 0.0 ? seg.error[c] / target : seg.error[c] * 1e300;
      worst = std::max(worst, ratio);
    }
    seg.priority = worst;
  };

  auto first = detail::gauss_kronrod<K>(f, a, b);
  result.evaluations = 15;
  Vec<K> total = first.value;
  Vec<K> total_err = first.error;
  scaled_priority(first, total);
  heap.push(first);

  auto done = [&] {
    for (std::size_t c = 0; c < Checked; ++c) {
      if (total_err[c] > std::max(tol.abs, tol.rel * std::abs(total[c]))) return false;
    }
    return true;
  };

  std::size_t intervals = 1;
  while (!done() && intervals < tol.max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gauss_kronrod<K>(f, worst.a, mid);
    auto right = detail::gauss_kronrod<K>(f, mid, worst.b);
    result.evaluations += 30;
    for (std::size_t c = 0; c < K; ++c) {
      total[c] += left.value[c] + right.value[c] - worst.value[c];
      total_err[c] += left.error[c] + right.error[c] - worst.error[c];
    }
    scaled_priority(left, total);
    scaled_priority(right, total);
    heap.push(left);
    heap.push(right);
    ++intervals;
  }

  // Re-sum from the leaves to shed accumulated cancellation in the running totals.
  result.value.fill(0.0);
  result.error.fill(0.0);
  while (!heap.empty()) {
    const auto& seg = heap.top();
    for (std::size_t c = 0; c < K; ++c) {
      result.value[c] += seg.value[c];
      result.error[c] += seg.error[c];
    }
    heap.pop();
  }
  result.converged = true;
  for (std::size_t c = 0; c < Checked; ++c) {
    if (result.error[c] > std::max(tol.abs, tol.rel * std::abs(result.value[c]))) result.converged = false;
  }
  return result;
}

}  // namespace shrinksel::quad
