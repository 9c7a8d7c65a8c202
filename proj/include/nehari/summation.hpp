#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace nehari {

/// Fields above this many terms are reduced pairwise.
inline constexpr std::size_t kPairwiseThreshold = std::size_t{1} << 16;

namespace detail {

template <typename Scalar>
Scalar pairwise_sum(const Scalar* x, std::size_t n) {
  if (n <= 256) {
    Scalar s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

}  // namespace detail

/// Order-fixed reduction: left-to-right below the threshold, a fixed
/// binary tree above it. Never delegates to a vectorized reduction whose
/// association depends on the SIMD width.
template <typename Scalar>
Scalar deterministic_sum(std::span<const Scalar> x) {
  if (x.size() > kPairwiseThreshold) return detail::pairwise_sum(x.data(), x.size());
  Scalar s = 0;
  for (Scalar v : x) s += v;
  return s;
}

/// |t|^(p-2) t, continued by 0 at t = 0.
template <typename Scalar>
Scalar signed_pow(Scalar t, Scalar p) {
  if (t == Scalar(0)) return Scalar(0);
  const Scalar m = std::pow(std::abs(t), p - Scalar(1));
  return t > 0 ? m : -m;
}

/// |a + delta|^p - |a|^p without cancellation when |delta| << |a|.
template <typename Scalar>
Scalar pow_abs_increment(Scalar a, Scalar delta, Scalar p) {
  if (delta == Scalar(0)) return Scalar(0);
  if (a != Scalar(0) && std::abs(delta) < Scalar(0.5) * std::abs(a))
    return std::pow(std::abs(a), p) * std::expm1(p * std::log1p(delta / a));
  return std::pow(std::abs(a + delta), p) - std::pow(std::abs(a), p);
}

}  // namespace nehari
