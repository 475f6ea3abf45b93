#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <type_traits>

namespace gstoep {

using Index = Eigen::Index;

template <typename T>
struct ScalarTraits {
  using Real = T;
  static constexpr bool is_complex = false;
};

template <typename R>
struct ScalarTraits<std::complex<R>> {
  using Real = R;
  static constexpr bool is_complex = true;
};

template <typename T>
using RealOf = typename ScalarTraits<T>::Real;

template <typename T>
inline constexpr bool is_complex_v = ScalarTraits<T>::is_complex;

template <typename T>
concept Field = std::is_same_v<T, double> || std::is_same_v<T, std::complex<double>>;

template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using VecR = Vec<double>;
using MatR = Mat<double>;

template <Field T>
constexpr T conj(const T& x) {
  if constexpr (is_complex_v<T>) {
    return std::conj(x);
  } else {
    return x;
  }
}

template <Field T>
constexpr double abs2(const T& x) {
  if constexpr (is_complex_v<T>) {
    return std::norm(x);
  } else {
    return x * x;
  }
}

template <Field T>
constexpr double real_part(const T& x) {
  if constexpr (is_complex_v<T>) {
    return x.real();
  } else {
    return x;
  }
}

}  // namespace gstoep
