#pragma once

#include <cmath>

namespace pinnhs {

// Forward-mode carrier. Tape evaluation and the reverse pass are templated on
// the scalar type, so running them on Dual<double> yields one directional
// second derivative per pass (forward-over-reverse), and nesting
// (Dual<Dual<double>>) yields third-order terms for cross checks.
template <typename T>
struct Dual {
    T primal{};
    T tangent{};

    constexpr Dual() = default;
    constexpr Dual(double p) : primal(p) {}
    constexpr Dual(T p, T t) : primal(std::move(p)), tangent(std::move(t)) {}
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

template <typename T>
constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    return {a.primal + b.primal, a.tangent + b.tangent};
}
template <typename T>
constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return {a.primal - b.primal, a.tangent - b.tangent};
}
template <typename T>
constexpr Dual<T> operator-(const Dual<T>& a) {
    return {-a.primal, -a.tangent};
}
template <typename T>
constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.primal * b.primal, a.tangent * b.primal + a.primal * b.tangent};
}
template <typename T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    const T q = a.primal / b.primal;
    return {q, (a.tangent - q * b.tangent) / b.primal};
}

template <typename T>
constexpr Dual<T> operator+(const Dual<T>& a, double c) { return {a.primal + c, a.tangent}; }
template <typename T>
constexpr Dual<T> operator+(double c, const Dual<T>& a) { return a + c; }
template <typename T>
constexpr Dual<T> operator-(const Dual<T>& a, double c) { return {a.primal - c, a.tangent}; }
template <typename T>
constexpr Dual<T> operator-(double c, const Dual<T>& a) { return {c - a.primal, -a.tangent}; }
template <typename T>
constexpr Dual<T> operator*(const Dual<T>& a, double c) { return {a.primal * c, a.tangent * c}; }
template <typename T>
constexpr Dual<T> operator*(double c, const Dual<T>& a) { return a * c; }
template <typename T>
constexpr Dual<T> operator/(const Dual<T>& a, double c) { return {a.primal / c, a.tangent / c}; }
template <typename T>
constexpr Dual<T> operator/(double c, const Dual<T>& a) { return Dual<T>(c) / a; }

using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::tanh;

template <typename T>
Dual<T> exp(const Dual<T>& a) {
    const T e = exp(a.primal);
    return {e, a.tangent * e};
}
template <typename T>
Dual<T> log(const Dual<T>& a) {
    return {log(a.primal), a.tangent / a.primal};
}
template <typename T>
Dual<T> sin(const Dual<T>& a) {
    return {sin(a.primal), a.tangent * cos(a.primal)};
}
template <typename T>
Dual<T> cos(const Dual<T>& a) {
    return {cos(a.primal), -(a.tangent * sin(a.primal))};
}
template <typename T>
Dual<T> tanh(const Dual<T>& a) {
    const T t = tanh(a.primal);
    return {t, a.tangent * (1.0 - t * t)};
}
// Constant exponent only; matches the tape's pow op.
template <typename T>
Dual<T> pow(const Dual<T>& a, double c) {
    return {pow(a.primal, c), a.tangent * (c * pow(a.primal, c - 1.0))};
}

inline double primal_value(double x) { return x; }
template <typename T>
double primal_value(const Dual<T>& d) { return primal_value(d.primal); }

}  // namespace pinnhs
