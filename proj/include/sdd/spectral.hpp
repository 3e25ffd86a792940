#pragma once

// Eigenbasis representation of the Dirichlet Laplacian on (0, L).
//
// Basis: e_k(x) = sqrt(2/L) sin(k pi x / L), k = 1..m, orthonormal in L2(0, L).
// Collocation nodes: x_j = j L / (m + 1), j = 1..m, quadrature weight L / (m + 1).
//
// With this normalization the discrete sine transform pair is exact:
//   to_grid:   v_j = sum_k S(j, k) u_k,           S(j, k) = e_k(x_j)
//   from_grid: u_k = (L / (m + 1)) sum_j S(j, k) v_j
// because sum_j sin(j k pi/(m+1)) sin(j k' pi/(m+1)) = (m + 1)/2 delta_kk'.
// Hence <u, v>_{L2} computed from coefficients equals the nodal quadrature
// (L / (m + 1)) sum_j u(x_j) v(x_j) exactly (Parseval).

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sdd {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class BasisKind {
  dirichlet_sine,
  // Arbitrary nonnegative diagonal operator with the sine basis for grid
  // transforms. Used for scalar delay-ODE checks (lambda = 0).
  custom,
};

template <typename Scalar = double>
class BasicSpectrum {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  static BasicSpectrum dirichlet(Eigen::Index m, Scalar length) {
    if (m < 1) throw std::invalid_argument("spectrum: mode count m must be >= 1");
    if (!(length > Scalar(0))) throw std::invalid_argument("spectrum: domain length L must be > 0");
    Vector lambda(m);
    const Scalar pi = std::numbers::pi_v<Scalar>;
    for (Eigen::Index k = 0; k < m; ++k) {
      const Scalar w = Scalar(k + 1) * pi / length;
      lambda[k] = w * w;
    }
    return BasicSpectrum(std::move(lambda), length, BasisKind::dirichlet_sine);
  }

  static BasicSpectrum custom(Vector eigenvalues, Scalar length) {
    if (eigenvalues.size() < 1) throw std::invalid_argument("spectrum: empty eigenvalue list");
    if (!(length > Scalar(0))) throw std::invalid_argument("spectrum: domain length L must be > 0");
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
      if (!(eigenvalues[k] >= Scalar(0)) || !std::isfinite(static_cast<double>(eigenvalues[k])))
        throw std::invalid_argument("spectrum: eigenvalues must be finite and nonnegative");
      if (k > 0 && eigenvalues[k] < eigenvalues[k - 1])
        throw std::invalid_argument("spectrum: eigenvalues must be nondecreasing");
    }
    return BasicSpectrum(std::move(eigenvalues), length, BasisKind::custom);
  }

  Eigen::Index size() const { return eigenvalues_.size(); }
  const Vector& eigenvalues() const { return eigenvalues_; }
  Scalar lambda(Eigen::Index k) const { return eigenvalues_[k]; }
  Scalar length() const { return length_; }
  BasisKind kind() const { return kind_; }

  // S(j, k) = e_k(x_j).
  const Matrix& synthesis() const { return *synthesis_; }
  Scalar node_weight() const { return length_ / Scalar(size() + 1); }
  Scalar node(Eigen::Index j) const { return Scalar(j + 1) * node_weight(); }

  // Lowest-order spectrum of the same kind and length.
  BasicSpectrum truncated(Eigen::Index m) const {
    if (m < 1 || m > size()) throw std::invalid_argument("spectrum: invalid truncation order");
    if (kind_ == BasisKind::dirichlet_sine) return dirichlet(m, length_);
    return custom(eigenvalues_.head(m), length_);
  }

 private:
  BasicSpectrum(Vector lambda, Scalar length, BasisKind kind)
      : eigenvalues_(std::move(lambda)), length_(length), kind_(kind) {
    const Eigen::Index m = eigenvalues_.size();
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar amp = std::sqrt(Scalar(2) / length_);
    auto s = std::make_shared<Matrix>(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < m; ++k)
        (*s)(j, k) = amp * std::sin(Scalar((j + 1) * (k + 1)) * pi / Scalar(m + 1));
    synthesis_ = std::move(s);
  }

  Vector eigenvalues_;
  Scalar length_;
  BasisKind kind_;
  std::shared_ptr<const Matrix> synthesis_;
};

// Coefficients u_k = <u, e_k> of a Galerkin state plus its timestamp.
template <typename Scalar = double>
struct BasicSpectralState {
  VectorX<Scalar> coeffs;
  Scalar time = Scalar(0);

  BasicSpectralState() = default;
  explicit BasicSpectralState(VectorX<Scalar> c, Scalar t = Scalar(0)) : coeffs(std::move(c)), time(t) {}

  static BasicSpectralState zero(Eigen::Index m, Scalar t = Scalar(0)) {
    return BasicSpectralState(VectorX<Scalar>::Zero(m), t);
  }
  // k is 1-based, matching the mode numbering.
  static BasicSpectralState unit(Eigen::Index m, Eigen::Index k, Scalar t = Scalar(0)) {
    auto s = zero(m, t);
    s.coeffs[k - 1] = Scalar(1);
    return s;
  }

  Eigen::Index m() const { return coeffs.size(); }
  bool is_finite() const { return coeffs.allFinite() && std::isfinite(static_cast<double>(time)); }
};

// Nodal values u(x_j), j = 1..m.
template <typename Scalar = double>
struct BasicGridState {
  VectorX<Scalar> values;
  Eigen::Index m() const { return values.size(); }
};

using Spectrum = BasicSpectrum<double>;
using SpectralState = BasicSpectralState<double>;
using GridState = BasicGridState<double>;
using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

namespace detail {
template <typename Scalar>
inline void require_fits(Eigen::Index m, const BasicSpectrum<Scalar>& s) {
  if (m > s.size())
    throw std::invalid_argument("dimension mismatch: state has " + std::to_string(m) +
                                " modes, spectrum has " + std::to_string(s.size()));
}
template <typename Scalar>
inline void require_equal(Eigen::Index m, const BasicSpectrum<Scalar>& s) {
  if (m != s.size())
    throw std::invalid_argument("dimension mismatch: state has " + std::to_string(m) +
                                " modes, transform expects " + std::to_string(s.size()));
}
}  // namespace detail

// lambda_k^alpha for the first coeffs.size() modes, as an expression.
template <typename Scalar>
inline auto power_weights(const BasicSpectrum<Scalar>& s, Eigen::Index m, Scalar alpha) {
  return s.eigenvalues().head(m).array().pow(alpha);
}

// ||A^alpha u|| = (sum_k lambda_k^{2 alpha} u_k^2)^{1/2}.
template <typename Derived>
inline typename Derived::Scalar frac_norm(const Eigen::MatrixBase<Derived>& coeffs,
                                          typename Derived::Scalar alpha,
                                          const BasicSpectrum<typename Derived::Scalar>& s) {
  using Scalar = typename Derived::Scalar;
  detail::require_fits(coeffs.size(), s);
  if (alpha == Scalar(0)) return coeffs.norm();
  return (coeffs.array() * power_weights(s, coeffs.size(), alpha)).matrix().norm();
}

template <typename Scalar>
inline Scalar frac_norm(const BasicSpectralState<Scalar>& u, Scalar alpha, const BasicSpectrum<Scalar>& s) {
  return frac_norm(u.coeffs, alpha, s);
}

template <typename Scalar>
inline BasicSpectralState<Scalar> apply_A_power(const BasicSpectralState<Scalar>& u, Scalar alpha,
                                                const BasicSpectrum<Scalar>& s) {
  detail::require_fits(u.m(), s);
  if (alpha == Scalar(0)) return u;
  VectorX<Scalar> c = (u.coeffs.array() * power_weights(s, u.m(), alpha)).matrix();
  return BasicSpectralState<Scalar>(std::move(c), u.time);
}

// Orthogonal projection P_m onto the first m_target modes. When m_target
// exceeds u.m() the state is returned unchanged.
template <typename Scalar>
inline BasicSpectralState<Scalar> project(const BasicSpectralState<Scalar>& u, Eigen::Index m_target) {
  if (m_target < 1) throw std::invalid_argument("project: target order must be >= 1");
  const Eigen::Index keep = std::min(u.m(), m_target);
  return BasicSpectralState<Scalar>(u.coeffs.head(keep), u.time);
}

// Zero-pads (or truncates) to exactly m modes.
template <typename Scalar>
inline BasicSpectralState<Scalar> resize_modes(const BasicSpectralState<Scalar>& u, Eigen::Index m) {
  VectorX<Scalar> c = VectorX<Scalar>::Zero(m);
  const Eigen::Index keep = std::min(u.m(), m);
  c.head(keep) = u.coeffs.head(keep);
  return BasicSpectralState<Scalar>(std::move(c), u.time);
}

template <typename Scalar>
inline BasicGridState<Scalar> to_grid(const BasicSpectralState<Scalar>& u, const BasicSpectrum<Scalar>& s) {
  detail::require_equal(u.m(), s);
  return BasicGridState<Scalar>{s.synthesis() * u.coeffs};
}

template <typename Scalar>
inline BasicSpectralState<Scalar> from_grid(const BasicGridState<Scalar>& v, const BasicSpectrum<Scalar>& s,
                                            Scalar time = Scalar(0)) {
  detail::require_equal(v.m(), s);
  return BasicSpectralState<Scalar>(s.node_weight() * (s.synthesis().transpose() * v.values), time);
}

template <typename Scalar>
inline Scalar inner(const BasicSpectralState<Scalar>& u, const BasicSpectralState<Scalar>& v) {
  if (u.m() != v.m()) throw std::invalid_argument("inner: dimension mismatch");
  return u.coeffs.dot(v.coeffs);
}

// Nodal quadrature of the L2 inner product.
template <typename Scalar>
inline Scalar grid_inner(const BasicGridState<Scalar>& v, const BasicGridState<Scalar>& w,
                         const BasicSpectrum<Scalar>& s) {
  detail::require_equal(v.m(), s);
  detail::require_equal(w.m(), s);
  return s.node_weight() * v.values.dot(w.values);
}

}  // namespace sdd
