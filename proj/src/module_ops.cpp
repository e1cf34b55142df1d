#include "cliffsemi/module_ops.hpp"

#include "cliffsemi/errors.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>

namespace cliffsemi {

namespace {

// Exponentials kept per evaluator; beyond this the cache stops growing.
constexpr std::size_t kCacheBytes = std::size_t{512} << 20;

int blade_count(int n) { return 1 << n; }

void check_match(int n1, int d1, int n2, int d2) {
  if (n1 != n2 || d1 != d2)
    throw DimensionError("dimension mismatch: (n=" + std::to_string(n1) + ", d=" + std::to_string(d1) +
                         ") vs (n=" + std::to_string(n2) + ", d=" + std::to_string(d2) + ")");
}

}  // namespace

// --- CliffordVector -------------------------------------------------------------

CliffordVector::CliffordVector(int n, int d)
    : n_(n), entries_(static_cast<std::size_t>(d), CliffordElement(n)) {
  if (d < 1) throw DimensionError("module dimension must be positive");
}

CliffordVector::CliffordVector(int n, std::vector<CliffordElement> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.empty()) throw DimensionError("module dimension must be positive");
  for (const auto& e : entries_)
    if (e.n() != n_) throw DimensionError("CliffordVector: mixed signatures");
}

CliffordVector CliffordVector::basis(int n, int d, int slot, unsigned mask) {
  CliffordVector x(n, d);
  x.entries_.at(static_cast<std::size_t>(slot)) = CliffordElement::blade(n, mask);
  return x;
}

CliffordVector CliffordVector::random(int n, int d, Rng& rng) {
  std::vector<CliffordElement> e;
  for (int i = 0; i < d; ++i) e.push_back(random_element(n, rng));
  return CliffordVector(n, std::move(e));
}

CliffordVector CliffordVector::from_flat(int n, int d, const Eigen::VectorXd& flat) {
  const int m = blade_count(n);
  if (flat.size() != d * m) throw DimensionError("from_flat: wrong vector length");
  std::vector<CliffordElement> e;
  for (int i = 0; i < d; ++i) {
    std::vector<double> c(flat.data() + i * m, flat.data() + (i + 1) * m);
    e.emplace_back(n, std::move(c));
  }
  return CliffordVector(n, std::move(e));
}

Eigen::VectorXd CliffordVector::flatten() const {
  const int m = blade_count(n_);
  Eigen::VectorXd v(d() * m);
  for (int i = 0; i < d(); ++i)
    for (int k = 0; k < m; ++k) v(i * m + k) = entries_[static_cast<std::size_t>(i)].coeffs()[static_cast<std::size_t>(k)];
  return v;
}

CliffordVector operator+(const CliffordVector& x, const CliffordVector& y) {
  check_match(x.n(), x.d(), y.n(), y.d());
  CliffordVector r = x;
  for (std::size_t i = 0; i < r.entries_.size(); ++i) r.entries_[i] = r.entries_[i] + y.entries_[i];
  return r;
}

CliffordVector operator-(const CliffordVector& x, const CliffordVector& y) { return x + (-1.0) * y; }

CliffordVector operator*(double r, const CliffordVector& x) {
  CliffordVector s = x;
  for (auto& e : s.entries_) e = r * e;
  return s;
}

CliffordVector operator*(const CliffordElement& q, const CliffordVector& x) {
  CliffordVector s = x;
  for (auto& e : s.entries_) e = q * e;
  return s;
}

CliffordVector operator*(const CliffordVector& x, const CliffordElement& q) {
  CliffordVector s = x;
  for (auto& e : s.entries_) e = e * q;
  return s;
}

// --- CliffordMatrixOperator -------------------------------------------------------

CliffordMatrixOperator::CliffordMatrixOperator(int n, int d)
    : n_(n), d_(d), entries_(static_cast<std::size_t>(d * d), CliffordElement(n)) {
  if (d < 1) throw DimensionError("module dimension must be positive");
}

CliffordMatrixOperator::CliffordMatrixOperator(int n, int d, std::vector<CliffordElement> entries)
    : n_(n), d_(d), entries_(std::move(entries)) {
  if (d < 1) throw DimensionError("module dimension must be positive");
  if (entries_.size() != static_cast<std::size_t>(d * d))
    throw DimensionError("operator needs d*d entries");
  for (const auto& e : entries_)
    if (e.n() != n_) throw DimensionError("operator: mixed signatures");
}

CliffordMatrixOperator CliffordMatrixOperator::scalar(int n, int d, double c) {
  CliffordMatrixOperator a(n, d);
  for (int i = 0; i < d; ++i) a.entries_[static_cast<std::size_t>(i * d + i)] = CliffordElement::scalar(n, c);
  return a;
}

CliffordMatrixOperator CliffordMatrixOperator::from_real_representation(int n, int d,
                                                                        const Eigen::MatrixXd& r) {
  const int m = blade_count(n);
  if (r.rows() != d * m || r.cols() != d * m)
    throw DimensionError("real representation has the wrong size");
  std::vector<CliffordElement> e;
  e.reserve(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      std::vector<double> c(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) c[static_cast<std::size_t>(k)] = r(i * m + k, j * m);
      e.emplace_back(n, std::move(c));
    }
  return CliffordMatrixOperator(n, d, std::move(e));
}

CliffordVector CliffordMatrixOperator::apply(const CliffordVector& x) const {
  check_match(n_, d_, x.n(), x.d());
  std::vector<CliffordElement> out;
  for (int i = 0; i < d_; ++i) {
    CliffordElement s(n_);
    for (int j = 0; j < d_; ++j) s = s + (*this)(i, j) * x[j];
    out.push_back(std::move(s));
  }
  return CliffordVector(n_, std::move(out));
}

Eigen::MatrixXd CliffordMatrixOperator::real_representation() const {
  const int m = blade_count(n_);
  Eigen::MatrixXd r(d_ * m, d_ * m);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) r.block(i * m, j * m, m, m) = left_rep((*this)(i, j));
  return r;
}

CliffordMatrixOperator CliffordMatrixOperator::right_factor(const CliffordElement& p) const {
  CliffordMatrixOperator r = *this;
  for (auto& e : r.entries_) e = e * p;
  return r;
}

CliffordMatrixOperator CliffordMatrixOperator::left_factor(const CliffordElement& p) const {
  CliffordMatrixOperator r = *this;
  for (auto& e : r.entries_) e = p * e;
  return r;
}

CliffordMatrixOperator operator+(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b) {
  check_match(a.n_, a.d_, b.n_, b.d_);
  CliffordMatrixOperator r = a;
  for (std::size_t k = 0; k < r.entries_.size(); ++k) r.entries_[k] = r.entries_[k] + b.entries_[k];
  return r;
}

CliffordMatrixOperator operator-(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b) {
  return a + (-1.0) * b;
}

CliffordMatrixOperator operator*(double r, const CliffordMatrixOperator& a) {
  CliffordMatrixOperator s = a;
  for (auto& e : s.entries_) e = r * e;
  return s;
}

CliffordMatrixOperator operator*(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b) {
  check_match(a.n_, a.d_, b.n_, b.d_);
  CliffordMatrixOperator r(a.n_, a.d_);
  for (int i = 0; i < a.d_; ++i)
    for (int j = 0; j < a.d_; ++j) {
      CliffordElement s(a.n_);
      for (int k = 0; k < a.d_; ++k) s = s + a(i, k) * b(k, j);
      r.entries_[static_cast<std::size_t>(i * a.d_ + j)] = std::move(s);
    }
  return r;
}

// --- norms ------------------------------------------------------------------------

double module_norm(const CliffordVector& x) {
  double m = 0.0;
  for (const auto& e : x.entries()) m = std::max(m, nu(e));
  return m;
}

double upper_norm(const CliffordMatrixOperator& a) {
  double best = 0.0;
  for (int i = 0; i < a.d(); ++i) {
    double row = 0.0;
    for (int j = 0; j < a.d(); ++j) row += nu(a(i, j));
    best = std::max(best, row);
  }
  return best;
}

double lower_norm(const CliffordMatrixOperator& a, int probes, std::uint64_t seed) {
  const int n = a.n();
  const int d = a.d();
  double best = 0.0;
  auto probe = [&](const CliffordVector& x) {
    const double nx = module_norm(x);
    if (nx > 0.0) best = std::max(best, module_norm(a.apply(x)) / nx);
  };
  for (int j = 0; j < d; ++j)
    for (unsigned k = 0; k < static_cast<unsigned>(blade_count(n)); ++k) probe(CliffordVector::basis(n, d, j, k));
  Rng rng(seed);
  for (int p = 0; p < probes; ++p) probe(CliffordVector::random(n, d, rng));
  return best;
}

NormBounds operator_norm_bounds(const CliffordMatrixOperator& a, int probes, std::uint64_t seed) {
  return {lower_norm(a, probes, seed), upper_norm(a)};
}

// --- algebra ----------------------------------------------------------------------

CliffordMatrixOperator poly_of_operator(std::span<const double> coeffs, const CliffordMatrixOperator& a) {
  if (coeffs.empty()) return CliffordMatrixOperator::zero(a.n(), a.d());
  CliffordMatrixOperator x = CliffordMatrixOperator::scalar(a.n(), a.d(), coeffs.back());
  for (std::size_t k = coeffs.size() - 1; k-- > 0;)
    x = x * a + CliffordMatrixOperator::scalar(a.n(), a.d(), coeffs[k]);
  return x;
}

CliffordMatrixOperator delta_q(const CliffordMatrixOperator& a, const ConeElement& q) {
  return a * a - (2.0 * q.re()) * a + CliffordMatrixOperator::scalar(a.n(), a.d(), q.norm_sq());
}

double inverse_condition(const CliffordMatrixOperator& b) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b.real_representation());
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

CliffordMatrixOperator direct_inverse(const CliffordMatrixOperator& b, double threshold) {
  const Eigen::MatrixXd r = b.real_representation();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(r);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > threshold * smax))
    throw NotInvertibleError("operator is numerically singular: sigma_min/sigma_max = " +
                                 std::to_string(smax > 0.0 ? smin / smax : 0.0),
                             smin, smax);
  const Eigen::MatrixXd inv = r.fullPivLu().solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
  return CliffordMatrixOperator::from_real_representation(b.n(), b.d(), inv);
}

bool is_in_spherical_resolvent(const CliffordMatrixOperator& a, const ConeElement& q, double threshold) {
  return inverse_condition(delta_q(a, q)) > threshold;
}

double spectral_abscissa(const CliffordMatrixOperator& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a.real_representation(), false);
  return es.eigenvalues().real().maxCoeff();
}

// --- growth bound -----------------------------------------------------------------

namespace {

// log of sqrt-free Schur majorant  F e^{-eps t} sum_{k<D} (nu t)^k / k!.
double log_schur_bound(double log_factor, double eps, double nu_n, int dim, double t) {
  double log_sum = 0.0;  // k = 0 term
  double log_term = 0.0;
  for (int k = 1; k < dim; ++k) {
    if (nu_n * t == 0.0) break;
    log_term += std::log(nu_n * t / k);
    const double hi = std::max(log_sum, log_term);
    log_sum = hi + std::log(std::exp(log_sum - hi) + std::exp(log_term - hi));
  }
  return log_factor - eps * t + log_sum;
}

}  // namespace

GrowthBound growth_bound(const CliffordMatrixOperator& a, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("growth-bound safety epsilon must be positive");
  const Eigen::MatrixXd r = a.real_representation();
  const int dim = static_cast<int>(r.rows());
  GrowthBound g;
  Eigen::EigenSolver<Eigen::MatrixXd> es(r, false);
  g.alpha = es.eigenvalues().real().maxCoeff();
  g.omega = g.alpha + epsilon;

  // Schur form R = U (Lambda + N) U^*: |e^{tR}|_2 <= e^{alpha t} sum_k |N|^k t^k / k!.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(r.cast<std::complex<double>>());
  Eigen::MatrixXcd strict = schur.matrixT().triangularView<Eigen::StrictlyUpper>();
  const double nu_n = strict.norm();  // Frobenius >= spectral
  // upper_norm(T) <= d 2^{n/2} |R(T)|_2
  const double log_factor = std::log(static_cast<double>(a.d())) + 0.5 * a.n() * std::log(2.0);

  constexpr double kHorizonCap = 1e5;
  double t_m = 1.0;
  g.certified = false;
  while (t_m <= kHorizonCap) {
    const double here = log_schur_bound(log_factor, epsilon, nu_n, dim, t_m);
    const double ahead = log_schur_bound(log_factor, epsilon, nu_n, dim, 1.01 * t_m);
    if (here <= 0.0 && ahead <= here) {
      g.certified = true;
      break;
    }
    t_m *= 1.5;
  }
  g.t_M = std::min(t_m, kHorizonCap);

  // sampled sup of upper_norm(exp(t (R - omega I)))
  const Eigen::MatrixXd shifted = r - g.omega * Eigen::MatrixXd::Identity(dim, dim);
  std::vector<double> grid;
  const double lin_end = std::min(g.t_M, 40.0);
  for (int i = 0; i <= 400; ++i) grid.push_back(lin_end * i / 400.0);
  if (g.t_M > lin_end)
    for (int i = 1; i <= 200; ++i) grid.push_back(lin_end * std::pow(g.t_M / lin_end, i / 200.0));
  double best = 0.0;
  for (double t : grid) {
    const Eigen::MatrixXd e = (t * shifted).exp();
    best = std::max(best, upper_norm(CliffordMatrixOperator::from_real_representation(a.n(), a.d(), e)));
  }
  g.M = 1.05 * best;
  return g;
}

// --- semigroup ------------------------------------------------------------------

namespace {

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXd& r) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(r, false);
  return es.eigenvalues();
}

}  // namespace

SemigroupEvaluator::SemigroupEvaluator(CliffordMatrixOperator a, double epsilon)
    : SemigroupEvaluator(a, growth_bound(a, epsilon)) {}

SemigroupEvaluator::SemigroupEvaluator(CliffordMatrixOperator a, GrowthBound growth)
    : a_(std::move(a)),
      r_(a_.real_representation()),
      growth_(growth),
      cache_(std::make_shared<Cache>()) {
  const Eigen::VectorXcd ev = eigenvalues_of(r_);
  max_frequency_ = ev.imag().cwiseAbs().maxCoeff();
  spectral_radius_ = ev.cwiseAbs().maxCoeff();
}

std::shared_ptr<const Eigen::MatrixXd> SemigroupEvaluator::real_at(double t) const {
  if (t < 0.0) throw Error("semigroup evaluated at negative time");
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->entries.find(t);
    if (it != cache_->entries.end()) return it->second;
  }
  auto e = std::make_shared<const Eigen::MatrixXd>((t * r_).exp());
  const std::size_t bytes = static_cast<std::size_t>(e->size()) * sizeof(double);
  std::lock_guard lock(cache_->mutex);
  if (cache_->bytes + bytes <= kCacheBytes) {
    auto [it, inserted] = cache_->entries.emplace(t, e);
    if (inserted) cache_->bytes += bytes;
    return it->second;
  }
  return e;
}

CliffordMatrixOperator SemigroupEvaluator::at(double t) const {
  return CliffordMatrixOperator::from_real_representation(n(), d(), *real_at(t));
}

std::size_t SemigroupEvaluator::cached_nodes() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->entries.size();
}

// --- random generators ----------------------------------------------------------

CliffordElement random_element(int n, Rng& rng) {
  std::vector<double> c(static_cast<std::size_t>(blade_count(n)));
  for (double& x : c) x = rng.uniform(-1.0, 1.0);
  return CliffordElement(n, std::move(c));
}

CliffordMatrixOperator random_stable_operator(int n, int d, double margin, Rng& rng) {
  std::vector<CliffordElement> e;
  for (int k = 0; k < d * d; ++k) e.push_back(random_element(n, rng));
  CliffordMatrixOperator a(n, d, std::move(e));
  const double alpha = spectral_abscissa(a);
  return a - CliffordMatrixOperator::scalar(n, d, alpha + margin);
}

namespace {

// Unit imaginary quaternion inside span{e1, e2, e12}.
CliffordElement random_quaternion_unit(int n, Rng& rng) {
  double c[3];
  double norm = 0.0;
  do {
    for (double& x : c) x = rng.uniform(-1.0, 1.0);
    norm = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  } while (norm < 1e-3);
  return (c[0] / norm) * CliffordElement::blade(n, 0b01) + (c[1] / norm) * CliffordElement::blade(n, 0b10) +
         (c[2] / norm) * CliffordElement::blade(n, 0b11);
}

CliffordElement random_unit_vector(int n, Rng& rng) {
  std::vector<double> c(static_cast<std::size_t>(n));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : c) {
      x = rng.uniform(-1.0, 1.0);
      norm += x * x;
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-3);
  CliffordElement v(n);
  for (int k = 0; k < n; ++k) v = v + (c[static_cast<std::size_t>(k)] / norm) * CliffordElement::generator(n, k + 1);
  return v;
}

}  // namespace

CliffordElement random_imaginary_unit(int n, Rng& rng) {
  if (n == 1) return rng.coin() ? CliffordElement::generator(1, 1) : -CliffordElement::generator(1, 1);
  if (n == 2) return random_quaternion_unit(2, rng);
  if (n == 3) {
    // Cl(0,3) splits along the central idempotents (1 +- e123)/2.
    const CliffordElement e123 = CliffordElement::blade(3, 0b111);
    const CliffordElement one = CliffordElement::scalar(3, 1.0);
    const CliffordElement plus = 0.5 * (one + e123);
    const CliffordElement minus = 0.5 * (one - e123);
    return plus * random_quaternion_unit(3, rng) + minus * random_quaternion_unit(3, rng);
  }
  if (rng.coin()) return random_unit_vector(n, rng);
  // rotor-conjugated unit bivector
  const CliffordElement g = random_unit_vector(n, rng) * random_unit_vector(n, rng);
  return g * CliffordElement::blade(n, 0b11) * conjugate(g);
}

ConeElement random_cone_element(int n, double a, double b, Rng& rng) {
  return ConeElement::from_slice(a, b, random_imaginary_unit(n, rng));
}

}  // namespace cliffsemi
