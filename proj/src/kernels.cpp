#include "cliffsemi/kernels.hpp"

#include "cliffsemi/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cliffsemi {

namespace {

constexpr double kMergeTol = 1e-8;         // coincident rates
constexpr double kRealnessTol = 1e-8;      // asymmetry tolerated before symmetrizing
constexpr double kMultiplicityTol = 1e-11; // Taylor-coefficient test for merged roots

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

bool same_rate(cplx x, cplx y) {
  return std::abs(x - y) <= kMergeTol * std::max({1.0, std::abs(x), std::abs(y)});
}

void add_into(std::vector<cplx>& acc, const std::vector<cplx>& p) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) acc[k] += p[k];
}

void trim(std::vector<cplx>& p) {
  while (!p.empty() && p.back() == cplx{}) p.pop_back();
}

cplx horner(const std::vector<cplx>& p, double t) {
  cplx s = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * t + *it;
  return s;
}

// Merge coincident rates, pair conjugates, symmetrize.
std::vector<KernelTerm> normalize(std::vector<KernelTerm> in) {
  std::vector<KernelTerm> merged;
  for (auto& term : in) {
    trim(term.poly);
    if (term.poly.empty()) continue;
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const KernelTerm& m) { return same_rate(m.lambda, term.lambda); });
    if (it == merged.end())
      merged.push_back(std::move(term));
    else
      add_into(it->poly, term.poly);
  }

  double scale = 0.0;
  for (const auto& term : merged)
    for (const auto& c : term.poly) scale = std::max(scale, std::abs(c));
  const double allowed = kRealnessTol * std::max(scale, 1e-300);

  std::vector<bool> used(merged.size(), false);
  std::vector<KernelTerm> out;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    if (used[i]) continue;
    KernelTerm& t = merged[i];
    if (std::abs(t.lambda.imag()) <= kMergeTol * std::max(1.0, std::abs(t.lambda))) {
      used[i] = true;
      KernelTerm r{cplx(t.lambda.real(), 0.0), {}};
      for (const auto& c : t.poly) {
        if (std::abs(c.imag()) > allowed)
          throw Error("kernel is not real-valued: complex coefficient on a real rate");
        r.poly.emplace_back(c.real(), 0.0);
      }
      trim(r.poly);
      if (!r.poly.empty()) out.push_back(std::move(r));
      continue;
    }
    std::size_t partner = merged.size();
    for (std::size_t j = i + 1; j < merged.size(); ++j)
      if (!used[j] && same_rate(merged[j].lambda, std::conj(t.lambda))) {
        partner = j;
        break;
      }
    if (partner == merged.size()) {
      double mag = 0.0;
      for (const auto& c : t.poly) mag = std::max(mag, std::abs(c));
      if (mag <= allowed) {
        used[i] = true;
        continue;
      }
      throw Error("kernel is not real-valued: missing conjugate rate");
    }
    used[i] = used[partner] = true;
    KernelTerm& u = merged[partner];
    // keep the upper half-plane member as the reference
    KernelTerm& up = t.lambda.imag() > 0 ? t : u;
    KernelTerm& lo = t.lambda.imag() > 0 ? u : t;
    const std::size_t len = std::max(up.poly.size(), lo.poly.size());
    up.poly.resize(len, 0.0);
    lo.poly.resize(len, 0.0);
    KernelTerm a{up.lambda, std::vector<cplx>(len)};
    KernelTerm b{std::conj(up.lambda), std::vector<cplx>(len)};
    for (std::size_t k = 0; k < len; ++k) {
      if (std::abs(up.poly[k] - std::conj(lo.poly[k])) > allowed)
        throw Error("kernel is not real-valued: conjugate pair is asymmetric");
      a.poly[k] = 0.5 * (up.poly[k] + std::conj(lo.poly[k]));
      b.poly[k] = std::conj(a.poly[k]);
    }
    trim(a.poly);
    trim(b.poly);
    if (!a.poly.empty()) {
      out.push_back(std::move(a));
      out.push_back(std::move(b));
    }
  }
  std::sort(out.begin(), out.end(), [](const KernelTerm& x, const KernelTerm& y) {
    if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
    return x.lambda.imag() < y.lambda.imag();
  });
  return out;
}

// (t^a e^{-alpha t}) * (t^b e^{-beta t}), scaled by coeff, appended to out.
void convolve_monomials(int a, cplx alpha, int b, cplx beta, cplx coeff,
                        std::vector<KernelTerm>& out) {
  if (same_rate(alpha, beta)) {
    const cplx rate = 0.5 * (alpha + beta);
    std::vector<cplx> poly(static_cast<std::size_t>(a + b + 2), 0.0);
    poly.back() = coeff * factorial(a) * factorial(b) / factorial(a + b + 1);
    out.push_back({rate, std::move(poly)});
    return;
  }
  // e^{-alpha t} int_0^t (t-s)^a s^b e^{-gamma s} ds, gamma = beta - alpha,
  // with int_0^t s^m e^{-gamma s} ds = m!/gamma^{m+1} (1 - e^{-gamma t} sum_{l<=m} (gamma t)^l / l!).
  const cplx gamma = beta - alpha;
  std::vector<cplx> p_alpha(static_cast<std::size_t>(a + 1), 0.0);
  std::vector<cplx> p_beta(static_cast<std::size_t>(a + b + 1), 0.0);
  for (int i = 0; i <= a; ++i) {
    const int m = b + i;
    const cplx base = coeff * binomial(a, i) * ((i & 1) ? -1.0 : 1.0) * factorial(m) /
                      std::pow(gamma, m + 1);
    p_alpha[static_cast<std::size_t>(a - i)] += base;
    cplx g_pow = 1.0;
    for (int l = 0; l <= m; ++l) {
      p_beta[static_cast<std::size_t>(a - i + l)] -= base * g_pow / factorial(l);
      g_pow *= gamma;
    }
  }
  out.push_back({alpha, std::move(p_alpha)});
  out.push_back({beta, std::move(p_beta)});
}

}  // namespace

// --- RealPolynomial ---------------------------------------------------------

RealPolynomial::RealPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 3) throw ConfigError("polynomial degree must be at least 2");
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw ConfigError("non-finite polynomial coefficient");
  if (coeffs_.back() == 0.0) throw ConfigError("leading polynomial coefficient is zero");
}

RealPolynomial RealPolynomial::delta(const ConeElement& q) {
  return RealPolynomial({q.norm_sq(), -2.0 * q.re(), 1.0});
}

RealPolynomial RealPolynomial::from_roots(std::span<const cplx> roots, double leading) {
  std::vector<cplx> c{leading};
  for (const cplx& r : roots) {
    std::vector<cplx> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  std::vector<double> re;
  for (const cplx& x : c) {
    if (std::abs(x.imag()) > 1e-9 * std::max(1.0, std::abs(x)))
      throw ConfigError("roots are not closed under conjugation");
    re.push_back(x.real());
  }
  return RealPolynomial(std::move(re));
}

cplx RealPolynomial::operator()(cplx z) const {
  cplx s = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) s = s * z + *it;
  return s;
}

cplx RealPolynomial::taylor(cplx z, int k) const {
  cplx s = 0.0;
  for (int i = degree(); i >= k; --i) s = s * z + binomial(i, k) * coeffs_[static_cast<std::size_t>(i)];
  return s;
}

// --- roots ------------------------------------------------------------------

RealPolynomial random_polynomial(int degree, double min_re, double max_re, double max_im, Rng& rng) {
  if (degree < 2) throw ConfigError("polynomial degree must be at least 2");
  std::vector<cplx> rts;
  while (static_cast<int>(rts.size()) < degree) {
    const double re = rng.uniform(min_re, max_re);
    if (static_cast<int>(rts.size()) + 2 <= degree && rng.coin()) {
      const double im = rng.uniform(0.05, 1.0) * max_im;
      rts.emplace_back(re, im);
      rts.emplace_back(re, -im);
    } else {
      rts.emplace_back(re, 0.0);
    }
  }
  const double lead = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.5, 2.0);
  return RealPolynomial::from_roots(rts, lead);
}

int RootSet::total_multiplicity() const {
  return std::accumulate(roots.begin(), roots.end(), 0,
                         [](int s, const Root& r) { return s + r.multiplicity; });
}

namespace {

Eigen::VectorXcd companion_eigenvalues(const RealPolynomial& p) {
  const int n = p.degree();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) c(i, n - 1) = -p[i] / p.leading();
  Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
  return es.eigenvalues();
}

struct Cluster {
  cplx center;
  int multiplicity;
};

// Single-linkage labels with radius tol.
std::vector<std::size_t> link(const std::vector<Cluster>& pts, double tol) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(pts[i].center - pts[j].center) <= tol) parent[find(i)] = find(j);
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = find(i);
  return label;
}

// Multiplicity-weighted mean of the points carrying the given label.
Cluster pool(const std::vector<Cluster>& pts, const std::vector<std::size_t>& label, std::size_t l) {
  Cluster c{0.0, 0};
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (label[i] == l) {
      c.center += pts[i].center * static_cast<double>(pts[i].multiplicity);
      c.multiplicity += pts[i].multiplicity;
    }
  c.center /= static_cast<double>(c.multiplicity);
  return c;
}

std::vector<std::size_t> distinct_labels(const std::vector<std::size_t>& label) {
  std::vector<std::size_t> out;
  for (std::size_t l : label)
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  return out;
}

std::vector<Cluster> single_linkage(const std::vector<Cluster>& pts, double tol) {
  const auto label = link(pts, tol);
  std::vector<Cluster> out;
  for (std::size_t l : distinct_labels(label)) out.push_back(pool(pts, label, l));
  return out;
}

bool passes_multiplicity_test(const RealPolynomial& p, cplx c, int m) {
  for (int k = 0; k < m; ++k) {
    double scale = 0.0;
    for (int i = k; i <= p.degree(); ++i)
      scale += std::abs(p[i]) * binomial(i, k) * std::pow(std::abs(c), i - k);
    if (std::abs(p.taylor(c, k)) > kMultiplicityTol * scale) return false;
  }
  return true;
}

}  // namespace

double default_cluster_tol(const RealPolynomial& p) {
  const auto ev = companion_eigenvalues(p);
  double m = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::max(m, std::abs(ev(i)));
  return 1e-7 * (1.0 + m);
}

RootSet roots(const RealPolynomial& p, double cluster_tol) {
  const auto ev = companion_eigenvalues(p);
  double max_abs = 0.0;
  std::vector<Cluster> pts;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    pts.push_back({ev(i), 1});
    max_abs = std::max(max_abs, std::abs(ev(i)));
  }
  const double tol = cluster_tol > 0.0 ? cluster_tol : 1e-7 * (1.0 + max_abs);

  RootSet rs;
  std::vector<Cluster> clusters = single_linkage(pts, tol);

  // Higher multiplicities split further than tol; merge a near group only
  // when the Taylor coefficients of P vanish at its mean.
  const double near = 1e-3 * (1.0 + max_abs);
  const auto group = link(clusters, near);
  std::vector<Cluster> refined;
  for (std::size_t l : distinct_labels(group)) {
    const std::size_t members = static_cast<std::size_t>(std::count(group.begin(), group.end(), l));
    const Cluster merged = pool(clusters, group, l);
    if (members == 1 || passes_multiplicity_test(p, merged.center, merged.multiplicity)) {
      refined.push_back(merged);
      continue;
    }
    rs.ambiguous = true;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      if (group[i] == l) refined.push_back(clusters[i]);
  }
  clusters = std::move(refined);

  // Newton polish of simple roots.
  for (Cluster& c : clusters) {
    if (c.multiplicity != 1) continue;
    for (int it = 0; it < 3; ++it) {
      const cplx d = p.taylor(c.center, 1);
      if (d == cplx{}) break;
      const cplx next = c.center - p(c.center) / d;
      if (std::abs(p(next)) >= std::abs(p(c.center))) break;
      c.center = next;
    }
  }

  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      if (std::abs(clusters[i].center - clusters[j].center) <= 2.0 * tol) rs.ambiguous = true;

  // conjugate symmetry
  std::vector<bool> done(clusters.size(), false);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (done[i]) continue;
    Cluster c = clusters[i];
    done[i] = true;
    if (std::abs(c.center.imag()) <= tol) {
      rs.roots.push_back({cplx(c.center.real(), 0.0), c.multiplicity});
      continue;
    }
    std::size_t best = clusters.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (done[j]) continue;
      const double d = std::abs(clusters[j].center - std::conj(c.center));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == clusters.size() || clusters[best].multiplicity != c.multiplicity ||
        best_d > near) {
      rs.ambiguous = true;
      rs.roots.push_back({c.center, c.multiplicity});
      continue;
    }
    done[best] = true;
    cplx up = c.center.imag() > 0 ? c.center : std::conj(c.center);
    cplx other = clusters[best].center.imag() > 0 ? clusters[best].center : std::conj(clusters[best].center);
    up = 0.5 * (up + other);
    rs.roots.push_back({up, c.multiplicity});
    rs.roots.push_back({std::conj(up), c.multiplicity});
  }

  rs.r_P = std::numeric_limits<double>::infinity();
  for (const Root& r : rs.roots) rs.r_P = std::min(rs.r_P, r.value.real());
  return rs;
}

ResidueTable residues(const RealPolynomial& p, const RootSet& rs) {
  if (rs.total_multiplicity() != p.degree())
    throw Error("root inconsistency: multiplicities sum to " +
                std::to_string(rs.total_multiplicity()) + ", degree is " +
                std::to_string(p.degree()));
  ResidueTable table;
  for (std::size_t j = 0; j < rs.roots.size(); ++j) {
    const cplx lam = rs.roots[j].value;
    const int mj = rs.roots[j].multiplicity;
    double scale = 0.0;
    for (int i = 0; i <= p.degree(); ++i) scale += std::abs(p[i]) * std::pow(std::abs(lam), i);
    if (std::abs(p(lam)) > 1e-6 * scale) throw Error("root inconsistency: P(lambda) is not small");

    // With u = z + lambda_j: 1/P(-z) = (-u)^{-m_j} prod_{i != j} (delta_i - u)^{-m_i} / a_top.
    std::vector<cplx> h(static_cast<std::size_t>(mj), 0.0);
    h[0] = 1.0;
    for (std::size_t i = 0; i < rs.roots.size(); ++i) {
      if (i == j) continue;
      const cplx delta = lam - rs.roots[i].value;
      const int mi = rs.roots[i].multiplicity;
      std::vector<cplx> factor(h.size());
      for (std::size_t r = 0; r < h.size(); ++r)
        factor[r] = binomial(mi + static_cast<int>(r) - 1, static_cast<int>(r)) /
                    std::pow(delta, mi + static_cast<int>(r));
      std::vector<cplx> prod(h.size(), 0.0);
      for (std::size_t x = 0; x < h.size(); ++x)
        for (std::size_t y = 0; x + y < h.size(); ++y) prod[x + y] += h[x] * factor[y];
      h = std::move(prod);
    }
    const double sign = (mj & 1) ? -1.0 : 1.0;
    std::vector<cplx> c(static_cast<std::size_t>(mj));
    for (int k = 1; k <= mj; ++k)
      c[static_cast<std::size_t>(k - 1)] = sign * h[static_cast<std::size_t>(mj - k)] / p.leading();
    table.push_back(std::move(c));
  }
  return table;
}

// --- ExpPolyKernel ------------------------------------------------------------

ExpPolyKernel::ExpPolyKernel(std::vector<KernelTerm> terms) : terms_(normalize(std::move(terms))) {}

ExpPolyKernel ExpPolyKernel::monomial(int power, double rate, double coeff) {
  std::vector<cplx> poly(static_cast<std::size_t>(power + 1), 0.0);
  poly.back() = coeff;
  return ExpPolyKernel({{cplx(rate, 0.0), std::move(poly)}});
}

namespace {

// a +- ib this close would be merged into one real rate; use the Taylor form
bool nearly_real(double a, double b) { return 2.0 * b <= 1e-7 * (1.0 + std::hypot(a, b)); }

}  // namespace

ExpPolyKernel ExpPolyKernel::damped_cos(double a, double b) {
  if (b == 0.0) return exponential(a);
  if (nearly_real(a, b)) return ExpPolyKernel({{cplx(a, 0.0), {1.0, 0.0, -0.5 * b * b}}});
  return ExpPolyKernel({{cplx(a, b), {0.5}}, {cplx(a, -b), {0.5}}});
}

ExpPolyKernel ExpPolyKernel::damped_sin(double a, double b) {
  if (b == 0.0) return {};
  if (nearly_real(a, b)) return ExpPolyKernel({{cplx(a, 0.0), {0.0, b, 0.0, -b * b * b / 6.0}}});
  // sin(bt) e^{-at} = (e^{-(a-ib)t} - e^{-(a+ib)t}) / (2i)
  return ExpPolyKernel({{cplx(a, -b), {cplx(0.0, -0.5)}}, {cplx(a, b), {cplx(0.0, 0.5)}}});
}

cplx ExpPolyKernel::evaluate(double t) const {
  cplx s = 0.0;
  for (const auto& term : terms_) s += horner(term.poly, t) * std::exp(-term.lambda * t);
  return s;
}

double ExpPolyKernel::decay_rate() const noexcept {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& term : terms_) r = std::min(r, term.lambda.real());
  return r;
}

double ExpPolyKernel::max_coefficient() const noexcept {
  double m = 0.0;
  for (const auto& term : terms_)
    for (const auto& c : term.poly) m = std::max(m, std::abs(c));
  return m;
}

double ExpPolyKernel::max_frequency() const noexcept {
  double m = 0.0;
  for (const auto& term : terms_) m = std::max(m, std::abs(term.lambda.imag()));
  return m;
}

ExpPolyKernel operator+(const ExpPolyKernel& f, const ExpPolyKernel& g) {
  std::vector<KernelTerm> t = f.terms_;
  t.insert(t.end(), g.terms_.begin(), g.terms_.end());
  return ExpPolyKernel(std::move(t));
}

ExpPolyKernel operator-(const ExpPolyKernel& f, const ExpPolyKernel& g) { return f + (-1.0) * g; }

ExpPolyKernel operator*(double c, const ExpPolyKernel& f) {
  std::vector<KernelTerm> t = f.terms_;
  for (auto& term : t)
    for (auto& x : term.poly) x *= c;
  return ExpPolyKernel(std::move(t));
}

ExpPolyKernel derivative(const ExpPolyKernel& k) {
  std::vector<KernelTerm> out;
  for (const auto& term : k.terms()) {
    std::vector<cplx> p(term.poly.size(), 0.0);
    for (std::size_t i = 0; i < term.poly.size(); ++i) {
      p[i] -= term.lambda * term.poly[i];
      if (i > 0) p[i - 1] += static_cast<double>(i) * term.poly[i];
    }
    out.push_back({term.lambda, std::move(p)});
  }
  return ExpPolyKernel(std::move(out));
}

ExpPolyKernel derivative(const ExpPolyKernel& k, int order) {
  ExpPolyKernel d = k;
  for (int i = 0; i < order; ++i) d = derivative(d);
  return d;
}

ExpPolyKernel convolve(const ExpPolyKernel& f, const ExpPolyKernel& g) {
  std::vector<KernelTerm> out;
  for (const auto& tf : f.terms())
    for (const auto& tg : g.terms())
      for (std::size_t a = 0; a < tf.poly.size(); ++a) {
        if (tf.poly[a] == cplx{}) continue;
        for (std::size_t b = 0; b < tg.poly.size(); ++b) {
          if (tg.poly[b] == cplx{}) continue;
          convolve_monomials(static_cast<int>(a), tf.lambda, static_cast<int>(b), tg.lambda,
                             tf.poly[a] * tg.poly[b], out);
        }
      }
  return ExpPolyKernel(std::move(out));
}

ExpPolyKernel conv_power(const ExpPolyKernel& g, int n) {
  if (n < 1) throw Error("conv_power: n must be >= 1");
  ExpPolyKernel r = g;
  for (int i = 1; i < n; ++i) r = convolve(r, g);
  return r;
}

Envelope envelope(const ExpPolyKernel& k) {
  Envelope e;
  for (const auto& term : k.terms()) {
    for (const auto& c : term.poly) e.C += std::abs(c);
    e.K = std::max(e.K, static_cast<int>(term.poly.size()) - 1);
    e.r = std::min(e.r, term.lambda.real());
  }
  return e;
}

double sinc(double r) {
  if (std::abs(r) < 1e-4) {
    const double r2 = r * r;
    return 1.0 - r2 / 6.0 * (1.0 - r2 / 20.0 * (1.0 - r2 / 42.0 * (1.0 - r2 / 72.0)));
  }
  return std::sin(r) / r;
}

// --- g_P ------------------------------------------------------------------------

ExpPolyKernel build_gP_linear_system(const RealPolynomial& p, const RootSet& rs) {
  const int n = p.degree();
  if (rs.total_multiplicity() != n) throw Error("root inconsistency in linear-system construction");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  int col = 0;
  for (const Root& r : rs.roots)
    for (int k = 0; k < r.multiplicity; ++k, ++col)
      for (int i = k; i < n; ++i)
        m(i, col) = binomial(i, k) * factorial(k) * std::pow(-r.value, i - k);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(n - 1) = (((n - 2) & 1) ? -1.0 : 1.0) / p.leading();
  const Eigen::VectorXcd c = m.fullPivLu().solve(rhs);
  std::vector<KernelTerm> terms;
  col = 0;
  for (const Root& r : rs.roots) {
    std::vector<cplx> poly(static_cast<std::size_t>(r.multiplicity));
    for (int k = 0; k < r.multiplicity; ++k, ++col) poly[static_cast<std::size_t>(k)] = c(col);
    terms.push_back({r.value, std::move(poly)});
  }
  return ExpPolyKernel(std::move(terms));
}

PolynomialKernel build_gP(const RealPolynomial& p) {
  PolynomialKernel out;
  out.roots = roots(p);
  out.residues = residues(p, out.roots);
  if (out.roots.ambiguous) {
    out.g = build_gP_linear_system(p, out.roots);
    out.flagged = true;
    return out;
  }
  std::vector<KernelTerm> terms;
  for (std::size_t j = 0; j < out.roots.roots.size(); ++j) {
    const auto& c = out.residues[j];
    std::vector<cplx> poly(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) poly[k] = c[k] / factorial(static_cast<int>(k));
    terms.push_back({out.roots.roots[j].value, std::move(poly)});
  }
  out.g = ExpPolyKernel(std::move(terms));
  return out;
}

ExpPolyKernel ode_residual(const RealPolynomial& p, const ExpPolyKernel& g) {
  ExpPolyKernel sum;
  ExpPolyKernel d = g;
  for (int k = 0; k <= p.degree(); ++k) {
    if (k > 0) d = derivative(d);
    const double c = ((k & 1) ? -1.0 : 1.0) * p[k];
    if (c != 0.0) sum = sum + c * d;
  }
  return sum;
}

std::vector<double> initial_values(const ExpPolyKernel& g, int count) {
  std::vector<double> v;
  ExpPolyKernel d = g;
  for (int i = 0; i < count; ++i) {
    if (i > 0) d = derivative(d);
    v.push_back(d(0.0));
  }
  return v;
}

// --- g_q and the spherical derivative ------------------------------------------

ExpPolyKernel build_gq(const ConeElement& q) {
  const double a = q.re();
  const double b = q.im_norm();
  // same threshold under which roots() merges a +- ib into a double root
  if (nearly_real(a, b)) return ExpPolyKernel::monomial(1, a);
  return (1.0 / b) * ExpPolyKernel::damped_sin(a, b);
}

double sph_deriv_exp(double t, const ConeElement& q) {
  return t * std::exp(t * q.re()) * sinc(t * q.im_norm());
}

CliffordElement sph_deriv_exp_series(double t, const ConeElement& q, int terms) {
  const int n = q.n();
  const CliffordElement im = q.element() - CliffordElement::scalar(n, q.re());
  const CliffordElement im2 = im * im;
  CliffordElement power = CliffordElement::scalar(n, 1.0);
  CliffordElement sum(n);
  double tpow = t;
  double fact = 1.0;
  for (int k = 0; k < terms; ++k) {
    if (k > 0) {
      power = power * im2;
      tpow *= t * t;
      fact *= static_cast<double>((2 * k) * (2 * k + 1));
    }
    sum = sum + (tpow / fact) * power;
  }
  return std::exp(t * q.re()) * sum;
}

// --- CliffordKernel ---------------------------------------------------------------

CliffordKernel::CliffordKernel(int n, std::vector<Part> parts) : n_(n), parts_(std::move(parts)) {
  for (const auto& part : parts_)
    if (part.p.n() != n_) throw DimensionError("CliffordKernel: mixed signatures");
}

CliffordKernel CliffordKernel::real(int n, const ExpPolyKernel& g) {
  return CliffordKernel(n, {{g, CliffordElement::scalar(n, 1.0)}});
}

CliffordKernel CliffordKernel::exp_minus(const ConeElement& q) {
  const int n = q.n();
  const double a = q.re();
  const double b = q.im_norm();
  std::vector<Part> parts{{ExpPolyKernel::damped_cos(a, b), CliffordElement::scalar(n, 1.0)}};
  if (b > 0.0) parts.push_back({ExpPolyKernel::damped_sin(a, b), -q.unit()});
  return CliffordKernel(n, std::move(parts));
}

CliffordElement CliffordKernel::operator()(double t) const {
  CliffordElement s(n_);
  for (const auto& part : parts_) s = s + part.g(t) * part.p;
  return s;
}

double CliffordKernel::decay_rate() const noexcept {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& part : parts_)
    if (euclidean_norm(part.p) > 0.0) r = std::min(r, part.g.decay_rate());
  return r;
}

double CliffordKernel::max_frequency() const noexcept {
  double m = 0.0;
  for (const auto& part : parts_) m = std::max(m, part.g.max_frequency());
  return m;
}

Envelope CliffordKernel::envelope() const {
  Envelope e;
  for (const auto& part : parts_) {
    const double nu = two_sided_norm(part.p);
    if (nu == 0.0 || part.g.is_zero()) continue;
    const Envelope ei = cliffsemi::envelope(part.g);
    e.C += ei.C * nu;
    e.K = std::max(e.K, ei.K);
    e.r = std::min(e.r, ei.r);
  }
  return e;
}

CliffordKernel combination_kernel(const ExpPolyKernel& gP, std::span<const CliffordElement> p) {
  if (p.empty()) throw Error("combination_kernel: no constants");
  const int n = p.front().n();
  std::vector<CliffordKernel::Part> parts;
  ExpPolyKernel d = gP;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j > 0) d = derivative(d);
    if (euclidean_norm(p[j]) == 0.0) continue;
    parts.push_back({((j & 1) ? -1.0 : 1.0) * d, p[j]});
  }
  return CliffordKernel(n, std::move(parts));
}

}  // namespace cliffsemi
