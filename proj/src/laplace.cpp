#include "cliffsemi/laplace.hpp"

#include "cliffsemi/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace cliffsemi {

// --- truncation -------------------------------------------------------------------

double tail_bound(const Envelope& env, double omega, double M, double T) {
  if (env.C == 0.0) return 0.0;
  const double c = env.r - omega;
  if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
  const double x = c * T;
  // Gamma(K+1, x) = K! e^{-x} sum_{j<=K} x^j / j!
  double gamma_part = 0.0;
  for (int j = 0; j <= env.K; ++j) {
    const double log_term = -x + (j > 0 ? j * std::log(x) : 0.0) - std::lgamma(j + 1.0);
    gamma_part += std::exp(log_term);
  }
  gamma_part *= std::exp(std::lgamma(env.K + 1.0) - (env.K + 1) * std::log(c));
  return M * env.C * (gamma_part + std::exp(-x) / c);
}

double truncation_point(const Envelope& env, double omega, double M, double target) {
  if (tail_bound(env, omega, M, 0.0) <= target) return 0.0;
  double hi = 1.0;
  while (tail_bound(env, omega, M, hi) > target) {
    hi *= 2.0;
    if (hi > 1e8) throw AccuracyError("tail truncation point beyond 1e8", tail_bound(env, omega, M, hi));
  }
  double lo = hi / 2.0;
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    (tail_bound(env, omega, M, mid) > target ? lo : hi) = mid;
  }
  return hi;
}

int worker_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CLIFFSEMI_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw ConfigError("Gauss-Legendre order must be positive");
  // Golub-Welsch
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = beta;
    jac(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.assign(static_cast<std::size_t>(order), 0.0);
  weights.assign(static_cast<std::size_t>(order), 0.0);
  for (int i = 0; i < order; ++i) {
    const auto u = static_cast<std::size_t>(i);
    nodes[u] = 0.5 * (es.eigenvalues()(i) - es.eigenvalues()(order - 1 - i));
    const double w = es.eigenvectors()(0, i);
    const double w_mirror = es.eigenvectors()(0, order - 1 - i);
    weights[u] = w * w + w_mirror * w_mirror;
  }
}

// --- panel integration ------------------------------------------------------------

namespace {

constexpr std::size_t kPanelsPerChunk = 8;

// Integrand T(t) sum_i g_i(t) L_i, with L_i = blockdiag(left_rep(p_i)) B.
struct Problem {
  std::vector<ExpPolyKernel> g;
  std::vector<Eigen::MatrixXd> right;
  Envelope env;
  double kernel_speed = 0.0;
};

Problem make_problem(const SemigroupEvaluator& s, const CliffordKernel& k, const Eigen::MatrixXd& b) {
  if (k.n() != s.n()) throw DimensionError("kernel and semigroup use different signatures");
  if (b.rows() != s.real_generator().rows()) throw DimensionError("right-hand block has the wrong size");
  Problem pb;
  const int m = 1 << s.n();
  for (const auto& part : k.parts()) {
    if (part.g.is_zero() || euclidean_norm(part.p) == 0.0) continue;
    Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(s.d() * m, s.d() * m);
    const Eigen::MatrixXd lp = left_rep(part.p);
    for (int i = 0; i < s.d(); ++i) blocks.block(i * m, i * m, m, m) = lp;
    pb.g.push_back(part.g);
    pb.right.push_back(blocks * b);
    for (const auto& term : part.g.terms()) pb.kernel_speed = std::max(pb.kernel_speed, std::abs(term.lambda));
  }
  pb.env = k.envelope();
  return pb;
}

double result_norm(const Eigen::MatrixXd& m, int n, int d) {
  if (m.cols() == 1) return module_norm(CliffordVector::from_flat(n, d, m.col(0)));
  const auto op = CliffordMatrixOperator::from_real_representation(n, d, m);
  double best = 0.0;
  for (const auto& e : op.entries()) best = std::max(best, nu(e));
  return best;
}

Eigen::MatrixXd integrate(const SemigroupEvaluator& s, const Problem& pb, double h, std::size_t panels,
                          const std::vector<double>& x, const std::vector<double>& w, int threads) {
  const auto dim = s.real_generator().rows();
  const std::size_t parts = pb.g.size();
  const std::size_t chunks = (panels + kPanelsPerChunk - 1) / kPanelsPerChunk;
  std::vector<std::vector<Eigen::MatrixXd>> sums(chunks);

  auto run_chunk = [&](std::size_t c) {
    std::vector<Eigen::MatrixXd> z(parts, Eigen::MatrixXd::Zero(dim, dim));
    const std::size_t end = std::min(panels, (c + 1) * kPanelsPerChunk);
    for (std::size_t p = c * kPanelsPerChunk; p < end; ++p) {
      const double left = static_cast<double>(p) * h;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = left + 0.5 * h * (1.0 + x[i]);
        const double wt = 0.5 * h * w[i];
        const auto e = s.real_at(t);
        for (std::size_t j = 0; j < parts; ++j) z[j].noalias() += (wt * pb.g[j](t)) * *e;
      }
    }
    sums[c] = std::move(z);
  };

  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        try {
          for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, pb.right.empty() ? 1 : pb.right.front().cols());
  std::vector<Eigen::MatrixXd> z(parts, Eigen::MatrixXd::Zero(dim, dim));
  for (const auto& chunk : sums)
    for (std::size_t j = 0; j < parts; ++j) z[j] += chunk[j];
  for (std::size_t j = 0; j < parts; ++j) out.noalias() += z[j] * pb.right[j];
  return out;
}

double power_of_two_below(double x) { return std::exp2(std::floor(std::log2(x))); }

struct Integral {
  Eigen::MatrixXd value;
  double err_est = 0.0;
  double t_max = 0.0;
  std::size_t nodes = 0;
  std::vector<std::string> warnings;
};

Integral laplace_integral(const SemigroupEvaluator& s, const CliffordKernel& k, const Eigen::MatrixXd& b,
                          const QuadratureScheme& scheme) {
  if (!(scheme.tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  const Problem pb = make_problem(s, k, b);
  const auto dim = s.real_generator().rows();
  Integral out;
  if (!s.growth().certified)
    out.warnings.push_back("growth bound horizon not certified; tail bound relies on sampled M");
  if (pb.g.empty() || pb.env.C == 0.0) {
    out.value = Eigen::MatrixXd::Zero(dim, b.cols());
    return out;
  }
  const double omega = s.omega();
  const double c = pb.env.r - omega;
  if (!(c > 0.0)) {
    std::ostringstream msg;
    msg << "kernel decay rate " << pb.env.r << " does not exceed the growth bound " << omega;
    throw DivergenceError(msg.str());
  }
  const double half = 0.5 * scheme.tol;
  const double t_star = truncation_point(pb.env, omega, s.M(), half);

  double h;
  if (scheme.initial_width > 0.0) {
    h = power_of_two_below(scheme.initial_width);
  } else {
    const double scale = s.spectral_radius() + pb.kernel_speed;
    double width = std::min(1.0, 1.0 / c);
    if (scale > 0.0) width = std::min(width, 4.0 / scale);
    h = power_of_two_below(width);
  }

  std::vector<double> x, w;
  gauss_legendre(scheme.order, x, w);
  const int threads = worker_threads(scheme.threads);

  auto panels_for = [&](double width) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_star / width)));
  };
  std::size_t panels = panels_for(h);
  if (panels > scheme.max_panels) throw AccuracyError("panel budget exhausted before the first pass",
                                                  std::numeric_limits<double>::infinity());
  Eigen::MatrixXd prev = integrate(s, pb, h, panels, x, w, threads);
  std::size_t nodes = panels * x.size();
  double best = std::numeric_limits<double>::infinity();
  for (int level = 0; level < scheme.max_refinements; ++level) {
    const double finer = 0.5 * h;
    const std::size_t fine_panels = panels_for(finer);
    if (fine_panels > scheme.max_panels) break;
    Eigen::MatrixXd cur = integrate(s, pb, finer, fine_panels, x, w, threads);
    nodes += fine_panels * x.size();
    const double diff = result_norm(cur - prev, s.n(), s.d());
    best = std::min(best, diff);
    h = finer;
    panels = fine_panels;
    prev = std::move(cur);
    if (diff < half) {
      const double t_max = static_cast<double>(panels) * h;
      out.value = std::move(prev);
      out.t_max = t_max;
      out.err_est = diff + tail_bound(pb.env, omega, s.M(), t_max);
      out.nodes = nodes;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "panel refinement stalled: best successive difference " << best << " vs target " << half;
  throw AccuracyError(msg.str(), best + half);
}

void require_gap(double rate, double omega, const char* what) {
  if (!(rate - omega >= kHypothesisMargin)) {
    std::ostringstream msg;
    msg << what << " = " << rate << " is not above omega = " << omega << " by " << kHypothesisMargin;
    throw HypothesisError(msg.str(), rate, omega);
  }
}

void require_signature(const SemigroupEvaluator& s, const ConeElement& q) {
  if (q.n() != s.n()) throw DimensionError("cone element and semigroup use different signatures");
}

LapOperator operator_result(const SemigroupEvaluator& s, Integral in) {
  LapOperator r{CliffordMatrixOperator::from_real_representation(s.n(), s.d(), in.value), in.err_est, in.t_max,
                in.nodes, std::move(in.warnings)};
  return r;
}

}  // namespace

// --- Lap --------------------------------------------------------------------------

LapVector lap_apply(const SemigroupEvaluator& s, const CliffordKernel& k, const CliffordVector& x,
                    const QuadratureScheme& scheme) {
  if (x.n() != s.n() || x.d() != s.d()) throw DimensionError("vector does not live in the semigroup's module");
  Integral in = laplace_integral(s, k, x.flatten(), scheme);
  return {CliffordVector::from_flat(s.n(), s.d(), in.value.col(0)), in.err_est, in.t_max, in.nodes,
          std::move(in.warnings)};
}

LapVector lap_apply(const SemigroupEvaluator& s, const ExpPolyKernel& k, const CliffordVector& x,
                    const QuadratureScheme& scheme) {
  return lap_apply(s, CliffordKernel::real(s.n(), k), x, scheme);
}

LapOperator lap_operator_result(const SemigroupEvaluator& s, const CliffordKernel& k,
                                const QuadratureScheme& scheme) {
  const auto dim = s.real_generator().rows();
  return operator_result(s, laplace_integral(s, k, Eigen::MatrixXd::Identity(dim, dim), scheme));
}

LapOperator lap_operator_result(const SemigroupEvaluator& s, const ExpPolyKernel& k,
                                const QuadratureScheme& scheme) {
  return lap_operator_result(s, CliffordKernel::real(s.n(), k), scheme);
}

// --- constructions ----------------------------------------------------------------

LapOperator p_inverse_via_laplace(const SemigroupEvaluator& s, const RealPolynomial& p,
                                  const QuadratureScheme& scheme) {
  PolynomialKernel pk = build_gP(p);
  require_gap(pk.roots.r_P, s.omega(), "r_P");
  LapOperator r = lap_operator_result(s, pk.g, scheme);
  if (pk.flagged) r.warnings.push_back("root multiplicities ambiguous; g_P from the confluent linear system");
  return r;
}

LapOperator combo_via_laplace(const SemigroupEvaluator& s, const RealPolynomial& p,
                              std::span<const CliffordElement> coeffs, const QuadratureScheme& scheme) {
  if (coeffs.empty() || static_cast<int>(coeffs.size()) > p.degree())
    throw ConfigError("combination needs between 1 and deg P Clifford coefficients");
  for (const auto& c : coeffs)
    if (c.n() != s.n()) throw DimensionError("combination coefficient has the wrong signature");
  PolynomialKernel pk = build_gP(p);
  require_gap(pk.roots.r_P, s.omega(), "r_P");
  LapOperator r = lap_operator_result(s, combination_kernel(pk.g, coeffs), scheme);
  if (pk.flagged) r.warnings.push_back("root multiplicities ambiguous; g_P from the confluent linear system");
  return r;
}

LapOperator quasi_resolvent(const SemigroupEvaluator& s, const ConeElement& q, const QuadratureScheme& scheme) {
  require_signature(s, q);
  require_gap(q.re(), s.omega(), "re(q)");
  return lap_operator_result(s, build_gq(q), scheme);
}

LapOperator a_quasi_resolvent(const SemigroupEvaluator& s, const ConeElement& q,
                              const QuadratureScheme& scheme) {
  require_signature(s, q);
  require_gap(q.re(), s.omega(), "re(q)");
  return lap_operator_result(s, -1.0 * derivative(build_gq(q)), scheme);
}

LapOperator resolvent(const SemigroupEvaluator& s, const ConeElement& q, const QuadratureScheme& scheme) {
  require_signature(s, q);
  require_gap(q.re(), s.omega(), "re(q)");
  return lap_operator_result(s, CliffordKernel::exp_minus(q), scheme);
}

LapOperator qn_power_via_conv(const SemigroupEvaluator& s, const ConeElement& q, int power,
                              const QuadratureScheme& scheme) {
  if (power < 1) throw ConfigError("power must be at least 1");
  require_signature(s, q);
  require_gap(q.re(), s.omega(), "re(q)");
  const double sign = (power & 1) ? -1.0 : 1.0;
  return lap_operator_result(s, sign * conv_power(-1.0 * build_gq(q), power), scheme);
}

// --- bounds -----------------------------------------------------------------------

namespace {

double gap_or_throw(double rate, double omega, const char* what) {
  const double gap = rate - omega;
  if (!(gap > 0.0)) {
    std::ostringstream msg;
    msg << what << " = " << rate << " does not exceed omega = " << omega;
    throw HypothesisError(msg.str(), rate, omega);
  }
  return gap;
}

}  // namespace

double bound_P(const RealPolynomial& p, double omega, double M) {
  const RootSet rs = roots(p);
  const double gap = gap_or_throw(rs.r_P, omega, "r_P");
  const ResidueTable res = residues(p, rs);
  double sum = 0.0;
  for (const auto& row : res)
    for (std::size_t k = 0; k < row.size(); ++k) sum += std::abs(row[k]) / std::pow(gap, static_cast<double>(k + 1));
  return M * sum;
}

double bound_Q(const ConeElement& q, double omega, double M) {
  const double gap = gap_or_throw(q.re(), omega, "re(q)");
  return M / (gap * gap);
}

double bound_C(const ConeElement& q, double omega, double M) {
  return M / gap_or_throw(q.re(), omega, "re(q)");
}

double bound_Qn(const ConeElement& q, double omega, double M, int power) {
  if (power < 1) throw ConfigError("power must be at least 1");
  const double gap = gap_or_throw(q.re(), omega, "re(q)");
  return M / std::pow(gap, 2.0 * power);
}

// --- identities -------------------------------------------------------------------

double LapIdentityReport::worst() const {
  double w = 0.0;
  for (const auto& v : {a, b, c, d, e, star})
    if (v) w = std::max(w, *v);
  return w;
}

LapIdentityReport verify_lap_identities(const SemigroupEvaluator& s, const ExpPolyKernel& g, const ConeElement& q,
                                        const QuadratureScheme& scheme, const ExpPolyKernel* f) {
  require_signature(s, q);
  const int n = s.n();
  const int d = s.d();
  const CliffordMatrixOperator& a = s.generator();
  const auto id = CliffordMatrixOperator::identity(n, d);
  auto lap = [&](const ExpPolyKernel& k) { return lap_operator(s, k, scheme); };
  auto scalar = [&](double v) { return CliffordMatrixOperator::scalar(n, d, v); };

  LapIdentityReport rep;
  const CliffordMatrixOperator lg = lap(g);

  constexpr int kMaxOrder = 8;
  const std::vector<double> iv = initial_values(g, kMaxOrder + 2);
  double iv_scale = 1.0;
  for (double v : iv) iv_scale = std::max(iv_scale, std::abs(v));
  const double zero_tol = 1e-11 * iv_scale;
  while (rep.m + 1 < kMaxOrder && std::abs(iv[static_cast<std::size_t>(rep.m + 1)]) <= zero_tol) ++rep.m;

  rep.a = upper_norm(a * lg + scalar(iv[0]) + lap(derivative(g)));

  if (rep.m >= 0) {
    double worst = 0.0;
    CliffordMatrixOperator ak = id;
    for (int k = 0; k <= rep.m + 1; ++k) {
      if (k > 0) ak = a * ak;
      const double sign = (k & 1) ? -1.0 : 1.0;
      worst = std::max(worst, upper_norm(ak * lg - sign * lap(derivative(g, k))));
    }
    ak = a * ak;
    const double sign = (rep.m & 1) ? -1.0 : 1.0;
    const auto rhs = sign * (scalar(iv[static_cast<std::size_t>(rep.m + 1)]) + lap(derivative(g, rep.m + 2)));
    worst = std::max(worst, upper_norm(ak * lg - rhs));
    rep.b = worst;

    double comm = 0.0;
    ak = id;
    for (int k = 1; k <= rep.m + 2; ++k) {
      ak = a * ak;
      comm = std::max(comm, upper_norm(ak * lg - lg * ak));
    }
    rep.e = comm;
  }

  if (std::abs(iv[0]) <= zero_tol && std::abs(iv[1] - 1.0) <= zero_tol) {
    const ExpPolyKernel corr = derivative(g, 2) + (2.0 * q.re()) * derivative(g) + q.norm_sq() * g;
    rep.corrector = corr.max_coefficient();
    rep.c = upper_norm(delta_q(a, q) * lg - id - lap(corr));
  }

  rep.d = upper_norm(a * lg - lg * a);

  const ExpPolyKernel& ff = f ? *f : g;
  rep.star = upper_norm(lap(ff) * lg - lap(convolve(ff, g)));
  return rep;
}

}  // namespace cliffsemi
