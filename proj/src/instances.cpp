#include "certopt/instances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace certopt {

double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

Vec softmax(const Vec& v) {
  const double m = v.maxCoeff();
  Vec e = (v.array() - m).exp();
  return e / e.sum();
}

double neg_entropy(const Vec& q) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) h += q[i] * std::log(q[i]);
  }
  return h;
}

namespace {

bool simplex_member(const Vec& x, double tol) {
  return std::abs(x.sum() - 1.0) <= tol && x.minCoeff() >= -tol;
}

bool box_member(const Vec& x, const Vec& lo, const Vec& hi, double tol) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
  }
  return true;
}

Vec sample_simplex(int n, Rng& rng) {
  std::exponential_distribution<double> exp_dist(1.0);
  Vec q(n);
  for (int i = 0; i < n; ++i) q[i] = exp_dist(rng);
  return q / q.sum();
}

Vec sample_box(const Vec& lo, const Vec& hi, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec x(lo.size());
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    x[j] = lo[j] + (hi[j] - lo[j]) * unit(rng);
  }
  return x;
}

}  // namespace

Mat normalize_payoff(Mat payoff) {
  Eigen::JacobiSVD<Mat> svd(payoff);
  const double spectral = svd.singularValues().size() > 0
                              ? svd.singularValues()[0]
                              : 0.0;
  if (spectral > 0.0) payoff /= spectral;
  return payoff;
}

MatrixGameInstance make_game(int n, std::uint64_t seed, double alpha,
                             double lipschitz) {
  if (n < 1) throw std::invalid_argument("game: n must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat payoff(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) payoff(i, j) = normal(rng);
  }
  return {normalize_payoff(std::move(payoff)), lipschitz, alpha, seed};
}

FisherMarketInstance make_fisher(int m, int n, std::uint64_t seed,
                                 double alpha, double delta) {
  if (m < 1 || n < 1) throw std::invalid_argument("fisher: m,n must be >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> log_val(std::log(0.1),
                                                 std::log(10.0));
  Mat valuations(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) valuations(i, j) = std::exp(log_val(rng));
  }
  std::uniform_real_distribution<double> budget(0.5, 2.0);
  Vec budgets(m);
  for (int i = 0; i < m; ++i) budgets[i] = budget(rng);
  FisherMarketInstance inst;
  inst.valuations = std::move(valuations);
  inst.budgets = std::move(budgets);
  inst.delta = delta;
  inst.mu_lo = Vec::Constant(n, -1.0);
  inst.mu_hi = Vec::Constant(n, 1.0);
  inst.mu_ref = Vec::Zero(n);
  inst.alpha = alpha;
  inst.seed = seed;
  return inst;
}

QuadBoxToy make_quadbox(int n, double alpha, double lipschitz) {
  if (n < 1) throw std::invalid_argument("quadbox: n must be >= 1");
  QuadBoxToy inst;
  inst.n = n;
  inst.alpha = alpha;
  inst.lipschitz = lipschitz;
  inst.lo = Vec::Constant(n, -1.0);
  inst.hi = Vec::Constant(n, 1.0);
  return inst;
}

double fisher_smoothness(const FisherMarketInstance& inst) {
  const double n = static_cast<double>(inst.mu_hi.size());
  return n * std::exp(inst.mu_hi.maxCoeff()) +
         inst.budgets.sum() / inst.delta;
}

// ---------------------------------------------------------------------------
// Matrix game

namespace {

struct GameData {
  Mat A;
  Mat At;
  Eigen::PartialPivLU<Mat> lu;
  double lipschitz = 1.0;
  double alpha = 1.0;
  double log_n = 0.0;
  int n = 0;
};

}  // namespace

ProblemOracles game_oracles(const MatrixGameInstance& inst) {
  auto d = std::make_shared<GameData>();
  d->A = inst.payoff;
  d->At = inst.payoff.transpose();
  d->lu = Eigen::PartialPivLU<Mat>(inst.payoff);
  d->lipschitz = inst.lipschitz;
  d->alpha = inst.alpha;
  d->n = static_cast<int>(inst.payoff.rows());
  d->log_n = std::log(static_cast<double>(d->n));

  ProblemOracles p;
  p.dim = d->n;
  p.norm_kind = NormKind::kEll1;
  p.initial_point = Vec::Constant(d->n, 1.0 / d->n);

  p.smooth.lipschitz = d->lipschitz;
  p.smooth.eval = [d](const Vec& x) {
    return log_sum_exp(d->lipschitz * (d->At * x)) / d->lipschitz;
  };
  p.smooth.grad = [d](const Vec& x) -> Vec {
    return d->A * softmax(d->lipschitz * (d->At * x));
  };

  p.composite.alpha = d->alpha;
  p.composite.w_bound = d->log_n;
  p.composite.eval_h_alpha = [d](const Vec& x) {
    return d->alpha * (neg_entropy(x) + d->log_n);
  };
  p.composite.in_domain = [](const Vec& x, double tol) {
    return simplex_member(x, tol);
  };
  p.composite.glmo = [d](const Vec& v) -> GlmoResult {
    const Vec t = -v / d->alpha;
    // min over the simplex of <v,x> + alpha*(H(x)+log n)
    return {softmax(t), -d->alpha * log_sum_exp(t) + d->alpha * d->log_n};
  };

  p.conjugate.grad_h_alpha_conj = [d](const Vec& z) -> Vec {
    return softmax(-z / d->alpha);
  };
  p.conjugate.eval_h_alpha_conj = [d](const Vec& z) {
    return d->alpha * log_sum_exp(-z / d->alpha) - d->alpha * d->log_n;
  };
  // Gradients of the smooth part live in the image of A; the conjugate is
  // evaluated in strategy coordinates recovered through the payoff matrix.
  p.conjugate.eval_f_conj = [d](const Vec& z) {
    const Vec q = d->lu.solve(z);
    if (std::abs(q.sum() - 1.0) > 1e-6 || q.minCoeff() < -1e-6) {
      throw DomainError("game f*: point outside dom f*");
    }
    return neg_entropy(q) / d->lipschitz;
  };
  p.conjugate.glmo_f_conj = [d](const Vec& v) -> GlmoResult {
    const Vec t = -d->lipschitz * (d->At * v);
    return {d->A * softmax(t), -log_sum_exp(t) / d->lipschitz};
  };
  p.conjugate.bregman_prox = [d](const Vec& vhat, const Vec& /*g_prev*/,
                                 const Vec& fstar_subgrad_prev, double a,
                                 double tau, double alpha) -> Vec {
    const double tau_next = tau + alpha * a / d->lipschitz;
    const Vec t = (alpha * a * (d->At * vhat) +
                   tau * d->lipschitz * (d->At * fstar_subgrad_prev)) /
                  tau_next;
    return d->A * softmax(t);
  };
  p.conjugate.bregman_radius = [d](const Vec& g0) {
    const Vec q0 = d->lu.solve(g0);
    double radius = 0.0;
    for (Eigen::Index i = 0; i < q0.size(); ++i) {
      radius = std::max(radius, -std::log(std::max(q0[i], 1e-12)));
    }
    return radius;
  };

  const int n = d->n;
  p.sample_primal = [n](Rng& rng) { return sample_simplex(n, rng); };
  p.sample_dual = [d, n](Rng& rng) -> Vec {
    return d->A * sample_simplex(n, rng);
  };

  MatrixGameInstance base = inst;
  p.rebind_alpha = [base](double alpha) {
    MatrixGameInstance copy = base;
    copy.alpha = alpha;
    return game_oracles(copy);
  };
  return p;
}

// ---------------------------------------------------------------------------
// Fisher market

namespace {

struct FisherData {
  Mat log_b;  // m x n
  Vec budgets;
  double delta = 1.0;
  double alpha = 1.0;
  Vec lo, hi, ref;
  double lipschitz = 0.0;
};

// Hand-rolled evaluation: the grid oracle calls this tens of millions of
// times, so avoid temporaries.
double fisher_eval(const FisherData& d, const Vec& mu) {
  const Eigen::Index n = mu.size();
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) total += std::exp(mu[j]);
  const Eigen::Index m = d.budgets.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    double mx = (d.log_b(i, 0) - mu[0]) / d.delta;
    for (Eigen::Index j = 1; j < n; ++j) {
      mx = std::max(mx, (d.log_b(i, j) - mu[j]) / d.delta);
    }
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      s += std::exp((d.log_b(i, j) - mu[j]) / d.delta - mx);
    }
    total += d.delta * d.budgets[i] * (mx + std::log(s));
  }
  return total;
}

Vec fisher_grad(const FisherData& d, const Vec& mu) {
  const Eigen::Index n = mu.size();
  Vec g(n);
  for (Eigen::Index j = 0; j < n; ++j) g[j] = std::exp(mu[j]);
  const Eigen::Index m = d.budgets.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    double mx = (d.log_b(i, 0) - mu[0]) / d.delta;
    for (Eigen::Index j = 1; j < n; ++j) {
      mx = std::max(mx, (d.log_b(i, j) - mu[j]) / d.delta);
    }
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      s += std::exp((d.log_b(i, j) - mu[j]) / d.delta - mx);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double share = std::exp((d.log_b(i, j) - mu[j]) / d.delta - mx) / s;
      g[j] -= d.budgets[i] * share;
    }
  }
  return g;
}

}  // namespace

ProblemOracles fisher_oracles(const FisherMarketInstance& inst) {
  auto d = std::make_shared<FisherData>();
  d->log_b = inst.valuations.array().log().matrix();
  d->budgets = inst.budgets;
  d->delta = inst.delta;
  d->alpha = inst.alpha;
  d->lo = inst.mu_lo;
  d->hi = inst.mu_hi;
  d->ref = inst.mu_ref;
  d->lipschitz = fisher_smoothness(inst);

  ProblemOracles p;
  p.dim = static_cast<int>(inst.mu_lo.size());
  p.norm_kind = NormKind::kEuclidean;
  p.initial_point = inst.mu_ref;

  p.smooth.lipschitz = d->lipschitz;
  p.smooth.eval = [d](const Vec& mu) { return fisher_eval(*d, mu); };
  p.smooth.grad = [d](const Vec& mu) { return fisher_grad(*d, mu); };

  p.composite.alpha = d->alpha;
  {
    double m_bound = 0.0;
    for (Eigen::Index j = 0; j < d->lo.size(); ++j) {
      const double a = d->lo[j] - d->ref[j];
      const double b = d->hi[j] - d->ref[j];
      m_bound += 0.5 * std::max(a * a, b * b);
    }
    p.composite.w_bound = m_bound;
  }
  p.composite.eval_h_alpha = [d](const Vec& mu) {
    return 0.5 * d->alpha * (mu - d->ref).squaredNorm();
  };
  p.composite.in_domain = [d](const Vec& mu, double tol) {
    return box_member(mu, d->lo, d->hi, tol);
  };
  p.composite.glmo = [d](const Vec& v) -> GlmoResult {
    Vec x(v.size());
    double value = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      x[j] = std::clamp(d->ref[j] - v[j] / d->alpha, d->lo[j], d->hi[j]);
      const double dev = x[j] - d->ref[j];
      value += v[j] * x[j] + 0.5 * d->alpha * dev * dev;
    }
    return {std::move(x), value};
  };

  // No closed-form f*; the dual side is unsupported for this family.
  p.conjugate.grad_h_alpha_conj = [d](const Vec& z) -> Vec {
    Vec x(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      x[j] = std::clamp(d->ref[j] - z[j] / d->alpha, d->lo[j], d->hi[j]);
    }
    return x;
  };
  p.conjugate.eval_h_alpha_conj = [d, glmo = p.composite.glmo](const Vec& z) {
    return -glmo(z).min_value;
  };

  p.sample_primal = [d](Rng& rng) { return sample_box(d->lo, d->hi, rng); };

  FisherMarketInstance base = inst;
  p.rebind_alpha = [base](double alpha) {
    FisherMarketInstance copy = base;
    copy.alpha = alpha;
    return fisher_oracles(copy);
  };
  return p;
}

// ---------------------------------------------------------------------------
// Quadratic box toy

ProblemOracles quadbox_oracles(const QuadBoxToy& inst) {
  const double alpha = inst.alpha;
  const double lipschitz = inst.lipschitz;
  const Vec lo = inst.lo;
  const Vec hi = inst.hi;

  ProblemOracles p;
  p.dim = inst.n;
  p.norm_kind = NormKind::kEuclidean;
  p.initial_point = hi;

  p.smooth.lipschitz = lipschitz;
  p.smooth.eval = [lipschitz](const Vec& x) {
    return 0.5 * lipschitz * x.squaredNorm();
  };
  p.smooth.grad = [lipschitz](const Vec& x) -> Vec { return lipschitz * x; };

  p.composite.alpha = alpha;
  {
    double m_bound = 0.0;
    for (Eigen::Index j = 0; j < lo.size(); ++j) {
      m_bound += 0.5 * std::max(lo[j] * lo[j], hi[j] * hi[j]);
    }
    p.composite.w_bound = m_bound;
  }
  p.composite.eval_h_alpha = [alpha](const Vec& x) {
    return 0.5 * alpha * x.squaredNorm();
  };
  p.composite.in_domain = [lo, hi](const Vec& x, double tol) {
    return box_member(x, lo, hi, tol);
  };
  p.composite.glmo = [alpha, lo, hi](const Vec& v) -> GlmoResult {
    Vec x(v.size());
    double value = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      x[j] = std::clamp(-v[j] / alpha, lo[j], hi[j]);
      value += v[j] * x[j] + 0.5 * alpha * x[j] * x[j];
    }
    return {std::move(x), value};
  };

  p.conjugate.eval_f_conj = [lipschitz](const Vec& z) {
    return z.squaredNorm() / (2.0 * lipschitz);
  };
  p.conjugate.grad_h_alpha_conj = [alpha, lo, hi](const Vec& z) -> Vec {
    Vec x(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      x[j] = std::clamp(-z[j] / alpha, lo[j], hi[j]);
    }
    return x;
  };
  p.conjugate.eval_h_alpha_conj = [glmo = p.composite.glmo](const Vec& z) {
    return -glmo(z).min_value;
  };
  p.conjugate.glmo_f_conj = [lipschitz](const Vec& v) -> GlmoResult {
    return {-lipschitz * v, -0.5 * lipschitz * v.squaredNorm()};
  };
  p.conjugate.bregman_prox = [lipschitz](const Vec& vhat, const Vec& /*g*/,
                                         const Vec& fstar_subgrad_prev,
                                         double a, double tau,
                                         double alpha_rt) -> Vec {
    const double tau_next = tau + alpha_rt * a / lipschitz;
    return (alpha_rt * a * vhat + tau * lipschitz * fstar_subgrad_prev) /
           tau_next;
  };
  // dom f* is unbounded, so no finite Bregman radius.

  p.sample_primal = [lo, hi](Rng& rng) { return sample_box(lo, hi, rng); };
  p.sample_dual = [n = inst.n](Rng& rng) -> Vec {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec z(n);
    for (int j = 0; j < n; ++j) z[j] = normal(rng);
    return z;
  };

  QuadBoxToy base = inst;
  p.rebind_alpha = [base](double a) {
    QuadBoxToy copy = base;
    copy.alpha = a;
    return quadbox_oracles(copy);
  };
  return p;
}

ProblemOracles make_oracles(const Instance& inst) {
  return std::visit(
      [](const auto& v) -> ProblemOracles {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MatrixGameInstance>) {
          return game_oracles(v);
        } else if constexpr (std::is_same_v<T, FisherMarketInstance>) {
          return fisher_oracles(v);
        } else {
          return quadbox_oracles(v);
        }
      },
      inst);
}

Instance with_alpha(Instance inst, double alpha) {
  std::visit([alpha](auto& v) { v.alpha = alpha; }, inst);
  return inst;
}

double instance_alpha(const Instance& inst) {
  return std::visit([](const auto& v) { return v.alpha; }, inst);
}

std::string instance_kind(const Instance& inst) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MatrixGameInstance>) return "game";
        if constexpr (std::is_same_v<T, FisherMarketInstance>) return "fisher";
        return "quadbox";
      },
      inst);
}

DomainSpec DomainSpec::Simplex(int n) {
  DomainSpec d;
  d.kind = Kind::kSimplex;
  d.n = n;
  return d;
}

DomainSpec DomainSpec::Box(Vec lo, Vec hi) {
  DomainSpec d;
  d.kind = Kind::kBox;
  d.n = static_cast<int>(lo.size());
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  return d;
}

DomainSpec domain_spec(const Instance& inst) {
  return std::visit(
      [](const auto& v) -> DomainSpec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MatrixGameInstance>) {
          return DomainSpec::Simplex(static_cast<int>(v.payoff.rows()));
        } else if constexpr (std::is_same_v<T, FisherMarketInstance>) {
          return DomainSpec::Box(v.mu_lo, v.mu_hi);
        } else {
          return DomainSpec::Box(v.lo, v.hi);
        }
      },
      inst);
}

// ---------------------------------------------------------------------------
// Grid reference oracle

namespace {

struct GridBest {
  double value = std::numeric_limits<double>::infinity();
  long long index = -1;
  Vec point;

  void consider(double v, long long idx, const Vec& x) {
    if (v < value) {
      value = v;
      index = idx;
      point = x;
    }
  }

  void merge(const GridBest& other) {
    // Chunks are merged in ascending index order; strict inequality keeps
    // the earliest grid point on ties, independent of thread count.
    if (other.index >= 0 && other.value < value) *this = other;
  }
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CERTOPT_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

BruteForceResult brute_force_min(const std::function<double(const Vec&)>& f,
                                 const DomainSpec& domain, double resolution,
                                 double curvature_bound, int threads) {
  if (domain.n > 3) {
    throw std::invalid_argument("brute_force_min: dimension too large (>3)");
  }
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("brute_force_min: resolution must be > 0");
  }
  const int workers = resolve_threads(threads);

  GridBest best;
  if (domain.kind == DomainSpec::Kind::kSimplex) {
    const long long m =
        std::max<long long>(1, std::llround(1.0 / resolution));
    if (domain.n == 1) {
      Vec x = Vec::Ones(1);
      best.consider(f(x), 0, x);
    } else {
      // Outer loop over the first coordinate; inner coordinates enumerate
      // the remaining simplex slice.
      auto scan = [&](long long k0_begin, long long k0_end) {
        GridBest local;
        Vec x(domain.n);
        for (long long k0 = k0_begin; k0 < k0_end; ++k0) {
          x[0] = static_cast<double>(k0) / m;
          if (domain.n == 2) {
            x[1] = static_cast<double>(m - k0) / m;
            local.consider(f(x), k0, x);
          } else {
            for (long long k1 = 0; k1 <= m - k0; ++k1) {
              x[1] = static_cast<double>(k1) / m;
              x[2] = static_cast<double>(m - k0 - k1) / m;
              local.consider(f(x), k0 * (m + 1) + k1, x);
            }
          }
        }
        return local;
      };
      const long long outer = m + 1;
      const long long chunk = (outer + workers - 1) / workers;
      std::vector<std::future<GridBest>> futures;
      for (long long b = 0; b < outer; b += chunk) {
        const long long e = std::min(outer, b + chunk);
        futures.push_back(
            std::async(std::launch::async, [&scan, b, e] { return scan(b, e); }));
      }
      for (auto& fut : futures) best.merge(fut.get());
    }
  } else {
    std::vector<long long> steps(domain.n);
    for (int j = 0; j < domain.n; ++j) {
      steps[j] = std::max<long long>(
          1, std::llround((domain.hi[j] - domain.lo[j]) / resolution));
      if (domain.hi[j] == domain.lo[j]) steps[j] = 0;
    }
    auto coord = [&](int j, long long k) {
      return steps[j] == 0 ? domain.lo[j]
                           : domain.lo[j] +
                                 (domain.hi[j] - domain.lo[j]) *
                                     (static_cast<double>(k) / steps[j]);
    };
    auto scan = [&](long long k0_begin, long long k0_end) {
      GridBest local;
      Vec x(domain.n);
      for (long long k0 = k0_begin; k0 < k0_end; ++k0) {
        x[0] = coord(0, k0);
        if (domain.n == 1) {
          local.consider(f(x), k0, x);
          continue;
        }
        for (long long k1 = 0; k1 <= steps[1]; ++k1) {
          x[1] = coord(1, k1);
          if (domain.n == 2) {
            local.consider(f(x), k0 * (steps[1] + 1) + k1, x);
            continue;
          }
          for (long long k2 = 0; k2 <= steps[2]; ++k2) {
            x[2] = coord(2, k2);
            local.consider(
                f(x), (k0 * (steps[1] + 1) + k1) * (steps[2] + 1) + k2, x);
          }
        }
      }
      return local;
    };
    const long long outer = steps[0] + 1;
    const long long chunk = (outer + workers - 1) / workers;
    std::vector<std::future<GridBest>> futures;
    for (long long b = 0; b < outer; b += chunk) {
      const long long e = std::min(outer, b + chunk);
      futures.push_back(
          std::async(std::launch::async, [&scan, b, e] { return scan(b, e); }));
    }
    for (auto& fut : futures) best.merge(fut.get());
  }

  BruteForceResult result;
  result.argmin = best.point;
  result.min_value = best.value;
  result.error_bound = 0.5 * curvature_bound * resolution * resolution;
  return result;
}

BruteForceResult brute_force_min(const ProblemOracles& problem,
                                 const DomainSpec& domain, double resolution,
                                 int threads) {
  auto objective = [&problem](const Vec& x) {
    return problem.smooth.eval(x) + problem.composite.eval_h_alpha(x);
  };
  return brute_force_min(objective, domain, resolution,
                         problem.smooth.lipschitz + problem.composite.alpha,
                         threads);
}

// ---------------------------------------------------------------------------
// Instance JSON

namespace {

using Json = nlohmann::ordered_json;

Vec vec_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) {
    throw std::invalid_argument("instance JSON: field '" + field +
                                "' must be an array");
  }
  Vec v(j.size());
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

Mat mat_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw std::invalid_argument("instance JSON: field '" + field +
                                "' must be an array of arrays");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.front().size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw std::invalid_argument("instance JSON: ragged matrix in '" + field +
                                  "'");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Json vec_to_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Json mat_to_json(const Mat& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(row);
  }
  return j;
}

}  // namespace

InstanceConfig parse_instance_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("instance JSON: parse error: ") +
                                e.what());
  }
  InstanceConfig cfg;
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw std::invalid_argument("instance JSON: missing field 'kind'");
  }
  cfg.kind = j["kind"].get<std::string>();
  if (cfg.kind != "game" && cfg.kind != "fisher" && cfg.kind != "quadbox") {
    throw std::invalid_argument("instance JSON: unknown kind '" + cfg.kind +
                                "'");
  }
  if (j.contains("n")) cfg.n = j["n"].get<int>();
  if (j.contains("m")) cfg.m = j["m"].get<int>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("L")) cfg.lipschitz = j["L"].get<double>();
  if (j.contains("delta")) cfg.delta = j["delta"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("payoff")) cfg.payoff = mat_from_json(j["payoff"], "payoff");
  if (j.contains("valuations")) {
    cfg.valuations = mat_from_json(j["valuations"], "valuations");
  }
  if (j.contains("budgets")) cfg.budgets = vec_from_json(j["budgets"], "budgets");
  if (j.contains("mu_lo")) cfg.mu_lo = vec_from_json(j["mu_lo"], "mu_lo");
  if (j.contains("mu_hi")) cfg.mu_hi = vec_from_json(j["mu_hi"], "mu_hi");
  if (j.contains("mu_ref")) cfg.mu_ref = vec_from_json(j["mu_ref"], "mu_ref");
  if (j.contains("box_lo")) cfg.box_lo = vec_from_json(j["box_lo"], "box_lo");
  if (j.contains("box_hi")) cfg.box_hi = vec_from_json(j["box_hi"], "box_hi");
  if (cfg.n < 1) throw std::invalid_argument("instance JSON: n must be >= 1");
  if (cfg.kind == "fisher" && cfg.m < 1) {
    throw std::invalid_argument("instance JSON: m must be >= 1");
  }
  return cfg;
}

std::string instance_config_to_json(const InstanceConfig& cfg) {
  Json j;
  j["kind"] = cfg.kind;
  j["n"] = cfg.n;
  if (cfg.kind == "fisher") j["m"] = cfg.m;
  j["alpha"] = cfg.alpha;
  if (cfg.kind != "fisher") j["L"] = cfg.lipschitz;
  if (cfg.kind == "fisher") j["delta"] = cfg.delta;
  j["seed"] = cfg.seed;
  if (cfg.payoff) j["payoff"] = mat_to_json(*cfg.payoff);
  if (cfg.valuations) j["valuations"] = mat_to_json(*cfg.valuations);
  if (cfg.budgets) j["budgets"] = vec_to_json(*cfg.budgets);
  if (cfg.mu_lo) j["mu_lo"] = vec_to_json(*cfg.mu_lo);
  if (cfg.mu_hi) j["mu_hi"] = vec_to_json(*cfg.mu_hi);
  if (cfg.mu_ref) j["mu_ref"] = vec_to_json(*cfg.mu_ref);
  if (cfg.box_lo) j["box_lo"] = vec_to_json(*cfg.box_lo);
  if (cfg.box_hi) j["box_hi"] = vec_to_json(*cfg.box_hi);
  return j.dump(2) + "\n";
}

namespace {

void require_finite(const Mat& m, const char* field) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string("instance JSON: field '") + field +
                                "' has non-finite entries");
  }
}

void require_finite(const Vec& v, const char* field) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string("instance JSON: field '") + field +
                                "' has non-finite entries");
  }
}

void require_positive_field(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("instance JSON: field '") + field +
                                "' must be positive");
  }
}

}  // namespace

Instance realize(const InstanceConfig& cfg) {
  require_positive_field(cfg.alpha, "alpha");
  if (cfg.kind != "fisher") require_positive_field(cfg.lipschitz, "L");
  if (cfg.kind == "fisher") require_positive_field(cfg.delta, "delta");
  if (cfg.payoff) require_finite(*cfg.payoff, "payoff");
  if (cfg.valuations) require_finite(*cfg.valuations, "valuations");
  if (cfg.budgets) require_finite(*cfg.budgets, "budgets");
  if (cfg.mu_lo) require_finite(*cfg.mu_lo, "mu_lo");
  if (cfg.mu_hi) require_finite(*cfg.mu_hi, "mu_hi");
  if (cfg.mu_ref) require_finite(*cfg.mu_ref, "mu_ref");
  if (cfg.box_lo) require_finite(*cfg.box_lo, "box_lo");
  if (cfg.box_hi) require_finite(*cfg.box_hi, "box_hi");
  if (cfg.kind == "game") {
    MatrixGameInstance inst =
        make_game(cfg.payoff ? static_cast<int>(cfg.payoff->rows()) : cfg.n,
                  cfg.seed, cfg.alpha, cfg.lipschitz);
    if (cfg.payoff) inst.payoff = normalize_payoff(*cfg.payoff);
    return inst;
  }
  if (cfg.kind == "fisher") {
    FisherMarketInstance inst =
        make_fisher(cfg.valuations ? static_cast<int>(cfg.valuations->rows())
                                   : cfg.m,
                    cfg.valuations ? static_cast<int>(cfg.valuations->cols())
                                   : cfg.n,
                    cfg.seed, cfg.alpha, cfg.delta);
    if (cfg.valuations) inst.valuations = *cfg.valuations;
    if (cfg.budgets) inst.budgets = *cfg.budgets;
    if (cfg.mu_lo) inst.mu_lo = *cfg.mu_lo;
    if (cfg.mu_hi) inst.mu_hi = *cfg.mu_hi;
    if (cfg.mu_ref) inst.mu_ref = *cfg.mu_ref;
    if (inst.budgets.size() != inst.valuations.rows()) {
      throw std::invalid_argument("instance JSON: budgets size mismatch");
    }
    const Eigen::Index n = inst.valuations.cols();
    if (inst.mu_lo.size() != n || inst.mu_hi.size() != n ||
        inst.mu_ref.size() != n) {
      throw std::invalid_argument("instance JSON: price box size mismatch");
    }
    for (Eigen::Index jx = 0; jx < n; ++jx) {
      if (!(inst.mu_lo[jx] <= inst.mu_ref[jx] &&
            inst.mu_ref[jx] <= inst.mu_hi[jx])) {
        throw std::invalid_argument(
            "instance JSON: mu_ref must lie inside [mu_lo, mu_hi]");
      }
    }
    if (inst.valuations.minCoeff() <= 0.0) {
      throw std::invalid_argument(
          "instance JSON: valuations must be positive");
    }
    if (inst.budgets.minCoeff() <= 0.0) {
      throw std::invalid_argument("instance JSON: budgets must be positive");
    }
    return inst;
  }
  QuadBoxToy inst = make_quadbox(cfg.n, cfg.alpha, cfg.lipschitz);
  if (cfg.box_lo) inst.lo = *cfg.box_lo;
  if (cfg.box_hi) inst.hi = *cfg.box_hi;
  if (inst.lo.size() != inst.hi.size()) {
    throw std::invalid_argument("instance JSON: box size mismatch");
  }
  inst.n = static_cast<int>(inst.lo.size());
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("instance file not readable: " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return realize(parse_instance_config(text.str()));
}

}  // namespace certopt
