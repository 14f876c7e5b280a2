#include "vlcsee/entropy_check.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace vlcsee {

namespace {

constexpr std::size_t kChunk = 8192;

// 8-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double normal_cdf_diff(double a, double b) {
  // Phi(b) - Phi(a) for a <= b without cancellation in either tail
  if (a > 0.0) return 0.5 * (std::erfc(a / std::sqrt(2.0)) - std::erfc(b / std::sqrt(2.0)));
  if (b < 0.0) return 0.5 * (std::erfc(-b / std::sqrt(2.0)) - std::erfc(-a / std::sqrt(2.0)));
  return 1.0 - 0.5 * std::erfc(-a / std::sqrt(2.0)) - 0.5 * std::erfc(b / std::sqrt(2.0));
}

double gaussian_density(double x, double s) {
  return std::exp(-0.5 * x * x / (s * s)) / (std::sqrt(2.0 * kPi) * s);
}

// Density of c d + N(0, s^2), d ~ U(-1, 1), evaluated at x.
double box_gaussian(double x, double c, double s) {
  const double ac = std::abs(c);
  if (ac < 1e-12 * s) return gaussian_density(x, s);
  return normal_cdf_diff((x - ac) / s, (x + ac) / s) / (2.0 * ac);
}

// Integrates f(u) * 1/2 du over [-1, 1] with panels sized to the feature width.
template <typename F>
double average_over_uniform(double scale, double s, F&& f) {
  const int panels = std::clamp(static_cast<int>(std::ceil(2.0 * std::abs(scale) / s)), 1, 400);
  const double width = 2.0 / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = -1.0 + (p + 0.5) * width;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      total += kGlWeights[i] * f(mid + 0.5 * width * kGlNodes[i]);
    }
  }
  return total * 0.5 * width / 2.0;
}

// psi(t) = t Phi(t) + phi(t) for t <= 0: the ramp max(x, 0) smoothed by a unit Gaussian,
// minus the ramp itself.
double ramp_excess(double t) {
  return t * 0.5 * std::erfc(-t / std::sqrt(2.0)) + std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi);
}

// Density of a d1 + b d2 + N(0, s^2), d1, d2 ~ U(-1, 1): a trapezoid smoothed by the
// noise. Ramps cancel exactly outside the support, so they are summed apart from the
// (small, same-signed in the tails) Gaussian corrections.
double trapezoid_gaussian(double y, double a, double b, double s) {
  a = std::abs(a);
  b = std::abs(b);
  const double knots[4] = {y + a + b, y + a - b, y - a + b, y - a - b};
  const double sign[4] = {1.0, -1.0, -1.0, 1.0};
  double ramps = 0.0, excess = 0.0;
  for (int i = 0; i < 4; ++i) {
    ramps += sign[i] * std::max(knots[i], 0.0);
    excess += sign[i] * ramp_excess(-std::abs(knots[i]) / s);
  }
  return (ramps + s * excess) / (4.0 * a * b);
}

double mixture_density(double y, std::vector<double> c, double s) {
  c.erase(std::remove_if(c.begin(), c.end(), [s](double v) { return std::abs(v) < 1e-12 * s; }),
          c.end());
  if (c.empty()) return gaussian_density(y, s);
  std::sort(c.begin(), c.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  const double lead = c.front();
  if (c.size() == 1) return box_gaussian(y, lead, s);
  // The closed form loses digits when the smaller box is much narrower than the noise;
  // a single quadrature panel is accurate there.
  const bool closed = std::abs(c[1]) >= 0.05 * s;
  if (c.size() == 2) {
    if (closed) return trapezoid_gaussian(y, lead, c[1], s);
    return average_over_uniform(c[1], s, [&](double u) { return box_gaussian(y - c[1] * u, lead, s); });
  }
  if (c.size() == 3) {
    return average_over_uniform(c[2], s, [&](double v) {
      if (closed) return trapezoid_gaussian(y - c[2] * v, lead, c[1], s);
      return average_over_uniform(c[1], s, [&](double u) {
        return box_gaussian(y - c[1] * u - c[2] * v, lead, s);
      });
    });
  }
  throw std::invalid_argument("mixture_density: at most three uniform components");
}

// p(y) for y = v d + n in R^2 (or R^1), d ~ U(-1, 1), n ~ N(0, diag(s^2)).
double rank_one_density(const Vector& y, const Vector& v, const Vector& s) {
  const Index m = y.size();
  double a = 0.0, b = 0.0, c = 0.0, norm = 1.0;
  for (Index j = 0; j < m; ++j) {
    const double iv = 1.0 / (s(j) * s(j));
    a += v(j) * v(j) * iv;
    b += v(j) * y(j) * iv;
    c += y(j) * y(j) * iv;
    norm /= std::sqrt(2.0 * kPi) * s(j);
  }
  if (a < 1e-24) return norm * std::exp(-0.5 * c);
  const double ra = std::sqrt(a);
  const double centre = b / a;
  const double mass = normal_cdf_diff(ra * (-1.0 - centre), ra * (1.0 - centre));
  return norm * std::exp(-0.5 * (c - b * b / a)) * std::sqrt(2.0 * kPi / a) * mass * 0.5;
}

double gaussian_log2_density(const Vector& x, const Vector& s) {
  double out = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    out += -0.5 * x(j) * x(j) / (s(j) * s(j)) - std::log(std::sqrt(2.0 * kPi) * s(j));
  }
  return out / kLn2;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t id) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  void merge(const Moments& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double std_error() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - m * m);
    return std::sqrt(var / static_cast<double>(n - 1));
  }
};

struct UserMoments {
  Moments output, given_own, others, noise;
};

}  // namespace

double uniform_mixture_density(double y, const Vector& c, double noise_std) {
  return mixture_density(y, std::vector<double>(c.data(), c.data() + c.size()), noise_std);
}

std::vector<EntropyReport> verify_entropy_chain(const Matrix& gains, const Vector& noise_vars,
                                                const Matrix& w, const SymbolDistribution& dist,
                                                const EntropyOptions& options) {
  const Index users = gains.rows();
  if (users > 3 || w.cols() != users) {
    throw std::invalid_argument("verify_entropy_chain: needs K <= 3 and a K-column precoder");
  }
  const Matrix g = gains * w;  // g(j, i) = h_j^T w_i
  const Vector s = noise_vars.cwiseSqrt();
  const bool gauss = options.gaussian_symbols;
  const double sd = std::sqrt(dist.variance);

  const std::size_t chunks = (options.samples + kChunk - 1) / kChunk;
  std::vector<std::vector<UserMoments>> per_chunk(chunks, std::vector<UserMoments>(static_cast<std::size_t>(users)));

  auto run_chunk = [&](std::size_t ci) {
    std::mt19937_64 rng(mix(options.seed, ci));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t count = std::min(kChunk, options.samples - ci * kChunk);
    Vector d(users), n(users);
    for (std::size_t t = 0; t < count; ++t) {
      for (Index i = 0; i < users; ++i) d(i) = gauss ? sd * normal(rng) : uni(rng);
      for (Index i = 0; i < users; ++i) n(i) = s(i) * normal(rng);
      for (Index k = 0; k < users; ++k) {
        UserMoments& um = per_chunk[ci][static_cast<std::size_t>(k)];
        // h(y_k): all symbols random
        const double yk = g.row(k).dot(d) + n(k);
        std::vector<double> c_all, c_rest;
        double var_all = 0.0, var_rest = 0.0;
        for (Index i = 0; i < users; ++i) {
          c_all.push_back(g(k, i));
          var_all += g(k, i) * g(k, i);
          if (i != k) {
            c_rest.push_back(g(k, i));
            var_rest += g(k, i) * g(k, i);
          }
        }
        // h(y_k | d_k): translation by the known own symbol drops out
        const double y_rest = yk - g(k, k) * d(k);
        double p_all, p_rest;
        if (gauss) {
          p_all = gaussian_density(yk, std::sqrt(dist.variance * var_all + s(k) * s(k)));
          p_rest = gaussian_density(y_rest, std::sqrt(dist.variance * var_rest + s(k) * s(k)));
        } else {
          p_all = mixture_density(yk, c_all, s(k));
          p_rest = mixture_density(y_rest, c_rest, s(k));
        }
        um.output.add(-std::log2(p_all));
        um.given_own.add(-std::log2(p_rest));

        if (users > 1) {
          // others' outputs with their own symbols known: v d_k + n_-k
          Vector v(users - 1), y(users - 1), sk(users - 1), nk(users - 1);
          Index j = 0;
          for (Index i = 0; i < users; ++i) {
            if (i == k) continue;
            v(j) = g(i, k);
            nk(j) = n(i);
            y(j) = g(i, k) * d(k) + n(i);
            sk(j) = s(i);
            ++j;
          }
          double p_others;
          if (gauss) {
            Matrix cov = dist.variance * v * v.transpose();
            cov.diagonal() += sk.cwiseAbs2();
            Eigen::LLT<Matrix> llt(cov);
            const Vector z = llt.matrixL().solve(y);
            double logdet = 0.0;
            for (Index r = 0; r < cov.rows(); ++r) logdet += std::log(llt.matrixL()(r, r));
            p_others = std::exp(-0.5 * z.squaredNorm() - logdet -
                                0.5 * static_cast<double>(y.size()) * std::log(2.0 * kPi));
          } else {
            p_others = rank_one_density(y, v, sk);
          }
          um.others.add(-std::log2(p_others));
          um.noise.add(-gaussian_log2_density(nk, sk));
        }
      }
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1 || chunks < 2) {
    for (std::size_t ci = 0; ci < chunks; ++ci) run_chunk(ci);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t ci = static_cast<std::size_t>(t); ci < chunks; ci += static_cast<std::size_t>(threads)) run_chunk(ci);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<EntropyReport> out;
  const double two_pi_e = 2.0 * kPi * std::exp(1.0);
  for (Index k = 0; k < users; ++k) {
    UserMoments total;
    for (std::size_t ci = 0; ci < chunks; ++ci) {
      const UserMoments& um = per_chunk[ci][static_cast<std::size_t>(k)];
      total.output.merge(um.output);
      total.given_own.merge(um.given_own);
      total.others.merge(um.others);
      total.noise.merge(um.noise);
    }
    EntropyReport rep;
    rep.user = k;
    const double tol = options.sigmas;
    const double nv = noise_vars(k);

    // The differential entropy of one symbol stream, in bits.
    const double hd = gauss ? 0.5 * std::log2(two_pi_e * dist.variance) : dist.diff_entropy_bits;
    double epi = 0.0, interference = 0.0;
    for (Index i = 0; i < users; ++i) {
      epi += g(k, i) * g(k, i) * std::exp2(2.0 * hd);
      if (i != k) interference += g(k, i) * g(k, i);
    }
    auto fill = [&](EntropyTerm& term, const Moments& m, double reference) {
      term.estimate = m.mean();
      term.std_error = m.std_error();
      term.reference = reference;
    };
    fill(rep.output, total.output, 0.5 * std::log2(epi + two_pi_e * nv));
    rep.output.holds = rep.output.estimate >= rep.output.reference - tol * rep.output.std_error - 1e-12;

    fill(rep.output_given_own, total.given_own,
         0.5 * std::log2(two_pi_e * (interference * dist.variance + nv)));
    rep.output_given_own.holds = rep.output_given_own.estimate <=
                                 rep.output_given_own.reference + tol * rep.output_given_own.std_error + 1e-12;

    if (users > 1) {
      Vector v(users - 1), var(users - 1);
      Index j = 0;
      for (Index i = 0; i < users; ++i) {
        if (i == k) continue;
        v(j) = g(i, k);
        var(j) = noise_vars(i);
        ++j;
      }
      Matrix cov = dist.variance * v * v.transpose();
      cov.diagonal() += var;
      const double m = static_cast<double>(users - 1);
      const double det_bound = 0.5 * std::log2(std::pow(two_pi_e, m) * cov.determinant());
      const double noise_entropy = 0.5 * std::log2(std::pow(two_pi_e, m) * var.prod());
      fill(rep.others_given_theirs, total.others, det_bound);
      rep.others_given_theirs.holds = rep.others_given_theirs.estimate <=
                                      det_bound + tol * rep.others_given_theirs.std_error + 1e-12;
      fill(rep.others_given_all, total.noise, noise_entropy);
      rep.others_given_all.holds = std::abs(rep.others_given_all.estimate - noise_entropy) <=
                                   tol * rep.others_given_all.std_error + 1e-12;
    }
    out.push_back(rep);
  }
  return out;
}

}  // namespace vlcsee
