#ifndef LINKMSE_UTIL_RNG_HPP
#define LINKMSE_UTIL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace linkmse {

// Seeded generator with self-contained samplers. All non-uniform draws are
// built from the uniform stream only, so a seed pins the whole sequence
// regardless of standard-library internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on (0,1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Marsaglia-Tsang; shape < 1 boosted through gamma(shape+1) * U^(1/shape).
  double gamma(double shape, double rate = 1.0) {
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  // log of a Gamma(shape,1) draw; finite even for tiny shapes where the draw
  // itself underflows. Consumes the stream exactly like gamma(shape).
  double log_gamma_draw(double shape) {
    if (shape >= 1.0) return std::log(gamma(shape));
    return std::log(gamma(shape + 1.0)) + std::log(uniform_pos()) / shape;
  }

  // Beta(a,b) draw returned as (value, log(1-value)), computed in log space
  // so log(1-value) is exact even when the value rounds to 1.
  std::pair<double, double> beta_log1m(double a, double b) {
    const double lx = log_gamma_draw(a);
    const double ly = log_gamma_draw(b);
    const double m = lx > ly ? lx : ly;
    const double zx = std::exp(lx - m), zy = std::exp(ly - m);
    return {zx / (zx + zy), ly - m - std::log(zx + zy)};
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Exact inverse-CDF walk outward from the mode, so the length of the walk
  // is O(sd) and the starting pmf never underflows even for large n.
  long binomial(long n, double p) {
    if (n <= 0) return 0;
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    const double u = uniform();
    const long mode = std::min(n, static_cast<long>(static_cast<double>(n + 1) * p));
    const double log_pmf_mode = std::lgamma(static_cast<double>(n) + 1.0) -
                                std::lgamma(static_cast<double>(mode) + 1.0) -
                                std::lgamma(static_cast<double>(n - mode) + 1.0) +
                                static_cast<double>(mode) * std::log(p) +
                                static_cast<double>(n - mode) * std::log1p(-p);
    double cum = std::exp(log_pmf_mode);
    if (u <= cum) return mode;
    long lo = mode, hi = mode;
    double pmf_lo = cum, pmf_hi = cum;
    const double odds = p / (1.0 - p);
    while (lo > 0 || hi < n) {
      const double next_lo =
          lo > 0 ? pmf_lo * static_cast<double>(lo) / (static_cast<double>(n - lo + 1) * odds) : -1.0;
      const double next_hi =
          hi < n ? pmf_hi * odds * static_cast<double>(n - hi) / static_cast<double>(hi + 1) : -1.0;
      long k;
      if (next_lo >= next_hi) {
        pmf_lo = next_lo;
        k = --lo;
        cum += pmf_lo;
      } else {
        pmf_hi = next_hi;
        k = ++hi;
        cum += pmf_hi;
      }
      if (u <= cum) return k;
    }
    return hi;
  }

  // Multinomial by chained conditional binomials.
  std::vector<long> multinomial(long n, std::span<const double> probs) {
    std::vector<long> counts(probs.size(), 0);
    double remaining_p = 1.0;
    long remaining_n = n;
    for (std::size_t i = 0; i + 1 < probs.size() && remaining_n > 0; ++i) {
      const double cond = remaining_p > 0.0 ? probs[i] / remaining_p : 0.0;
      counts[i] = binomial(remaining_n, std::min(1.0, cond));
      remaining_n -= counts[i];
      remaining_p -= probs[i];
    }
    if (!counts.empty()) counts.back() += remaining_n;
    return counts;
  }

  // Index draw from unnormalized log-weights.
  std::size_t categorical_log(std::span<const double> log_w) {
    double mx = log_w[0];
    for (double w : log_w)
      if (w > mx) mx = w;
    double total = 0.0;
    for (double w : log_w) total += std::exp(w - mx);
    double u = uniform() * total;
    for (std::size_t i = 0; i < log_w.size(); ++i) {
      u -= std::exp(log_w[i] - mx);
      if (u <= 0.0) return i;
    }
    return log_w.size() - 1;
  }

  std::size_t categorical(std::span<const double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = uniform() * total;
    for (std::size_t i = 0; i < w.size(); ++i) {
      u -= w[i];
      if (u <= 0.0) return i;
    }
    return w.size() - 1;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace linkmse

#endif
