// SPDX-License-Identifier: Apache-2.0
#include "rwfbm/fbm.hpp"

#include <cmath>
#include <complex>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "rwfbm/error.hpp"

namespace rwfbm {

namespace {

template <class T>
class FftwBuffer {
public:
  explicit FftwBuffer(std::size_t n) : n_(n), p_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!p_)
      throw ResourceLimitError("fftw_malloc failed for " + std::to_string(n) + " elements");
  }
  ~FftwBuffer() { fftw_free(p_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  T* data() noexcept { return p_; }
  const T* data() const noexcept { return p_; }
  std::size_t size() const noexcept { return n_; }

private:
  std::size_t n_;
  T* p_;
};

using RealBuffer = FftwBuffer<double>;
using ComplexBuffer = FftwBuffer<fftw_complex>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plans {
  fftw_plan forward;
  fftw_plan inverse;
};

// Plans are created once per size and live for the process.
Plans plans_for(std::size_t L) {
  static std::map<std::size_t, Plans> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(L);
  if (it != cache.end())
    return it->second;
  RealBuffer r(L);
  ComplexBuffer c(L / 2 + 1);
  const int n = static_cast<int>(L);
  Plans p{fftw_plan_dft_r2c_1d(n, r.data(), c.data(), FFTW_ESTIMATE),
          fftw_plan_dft_c2r_1d(n, c.data(), r.data(), FFTW_ESTIMATE)};
  if (!p.forward || !p.inverse)
    throw Error("FFTW plan creation failed for size " + std::to_string(L));
  cache.emplace(L, p);
  return p;
}

std::size_t good_fft_size(std::size_t n) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t p2 = 1; p2 < 2 * n + 2; p2 *= 2)
    for (std::size_t p3 = p2; p3 < 2 * n + 2; p3 *= 3)
      for (std::size_t p5 = p3; p5 < 2 * n + 2; p5 *= 5)
        if (p5 >= n && p5 < best)
          best = p5;
  return best;
}

// Spectrum of phase j of g: g_j[p] = g[P p - j] for p < len, where g[d] = d^a
// for d >= 1 and 0 otherwise, padded to L.
struct SpectrumKey {
  double a;
  std::size_t len;
  std::size_t L;
  unsigned P;
  unsigned j;
  bool operator==(const SpectrumKey& o) const {
    return a == o.a && len == o.len && L == o.L && P == o.P && j == o.j;
  }
};

class SpectrumCache {
public:
  std::shared_ptr<const ComplexBuffer> get(const Kernel& kernel, std::size_t len, std::size_t L, unsigned P,
                                           unsigned j) {
    const SpectrumKey key{kernel.exponent(), len, L, P, j};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->first == key) {
          entries_.splice(entries_.begin(), entries_, it);
          return entries_.front().second;
        }
      }
    }
    auto spectrum = std::make_shared<ComplexBuffer>(L / 2 + 1);
    {
      RealBuffer g(L);
      for (std::size_t p = 0; p < L; ++p) {
        const std::size_t d = P * p - j;
        g.data()[p] = p < len && P * p > j ? kernel.power(static_cast<double>(d)) : 0.0;
      }
      fftw_execute_dft_r2c(plans_for(L).forward, g.data(), spectrum->data());
    }
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.emplace_front(key, spectrum);
    std::size_t bytes = 0;
    for (auto it = entries_.begin(); it != entries_.end();) {
      bytes += it->second->size() * sizeof(fftw_complex);
      if (bytes > budget_ && it != entries_.begin())
        it = entries_.erase(it);
      else
        ++it;
    }
    return spectrum;
  }

private:
  static constexpr std::size_t budget_ = std::size_t{512} << 20;
  std::mutex mutex_;
  std::list<std::pair<SpectrumKey, std::shared_ptr<const ComplexBuffer>>> entries_;
};

SpectrumCache& spectrum_cache() {
  static SpectrumCache c;
  return c;
}

void require_steps(const TwoSidedBm& bm, unsigned m, std::uint64_t right, std::uint64_t left) {
  const std::uint64_t have_r = bm.right().levels() > m ? bm.right().level(m).size() : 0;
  const std::uint64_t have_l = left == 0 ? 0 : (bm.left().levels() > m ? bm.left().level(m).size() : 0);
  if (have_r < right)
    throw OutOfHorizonError("fbm: right walk at level " + std::to_string(m) + " has " +
                            std::to_string(have_r) + " steps, need " + std::to_string(right));
  if (have_l < left)
    throw OutOfHorizonError("fbm: left walk at level " + std::to_string(m) + " has " +
                            std::to_string(have_l) + " steps, need " + std::to_string(left));
}

// Signs of the eight bits of a byte, in bit order and in reverse bit order.
struct SignTables {
  alignas(64) double fwd[256][8];
  alignas(64) double rev[256][8];
  SignTables() {
    for (int x = 0; x < 256; ++x)
      for (int j = 0; j < 8; ++j) {
        fwd[x][j] = ((x >> j) & 1) ? 1.0 : -1.0;
        rev[x][j] = ((x >> (7 - j)) & 1) ? 1.0 : -1.0;
      }
  }
};

const SignTables& sign_tables() {
  static const SignTables t;
  return t;
}

// Sum of w[i] * s_i over steps s_1..s_n (+-1) of a level.
double dot_steps(const WalkLevel& L, const double* w, std::uint64_t n) {
  const auto& bits = L.packed();
  const auto& tab = sign_tables().fwd;
  double acc[8] = {};
  const std::uint64_t full = n / 64;
  for (std::uint64_t word = 0; word < full; ++word) {
    const std::uint64_t x = bits[word];
    const double* wp = w + word * 64;
    for (int i = 0; i < 8; ++i) {
      const double* t = tab[(x >> (8 * i)) & 255U];
      for (int j = 0; j < 8; ++j)
        acc[j] += wp[8 * i + j] * t[j];
    }
  }
  double s = 0;
  for (std::uint64_t i = full * 64; i < n; ++i)
    s += w[i] * static_cast<double>(static_cast<int>((bits[i >> 6] >> (i & 63)) & 1U) * 2 - 1);
  for (double x : acc)
    s += x;
  return s;
}

// Sum of w[V - v] * s_v over left steps v = 1..V.
double dot_steps_reversed(const WalkLevel& L, const double* w, std::uint64_t V) {
  const auto& bits = L.packed();
  const auto& tab = sign_tables().rev;
  double acc[8] = {};
  const std::uint64_t full = V / 64;
  for (std::uint64_t word = 0; word < full; ++word) {
    const std::uint64_t x = bits[word];
    for (int i = 0; i < 8; ++i) {
      const double* wp = w + (V - 8 - 64 * word - 8 * static_cast<std::uint64_t>(i));
      const double* t = tab[(x >> (8 * i)) & 255U];
      for (int j = 0; j < 8; ++j)
        acc[j] += wp[j] * t[j];
    }
  }
  double s = 0;
  for (std::uint64_t v = full * 64 + 1; v <= V; ++v)
    s += w[V - v] * static_cast<double>(static_cast<int>((bits[(v - 1) >> 6] >> ((v - 1) & 63)) & 1U) * 2 - 1);
  for (double x : acc)
    s += x;
  return s;
}

// out[k] = scale * (y[V + P k] - y[V]) for k = 0..nout, with y[n] = sum_i z[i] g[n - i]
// over i < V + P nout. V must be a multiple of P. Phase j of z only meets phase j of g,
// so the strided outputs need P transforms of length ~ 1/P each and one inverse.
template <class Z>
void phase_correlation(const Kernel& kernel, const Z& z_at, std::size_t V, std::size_t nout, unsigned P,
                       double scale, double* out) {
  const std::size_t Vp = V / P;
  const std::size_t len = Vp + nout + 1;
  const std::size_t L = good_fft_size(Vp + 2 * nout + 1);
  const Plans plans = plans_for(L);
  RealBuffer buf(L);
  ComplexBuffer acc(L / 2 + 1);
  ComplexBuffer zf(L / 2 + 1);
  double* zb = buf.data();
  for (unsigned j = 0; j < P; ++j) {
    const std::size_t q_end = Vp + nout;
    for (std::size_t q = 0; q < q_end; ++q)
      zb[q] = z_at(P * q + j);
    std::fill(zb + q_end, zb + L, 0.0);
    auto spectrum = spectrum_cache().get(kernel, len, L, P, j);
    fftw_execute_dft_r2c(plans.forward, zb, zf.data());
    const fftw_complex* g = spectrum->data();
    fftw_complex* f = zf.data();
    fftw_complex* a = acc.data();
    for (std::size_t i = 0; i < L / 2 + 1; ++i) {
      const double re = f[i][0] * g[i][0] - f[i][1] * g[i][1];
      const double im = f[i][0] * g[i][1] + f[i][1] * g[i][0];
      if (j == 0) {
        a[i][0] = re;
        a[i][1] = im;
      } else {
        a[i][0] += re;
        a[i][1] += im;
      }
    }
  }
  fftw_execute_dft_c2r(plans.inverse, acc.data(), zb);
  const double s = scale / static_cast<double>(L);
  const double y0 = zb[Vp];
  out[0] = 0;
  for (std::size_t k = 1; k <= nout; ++k)
    out[k] = (zb[Vp + k] - y0) * s;
}

} // namespace

double FbmLevelPath::spacing() const { return std::ldexp(1.0, -2 * static_cast<int>(level)); }

std::uint64_t grid_last_index(double K, unsigned m) {
  if (!(K > 0))
    throw DomainError("horizon must be positive");
  const double x = std::ldexp(K, 2 * static_cast<int>(m));
  if (!(x < 4e15))
    throw ResourceLimitError("grid too large");
  return static_cast<std::uint64_t>(std::floor(x + 1e-9));
}

std::uint64_t path_tail_cutoff(double K, unsigned m, const Kernel& kernel, const TruncationPolicy& policy) {
  const std::uint64_t N = grid_last_index(K, m);
  return N == 0 ? 0 : tail_cutoff(N, m, kernel, policy);
}

FbmLevelPath fbm_grid_values(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double K,
                             const TruncationPolicy& policy, GridMethod method) {
  policy.validate();
  const std::uint64_t N = grid_last_index(K, m);
  const std::uint64_t V = path_tail_cutoff(K, m, kernel, policy);
  if (V > (std::uint64_t{1} << 32))
    throw ResourceLimitError("fbm_grid_values: tail cutoff of " + std::to_string(V) +
                             " steps; cap the past window with max_past_horizon");
  require_steps(bm, m, N, V);

  FbmLevelPath path;
  path.level = m;
  path.hurst = kernel.hurst();
  path.horizon = K;
  path.policy = policy;
  path.tail_cutoff_used = V;
  path.values.assign(N + 1, 0.0);
  if (N == 0)
    return path;

  const double c = level_scale(m, kernel);
  const WalkLevel* right = &bm.right().level(m);
  const WalkLevel* left = V > 0 ? &bm.left().level(m) : nullptr;
  // Z(r) for r = -V .. N-1 stored at r + V.
  auto z_at = [&](std::uint64_t i) -> double {
    return i < V ? -left->twisted_step(V - i) : right->twisted_step(i - V + 1);
  };

  if (method == GridMethod::automatic)
    method = static_cast<double>(N) * static_cast<double>(N + V) < 2e5 ? GridMethod::direct : GridMethod::fft;

  if (method == GridMethod::direct) {
    for (std::uint64_t k = 1; k <= N; ++k) {
      double s = 0;
      for (std::uint64_t r = 0; r < k; ++r)
        s += kernel.power(static_cast<double>(k - r)) * z_at(V + r);
      if (kernel.exponent() != 0)
        for (std::uint64_t v = 1; v <= V; ++v)
          s += past_difference(k, v, kernel) * z_at(V - v);
      path.values[k] = c * s;
    }
    return path;
  }

  phase_correlation(kernel, z_at, V, N, 1, c, path.values.data());
  return path;
}

FbmLevelPath simulate_fbm(TwoSidedBm& bm, unsigned m, const Kernel& kernel, double K,
                          const TruncationPolicy& policy, GridMethod method) {
  const std::uint64_t V = path_tail_cutoff(K, m, kernel, policy);
  if (V > (std::uint64_t{1} << 32))
    throw ResourceLimitError("simulate_fbm: tail cutoff of " + std::to_string(V) +
                             " steps; cap the past window with max_past_horizon");
  bm.right().ensure(m, K);
  if (V > 0)
    bm.left().ensure(m, std::ldexp(static_cast<double>(V), -2 * static_cast<int>(m)));
  return fbm_grid_values(bm, m, kernel, K, policy, method);
}

std::vector<double> fbm_grid_values_every4(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, double K,
                                           const TruncationPolicy& policy) {
  if (m == 0)
    throw DomainError("fbm_grid_values_every4: level must be at least 1");
  policy.validate();
  const std::uint64_t N = grid_last_index(K, m);
  const std::uint64_t V = path_tail_cutoff(K, m, kernel, policy);
  if (V > (std::uint64_t{1} << 32))
    throw ResourceLimitError("fbm_grid_values_every4: tail cutoff of " + std::to_string(V) +
                             " steps; cap the past window with max_past_horizon");
  const std::uint64_t nout = N / 4;
  require_steps(bm, m, 4 * nout, V);
  std::vector<double> out(nout + 1, 0.0);
  if (nout == 0)
    return out;
  const WalkLevel* right = &bm.right().level(m);
  const WalkLevel* left = V > 0 ? &bm.left().level(m) : nullptr;
  // Leading zeros make the window a multiple of the stride.
  const std::uint64_t e = (4 - V % 4) % 4;
  auto z_at = [&](std::uint64_t i) -> double {
    if (i < e)
      return 0.0;
    i -= e;
    return i < V ? -left->twisted_step(V - i) : right->twisted_step(i - V + 1);
  };
  phase_correlation(kernel, z_at, V + e, nout, 4, level_scale(m, kernel), out.data());
  return out;
}

double fbm_value(const TwoSidedBm& bm, unsigned m, const MovingAverageWeights& weights) {
  const std::uint64_t V = weights.tail_cutoff;
  const std::uint64_t k = weights.values.size() - V;
  require_steps(bm, m, k, V);
  // Past weights are stored from r = -V upward, so left step v pairs with index V - v.
  double s = dot_steps(bm.right().level(m), weights.values.data() + V, k);
  if (V > 0)
    s -= dot_steps_reversed(bm.left().level(m), weights.values.data(), V);
  return s;
}

double fbm_value_by_parts(const TwoSidedBm& bm, unsigned m, const Kernel& kernel, std::uint64_t k,
                          std::uint64_t cutoff) {
  require_steps(bm, m, k, cutoff);
  const double dt = std::ldexp(1.0, -2 * static_cast<int>(m));
  const double tk = static_cast<double>(k) * dt;
  const auto V = static_cast<std::int64_t>(cutoff);
  const auto kk = static_cast<std::int64_t>(k);
  double s = 0;
  for (std::int64_t r = -V + 1; r <= kk; ++r) {
    const double tr = static_cast<double>(r) * dt;
    const double coeff = kernel_h(tr - dt, tk, kernel) - kernel_h(tr, tk, kernel);
    s += coeff * bm.grid_value(m, r);
  }
  s -= kernel_h(-static_cast<double>(V) * dt, tk, kernel) * bm.grid_value(m, -V);
  return s;
}

double fbm_eval(const FbmLevelPath& path, double t) {
  if (!(t >= 0 && t <= path.horizon))
    throw DomainError("fbm_eval: t=" + std::to_string(t) + " outside [0, " + std::to_string(path.horizon) + "]");
  const double x = std::ldexp(t, 2 * static_cast<int>(path.level));
  const double fk = std::floor(x);
  auto k = static_cast<std::uint64_t>(fk);
  if (k >= path.last_index()) {
    if (x == static_cast<double>(path.last_index()))
      return path.values[path.last_index()];
    throw DomainError("fbm_eval: t=" + std::to_string(t) + " past the last grid point");
  }
  const double gamma = x - fk;
  return gamma * path.values[k + 1] + (1 - gamma) * path.values[k];
}

} // namespace rwfbm
