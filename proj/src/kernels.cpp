#include "nlab/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "nlab/errors.hpp"
#include "nlab/fft.hpp"
#include "nlab/quadrature.hpp"
#include "nlab/special.hpp"

namespace nlab {

namespace {

constexpr double kPi = std::numbers::pi;

double bump_raw(double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; }

double bump_constant(int d) {
  static std::array<double, kMaxDim + 1> cache{};
  static std::once_flag once;
  std::call_once(once, [] {
    for (int dd = 1; dd <= kMaxDim; ++dd) {
      const double radial = integrate([&](double r) { return bump_raw(r) * std::pow(r, dd - 1); }, 0.0, 1.0, 48, 16);
      cache[dd] = 1.0 / (special::unit_sphere_area(dd) * radial);
    }
  });
  return cache[d];
}

// Linearly interpolated radial table on [lo, hi], zero outside.
template <class T>
struct RadialTable {
  double lo = 0.0, hi = 0.0, step = 1.0;
  std::vector<T> v;

  T operator()(double r) const {
    if (r < lo || r > hi || v.empty()) return T{};
    const double x = (r - lo) / step;
    const std::size_t i = std::min(static_cast<std::size_t>(x), v.size() - 2);
    const double f = x - static_cast<double>(i);
    return v[i] * (1.0 - f) + v[i + 1] * f;
  }
};

template <class T, class F>
RadialTable<T> tabulate(double lo, double hi, std::size_t points, F&& f) {
  RadialTable<T> tab;
  tab.lo = lo;
  tab.hi = hi;
  tab.step = (hi - lo) / static_cast<double>(points - 1);
  tab.v.resize(points);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < points; ++i) tab.v[i] = f(lo + tab.step * static_cast<double>(i));
  return tab;
}

// Evaluates `value(abs_indices)` once per orbit of the hyperoctahedral group
// (axis permutations and sign flips) and writes it to every member, so the
// result is exactly even and exactly symmetric under axis permutations.
template <class T, class F>
std::vector<T> fill_symmetric(const GridSpec& g, F&& value) {
  const int d = g.d, half = g.n / 2;
  std::vector<std::array<int, kMaxDim>> reps;
  std::array<int, kMaxDim> a{};
  // Nondecreasing tuples in [0, half]^d.
  while (true) {
    reps.push_back(a);
    int k = d - 1;
    while (k >= 0 && a[k] == half) --k;
    if (k < 0) break;
    ++a[k];
    for (int j = k + 1; j < d; ++j) a[j] = a[k];
  }
  std::vector<T> vals(reps.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < reps.size(); ++i) vals[i] = value(reps[i]);

  std::vector<T> out(g.cells());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    std::array<int, kMaxDim> perm = reps[i];
    do {
      for (int mask = 0; mask < (1 << d); ++mask) {
        std::array<int, kMaxDim> ijk{};
        for (int k = 0; k < d; ++k) ijk[k] = ((mask >> k) & 1) ? (g.n - perm[k]) % g.n : perm[k];
        out[g.ravel(ijk)] = vals[i];
      }
    } while (std::next_permutation(perm.begin(), perm.begin() + d));
  }
  return out;
}

double norm_of(const std::array<int, kMaxDim>& a, int d, double h) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += static_cast<double>(a[k]) * a[k];
  return std::sqrt(s) * h;
}

void check_resolution(const GridSpec& g, double radius, const Mollifier& mol) {
  g.validate();
  mol.validate();
  require(radius > 0.0, "kernel radius t must be positive");
  require(mol.eps >= 2.0 * g.h() * (1.0 - 1e-12), "eps < 2h: shell is not resolvable on this grid");
  require(radius + mol.eps < 0.5 * g.L, "t + eps >= L/2: kernel would wrap around the torus");
}

}  // namespace

double bump_profile(int d, double r) { return bump_constant(d) * bump_raw(r); }

double bump_hat(int d, double s) {
  if (s == 0.0) return 1.0;
  const double nu = 0.5 * d - 1.0;
  const int panels = 4 + static_cast<int>(std::ceil(2.0 * s));
  const double c = 2.0 * std::pow(kPi, nu + 1.0);
  const double v = integrate(
      [&](double r) {
        return bump_profile(d, r) * std::pow(r, d - 1) * special::reduced_bessel(nu, 2.0 * kPi * s * r).real();
      },
      0.0, 1.0, 32, panels);
  return c * v;
}

void Mollifier::validate() const {
  require(eps > 0.0 && std::isfinite(eps), "mollifier eps must be positive");
  require(profile == "bump", "unknown mollifier profile '" + profile + "'");
}

double Mollifier::value(int d, double r) const { return std::pow(eps, -d) * bump_profile(d, r / eps); }

double Mollifier::hat(int d, double k) const { return bump_hat(d, eps * k); }

Field Mollifier::grid_field(const GridSpec& g) const {
  validate();
  Field f(g);
  f.values = fill_symmetric<double>(g, [&](const std::array<int, kMaxDim>& a) { return value(g.d, norm_of(a, g.d, g.h())); });
  const double mass = deterministic_sum(f.values) * g.cell_volume();
  require(mass > 0.0, "mollifier is not resolved by the grid (no cell inside its support)");
  for (double& v : f.values) v /= mass;
  return f;
}

const char* kernel_kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::sphere: return "sphere";
    case KernelKind::alpha: return "alpha";
    case KernelKind::modulus: return "modulus";
  }
  return "?";
}

Complex KernelField::mass() const {
  const double hv = grid.cell_volume();
  const double r = deterministic_sum(re) * hv;
  const double i = im.empty() ? 0.0 : deterministic_sum(im) * hv;
  return {r, i};
}

double sphere_mass(int d, double t) { return special::unit_sphere_area(d) * std::pow(t, d - 1); }

double mollified_sphere_profile(int d, double t, const Mollifier& mol, double r) {
  const double eps = mol.eps;
  if (d == 1) return mol.value(1, std::abs(r - t)) + mol.value(1, r + t);
  if (std::abs(r - t) >= eps) return 0.0;
  if (t < 1e-14) return sphere_mass(d, t) * mol.value(d, r);
  if (r < 1e-14 * std::max(t, eps)) return sphere_mass(d, t) * mol.value(d, t);
  const double c0 = (r * r + t * t - eps * eps) / (2.0 * r * t);
  if (c0 >= 1.0) return 0.0;
  const double theta_max = c0 <= -1.0 ? kPi : std::acos(c0);
  const double v = integrate(
      [&](double th) {
        const double dist2 = std::max(0.0, r * r + t * t - 2.0 * r * t * std::cos(th));
        return mol.value(d, std::sqrt(dist2)) * std::pow(std::sin(th), d - 2);
      },
      0.0, theta_max, 24, 4);
  return special::unit_sphere_area(d - 1) * std::pow(t, d - 1) * v;
}

KernelField build_sphere_kernel(const GridSpec& g, double t, const Mollifier& mol) {
  check_resolution(g, t, mol);
  const int d = g.d;
  const double h = g.h(), eps = mol.eps;
  const auto tab = tabulate<double>(std::max(0.0, t - eps), t + eps, 2049,
                                    [&](double r) { return mollified_sphere_profile(d, t, mol, r); });
  const int sub = d <= 3 ? 8 : 4;
  std::vector<double> offs(sub);
  for (int k = 0; k < sub; ++k) offs[k] = ((k + 0.5) / sub - 0.5) * h;
  const double reach = 0.5 * h * std::sqrt(static_cast<double>(d));
  std::size_t subcount = 1;
  for (int k = 0; k < d; ++k) subcount *= static_cast<std::size_t>(sub);

  KernelField kf;
  kf.grid = g;
  kf.kind = KernelKind::sphere;
  kf.t = t;
  kf.eps = eps;
  kf.construction = "cell-average";
  kf.re = fill_symmetric<double>(g, [&](const std::array<int, kMaxDim>& a) {
    const double rc = norm_of(a, d, h);
    if (rc + reach < t - eps || rc - reach > t + eps) return 0.0;
    double acc = 0.0;
    for (std::size_t s = 0; s < subcount; ++s) {
      std::size_t q = s;
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double x = a[k] * h + offs[q % sub];
        q /= sub;
        r2 += x * x;
      }
      acc += tab(std::sqrt(r2));
    }
    return acc / static_cast<double>(subcount);
  });
  kf.raw_mass = kf.mass().real();
  if (!(kf.raw_mass > 0.0)) throw NumericError("sphere kernel has no mass on this grid");
  const double scale = sphere_mass(d, t) / kf.raw_mass;
  for (double& v : kf.re) v *= scale;
  return kf;
}

Complex alpha_symbol(int d, Complex alpha, double xi) {
  const Complex nu = 0.5 * d + alpha - 1.0;
  return std::pow(kPi, 0.5 * d) * special::reduced_bessel(nu, 2.0 * kPi * xi);
}

namespace {

void check_alpha(const GridSpec& g, Complex alpha, const Mollifier& mol, const AlphaOptions& opts) {
  check_resolution(g, opts.t, mol);
  require(std::isfinite(alpha.real()) && std::isfinite(alpha.imag()), "alpha must be finite");
  require(alpha.real() >= -1.0 - 1e-12 && alpha.real() <= 1.0 + 1e-12, "Re(alpha) must lie in [-1, 1]");
  require(std::abs(alpha.imag()) <= 4.0 + 1e-12, "|Im(alpha)| must be <= 4");
}

KernelField alpha_spectral(const GridSpec& g, Complex alpha, const Mollifier& mol, double t) {
  const int d = g.d;
  const std::size_t N = g.cells();
  std::int64_t max2 = 0;
  for (int k = 0; k < d; ++k) max2 += static_cast<std::int64_t>(g.n / 2) * (g.n / 2);
  std::vector<char> present(static_cast<std::size_t>(max2) + 1, 0);
  for (std::size_t i = 0; i < N; ++i) present[static_cast<std::size_t>(g.wrapped_norm2(i))] = 1;
  std::vector<std::int64_t> values;
  for (std::size_t q = 0; q < present.size(); ++q)
    if (present[q]) values.push_back(static_cast<std::int64_t>(q));
  std::vector<Complex> symbol(present.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double xi = std::sqrt(static_cast<double>(values[j])) / g.L;
    symbol[static_cast<std::size_t>(values[j])] = alpha_symbol(d, alpha, t * xi) * mol.hat(d, xi);
  }
  bool nonzero = false;
  for (auto q : values) {
    const Complex s = symbol[static_cast<std::size_t>(q)];
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw ValidationError("alpha symbol is not finite at this alpha (pole of the normalization)");
    if (s != Complex(0.0)) nonzero = true;
  }
  if (!nonzero) throw ValidationError("alpha symbol vanishes identically at this alpha");

  std::vector<Complex> spec(N);
  for (std::size_t i = 0; i < N; ++i) spec[i] = symbol[static_cast<std::size_t>(g.wrapped_norm2(i))];
  const auto field = fft::inverse(g, spec);
  spec.clear();
  spec.shrink_to_fit();

  KernelField kf;
  kf.grid = g;
  kf.kind = KernelKind::alpha;
  kf.t = t;
  kf.alpha = alpha;
  kf.eps = mol.eps;
  kf.construction = "spectral";
  const bool cplx = alpha.imag() != 0.0;
  // The spectrum is radial, so the field is too up to roundoff; pin it to the
  // value at each orbit representative.
  kf.re = fill_symmetric<double>(g, [&](const std::array<int, kMaxDim>& a) { return field[g.ravel(a)].real(); });
  if (cplx)
    kf.im = fill_symmetric<double>(g, [&](const std::array<int, kMaxDim>& a) { return field[g.ravel(a)].imag(); });
  return kf;
}

KernelField alpha_spatial(const GridSpec& g, Complex alpha, const Mollifier& mol, double t) {
  const int d = g.d;
  const double eps = mol.eps, h = g.h();
  const double p = std::max(1.0, std::ceil(2.0 / alpha.real()));
  const Complex norm = special::rgamma(alpha) * std::pow(t, 1.0 - d);
  auto profile = [&](double r) -> Complex {
    const double ulo = std::max(0.0, (r - eps) / t), uhi = std::min(1.0, (r + eps) / t);
    if (uhi <= ulo) return 0.0;
    // u = 1 - w^p tames the (1-u)^{α-1} endpoint singularity.
    const double wlo = std::pow(1.0 - uhi, 1.0 / p), whi = std::pow(1.0 - ulo, 1.0 / p);
    const Complex v = integrate(
        [&](double w) -> Complex {
          const double u = 1.0 - std::pow(w, p);
          const Complex jac = p * std::exp((p * alpha - 1.0) * std::log(w)) * std::pow(1.0 + u, alpha - 1.0);
          return jac * mollified_sphere_profile(d, t * u, mol, r);
        },
        wlo, whi, 96, 1);
    return norm * v;
  };
  const auto tab = tabulate<Complex>(0.0, t + eps, 8193, profile);

  KernelField kf;
  kf.grid = g;
  kf.kind = KernelKind::alpha;
  kf.t = t;
  kf.alpha = alpha;
  kf.eps = eps;
  kf.construction = "spatial";
  const auto vals = fill_symmetric<Complex>(g, [&](const std::array<int, kMaxDim>& a) { return tab(norm_of(a, d, h)); });
  kf.re.resize(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) kf.re[i] = vals[i].real();
  if (alpha.imag() != 0.0) {
    kf.im.resize(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) kf.im[i] = vals[i].imag();
  }
  return kf;
}

}  // namespace

KernelField build_alpha_kernel(const GridSpec& g, Complex alpha, const Mollifier& mol, const AlphaOptions& opts) {
  check_alpha(g, alpha, mol, opts);
  if (alpha.imag() < 0.0) {
    // Real inputs give σ^{conj α} = conj σ^α exactly; build the upper half-plane.
    KernelField kf = build_alpha_kernel(g, std::conj(alpha), mol, opts);
    for (double& v : kf.im) v = -v;
    kf.alpha = alpha;
    return kf;
  }
  AlphaBranch branch = opts.branch;
  if (branch == AlphaBranch::automatic) branch = alpha.real() > 0.0 ? AlphaBranch::spatial : AlphaBranch::spectral;
  KernelField kf;
  if (branch == AlphaBranch::spatial) {
    require(alpha.real() > 0.0, "the spatial construction needs Re(alpha) > 0");
    kf = alpha_spatial(g, alpha, mol, opts.t);
  } else {
    kf = alpha_spectral(g, alpha, mol, opts.t);
  }
  kf.raw_mass = kf.mass().real();
  return kf;
}

KernelField modulus_kernel(const KernelField& k) {
  KernelField out = k;
  out.kind = KernelKind::modulus;
  for (std::size_t i = 0; i < out.re.size(); ++i) out.re[i] = std::abs(k.at(i));
  out.im.clear();
  out.raw_mass = out.mass().real();
  return out;
}

std::vector<Complex> kernel_spectrum(const KernelField& k) {
  if (!k.is_complex()) return fft::forward(k.grid, std::span<const double>(k.re));
  std::vector<Complex> v(k.re.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = k.at(i);
  return fft::forward(k.grid, std::span<const Complex>(v));
}

DecayFit kernel_fourier_profile(const KernelField& k, std::span<const double> shell_radii) {
  const auto spec = kernel_spectrum(k);
  std::vector<double> mod(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) mod[i] = std::abs(spec[i]);
  return fit_shell_decay(k.grid, mod, shell_radii);
}

double kernel_ball_sup(const KernelField& modulus, double r) {
  const GridSpec& g = modulus.grid;
  require(r > 0.0 && r < 0.5 * g.L, "ball radius must lie in (0, L/2)");
  const std::size_t N = g.cells();
  const double r2 = (r / g.h()) * (r / g.h()) + 1e-9;
  std::vector<double> mask(N);
  for (std::size_t i = 0; i < N; ++i) mask[i] = static_cast<double>(g.wrapped_norm2(i)) <= r2 ? 1.0 : 0.0;
  auto a = fft::forward(g, std::span<const double>(modulus.re));
  const auto b = fft::forward(g, std::span<const double>(mask));
  for (std::size_t i = 0; i < N; ++i) a[i] *= b[i];
  const auto c = fft::inverse(g, a);
  double best = 0.0;
  for (const auto& v : c) best = std::max(best, v.real());
  return best;
}

ModulusScaling modulus_scaling(const GridSpec& g, Complex alpha, std::span<const double> eps_list, double t,
                               double band_lo, double band_hi) {
  require(eps_list.size() >= 3, "modulus scaling needs at least 3 eps values");
  require(band_lo > 0.0 && band_hi > band_lo, "frequency band must satisfy 0 < lo < hi");
  ModulusScaling out;
  std::vector<double> lx, ly, bx, by;
  for (double eps : eps_list) {
    require(band_hi / eps <= g.nyquist() + 1e-12, "frequency band exceeds Nyquist for eps = " + std::to_string(eps));
    const KernelField lam = modulus_kernel(build_alpha_kernel(g, alpha, Mollifier{eps}, AlphaOptions{t}));
    const auto spec = kernel_spectrum(lam);
    double best = 0.0, at = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double xi = fft::frequency_norm(g, i);
      if (xi < band_lo / eps || xi >= band_hi / eps) continue;
      const double v = std::abs(spec[i]);
      if (v > best || (v == best && xi < at)) {
        best = v;
        at = xi;
      }
    }
    if (best <= 0.0) throw NumericError("modulus spectrum vanishes on the band for eps = " + std::to_string(eps));
    const double ball = kernel_ball_sup(lam, eps);
    out.eps.push_back(eps);
    out.band_freq.push_back(at);
    out.band_sup.push_back(best);
    out.ball_sup.push_back(ball);
    lx.push_back(std::log(at));
    ly.push_back(std::log(best));
    bx.push_back(std::log(eps));
    by.push_back(std::log(ball));
  }
  const LineFit fd = fit_line(lx, ly), fb = fit_line(bx, by);
  out.decay_exponent = -fd.slope;
  out.decay_residual = fd.residual;
  out.ball_exponent = fb.slope;
  out.ball_residual = fb.residual;
  return out;
}

double relative_l1(const KernelField& a, const KernelField& b) {
  require(a.grid == b.grid, "kernels live on different grids");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.re.size(); ++i) {
    num += std::abs(a.at(i) - b.at(i));
    den += std::abs(b.at(i));
  }
  require(den > 0.0, "reference kernel is zero");
  return num / den;
}

}  // namespace nlab
