#include "nlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlab/convolution.hpp"
#include "nlab/errors.hpp"
#include "nlab/fft.hpp"

namespace nlab {

EnergyReport energy_integral(const GridSpec& g, std::span<const double> field, double alpha, double min_frequency) {
  g.validate();
  require(field.size() == g.cells(), "field does not match the grid");
  require(std::isfinite(alpha), "energy exponent must be finite");
  const auto spec = fft::forward(g, field);
  EnergyReport r;
  r.alpha = alpha;
  r.alpha_at_least_d = alpha >= g.d;
  r.min_frequency = min_frequency;
  const double dual = g.dual_cell_volume();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const std::int64_t k2 = g.wrapped_norm2(i);
    if (k2 == 0) continue;
    const double xi = std::sqrt(static_cast<double>(k2)) / g.L;
    if (xi < min_frequency) continue;
    const auto oct = static_cast<std::size_t>(std::floor(0.5 * std::log2(static_cast<double>(k2)) + 1e-12));
    if (r.octave_value.size() <= oct) r.octave_value.resize(oct + 1, 0.0);
    r.octave_value[oct] += std::norm(spec[i]) * std::pow(xi, -alpha) * dual;
  }
  for (std::size_t j = 0; j < r.octave_value.size(); ++j) {
    r.octave_lo.push_back(std::ldexp(1.0, static_cast<int>(j)) / g.L);
    r.value += r.octave_value[j];
  }
  return r;
}

BallEnergyFit ball_energy_profile(const GridMeasure& mu, std::span<const double> R_list) {
  const GridSpec& g = mu.grid;
  require(R_list.size() >= 3, "ball energy fit needs at least 3 radii");
  for (std::size_t i = 0; i < R_list.size(); ++i) {
    require(R_list[i] > 0.0, "radii must be positive");
    require(R_list[i] <= g.nyquist() + 1e-12, "radii must lie below the Nyquist frequency");
    if (i > 0) {
      const double oct = std::log2(R_list[i] / R_list[i - 1]);
      require(oct > 0.5 && std::abs(oct - std::round(oct)) < 1e-9, "radii must be increasing dyadic steps");
    }
  }
  require(std::log2(R_list.back() / R_list.front()) >= 3.0 - 1e-9, "radii must span at least 3 octaves");
  const auto spec = fft::forward(g, mu.density);
  std::vector<std::pair<double, double>> items;
  items.reserve(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) items.emplace_back(fft::frequency_norm(g, i), std::norm(spec[i]));
  std::sort(items.begin(), items.end());
  BallEnergyFit fit;
  const double dual = g.dual_cell_volume();
  std::size_t pos = 0;
  double acc = 0.0;
  std::vector<double> lx, ly;
  for (double R : R_list) {
    while (pos < items.size() && items[pos].first <= R * (1.0 + 1e-12)) acc += items[pos++].second;
    fit.radii.push_back(R);
    fit.energy.push_back(acc * dual);
    lx.push_back(std::log(R));
    ly.push_back(std::log(acc * dual));
  }
  const LineFit f = fit_line(lx, ly);
  fit.exponent = f.slope;
  fit.C_hat = std::exp(f.intercept);
  fit.residual = f.residual;
  return fit;
}

namespace {

void check_riesz(const GridMeasure& mu, double alpha) {
  const GridSpec& g = mu.grid;
  require(alpha > 0.0 && alpha < g.d, "Riesz exponent alpha must lie in (0, d)");
  // Support extents must stay below half the torus so wrapped distances are
  // the true distances.
  std::array<int, kMaxDim> lo, hi;
  lo.fill(g.n);
  hi.fill(-1);
  for (std::size_t i = 0; i < mu.density.size(); ++i) {
    if (mu.density[i] <= 0.0) continue;
    const auto a = g.unravel(i);
    for (int k = 0; k < g.d; ++k) {
      lo[k] = std::min(lo[k], a[k]);
      hi[k] = std::max(hi[k], a[k]);
    }
  }
  require(hi[0] >= 0, "measure has empty support");
  for (int k = 0; k < g.d; ++k) require(hi[k] - lo[k] <= g.n / 2, "support wider than half the torus");
}

std::vector<double> riesz_table(const GridSpec& g, double alpha, bool reflect) {
  const double h = g.h();
  std::vector<double> tab(g.cells());
  for (std::size_t i = 0; i < tab.size(); ++i) {
    std::size_t src = i;
    if (reflect) {
      auto a = g.unravel(i);
      for (int k = 0; k < g.d; ++k) a[k] = -a[k];
      src = g.ravel(a);
    }
    const std::int64_t k2 = g.wrapped_norm2(src);
    const double r = k2 == 0 ? 0.5 * h : std::sqrt(static_cast<double>(k2)) * h;
    tab[i] = std::pow(r, alpha - g.d);
  }
  return tab;
}

std::vector<double> riesz_sums(const GridMeasure& mu, double alpha, bool reflect) {
  const GridSpec& g = mu.grid;
  const auto tab = riesz_table(g, alpha, reflect);
  const auto masses = mu.cell_masses();
  auto a = fft::forward(g, std::span<const double>(tab));
  const auto b = fft::forward(g, std::span<const double>(masses));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  const auto c = fft::inverse(g, a);
  const double undo = 1.0 / g.cell_volume();
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real() * undo;
  return out;
}

}  // namespace

RieszReport riesz_row_sup(const GridMeasure& mu, double alpha) {
  check_riesz(mu, alpha);
  const GridSpec& g = mu.grid;
  const auto sums = riesz_sums(mu, alpha, false);
  RieszReport r;
  r.alpha = alpha;
  bool first = true;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (mu.density[i] <= 0.0) continue;
    if (first || sums[i] > r.sup) {
      r.sup = sums[i];
      r.argmax_cell = i;
      first = false;
    }
  }
  // Shell breakdown of the maximizing row by direct summation.
  const double h = g.h();
  const auto x = g.unravel(r.argmax_cell);
  const double hv = g.cell_volume();
  for (std::size_t j = 0; j < mu.density.size(); ++j) {
    if (mu.density[j] <= 0.0) continue;
    const auto y = g.unravel(j);
    std::array<int, kMaxDim> dlt{};
    for (int k = 0; k < g.d; ++k) dlt[k] = x[k] - y[k];
    const std::int64_t k2 = g.wrapped_norm2(g.ravel(dlt));
    const double w = mu.density[j] * hv;
    if (k2 == 0) {
      r.self_term += std::pow(0.5 * h, alpha - g.d) * w;
      continue;
    }
    const double dist = std::sqrt(static_cast<double>(k2)) * h;
    const auto shell = static_cast<std::size_t>(std::max(0.0, std::floor(-std::log2(dist))));
    if (r.shell_value.size() <= shell) r.shell_value.resize(shell + 1, 0.0);
    r.shell_value[shell] += std::pow(dist, alpha - g.d) * w;
  }
  return r;
}

double riesz_column_sup(const GridMeasure& mu, double alpha) {
  check_riesz(mu, alpha);
  const auto sums = riesz_sums(mu, alpha, true);
  double best = 0.0;
  bool first = true;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (mu.density[i] <= 0.0) continue;
    if (first || sums[i] > best) best = sums[i];
    first = false;
  }
  return best;
}

NormResult operator_norm(const KernelField& k, const GridMeasure& phi, const GridMeasure& psi, int max_iter,
                         double tol) {
  require(phi.grid == k.grid && psi.grid == k.grid, "kernel and measures live on different grids");
  require(!k.is_complex(), "operator norm needs a real kernel");
  require(max_iter >= 1, "need at least one iteration");
  const GridSpec& g = k.grid;
  const std::size_t N = g.cells();
  const double hv = g.cell_volume();
  const Convolver conv(k);
  auto norm2 = [&](const std::vector<double>& f, const GridMeasure& m) {
    return deterministic_sum(N, [&](std::size_t i) { return f[i] * f[i] * m.density[i] * hv; });
  };
  auto apply_T = [&](const std::vector<double>& f, const GridMeasure& src) {
    std::vector<double> w(N);
    for (std::size_t i = 0; i < N; ++i) w[i] = f[i] * src.density[i] * hv;
    return conv.apply(w);
  };
  std::vector<double> f(N, 1.0);
  double fn = norm2(f, phi);
  require(fn > 0.0, "source measure has zero mass");
  NormResult res;
  {
    const auto t1 = apply_T(f, phi);
    res.ones_energy = norm2(t1, psi);
  }
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const auto tf = apply_T(f, phi);
    const auto ttf = apply_T(tf, psi);
    // Rayleigh quotient ⟨T*T f, f⟩_φ / ⟨f, f⟩_φ = ‖T f‖²_ψ / ‖f‖²_φ.
    lambda = norm2(tf, psi) / fn;
    double r2 = deterministic_sum(N, [&](std::size_t i) {
      const double d = ttf[i] - lambda * f[i];
      return d * d * phi.density[i] * hv;
    });
    const double next = norm2(ttf, phi);
    res.iterations = it;
    res.residual = lambda > 0.0 ? std::sqrt(r2 / fn) / lambda : 0.0;
    if (lambda <= 0.0 || next <= 0.0) {
      res.residual = 0.0;
      lambda = 0.0;
      break;
    }
    if (res.residual < tol) break;
    const double s = 1.0 / std::sqrt(next);
    for (std::size_t i = 0; i < N; ++i) f[i] = ttf[i] * s;
    fn = norm2(f, phi);
    if (it == max_iter)
      throw NumericError("power iteration did not converge in " + std::to_string(max_iter) +
                         " steps (residual " + std::to_string(res.residual) + ")");
  }
  res.norm = std::sqrt(std::max(0.0, lambda));
  return res;
}

OperatorNormEstimate operator_norm_estimate(const std::function<KernelField(double eps)>& kernel_for_eps,
                                            const GridMeasure& phi, const GridMeasure& psi,
                                            std::span<const double> eps_list, const NormSweepInputs& fitted) {
  require(!eps_list.empty(), "operator norm sweep needs at least one eps");
  OperatorNormEstimate est;
  est.gamma_hat = fitted.gamma_hat;
  est.s_phi = fitted.s_phi;
  est.s_psi = fitted.s_psi;
  est.hypothesis_holds = fitted.gamma_hat > phi.grid.d - 0.5 * (fitted.s_phi + fitted.s_psi);
  for (double eps : eps_list) {
    const auto r = operator_norm(kernel_for_eps(eps), phi, psi);
    est.eps.push_back(eps);
    est.norms.push_back(r.norm);
    est.iterations.push_back(r.iterations);
  }
  const auto [lo, hi] = std::minmax_element(est.norms.begin(), est.norms.end());
  est.ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  return est;
}

double weighted_l2_bound_check(const GridMeasure& mu, std::span<const double> f, double alpha) {
  const GridSpec& g = mu.grid;
  require(f.size() == g.cells(), "function does not match the grid");
  const double hv = g.cell_volume();
  const double l2 = deterministic_sum(f.size(), [&](std::size_t i) { return f[i] * f[i] * mu.density[i] * hv; });
  require(l2 > 0.0, "f vanishes in L2(mu)");
  std::vector<double> fm(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fm[i] = f[i] * mu.density[i];
  return energy_integral(g, fm, alpha).value / l2;
}

}  // namespace nlab
