#include "nlab/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlab/errors.hpp"
#include "nlab/fft.hpp"

namespace nlab {

Convolver::Convolver(const KernelField& k) : grid_(k.grid), complex_(k.is_complex()) {
  symbol_ = kernel_spectrum(k);
  const double undo = 1.0 / grid_.cell_volume();
  for (auto& v : symbol_) v *= undo;
}

std::vector<double> Convolver::apply(std::span<const double> f) const {
  require(!complex_, "complex kernel needs apply_complex");
  require(f.size() == grid_.cells(), "field does not match the kernel grid");
  auto spec = fft::forward(grid_, f);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= symbol_[i];
  const auto back = fft::inverse(grid_, spec);
  std::vector<double> out(back.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = back[i].real();
  return out;
}

std::vector<Complex> Convolver::apply_complex(std::span<const Complex> f) const {
  require(f.size() == grid_.cells(), "field does not match the kernel grid");
  auto spec = fft::forward(grid_, f);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= symbol_[i];
  return fft::inverse(grid_, spec);
}

std::vector<double> convolve(const KernelField& k, std::span<const double> f) { return Convolver(k).apply(f); }

std::vector<Complex> convolve(const KernelField& k, std::span<const Complex> f) {
  return Convolver(k).apply_complex(f);
}

namespace {

void check_pair(const GridMeasure& mu, const KernelField& k) {
  require(mu.grid == k.grid, "measure and kernel live on different grids");
  require(!k.is_complex(), "chain densities need a real kernel");
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<ChainDensity> chain_density(const GridMeasure& mu, const KernelField& k, int levels) {
  check_pair(mu, k);
  require(levels >= 1, "chain levels must be >= 1");
  const Convolver conv(k);
  const double kmax = sup_abs(k.re);
  const double hv = mu.grid.cell_volume();
  const std::size_t N = mu.grid.cells();
  std::vector<ChainDensity> out;
  std::vector<double> prev(N, 1.0);
  std::vector<double> weighted(N);
  for (int level = 1; level <= levels; ++level) {
    for (std::size_t i = 0; i < N; ++i) weighted[i] = prev[i] * mu.density[i] * hv;
    const double bound = kmax * deterministic_sum(N, [&](std::size_t i) { return std::abs(weighted[i]); });
    ChainDensity cd;
    cd.level = level;
    cd.f = conv.apply(weighted);
    for (double& v : cd.f) {
      if (std::abs(v) <= kRoundoffFloor * bound) {
        v = 0.0;
      } else if (v < 0.0) {
        cd.most_negative = std::min(cd.most_negative, v);
        if (v < -kAliasFloor * bound) {
          std::ostringstream os;
          os << "chain level " << level << ": density " << v << " below -" << kAliasFloor << " x scale " << bound
             << " (aliasing; enlarge the torus or the grid)";
          throw AliasingError(os.str());
        }
        v = 0.0;
        ++cd.clamped;
      }
    }
    prev = cd.f;
    out.push_back(std::move(cd));
  }
  return out;
}

double chain_mass(const GridMeasure& mu, const KernelField& k, int levels) {
  const auto chain = chain_density(mu, k, levels);
  const auto& f = chain.back().f;
  const double hv = mu.grid.cell_volume();
  return deterministic_sum(f.size(), [&](std::size_t i) { return f[i] * mu.density[i] * hv; });
}

GapCurve scan_gap(const GridMeasure& mu, std::span<const double> t_grid, std::span<const double> eps_list,
                  const ScanOptions& opts) {
  require(!t_grid.empty(), "scan needs at least one t");
  require(!eps_list.empty(), "scan needs at least one eps");
  require(opts.k >= 1, "scan chain length must be >= 1");
  for (double t : t_grid) {
    require(t > 0.0, "scan t values must be positive");
    for (double e : eps_list) require(t + e < 0.5 * mu.grid.L, "scan needs t + eps < L/2 for every pair");
  }
  GapCurve c;
  c.k = opts.k;
  c.eps_list.assign(eps_list.begin(), eps_list.end());
  const std::size_t nt = t_grid.size(), ne = eps_list.size();
  std::vector<double> masses(nt * ne);
  const std::size_t tasks = nt * ne;
  parallel_for(tasks, [&](std::size_t task) {
    const std::size_t it = task / ne, ie = task % ne;
    const KernelField k = build_sphere_kernel(mu.grid, t_grid[it], Mollifier{eps_list[ie]});
    masses[task] = chain_mass(mu, k, opts.k);
  });
  const std::size_t smallest =
      static_cast<std::size_t>(std::min_element(eps_list.begin(), eps_list.end()) - eps_list.begin());
  for (std::size_t it = 0; it < nt; ++it) {
    GapSample s;
    s.t = t_grid[it];
    s.eps = eps_list[smallest];
    s.per_eps.assign(masses.begin() + it * ne, masses.begin() + (it + 1) * ne);
    s.mass = s.per_eps[smallest];
    s.spread = *std::max_element(s.per_eps.begin(), s.per_eps.end()) -
               *std::min_element(s.per_eps.begin(), s.per_eps.end());
    c.samples.push_back(std::move(s));
  }
  double thr = opts.threshold;
  if (thr < 0.0) {
    std::vector<double> pos;
    for (const auto& s : c.samples)
      if (s.mass > 0.0) pos.push_back(s.mass);
    thr = 0.0;
    if (!pos.empty()) {
      std::sort(pos.begin(), pos.end());
      const std::size_t m = pos.size();
      const double median = m % 2 ? pos[m / 2] : 0.5 * (pos[m / 2 - 1] + pos[m / 2]);
      thr = 0.5 * median;
    }
  }
  c.threshold = thr;
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    auto& s = c.samples[i];
    s.flag = thr > 0.0 && s.mass > thr && s.spread < 0.25 * thr;
    if (!s.flag) continue;
    if (!c.intervals.empty() && c.intervals.back().second + 1 == i) {
      c.intervals.back().second = i;
    } else {
      c.intervals.emplace_back(i, i);
    }
  }
  return c;
}

double curve_integral(const GapCurve& c) {
  double s = 0.0;
  for (std::size_t i = 1; i < c.samples.size(); ++i)
    s += 0.5 * (c.samples[i].mass + c.samples[i - 1].mass) * (c.samples[i].t - c.samples[i - 1].t);
  return s;
}

ContinuityReport continuity_probe(const GapCurve& c) {
  require(c.samples.size() >= 2, "continuity probe needs at least 2 samples");
  const double dt = c.samples[1].t - c.samples[0].t;
  require(dt > 0.0, "curve must be sampled at increasing t");
  require(c.samples.front().t > 0.0, "curve must stay away from t = 0");
  for (std::size_t i = 1; i < c.samples.size(); ++i)
    require(std::abs((c.samples[i].t - c.samples[i - 1].t) - dt) <= 1e-9 * std::max(1.0, std::abs(dt)) + 1e-12,
            "curve must be sampled uniformly in t");
  ContinuityReport r;
  for (std::size_t i = 1; i < c.samples.size(); ++i) r.increments.push_back(std::abs(c.samples[i].mass - c.samples[i - 1].mass));
  std::vector<double> sorted = r.increments;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  r.median_increment = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  r.max_increment = sorted.back();
  for (std::size_t i = 0; i < r.increments.size(); ++i)
    if (r.increments[i] > 3.0 * r.median_increment) r.flagged.push_back(i);
  return r;
}

TailEnergy tail_energy(const GridMeasure& mu, double cutoff, double beta) {
  const GridSpec& g = mu.grid;
  require(cutoff >= 0.0, "cutoff must be nonnegative");
  require(cutoff < g.nyquist(), "cutoff must lie below the Nyquist frequency n/(2L)");
  require(std::isfinite(beta), "weight exponent must be finite");
  const auto spec = fft::forward(g, mu.density);
  const double base = cutoff > 0.0 ? cutoff : 1.0 / g.L;
  TailEnergy te;
  te.cutoff = cutoff;
  te.beta = beta;
  const double dual = g.dual_cell_volume();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (g.wrapped_norm2(i) == 0) continue;
    const double xi = fft::frequency_norm(g, i);
    if (xi <= cutoff) continue;
    const double v = std::norm(spec[i]) * std::pow(xi, -beta) * dual;
    const auto block = static_cast<std::size_t>(std::max(0.0, std::floor(std::log2(xi / base) + 1e-12)));
    if (te.block_value.size() <= block) te.block_value.resize(block + 1, 0.0);
    te.block_value[block] += v;
  }
  for (std::size_t b = 0; b < te.block_value.size(); ++b) {
    te.block_lo.push_back(base * std::ldexp(1.0, static_cast<int>(b)));
    te.value += te.block_value[b];
  }
  return te;
}

}  // namespace nlab
