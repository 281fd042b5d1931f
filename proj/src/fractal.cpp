#include "nlab/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "nlab/errors.hpp"
#include "nlab/fft.hpp"

namespace nlab {

namespace {

constexpr double kGeomTol = 1e-12;

void identity(int d, std::vector<double>& m) {
  m.assign(static_cast<std::size_t>(d * d), 0.0);
  for (int i = 0; i < d; ++i) m[i * d + i] = 1.0;
}

// Linear part of a map: ratio · R.
std::vector<double> linear_part(const SimilarityMap& f, int d) {
  std::vector<double> a;
  if (f.rotated()) {
    a = f.rotation;
  } else {
    identity(d, a);
  }
  for (double& v : a) v *= f.ratio;
  return a;
}

}  // namespace

void SimilarityMap::apply(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = x.size();
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    if (rotated()) {
      for (std::size_t j = 0; j < d; ++j) s += rotation[i * d + j] * x[j];
    } else {
      s = x[i];
    }
    out[i] = ratio * s + offset[i];
  }
}

bool IfsSpec::axis_aligned() const {
  return std::none_of(maps.begin(), maps.end(), [](const SimilarityMap& f) { return f.rotated(); });
}

bool IfsSpec::equal_ratios() const {
  return std::all_of(maps.begin(), maps.end(), [&](const SimilarityMap& f) { return f.ratio == maps.front().ratio; });
}

void IfsSpec::validate() const {
  require(d >= 1 && d <= kMaxDim, "IFS dimension must be in [1, 4]");
  require(!maps.empty(), "IFS needs at least one map");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& f = maps[i];
    const std::string tag = "map " + std::to_string(i) + ": ";
    require(f.ratio > 0.0 && f.ratio < 1.0, tag + "ratio must lie in (0,1)");
    require(f.offset.size() == static_cast<std::size_t>(d), tag + "offset has wrong length");
    if (f.rotated()) {
      require(f.rotation.size() == static_cast<std::size_t>(d * d), tag + "rotation must be d×d");
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double s = 0.0;
          for (int c = 0; c < d; ++c) s += f.rotation[a * d + c] * f.rotation[b * d + c];
          require(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-9, tag + "rotation is not orthogonal");
        }
    }
    // The image of the cube is the convex hull of the images of its corners.
    std::vector<double> corner(d), img(d);
    for (int mask = 0; mask < (1 << d); ++mask) {
      for (int a = 0; a < d; ++a) corner[a] = (mask >> a) & 1;
      f.apply(corner, img);
      for (int a = 0; a < d; ++a)
        require(img[a] >= -kGeomTol && img[a] <= 1.0 + kGeomTol, tag + "image leaves the unit cube");
    }
  }
}

std::optional<std::string> IfsSpec::open_set_violation() const {
  if (!axis_aligned()) return std::nullopt;
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (std::size_t j = i + 1; j < maps.size(); ++j) {
      bool overlap = true;
      for (int a = 0; a < d && overlap; ++a) {
        const double lo = std::max(maps[i].offset[a], maps[j].offset[a]);
        const double hi = std::min(maps[i].offset[a] + maps[i].ratio, maps[j].offset[a] + maps[j].ratio);
        if (hi - lo <= kGeomTol) overlap = false;
      }
      if (overlap) {
        std::ostringstream os;
        os << "open set condition fails: images of maps " << i << " and " << j << " overlap";
        return os.str();
      }
    }
  return std::nullopt;
}

IfsSpec IfsSpec::grid_subcubes(int d, int k, const std::vector<std::vector<int>>& cells) {
  require(k >= 2, "sub-cube grid needs k >= 2");
  IfsSpec s;
  s.d = d;
  for (const auto& c : cells) {
    require(c.size() == static_cast<std::size_t>(d), "sub-cube corner has wrong length");
    SimilarityMap f;
    f.ratio = 1.0 / k;
    for (int v : c) {
      require(v >= 0 && v < k, "sub-cube corner out of range");
      f.offset.push_back(static_cast<double>(v) / k);
    }
    s.maps.push_back(std::move(f));
  }
  return s;
}

namespace {
std::vector<std::vector<int>> all_cells(int d, int k) {
  std::vector<std::vector<int>> out;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(k);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<int> c(d);
    std::size_t r = idx;
    for (int a = d - 1; a >= 0; --a) {
      c[a] = static_cast<int>(r % k);
      r /= k;
    }
    out.push_back(std::move(c));
  }
  return out;
}
}  // namespace

IfsSpec IfsSpec::full_cube(int d, int k) { return grid_subcubes(d, k, all_cells(d, k)); }

IfsSpec IfsSpec::cantor_dust(int d) {
  std::vector<std::vector<int>> cells;
  for (auto& c : all_cells(d, 3))
    if (std::none_of(c.begin(), c.end(), [](int v) { return v == 1; })) cells.push_back(c);
  return grid_subcubes(d, 3, cells);
}

IfsSpec IfsSpec::menger(int d) {
  std::vector<std::vector<int>> cells;
  for (auto& c : all_cells(d, 3))
    if (!std::all_of(c.begin(), c.end(), [](int v) { return v == 1; })) cells.push_back(c);
  return grid_subcubes(d, 3, cells);
}

IfsSpec IfsSpec::random_grid(int d, int k, int count, std::uint64_t seed) {
  auto cells = all_cells(d, k);
  require(count >= 1 && static_cast<std::size_t>(count) <= cells.size(), "random IFS: count out of range");
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates with an explicit index draw so the result does not
  // depend on the standard library's shuffle implementation.
  for (int i = 0; i < count; ++i) {
    const std::size_t remaining = cells.size() - static_cast<std::size_t>(i);
    const std::size_t j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng() % remaining);
    std::swap(cells[i], cells[j]);
  }
  cells.resize(count);
  std::sort(cells.begin(), cells.end());
  IfsSpec s = grid_subcubes(d, k, cells);
  s.seed = seed;
  return s;
}

double moran_root(std::span<const double> ratios) {
  require(!ratios.empty(), "Moran equation needs at least one ratio");
  auto g = [&](double s) {
    double t = 0.0;
    for (double r : ratios) t += std::pow(r, s);
    return t - 1.0;
  };
  // g is decreasing in s; g(0) = m - 1 >= 0.
  double lo = 0.0, hi = 1.0;
  while (g(hi) > 0.0) hi *= 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double similarity_dimension(const IfsSpec& spec) {
  spec.validate();
  if (spec.equal_ratios())
    return std::log(static_cast<double>(spec.maps.size())) / std::log(1.0 / spec.maps.front().ratio);
  std::vector<double> r;
  for (const auto& f : spec.maps) r.push_back(f.ratio);
  return moran_root(r);
}

std::vector<double> natural_weights(const IfsSpec& spec) {
  std::vector<double> w(spec.maps.size());
  if (spec.equal_ratios()) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  const double s = similarity_dimension(spec);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] = std::pow(spec.maps[i].ratio, s);
  for (double& v : w) v /= total;
  return w;
}

std::vector<IfsPiece> ifs_pieces(const IfsSpec& spec, int depth) {
  require(depth >= 0, "IFS depth must be >= 0");
  const int d = spec.d;
  const auto weights = natural_weights(spec);
  std::vector<IfsPiece> cur(1);
  identity(d, cur[0].linear);
  cur[0].offset.assign(d, 0.0);
  cur[0].mass = 1.0;
  for (int level = 0; level < depth; ++level) {
    std::vector<IfsPiece> next;
    next.reserve(cur.size() * spec.maps.size());
    for (const auto& p : cur) {
      for (std::size_t i = 0; i < spec.maps.size(); ++i) {
        // p ∘ f_i : x ↦ P (A x + b) + c.
        const auto a = linear_part(spec.maps[i], d);
        IfsPiece q;
        q.linear.assign(d * d, 0.0);
        q.offset = p.offset;
        for (int r = 0; r < d; ++r) {
          for (int c = 0; c < d; ++c) {
            double s = 0.0;
            for (int m = 0; m < d; ++m) s += p.linear[r * d + m] * a[m * d + c];
            q.linear[r * d + c] = s;
          }
          for (int m = 0; m < d; ++m) q.offset[r] += p.linear[r * d + m] * spec.maps[i].offset[m];
        }
        q.mass = p.mass * weights[i];
        next.push_back(std::move(q));
      }
    }
    cur = std::move(next);
  }
  return cur;
}

GridMeasure GridMeasure::from_density(const GridSpec& g, double origin, std::vector<double> density) {
  g.validate();
  require(density.size() == g.cells(), "density size does not match the grid");
  GridMeasure m;
  m.grid = g;
  m.origin = origin;
  m.density = std::move(density);
  for (double v : m.density) require(std::isfinite(v) && v >= 0.0, "density must be finite and nonnegative");
  m.recompute_mass();
  return m;
}

GridMeasure GridMeasure::uniform_torus(const GridSpec& g) {
  return from_density(g, 0.0, std::vector<double>(g.cells(), 1.0 / std::pow(g.L, g.d)));
}

GridMeasure GridMeasure::atom(const GridSpec& g, double origin, std::span<const double> x) {
  require(x.size() == static_cast<std::size_t>(g.d), "atom position has wrong dimension");
  std::array<int, kMaxDim> ijk{};
  for (int a = 0; a < g.d; ++a) ijk[a] = static_cast<int>(std::floor((x[a] + origin) / g.h()));
  std::vector<double> dens(g.cells(), 0.0);
  dens[g.ravel(ijk)] = 1.0 / g.cell_volume();
  return from_density(g, origin, std::move(dens));
}

void GridMeasure::recompute_mass() { mass = deterministic_sum(density) * grid.cell_volume(); }

void GridMeasure::normalize() {
  require(mass > 0.0, "cannot normalize a zero measure");
  const double s = 1.0 / mass;
  for (double& v : density) v *= s;
  recompute_mass();
}

std::vector<double> GridMeasure::cell_masses() const {
  std::vector<double> out(density.size());
  const double hv = grid.cell_volume();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = density[i] * hv;
  return out;
}

std::vector<std::size_t> GridMeasure::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < density.size(); ++i)
    if (density[i] > 0.0) s.push_back(i);
  return s;
}

double GridMeasure::support_diameter() const {
  std::array<int, kMaxDim> lo, hi;
  lo.fill(std::numeric_limits<int>::max());
  hi.fill(std::numeric_limits<int>::min());
  bool any = false;
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (density[i] <= 0.0) continue;
    any = true;
    const auto ijk = grid.unravel(i);
    for (int a = 0; a < grid.d; ++a) {
      lo[a] = std::min(lo[a], ijk[a]);
      hi[a] = std::max(hi[a], ijk[a]);
    }
  }
  if (!any) return 0.0;
  double s = 0.0;
  for (int a = 0; a < grid.d; ++a) {
    const double ext = (hi[a] - lo[a] + 1) * grid.h();
    s += ext * ext;
  }
  return std::sqrt(s);
}

void PointCloud::validate() const {
  require(d >= 1 && d <= kMaxDim, "point cloud dimension must be in [1, 4]");
  require(coords.size() == weights.size() * static_cast<std::size_t>(d), "point cloud coordinate count mismatch");
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "point weights must be nonnegative");
    total += w;
  }
  if (!weights.empty()) require(std::abs(total - 1.0) <= 1e-12 * weights.size(), "point weights must sum to 1");
}

namespace {

// Exact overlap of an axis-aligned box with the grid cells; the box is given
// in torus coordinates and must not wrap.
void deposit_box(const GridSpec& g, const double* lo, double side, double mass, std::vector<double>& cellmass) {
  const int d = g.d;
  const double h = g.h();
  std::array<int, kMaxDim> first{}, last{};
  std::array<std::vector<double>, kMaxDim> frac;
  for (int a = 0; a < d; ++a) {
    const double b0 = lo[a], b1 = lo[a] + side;
    first[a] = static_cast<int>(std::floor(b0 / h));
    last[a] = std::max(first[a], static_cast<int>(std::ceil(b1 / h)) - 1);
    for (int c = first[a]; c <= last[a]; ++c) {
      const double ov = std::min(b1, (c + 1) * h) - std::max(b0, c * h);
      frac[a].push_back(std::max(0.0, ov) / side);
    }
  }
  std::array<int, kMaxDim> ijk{};
  std::array<int, kMaxDim> off{};
  while (true) {
    double f = mass;
    for (int a = 0; a < d; ++a) {
      ijk[a] = first[a] + off[a];
      f *= frac[a][off[a]];
    }
    if (f > 0.0) cellmass[g.ravel(ijk)] += f;
    int a = d - 1;
    while (a >= 0 && ++off[a] > last[a] - first[a]) off[a--] = 0;
    if (a < 0) break;
  }
}

}  // namespace

GridMeasure build_self_similar_measure(const IfsSpec& spec, int depth, int n, double L,
                                       const MeasureBuildOptions& opts) {
  spec.validate();
  require(depth >= 0, "depth must be >= 0");
  require(n >= 2 && (n & (n - 1)) == 0, "grid resolution must be a power of 2");
  require(opts.reach >= 0.0, "reach must be nonnegative");
  require(L >= 1.0 + 2.0 * opts.reach, "torus side too small: need L >= 1 + 2 (t_max + eps)");
  if (auto bad = spec.open_set_violation()) throw ValidationError(*bad);
  const double pieces = std::pow(static_cast<double>(spec.maps.size()), depth);
  require(pieces <= static_cast<double>(opts.max_pieces),
          "IFS depth too large: " + std::to_string(static_cast<long long>(pieces)) + " pieces");

  GridSpec g{spec.d, n, L};
  g.validate();
  const int d = spec.d;
  const double origin = 0.5 * (L - 1.0);
  const double h = g.h();
  const auto parts = ifs_pieces(spec, depth);

  std::vector<double> cellmass(g.cells(), 0.0);
  double finest = 1.0;
  if (spec.axis_aligned()) {
    std::vector<double> lo(d);
    for (const auto& p : parts) {
      const double side = p.linear[0];
      finest = std::min(finest, side);
      for (int a = 0; a < d; ++a) lo[a] = p.offset[a] + origin;
      deposit_box(g, lo.data(), side, p.mass, cellmass);
    }
  } else {
    // Rotated pieces: supersample each image cube on a q^d lattice of
    // sub-cube centers, q fixed by the piece size against h.
    std::vector<double> u(d), x(d);
    for (const auto& p : parts) {
      double side = 0.0;
      for (int c = 0; c < d; ++c) side += p.linear[c] * p.linear[c];
      side = std::sqrt(side);
      finest = std::min(finest, side);
      const int q = std::max(1, static_cast<int>(std::ceil(4.0 * side / h)));
      std::size_t total = 1;
      for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(q);
      const double w = p.mass / static_cast<double>(total);
      for (std::size_t s = 0; s < total; ++s) {
        std::size_t r = s;
        for (int a = d - 1; a >= 0; --a) {
          u[a] = (static_cast<double>(r % q) + 0.5) / q;
          r /= q;
        }
        std::array<int, kMaxDim> ijk{};
        for (int a = 0; a < d; ++a) {
          double v = p.offset[a];
          for (int c = 0; c < d; ++c) v += p.linear[a * d + c] * u[c];
          ijk[a] = static_cast<int>(std::floor((v + origin) / h));
        }
        cellmass[g.ravel(ijk)] += w;
      }
    }
  }

  const double inv = 1.0 / g.cell_volume();
  for (double& v : cellmass) v *= inv;
  GridMeasure m = GridMeasure::from_density(g, origin, std::move(cellmass));
  m.depth = depth;
  m.open_set_checked = spec.axis_aligned();
  m.coarse_warning = h > finest;
  m.normalize();
  return m;
}

PointCloud sample_point_cloud(const IfsSpec& spec, int depth, std::size_t count, std::uint64_t seed) {
  spec.validate();
  require(depth >= 0, "depth must be >= 0");
  require(count >= 1, "point count must be >= 1");
  const int d = spec.d;
  PointCloud pc;
  pc.d = d;
  pc.seed = seed;
  pc.coords.resize(count * d);
  pc.weights.assign(count, 1.0 / static_cast<double>(count));
  std::mt19937_64 rng(seed);
  const std::uint64_t m = spec.maps.size();
  std::vector<double> x(d), y(d);
  for (std::size_t i = 0; i < count; ++i) {
    std::fill(x.begin(), x.end(), 0.5);
    for (int level = 0; level < depth; ++level) {
      spec.maps[rng() % m].apply(x, y);
      std::swap(x, y);
    }
    for (int a = 0; a < d; ++a) pc.coords[i * d + a] = std::clamp(x[a], 0.0, 1.0);
  }
  return pc;
}

namespace {

void check_radii(std::span<const double> radii) {
  require(radii.size() >= 3, "Frostman fit needs at least 3 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0 && std::isfinite(radii[i]), "radii must be positive");
    if (i > 0) {
      const double oct = std::log2(radii[i] / radii[i - 1]);
      require(oct > 0.5 && std::abs(oct - std::round(oct)) < 1e-9, "radii must be increasing dyadic steps");
    }
  }
  require(std::log2(radii.back() / radii.front()) >= 3.0 - 1e-9, "radii must span at least 3 octaves");
}

FrostmanFit fit_frostman(std::span<const double> radii, std::vector<double> sup) {
  FrostmanFit out;
  out.radii.assign(radii.begin(), radii.end());
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (sup[i] <= 0.0) throw NumericError("ball mass vanished at radius " + std::to_string(radii[i]));
    lx.push_back(std::log(radii[i]));
    ly.push_back(std::log(sup[i]));
  }
  const LineFit f = fit_line(lx, ly);
  out.s_hat = f.slope;
  out.C_hat = std::exp(f.intercept);
  out.residual = f.residual;
  out.sup_mass = std::move(sup);
  return out;
}

}  // namespace

FrostmanFit estimate_frostman_exponent(const GridMeasure& m, std::span<const double> radii) {
  check_radii(radii);
  const GridSpec& g = m.grid;
  for (double r : radii) require(r >= 2.0 * g.h() - 1e-12, "radii must be >= 2h");
  for (double r : radii) require(r < 0.5 * g.L, "radii must be below L/2");
  const auto masses = m.cell_masses();
  const auto mhat = fft::forward(g, masses);
  const std::size_t N = g.cells();
  const double h = g.h();
  std::vector<double> sup(radii.size(), 0.0);
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    // Discrete ball: cells whose center offset has length <= r.
    const double r2 = (radii[ri] / h) * (radii[ri] / h) + 1e-9;
    std::vector<double> mask(N);
    for (std::size_t i = 0; i < N; ++i) mask[i] = static_cast<double>(g.wrapped_norm2(i)) <= r2 ? 1.0 : 0.0;
    auto spec = fft::forward(g, mask);
    for (std::size_t i = 0; i < N; ++i) spec[i] *= mhat[i];
    const auto ball = fft::inverse(g, spec);
    // inverse(forward(a)·forward(b)) = h^d · (a ⊛ b); undo the h^d.
    const double undo = 1.0 / g.cell_volume();
    double best = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      if (masses[i] > 0.0) best = std::max(best, ball[i].real() * undo);
    sup[ri] = best;
  }
  return fit_frostman(radii, std::move(sup));
}

FrostmanFit estimate_frostman_exponent(const PointCloud& cloud, std::span<const double> radii) {
  check_radii(radii);
  cloud.validate();
  const std::size_t n = cloud.size();
  require(n >= 1, "empty point cloud");
  const int d = cloud.d;
  std::vector<double> sup(radii.size(), 0.0);
  std::vector<std::vector<double>> per(n, std::vector<double>(radii.size(), 0.0));
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        const double dx = cloud.coords[i * d + a] - cloud.coords[j * d + a];
        s += dx * dx;
      }
      const double dist = std::sqrt(s);
      for (std::size_t r = 0; r < radii.size(); ++r)
        if (dist <= radii[r]) per[i][r] += cloud.weights[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < radii.size(); ++r) sup[r] = std::max(sup[r], per[i][r]);
  return fit_frostman(radii, std::move(sup));
}

DecayFit fit_shell_decay(const GridSpec& g, std::span<const double> modulus, std::span<const double> radii) {
  require(radii.size() >= 3, "decay fit needs at least 3 shell radii");
  require(modulus.size() == g.cells(), "spectrum size does not match the grid");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0, "shell radii must be positive");
    if (i > 0) require(radii[i] > radii[i - 1], "shell radii must increase");
  }
  require(radii.back() <= g.nyquist() + 1e-12, "shell radii must lie below the Nyquist frequency n/(2L)");
  const std::size_t shells = radii.size() - 1;
  std::vector<ShellSample> prof(shells);
  for (std::size_t s = 0; s < shells; ++s) {
    prof[s].r_lo = radii[s];
    prof[s].r_hi = radii[s + 1];
  }
  // Shell of each frequency by binary search; the sup is order-independent,
  // ties broken toward the smaller radius so the result is thread-agnostic.
  const std::size_t N = g.cells();
  for (std::size_t i = 0; i < N; ++i) {
    const double r = fft::frequency_norm(g, i);
    if (r < radii.front() || r >= radii.back()) continue;
    const auto it = std::upper_bound(radii.begin(), radii.end(), r);
    const std::size_t s = static_cast<std::size_t>(it - radii.begin()) - 1;
    auto& sh = prof[s];
    const double v = modulus[i];
    if (v > sh.sup || (v == sh.sup && r < sh.argmax_radius)) {
      sh.sup = v;
      sh.argmax_radius = r;
    }
  }
  std::vector<double> lx, ly;
  for (const auto& sh : prof) {
    if (sh.sup <= 0.0) continue;
    lx.push_back(std::log(sh.argmax_radius));
    ly.push_back(std::log(sh.sup));
  }
  if (lx.size() < 2) throw NumericError("spectrum vanishes on all but one shell");
  const LineFit f = fit_line(lx, ly);
  DecayFit out;
  out.gamma_hat = -f.slope;
  out.C_hat = std::exp(f.intercept);
  out.residual = f.residual;
  out.profile = std::move(prof);
  return out;
}

DecayFit estimate_fourier_decay(const GridMeasure& m, std::span<const double> shell_radii) {
  const auto spec = fft::forward(m.grid, m.density);
  std::vector<double> mod(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) mod[i] = std::abs(spec[i]);
  return fit_shell_decay(m.grid, mod, shell_radii);
}

}  // namespace nlab
