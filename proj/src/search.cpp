#include "nlab/search.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nlab/errors.hpp"

namespace nlab {

const char* config_type_name(ConfigType t) {
  switch (t) {
    case ConfigType::chain: return "chain";
    case ConfigType::necklace: return "necklace";
    case ConfigType::rhombus: return "rhombus";
    case ConfigType::corner: return "corner";
  }
  return "?";
}

namespace {

double dist(const PointCloud& c, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (int a = 0; a < c.d; ++a) {
    const double v = c.coords[i * c.d + a] - c.coords[j * c.d + a];
    s += v * v;
  }
  return std::sqrt(s);
}

void check_query(const PointCloud& cloud, const SearchQuery& q) {
  cloud.validate();
  require(q.t > 0.0 && std::isfinite(q.t), "gap t must be positive");
  require(q.tol > 0.0, "tolerance must be positive");
  require(q.sep_min >= 0.0, "sep_min must be nonnegative");
  require(q.max_results >= 1, "max_results must be >= 1");
}

}  // namespace

SearchIndex::SearchIndex(const PointCloud& cloud, double cell) : cloud_(&cloud), cell_(cell) {
  require(cell > 0.0 && std::isfinite(cell), "index cell size must be positive");
  const int d = cloud.d;
  std::array<double, kMaxDim> hi{};
  lo_.fill(0.0);
  for (int a = 0; a < d; ++a) {
    lo_[a] = std::numeric_limits<double>::infinity();
    hi[a] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int a = 0; a < d; ++a) {
      lo_[a] = std::min(lo_[a], cloud.coords[i * d + a]);
      hi[a] = std::max(hi[a], cloud.coords[i * d + a]);
    }
  double cells = 1.0;
  for (int a = 0; a < d; ++a) {
    extent_[a] = cloud.size() ? static_cast<std::int64_t>(std::floor((hi[a] - lo_[a]) / cell)) + 1 : 1;
    cells *= static_cast<double>(extent_[a] + 2);
  }
  require(cells < 4e18, "index cell size too small for the cloud extent");
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::array<std::int64_t, kMaxDim> c{};
    for (int a = 0; a < d; ++a) c[a] = static_cast<std::int64_t>(std::floor((cloud.coords[i * d + a] - lo_[a]) / cell));
    cells_[key(c)].push_back(i);
  }
}

std::int64_t SearchIndex::key(const std::array<std::int64_t, kMaxDim>& c) const {
  std::int64_t k = 0;
  for (int a = 0; a < cloud_->d; ++a) k = k * (extent_[a] + 2) + (c[a] + 1);
  return k;
}

std::vector<std::size_t> SearchIndex::annulus(std::size_t i, double t, double tol) const {
  require(t + tol <= cell_ * (1.0 + 1e-12), "annulus query wider than the index cell");
  const int d = cloud_->d;
  std::array<std::int64_t, kMaxDim> base{};
  for (int a = 0; a < d; ++a)
    base[a] = static_cast<std::int64_t>(std::floor((cloud_->coords[i * d + a] - lo_[a]) / cell_));
  std::vector<std::size_t> out;
  int total = 1;
  for (int a = 0; a < d; ++a) total *= 3;
  for (int s = 0; s < total; ++s) {
    std::array<std::int64_t, kMaxDim> c{};
    int r = s;
    bool inside = true;
    for (int a = 0; a < d; ++a) {
      c[a] = base[a] + (r % 3) - 1;
      r /= 3;
      if (c[a] < -1 || c[a] > extent_[a]) inside = false;
    }
    if (!inside) continue;
    const auto it = cells_.find(key(c));
    if (it == cells_.end()) continue;
    for (std::size_t q : it->second) {
      if (q == i) continue;
      if (std::abs(dist(*cloud_, i, q) - t) <= tol) out.push_back(q);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency annulus_graph(const PointCloud& cloud, double t, double tol) {
  const SearchIndex index(cloud, t + tol);
  Adjacency adj(cloud.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < cloud.size(); ++i) adj[i] = index.annulus(i, t, tol);
  return adj;
}

ConfigurationRecord make_record(const PointCloud& cloud, ConfigType type, const std::vector<std::size_t>& ids, double t,
                                double tol, double sep_min, bool closed) {
  ConfigurationRecord r;
  r.type = type;
  r.ids = ids;
  r.t = t;
  r.tol = tol;
  for (std::size_t id : ids) {
    const auto p = cloud.point(id);
    r.vertices.insert(r.vertices.end(), p.begin(), p.end());
  }
  for (std::size_t j = 0; j + 1 < ids.size(); ++j) r.gaps.push_back(dist(cloud, ids[j], ids[j + 1]));
  if (closed) r.gaps.push_back(dist(cloud, ids.back(), ids.front()));
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b) sep = std::min(sep, dist(cloud, ids[a], ids[b]));
  r.min_separation = sep;
  r.nondegenerate = sep > sep_min;
  if (ids.size() == 4 && cloud.d >= 3) r.nonplanarity = nonplanarity(r.vertices, cloud.d, t).value;
  return r;
}

struct PathSearch {
  const PointCloud& cloud;
  const Adjacency& adj;
  const SearchQuery& q;
  std::size_t vertices;  // target vertex count
  bool closed;
  std::size_t limit;
  std::vector<std::vector<std::size_t>> found;
  std::vector<std::size_t> path;

  bool separated(std::size_t v) const {
    for (std::size_t u : path)
      if (dist(cloud, u, v) <= q.sep_min) return false;
    return true;
  }

  void run(std::size_t start) {
    path.assign(1, start);
    extend();
  }

  void extend() {
    if (found.size() >= limit) return;
    if (path.size() == vertices) {
      if (closed) {
        if (path[1] > path.back()) return;
        if (std::abs(dist(cloud, path.back(), path.front()) - q.t) > q.tol) return;
      } else if (path.front() > path.back()) {
        return;
      }
      found.push_back(path);
      return;
    }
    for (std::size_t v : adj[path.back()]) {
      if (closed && v <= path.front()) continue;
      if (!separated(v)) continue;
      path.push_back(v);
      extend();
      path.pop_back();
      if (found.size() >= limit) return;
    }
  }
};

SearchResult path_search(const PointCloud& cloud, const SearchQuery& q, std::size_t vertices, bool closed,
                         ConfigType type) {
  const Adjacency adj = annulus_graph(cloud, q.t, q.tol);
  const std::size_t n = cloud.size();
  std::vector<std::vector<std::vector<std::size_t>>> per(n);
  parallel_for(n, [&](std::size_t s) {
    PathSearch ps{cloud, adj, q, vertices, closed, q.max_results + 1, {}, {}};
    ps.run(s);
    per[s] = std::move(ps.found);
  });
  SearchResult res;
  for (std::size_t s = 0; s < n && !res.truncated; ++s)
    for (const auto& ids : per[s]) {
      if (res.records.size() == q.max_results) {
        res.truncated = true;
        break;
      }
      res.records.push_back(make_record(cloud, type, ids, q.t, q.tol, q.sep_min, closed));
    }
  return res;
}

}  // namespace

SearchResult find_chains(const PointCloud& cloud, const SearchQuery& q) {
  check_query(cloud, q);
  require(q.size >= 1, "chain needs k >= 1 edges");
  return path_search(cloud, q, static_cast<std::size_t>(q.size) + 1, false, ConfigType::chain);
}

SearchResult find_necklaces(const PointCloud& cloud, const SearchQuery& q) {
  check_query(cloud, q);
  require(q.size >= 3, "necklace needs m >= 3 vertices");
  return path_search(cloud, q, static_cast<std::size_t>(q.size), true, ConfigType::necklace);
}

SearchResult find_rhombuses(const PointCloud& cloud, const SearchQuery& q, double min_nonplanarity) {
  check_query(cloud, q);
  require(cloud.d >= 3, "nonplanar rhombuses need d >= 3");
  SearchQuery q4 = q;
  q4.size = 4;
  q4.max_results = std::numeric_limits<std::size_t>::max() - 1;
  SearchResult all = path_search(cloud, q4, 4, true, ConfigType::rhombus);
  SearchResult res;
  for (auto& r : all.records) {
    if (r.nonplanarity <= min_nonplanarity) continue;
    if (res.records.size() == q.max_results) {
      res.truncated = true;
      break;
    }
    res.records.push_back(std::move(r));
  }
  return res;
}

SearchResult detect_corners_3d(const PointCloud& cloud, double t, double tol, std::size_t max_results) {
  cloud.validate();
  require(cloud.d == 3, "corner detection needs d = 3");
  require(t > 0.0 && tol > 0.0, "t and tol must be positive");
  require(max_results >= 1, "max_results must be >= 1");
  const Adjacency adj = annulus_graph(cloud, t, tol);
  const std::size_t n = cloud.size();
  auto cosine = [&](std::size_t x, std::size_t a, std::size_t b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double u = cloud.coords[a * 3 + k] - cloud.coords[x * 3 + k];
      const double v = cloud.coords[b * 3 + k] - cloud.coords[x * 3 + k];
      dot += u * v;
      na += u * u;
      nb += v * v;
    }
    return std::abs(dot) / std::sqrt(na * nb);
  };
  std::vector<std::vector<ConfigurationRecord>> per(n);
  parallel_for(n, [&](std::size_t x) {
    const auto& nb = adj[x];
    for (std::size_t i = 0; i < nb.size() && per[x].size() <= max_results; ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const double cij = cosine(x, nb[i], nb[j]);
        if (cij > tol) continue;
        for (std::size_t k = j + 1; k < nb.size(); ++k) {
          const double cik = cosine(x, nb[i], nb[k]), cjk = cosine(x, nb[j], nb[k]);
          if (cik > tol || cjk > tol) continue;
          ConfigurationRecord r;
          r.type = ConfigType::corner;
          r.ids = {x, nb[i], nb[j], nb[k]};
          r.t = t;
          r.tol = tol;
          for (std::size_t id : r.ids) {
            const auto p = cloud.point(id);
            r.vertices.insert(r.vertices.end(), p.begin(), p.end());
          }
          for (std::size_t a = 1; a < 4; ++a) r.gaps.push_back(dist(cloud, x, r.ids[a]));
          r.max_cosine = std::max({cij, cik, cjk});
          double sep = std::numeric_limits<double>::infinity();
          for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = a + 1; b < 4; ++b) sep = std::min(sep, dist(cloud, r.ids[a], r.ids[b]));
          r.min_separation = sep;
          r.nondegenerate = sep > 0.0;
          r.nonplanarity = nonplanarity(r.vertices, 3, t).value;
          per[x].push_back(std::move(r));
        }
      }
  });
  SearchResult res;
  for (std::size_t x = 0; x < n && !res.truncated; ++x)
    for (auto& r : per[x]) {
      if (res.records.size() == max_results) {
        res.truncated = true;
        break;
      }
      res.records.push_back(std::move(r));
    }
  return res;
}

Nonplanarity nonplanarity(std::span<const double> quad, int d, double t) {
  require(quad.size() == static_cast<std::size_t>(4 * d), "nonplanarity needs exactly 4 points");
  require(t > 0.0, "normalizing length must be positive");
  Nonplanarity np;
  if (d < 3) {
    np.low_dimension = true;
    return np;
  }
  // Edge vectors from the first vertex; the volume is sqrt(det Gram)/6 and by
  // Cauchy-Binet det Gram is the sum of the squared 3×3 minors.
  double e[3][kMaxDim];
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < d; ++a) e[i][a] = quad[(i + 1) * d + a] - quad[a];
  double sum = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = b + 1; c < d; ++c) {
        const double m = e[0][a] * (e[1][b] * e[2][c] - e[1][c] * e[2][b]) -
                         e[0][b] * (e[1][a] * e[2][c] - e[1][c] * e[2][a]) +
                         e[0][c] * (e[1][a] * e[2][b] - e[1][b] * e[2][a]);
        sum += m * m;
      }
  np.volume = std::sqrt(sum) / 6.0;
  np.value = np.volume / (t * t * t);
  return np;
}

bool is_generated(std::span<const double> gaps, double tol) {
  const std::size_t k = gaps.size();
  require(k >= 2 && k % 2 == 0, "generated-necklace test needs an even vertex count");
  const std::size_t n = (k + 2) / 2;
  for (std::size_t j = 2; j <= n - 1; ++j)
    if (std::abs(gaps[j - 1] - gaps[k - j]) > tol) return false;
  return true;
}

bool is_generated(const ConfigurationRecord& necklace) {
  require(necklace.type == ConfigType::necklace || necklace.type == ConfigType::rhombus,
          "generated-necklace test needs a necklace record");
  return is_generated(necklace.gaps, necklace.tol);
}

std::string verify_record(const PointCloud& cloud, const ConfigurationRecord& r, double sep_min) {
  std::ostringstream os;
  const int d = cloud.d;
  for (std::size_t j = 0; j < r.ids.size(); ++j)
    for (int a = 0; a < d; ++a)
      if (r.vertices[j * d + a] != cloud.coords[r.ids[j] * d + a]) return "vertex coordinates differ from the cloud";
  auto edge_ok = [&](std::size_t a, std::size_t b) { return std::abs(dist(cloud, a, b) - r.t) <= r.tol; };
  switch (r.type) {
    case ConfigType::chain:
      for (std::size_t j = 0; j + 1 < r.ids.size(); ++j)
        if (!edge_ok(r.ids[j], r.ids[j + 1])) return "chain edge outside tolerance";
      break;
    case ConfigType::necklace:
    case ConfigType::rhombus:
      for (std::size_t j = 0; j < r.ids.size(); ++j)
        if (!edge_ok(r.ids[j], r.ids[(j + 1) % r.ids.size()])) return "necklace edge outside tolerance";
      break;
    case ConfigType::corner:
      for (std::size_t j = 1; j < 4; ++j)
        if (!edge_ok(r.ids[0], r.ids[j])) return "corner arm outside tolerance";
      break;
  }
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < r.ids.size(); ++a)
    for (std::size_t b = a + 1; b < r.ids.size(); ++b) sep = std::min(sep, dist(cloud, r.ids[a], r.ids[b]));
  if (sep != r.min_separation) return "stored separation differs";
  if (r.type != ConfigType::corner && r.nondegenerate != (sep > sep_min)) return "non-degeneracy flag differs";
  return {};
}

namespace {
std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b) {
    const std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}
}  // namespace

Rational Rational::make(std::int64_t p, std::int64_t q) {
  require(q != 0, "rational with zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const std::int64_t g = gcd64(p, q);
  Rational r;
  r.num = g ? p / g : 0;
  r.den = g ? q / g : 1;
  return r;
}

Rational Rational::parse(const std::string& s) {
  require(!s.empty(), "empty rational");
  try {
    const auto slash = s.find('/');
    if (slash != std::string::npos) return make(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    const auto dot = s.find('.');
    if (dot == std::string::npos) return make(std::stoll(s), 1);
    const std::string frac = s.substr(dot + 1);
    require(frac.size() <= 15 && frac.find_first_not_of("0123456789") == std::string::npos,
            "decimal must have at most 15 fraction digits");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::string whole = s.substr(0, dot);
    const bool neg = !whole.empty() && whole[0] == '-';
    const std::int64_t w = whole.empty() || whole == "-" || whole == "+" ? 0 : std::stoll(whole);
    const std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
    return make((neg ? -1 : 1) * (std::abs(w) * den + f), den);
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ValidationError*>(&e)) throw;
    throw ValidationError("cannot parse rational '" + s + "'");
  }
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::operator+(const Rational& o) const { return make(num * o.den + o.num * den, den * o.den); }
Rational Rational::operator*(const Rational& o) const { return make(num * o.num, den * o.den); }

ThresholdVariant parse_variant(const std::string& s) {
  if (s == "chain") return ThresholdVariant::chain;
  if (s == "even_necklace") return ThresholdVariant::even_necklace;
  if (s == "rhombus_decay") return ThresholdVariant::rhombus_decay;
  if (s == "salem_rhombus") return ThresholdVariant::salem_rhombus;
  throw ValidationError("unknown threshold variant '" + s + "'");
}

Rational dimension_threshold(int d, ThresholdVariant v, const Rational& delta) {
  require(d >= 1, "dimension must be >= 1");
  switch (v) {
    case ThresholdVariant::chain: return Rational::make(d + 1, 2);
    case ThresholdVariant::even_necklace:
      require(d >= 4, "even-necklace threshold needs d >= 4");
      return Rational::make(d + 3, 2);
    case ThresholdVariant::rhombus_decay:
      require(delta.num >= 0, "delta must be nonnegative");
      return Rational::make(1, 1) + delta * Rational::make(1, 2);
    case ThresholdVariant::salem_rhombus: return Rational::make(d + 2, 2);
  }
  throw ValidationError("unknown threshold variant");
}

double nondegeneracy_threshold(double eps, double s, double delta, double C) {
  require(s > 0.0, "s must be positive");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(delta >= 0.0, "delta must be nonnegative");
  require(C > 0.0, "C must be positive");
  return C * std::pow(eps, -1.0 + 2.0 / s + delta);
}

double bottleneck_mass_bound(int k, double N, double eps, double s, double C) {
  require(k >= 1 && N > 0.0 && eps > 0.0 && s > 0.0 && C > 0.0, "bottleneck bound needs positive inputs");
  return C * k * std::pow(N, s) * std::pow(eps, s - 2.0);
}

double cloud_resolution(const PointCloud& cloud) {
  cloud.validate();
  const std::size_t n = cloud.size();
  require(n >= 2, "resolution needs at least two points");
  std::vector<double> nn(n, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) {
        const double v = dist(cloud, i, j);
        if (v > 0.0) nn[i] = std::min(nn[i], v);
      }
  std::sort(nn.begin(), nn.end());
  return nn[n / 2];
}

}  // namespace nlab
