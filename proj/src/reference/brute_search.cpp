#include <cmath>
#include <limits>

#include "nlab/errors.hpp"
#include "nlab/reference.hpp"

namespace nlab::reference {

namespace {

double dist(const PointCloud& c, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (int a = 0; a < c.d; ++a) {
    const double v = c.coords[i * c.d + a] - c.coords[j * c.d + a];
    s += v * v;
  }
  return std::sqrt(s);
}

bool next_tuple(std::vector<std::size_t>& ids, std::size_t n) {
  for (std::size_t p = ids.size(); p-- > 0;) {
    if (++ids[p] < n) return true;
    ids[p] = 0;
  }
  return false;
}

bool separated(const PointCloud& c, const std::vector<std::size_t>& ids, double sep_min) {
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      if (dist(c, ids[a], ids[b]) <= sep_min) return false;
  return true;
}

}  // namespace

std::vector<std::vector<std::size_t>> brute_chains(const PointCloud& cloud, const SearchQuery& q) {
  const std::size_t n = cloud.size(), v = static_cast<std::size_t>(q.size) + 1;
  require(std::pow(static_cast<double>(n), static_cast<double>(v)) < 2e9, "brute-force chain search too large");
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> ids(v, 0);
  do {
    if (ids.front() > ids.back()) continue;
    bool ok = true;
    for (std::size_t j = 0; j + 1 < v && ok; ++j) ok = std::abs(dist(cloud, ids[j], ids[j + 1]) - q.t) <= q.tol;
    if (ok && separated(cloud, ids, q.sep_min)) out.push_back(ids);
  } while (next_tuple(ids, n));
  return out;
}

std::vector<std::vector<std::size_t>> brute_necklaces(const PointCloud& cloud, const SearchQuery& q) {
  const std::size_t n = cloud.size(), m = static_cast<std::size_t>(q.size);
  require(std::pow(static_cast<double>(n), static_cast<double>(m)) < 2e9, "brute-force necklace search too large");
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> ids(m, 0);
  do {
    bool canon = ids[1] < ids[m - 1];
    for (std::size_t j = 1; j < m && canon; ++j) canon = ids[j] > ids[0];
    if (!canon) continue;
    bool ok = true;
    for (std::size_t j = 0; j < m && ok; ++j) ok = std::abs(dist(cloud, ids[j], ids[(j + 1) % m]) - q.t) <= q.tol;
    if (ok && separated(cloud, ids, q.sep_min)) out.push_back(ids);
  } while (next_tuple(ids, n));
  return out;
}

std::vector<std::vector<std::size_t>> brute_corners(const PointCloud& cloud, double t, double tol) {
  require(cloud.d == 3, "corner search needs d = 3");
  const std::size_t n = cloud.size();
  std::vector<std::vector<std::size_t>> out;
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
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t z = y + 1; z < n; ++z)
        for (std::size_t w = z + 1; w < n; ++w) {
          if (x == y || x == z || x == w) continue;
          if (std::abs(dist(cloud, x, y) - t) > tol || std::abs(dist(cloud, x, z) - t) > tol ||
              std::abs(dist(cloud, x, w) - t) > tol)
            continue;
          if (cosine(x, y, z) > tol || cosine(x, y, w) > tol || cosine(x, z, w) > tol) continue;
          out.push_back({x, y, z, w});
        }
  return out;
}

}  // namespace nlab::reference
