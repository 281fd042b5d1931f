#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nlab/fractal.hpp"

namespace nlab {

enum class ConfigType { chain, necklace, rhombus, corner };

const char* config_type_name(ConfigType t);

struct ConfigurationRecord {
  ConfigType type = ConfigType::chain;
  std::vector<std::size_t> ids;
  std::vector<double> vertices;  // ids.size() × d, row-major
  std::vector<double> gaps;      // chains: k edges; necklaces: m edges incl. closure; corners: 3 arms
  double t = 0.0;
  double tol = 0.0;
  double min_separation = 0.0;
  bool nondegenerate = false;
  double nonplanarity = 0.0;  // quads only
  double max_cosine = 0.0;    // corners only
};

// Uniform hash of the cloud with cubic cells of the given side.
class SearchIndex {
 public:
  SearchIndex(const PointCloud& cloud, double cell);

  // Ids q != i with | |p_i - p_q| - t | <= tol, sorted by id. Requires
  // t + tol <= cell.
  std::vector<std::size_t> annulus(std::size_t i, double t, double tol) const;
  double cell() const { return cell_; }

 private:
  std::int64_t key(const std::array<std::int64_t, kMaxDim>& c) const;

  const PointCloud* cloud_;
  double cell_;
  std::array<double, kMaxDim> lo_{};
  std::array<std::int64_t, kMaxDim> extent_{};
  std::unordered_map<std::int64_t, std::vector<std::size_t>> cells_;
};

struct SearchQuery {
  int size = 2;  // chains: edge count k; necklaces: vertex count m
  double t = 0.1;
  double tol = 1e-3;
  double sep_min = 4e-3;
  std::size_t max_results = 100000;
};

struct SearchResult {
  std::vector<ConfigurationRecord> records;
  bool truncated = false;
};

// Chains x^1..x^{k+1} with every edge within tol of t and all vertices
// pairwise farther apart than sep_min; one record per reversal pair, listed
// in lexicographic id order.
SearchResult find_chains(const PointCloud& cloud, const SearchQuery& q);
// Closed loops on m vertices, one record per dihedral orbit.
SearchResult find_necklaces(const PointCloud& cloud, const SearchQuery& q);
// 4-necklaces whose normalized tetrahedron volume exceeds min_nonplanarity.
SearchResult find_rhombuses(const PointCloud& cloud, const SearchQuery& q, double min_nonplanarity = 0.0);
// Apex x with arms y < z < w: |x - y| = |x - z| = |x - w| = t within tol and
// pairwise |cos| <= tol between the arms. d = 3 only.
SearchResult detect_corners_3d(const PointCloud& cloud, double t, double tol, std::size_t max_results = 100000);

struct Nonplanarity {
  double value = 0.0;  // tetrahedron volume / t³
  double volume = 0.0;
  bool low_dimension = false;  // d < 3 forces 0
};

// Tetrahedron volume of four points (d columns each), summed over the 3×3
// minors of the edge matrix so planar input gives a volume at roundoff level.
Nonplanarity nonplanarity(std::span<const double> quad, int d, double t);

// Mirrored gap equalities g_j = g_{k+1-j} for 2 <= j <= n-1 on a loop of
// k = 2n-2 edges.
bool is_generated(std::span<const double> gaps, double tol);
bool is_generated(const ConfigurationRecord& necklace);

// Recomputes every stored invariant from raw coordinates; returns an empty
// string on success or the first mismatch.
std::string verify_record(const PointCloud& cloud, const ConfigurationRecord& r, double sep_min);

// Exact rational p/q with q > 0 and gcd 1.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t p, std::int64_t q);
  static Rational parse(const std::string& s);  // "p/q", integer or finite decimal
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  Rational operator+(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

enum class ThresholdVariant { chain, even_necklace, rhombus_decay, salem_rhombus };

ThresholdVariant parse_variant(const std::string& s);

// chain (d+1)/2, even_necklace (d+3)/2 (d >= 4), rhombus_decay 1 + δ/2,
// salem_rhombus (d+2)/2.
Rational dimension_threshold(int d, ThresholdVariant v, const Rational& delta = {});

// C ε^{-1 + 2/s + δ}.
double nondegeneracy_threshold(double eps, double s, double delta, double C = 1.0);
// C' k N^s ε^{s-2}.
double bottleneck_mass_bound(int k, double N, double eps, double s, double C = 1.0);

// Median nearest-neighbour distance, the default resolution scale of a cloud.
double cloud_resolution(const PointCloud& cloud);

}  // namespace nlab
