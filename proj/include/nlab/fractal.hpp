#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlab/grid.hpp"

namespace nlab {

// x ↦ ratio · R · x + offset, mapping [0,1]^d into itself.
struct SimilarityMap {
  double ratio = 0.5;
  std::vector<double> offset;
  std::vector<double> rotation;  // row-major d×d orthogonal matrix; empty means identity

  bool rotated() const { return !rotation.empty(); }
  void apply(std::span<const double> x, std::span<double> out) const;
};

struct IfsSpec {
  int d = 2;
  std::vector<SimilarityMap> maps;
  std::uint64_t seed = 0;

  bool axis_aligned() const;
  bool equal_ratios() const;

  // Ratios in (0,1), images of the cube inside the cube, matrices orthogonal.
  void validate() const;
  // For axis-aligned specs: a description of the first pair of maps whose open
  // images overlap, or nullopt when the open set condition holds. Always
  // nullopt for rotated specs (the check is skipped there).
  std::optional<std::string> open_set_violation() const;

  // k^d maps of ratio 1/k tiling the cube; its measure is Lebesgue on [0,1]^d.
  static IfsSpec full_cube(int d, int k = 2);
  // Middle-thirds Cantor set in every coordinate (2^d maps, ratio 1/3).
  static IfsSpec cantor_dust(int d);
  // Sub-cubes of the k-adic grid listed by their integer corner coordinates.
  static IfsSpec grid_subcubes(int d, int k, const std::vector<std::vector<int>>& cells);
  // All 3^d sub-cubes except the central one (Sierpinski carpet for d = 2).
  static IfsSpec menger(int d);
  // `count` distinct sub-cubes of the k-adic grid drawn with the given seed.
  static IfsSpec random_grid(int d, int k, int count, std::uint64_t seed);
};

// Axis-aligned piece of a depth-level iterate: the image of the unit cube
// under a composed word, with its share of the natural measure.
struct IfsPiece {
  std::vector<double> linear;  // d×d, row-major
  std::vector<double> offset;
  double mass = 0.0;
};

// All m^depth pieces, ordered by word in lexicographic order.
std::vector<IfsPiece> ifs_pieces(const IfsSpec& spec, int depth);

// Natural self-similar weights p_i = r_i^s (s the similarity dimension).
std::vector<double> natural_weights(const IfsSpec& spec);

struct GridMeasure {
  GridSpec grid;
  // Torus coordinate of the physical origin: physical x lives at x + origin
  // on every axis.
  double origin = 0.0;
  std::vector<double> density;  // cell-averaged, >= 0
  double mass = 0.0;
  bool coarse_warning = false;  // grid spacing exceeds the finest IFS cell
  bool open_set_checked = true;
  int depth = -1;

  static GridMeasure from_density(const GridSpec& g, double origin, std::vector<double> density);
  // Uniform probability measure on the whole torus (density L^-d).
  static GridMeasure uniform_torus(const GridSpec& g);
  // Unit atom in the cell containing the physical point x.
  static GridMeasure atom(const GridSpec& g, double origin, std::span<const double> x);

  void recompute_mass();
  void normalize();
  std::vector<double> cell_masses() const;
  std::vector<std::size_t> support() const;
  // Diagonal of the bounding box of the support cells (cell corners included);
  // an upper bound for the diameter of the support.
  double support_diameter() const;
};

struct PointCloud {
  int d = 2;
  std::vector<double> coords;  // count × d, row-major
  std::vector<double> weights;
  std::uint64_t seed = 0;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
  void validate() const;
};

struct MeasureBuildOptions {
  // Largest t + ε the measure will be convolved against; the torus must leave
  // this much padding on every side of the unit cube.
  double reach = 0.0;
  std::size_t max_pieces = 20'000'000;
};

GridMeasure build_self_similar_measure(const IfsSpec& spec, int depth, int n, double L,
                                       const MeasureBuildOptions& opts = {});

PointCloud sample_point_cloud(const IfsSpec& spec, int depth, std::size_t count, std::uint64_t seed);

// log m / log(1/r) for equal ratios, otherwise the root of Σ r_i^s = 1.
double similarity_dimension(const IfsSpec& spec);
double moran_root(std::span<const double> ratios);

struct FrostmanFit {
  double s_hat = 0.0;
  double C_hat = 0.0;
  double residual = 0.0;
  std::vector<double> radii;
  std::vector<double> sup_mass;
};

FrostmanFit estimate_frostman_exponent(const GridMeasure& m, std::span<const double> radii);
FrostmanFit estimate_frostman_exponent(const PointCloud& cloud, std::span<const double> radii);

// One annulus R_lo <= |ξ| < R_hi of the frequency lattice and the largest
// spectral modulus found on it.
struct ShellSample {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double sup = 0.0;
  double argmax_radius = 0.0;
};

struct DecayFit {
  double gamma_hat = 0.0;
  double C_hat = 0.0;
  double residual = 0.0;
  std::vector<ShellSample> profile;
};

// Shell suprema of |spectrum| over consecutive annuli [radii[i], radii[i+1])
// and a log-log fit of the suprema against the radius where each is attained.
DecayFit fit_shell_decay(const GridSpec& g, std::span<const double> modulus, std::span<const double> radii);

DecayFit estimate_fourier_decay(const GridMeasure& m, std::span<const double> shell_radii);

}  // namespace nlab
