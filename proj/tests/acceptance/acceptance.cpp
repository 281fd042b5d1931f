// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "nlab/convolution.hpp"
#include "nlab/energy.hpp"
#include "nlab/experiment.hpp"
#include "nlab/forms.hpp"
#include "nlab/io.hpp"
#include "nlab/reference.hpp"
#include "nlab/search.hpp"
#include "nlab/verify.hpp"

namespace fs = std::filesystem;
using namespace nlab;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(const char* pattern, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, ap);
  va_end(ap);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

GridMeasure cantor16() { return build_self_similar_measure(IfsSpec::cantor_dust(2), 2, 16, 2.0); }
GridMeasure random16() { return build_self_similar_measure(IfsSpec::random_grid(2, 4, 6, 3), 1, 16, 2.0); }
GridMeasure uniform16() { return GridMeasure::uniform_torus({2, 16, 2.0}); }
KernelField coarse_kernel(const GridSpec& g, double t = 0.5) { return build_sphere_kernel(g, t, Mollifier{2.0 * g.h()}); }

const std::vector<std::pair<std::string, std::function<GridMeasure()>>>& coarse_measures() {
  static const std::vector<std::pair<std::string, std::function<GridMeasure()>>> m{
      {"uniform", uniform16}, {"cantor", cantor16}, {"random", random16}};
  return m;
}

// 1. FFT chains and dense necklaces against literal multi-index sums.
Outcome oracle_equivalence() {
  Outcome o;
  for (const auto& [name, make] : coarse_measures()) {
    const GridMeasure mu = make();
    for (double t : {0.4, 0.6}) {
      const KernelField k = coarse_kernel(mu.grid, t);
      double worst_chain = 0.0, worst_neck = 0.0;
      for (int e = 1; e <= 3; ++e)
        worst_chain = std::max(worst_chain, rel(chain_mass(mu, k, e), reference::direct_chain_mass(mu, k, e)));
      for (int m = 2; m <= 4; ++m)
        worst_neck =
            std::max(worst_neck, rel(necklace_form(mu, k, m).value.real(), reference::direct_necklace(mu, k, m)));
      o.check(worst_chain <= 1e-6 && worst_neck <= 1e-6,
              fmt("%s t=%.1f chain %.2g necklace %.2g", name.c_str(), t, worst_chain, worst_neck));
    }
  }
  return o;
}

// 2. Cauchy-Schwarz: necklace of 2n-2 edges dominates the squared n-chain.
Outcome cauchy_schwarz() {
  Outcome o;
  for (const auto& [name, make] : coarse_measures()) {
    const GridMeasure mu = make();
    const KernelField k = coarse_kernel(mu.grid);
    double lo = 1e300, hi = 0.0;
    for (int n = 2; n <= 4; ++n) {
      const CsGap g = cs_gap(mu, k, n);
      // Literal sums stay affordable up to four vertices.
      if (n <= 3) {
        const auto d = reference::direct_cs_gap(mu, k, n);
        o.check(rel(g.necklace, d.necklace) < 1e-8 && rel(g.chain, d.chain) < 1e-8,
                fmt("%s n=%d matches direct sums", name.c_str(), n));
      }
      lo = std::min(lo, g.slack);
      hi = std::max(hi, std::abs(g.slack));
    }
    o.check(lo >= -1e-10, fmt("%s min slack %.3g", name.c_str(), lo));
    if (name == "uniform") o.check(hi < 1e-9, fmt("uniform |slack| max %.3g (equality required)", hi));
  }
  return o;
}

// 3. Hölder chain N_4² <= shared vertex <= two necklaces.
Outcome holder_ledger() {
  Outcome o;
  for (const auto& [name, make] : coarse_measures()) {
    const GridMeasure mu = make();
    for (double t : {0.4, 0.6}) {
      const TwoNecklace r = two_necklace_form(mu, coarse_kernel(mu.grid, t));
      o.check(std::min(r.slack_low, r.slack_high) >= -1e-9,
              fmt("%s t=%.1f slacks %.3g, %.3g", name.c_str(), t, r.slack_low, r.slack_high));
    }
  }
  // Factored seven-vertex evaluation against the literal sum on a 16-cell support.
  const GridMeasure tiny = build_self_similar_measure(IfsSpec::full_cube(2, 4), 1, 8, 2.0);
  const KernelField k = build_sphere_kernel(tiny.grid, 0.4, Mollifier{0.5});
  const double direct = reference::direct_double_loop(tiny, k);
  const double fast = two_necklace_form(tiny, k).two_necklaces;
  o.check(rel(fast, direct) < 1e-7, fmt("7-fold sum rel dev %.2g", rel(fast, direct)));
  return o;
}

// 4. Fourier-shell decay of sphere and complex-order kernels.
Outcome kernel_decay() {
  Outcome o;
  for (const auto& r : verify::run_suite("decay").results) o.check(r.pass, r.id + " " + r.detail);
  return o;
}

// 5. eps-uniformity on a 4D Cantor-type measure (15 of 16 dyadic subcubes).
Outcome eps_uniformity() {
  Outcome o;
  std::vector<std::vector<int>> cells;
  for (int i = 0; i < 15; ++i) cells.push_back({i & 1, (i >> 1) & 1, (i >> 2) & 1, (i >> 3) & 1});
  const IfsSpec ifs = IfsSpec::grid_subcubes(4, 2, cells);
  {
    const GridMeasure fine = build_self_similar_measure(ifs, 4, 64, 4.0);
    const std::vector<double> radii{0.125, 0.25, 0.5, 1.0};
    const double s = estimate_frostman_exponent(fine, radii).s_hat;
    o.check(s > 2.5, fmt("fitted s %.3f vs (d+1)/2 = 2.5", s));
  }
  const GridMeasure mu = build_self_similar_measure(ifs, 3, 16, 2.0);
  const double t = 0.4;
  const std::vector<double> eps{2.0 * mu.grid.h(), 4.0 * mu.grid.h()};
  auto ratio = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? *hi / *lo : INFINITY;
  };
  std::vector<double> c2, c3, norm, ap, am;
  for (double e : eps) {
    const KernelField k = build_sphere_kernel(mu.grid, t, Mollifier{e});
    c2.push_back(chain_mass(mu, k, 2));
    c3.push_back(chain_mass(mu, k, 3));
    norm.push_back(operator_norm(k, mu, mu).norm);
    for (double a : {1.0, -1.0}) {
      const KernelField km = build_alpha_kernel(mu.grid, {-a, 0.0}, Mollifier{e}, {t});
      const KernelField kp = build_alpha_kernel(mu.grid, {a, 0.0}, Mollifier{e}, {t});
      (a > 0 ? ap : am).push_back(std::abs(alpha_necklace_pipeline(mu, km, kp, 4)));
    }
  }
  o.check(ratio(c2) < 2.0, fmt("chain k=2 ratio %.3f", ratio(c2)));
  o.check(ratio(c3) < 2.0, fmt("chain k=3 ratio %.3f", ratio(c3)));
  o.check(ratio(norm) < 2.0, fmt("operator norm ratio %.3f", ratio(norm)));
  o.check(ratio(ap) < 2.0, fmt("alpha=+1 m=4 ratio %.3f", ratio(ap)));
  o.check(ratio(am) < 2.0, fmt("alpha=-1 m=4 ratio %.3f", ratio(am)));
  return o;
}

// 6. The k = 1 gap curve integrates to the total mass and vanishes past the diameter.
Outcome mass_identity() {
  Outcome o;
  const std::vector<std::pair<std::string, GridMeasure>> measures{
      {"square", build_self_similar_measure(IfsSpec::full_cube(2), 1, 128, 4.0)},
      {"cantor", build_self_similar_measure(IfsSpec::cantor_dust(2), 4, 128, 4.0)},
      {"carpet", build_self_similar_measure(IfsSpec::menger(2), 4, 128, 4.0)}};
  for (const auto& [name, mu] : measures) {
    const double e = 2.0 * mu.grid.h();
    const double t0 = mu.grid.h(), t1 = mu.support_diameter() + e + 2.0 * mu.grid.h();
    std::vector<double> ts;
    for (int i = 0; i < 80; ++i) ts.push_back(t0 + (t1 - t0) * i / 79.0);
    const std::vector<double> el{e};
    const double I = curve_integral(scan_gap(mu, ts, el));
    o.check(std::abs(I - 1.0) < 0.02, fmt("%s integral %.4f", name.c_str(), I));
  }
  const GridMeasure mu = build_self_similar_measure(IfsSpec::menger(2), 3, 128, 8.0);
  const double diam = mu.support_diameter();
  const std::vector<double> el{0.125, 0.2};
  std::vector<double> ts;
  for (double gap : {1e-6, 0.01, 0.1, 0.5}) ts.push_back(diam + el.back() + gap);
  double worst = 0.0;
  for (const auto& s : scan_gap(mu, ts, el).samples)
    for (double m : s.per_eps) worst = std::max(worst, std::abs(m));
  o.check(worst == 0.0, fmt("max |M| past diameter + eps: %g", worst));
  return o;
}

// 7. Ball-energy growth exponents and Riesz row sums under refinement.
Outcome energy_profiles() {
  Outcome o;
  const std::vector<double> R{4, 8, 16, 32, 64};
  const std::vector<double> fr{1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
  const double x[2] = {1.0, 1.0};
  const std::vector<std::pair<std::string, GridMeasure>> measures{
      {"uniform", GridMeasure::uniform_torus({2, 256, 2.0})},
      {"cantor", build_self_similar_measure(IfsSpec::cantor_dust(2), 6, 256, 2.0)},
      {"atom", GridMeasure::atom({2, 256, 2.0}, 0.5, x)}};
  double s_cantor = 0.0;
  for (const auto& [name, mu] : measures) {
    const double s = estimate_frostman_exponent(mu, fr).s_hat;
    if (name == "cantor") s_cantor = s;
    const double ex = ball_energy_profile(mu, R).exponent;
    o.check(std::abs(ex - (2.0 - s)) < 0.25, fmt("%s exponent %.3f vs d - s_hat %.3f", name.c_str(), ex, 2.0 - s));
  }
  for (double a : {0.3, 0.5, 1.0, 1.5}) {
    std::vector<double> sup;
    for (int n : {64, 128, 256})
      sup.push_back(riesz_row_sup(build_self_similar_measure(IfsSpec::cantor_dust(2), 6, n, 2.0), a).sup);
    const double r1 = sup[1] / sup[0], r2 = sup[2] / sup[1];
    if (a > 2.0 - s_cantor)
      o.check(std::max({r1, r2, 1.0 / r1, 1.0 / r2}) < 1.5, fmt("alpha %.1f stable, ratios %.3f %.3f", a, r1, r2));
    else
      o.check(r1 > 1.1 && r2 > 1.1, fmt("alpha %.1f growing, ratios %.3f %.3f", a, r1, r2));
  }
  return o;
}

PointCloud make_cloud(int d, std::vector<double> coords) {
  PointCloud c;
  c.d = d;
  c.coords = std::move(coords);
  const std::size_t n = c.coords.size() / d;
  c.weights.assign(n, 1.0 / static_cast<double>(n));
  return c;
}

PointCloud jittered_lattice(int d, std::vector<int> side, double jitter, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-jitter, jitter);
  std::vector<double> coords;
  std::vector<int> idx(d, 0);
  while (true) {
    for (int a = 0; a < d; ++a) coords.push_back(0.25 * idx[a] + u(rng));
    int a = 0;
    while (a < d && ++idx[a] == side[a]) idx[a++] = 0;
    if (a == d) break;
  }
  return make_cloud(d, std::move(coords));
}

std::vector<std::vector<std::size_t>> ids_of(const SearchResult& r) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& rec : r.records) out.push_back(rec.ids);
  return out;
}

// 8. Indexed search against exhaustive search, rigid counts, isometry invariance.
Outcome search_correctness() {
  Outcome o;
  const PointCloud flat = jittered_lattice(2, {6, 6}, 0.003, 3);
  const PointCloud solid = jittered_lattice(3, {3, 3, 4}, 0.003, 8);
  const PointCloud dust = sample_point_cloud(IfsSpec::cantor_dust(2), 4, 40, 3);
  std::size_t compared = 0, found = 0;
  bool same = true;
  auto cmp = [&](const std::vector<std::vector<std::size_t>>& a, const std::vector<std::vector<std::size_t>>& b) {
    ++compared;
    found += b.size();
    same = same && a == b;
  };
  for (const PointCloud* c : {&flat, &solid, &dust}) {
    const double t = c == &dust ? 1.0 / 3.0 : 0.25;
    for (int k = 1; k <= 4; ++k) {
      const SearchQuery q{k, t, 0.02, 0.1, 1000000};
      cmp(ids_of(find_chains(*c, q)), reference::brute_chains(*c, q));
    }
    for (int m = 3; m <= 4; ++m) {
      const SearchQuery q{m, t, 0.02, 0.1, 1000000};
      cmp(ids_of(find_necklaces(*c, q)), reference::brute_necklaces(*c, q));
    }
  }
  cmp(ids_of(detect_corners_3d(solid, 0.25, 0.05)), reference::brute_corners(solid, 0.25, 0.05));
  o.check(same && found > 0, fmt("%zu queries equal brute force (%zu records)", compared, found));

  const std::size_t sq = find_necklaces(make_cloud(2, {0, 0, 1, 0, 1, 1, 0, 1}), {4, 1.0, 1e-9, 0.5, 100}).records.size();
  const double s = 1.0 / std::sqrt(2.0);
  const std::size_t tri =
      find_necklaces(make_cloud(3, {s, 0, 0, 0, s, 0, 0, 0, s, s, s, s}), {3, 1.0, 1e-9, 0.5, 100}).records.size();
  const std::size_t cor =
      detect_corners_3d(make_cloud(3, {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1}), 1.0, 1e-9).records.size();
  o.check(sq == 1 && tri == 4 && cor == 1, fmt("square %zu, tetrahedron %zu, frame %zu", sq, tri, cor));

  const SearchQuery qc{3, 0.25, 0.02, 0.1, 1000000}, qn{4, 0.25, 0.02, 0.1, 1000000};
  const auto base_c = ids_of(find_chains(solid, qc)), base_n = ids_of(find_necklaces(solid, qn));
  const auto base_k = ids_of(detect_corners_3d(solid, 0.25, 0.05));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  int invariant = 0;
  for (int trial = 0; trial < 20; ++trial) {
    double R[3][3];
    for (auto& row : R)
      for (double& v : row) v = nd(rng);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < i; ++j) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) dot += R[i][k] * R[j][k];
        for (int k = 0; k < 3; ++k) R[i][k] -= dot * R[j][k];
      }
      double n = 0.0;
      for (int k = 0; k < 3; ++k) n += R[i][k] * R[i][k];
      for (int k = 0; k < 3; ++k) R[i][k] /= std::sqrt(n);
    }
    const double shift[3] = {10.0 * nd(rng), 10.0 * nd(rng), 10.0 * nd(rng)};
    PointCloud m = solid;
    for (std::size_t p = 0; p < solid.size(); ++p)
      for (int a = 0; a < 3; ++a) {
        double v = shift[a];
        for (int k = 0; k < 3; ++k) v += R[a][k] * solid.coords[p * 3 + k];
        m.coords[p * 3 + a] = v;
      }
    invariant += ids_of(find_chains(m, qc)) == base_c && ids_of(find_necklaces(m, qn)) == base_n &&
                 ids_of(detect_corners_3d(m, 0.25, 0.05)) == base_k;
  }
  o.check(invariant == 20 && !base_n.empty() && !base_k.empty(),
          fmt("%d of 20 rigid motions preserve chains, necklaces and corners", invariant));
  return o;
}

std::string rat(std::int64_t p, std::int64_t q) {
  const std::int64_t g = std::gcd(p, q);
  p /= g;
  q /= g;
  return q == 1 ? std::to_string(p) : std::to_string(p) + "/" + std::to_string(q);
}

// 9. Dimension thresholds as exact rationals.
Outcome thresholds() {
  Outcome o;
  int good = 0, total = 0;
  auto expect = [&](const Rational& got, const std::string& want) {
    ++total;
    if (got.str() == want) ++good;
    else o.check(false, got.str() + " != " + want);
  };
  for (int d = 2; d <= 8; ++d) {
    expect(dimension_threshold(d, ThresholdVariant::chain), rat(d + 1, 2));
    expect(dimension_threshold(d, ThresholdVariant::salem_rhombus), rat(d + 2, 2));
    if (d >= 4) expect(dimension_threshold(d, ThresholdVariant::even_necklace), rat(d + 3, 2));
  }
  for (const auto& [p, q] : std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {1, 2}, {2, 7}})
    expect(dimension_threshold(3, ThresholdVariant::rhombus_decay, Rational::make(p, q)), rat(2 * q + p, 2 * q));
  o.check(good == total, fmt("%d of %d thresholds exact", good, total));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> numeric_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "manifest.json") out[e.path().filename().string()] = slurp(e.path());
  return out;
}

// 10. Bundled specs rerun byte-identically across runs and thread counts.
Outcome determinism() {
  Outcome o;
  const char* cli = std::getenv("NLAB_CLI");
  const char* dir = std::getenv("NLAB_EXPERIMENTS");
  if (!cli || !dir) {
    o.check(false, "NLAB_CLI and NLAB_EXPERIMENTS must be set");
    return o;
  }
  const auto golden = io::Json::parse(slurp(fs::path(dir) / "golden_hashes.json"));
  const fs::path scratch = fs::temp_directory_path() / ("nlab_acceptance_" + std::to_string(::getpid()));
  std::vector<fs::path> specs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json" && e.path().filename() != "golden_hashes.json") specs.push_back(e.path());
  std::sort(specs.begin(), specs.end());
  o.check(!specs.empty(), fmt("%zu bundled specs", specs.size()));
  for (const auto& spec : specs) {
    const std::string name = spec.stem().string();
    std::vector<std::map<std::string, std::string>> runs;
    std::vector<std::string> hashes;
    bool ran = true;
    for (int threads : {1, 1, 4}) {
      const fs::path out = scratch / (name + "_" + std::to_string(runs.size()));
      const std::string cmd = std::string("\"") + cli + "\" --threads " + std::to_string(threads) + " run \"" +
                              spec.string() + "\" --out \"" + out.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) {
        ran = false;
        break;
      }
      runs.push_back(numeric_outputs(out));
      hashes.push_back(io::Json::parse(slurp(out / "manifest.json"))["output_hash"].get<std::string>());
    }
    if (!ran) {
      o.check(false, name + " run failed");
      continue;
    }
    const bool identical = runs[0] == runs[1] && runs[0] == runs[2];
    const bool hash_ok = golden.contains(name) && golden[name].get<std::string>() == hashes[0] &&
                         hashes[0] == hashes[1] && hashes[0] == hashes[2];
    o.check(identical && hash_ok, name + (identical ? " identical" : " differs") + (hash_ok ? ", golden ok" : ", golden mismatch"));
  }
  fs::remove_all(scratch);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle-equivalence", oracle_equivalence}, {"cauchy-schwarz", cauchy_schwarz},
      {"holder-ledger", holder_ledger},           {"kernel-decay", kernel_decay},
      {"eps-uniformity", eps_uniformity},         {"mass-identity", mass_identity},
      {"energy-profiles", energy_profiles},       {"search-correctness", search_correctness},
      {"thresholds", thresholds},                 {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("%s %2zu %-19s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
