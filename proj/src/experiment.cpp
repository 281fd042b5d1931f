#include "nlab/experiment.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "nlab/convolution.hpp"
#include "nlab/energy.hpp"
#include "nlab/errors.hpp"
#include "nlab/forms.hpp"
#include "nlab/search.hpp"

namespace nlab::experiment {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

int line_of(const std::string* source, const std::string& key) {
  if (!source) return 0;
  const auto pos = source->find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  int line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if ((*source)[i] == '\n') ++line;
  return line;
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
  return (fs::path(base) / p).string();
}

}  // namespace

Reader::Reader(const Json& j, std::string path, const std::string* source)
    : j_(&j), path_(std::move(path)), source_(source) {
  if (!j.is_object()) throw ValidationError(path_ + ": expected a JSON object");
}

void Reader::fail(const char* key, const std::string& what) const {
  int line = line_of(source_, key);
  if (line == 0) line = line_of(source_, path_.substr(path_.rfind('.') + 1));
  std::string loc = line > 0 ? "line " + std::to_string(line) + ": " : "";
  throw ValidationError(loc + path_ + "." + key + ": " + what);
}

bool Reader::has(const char* key) const { return j_->contains(key) && !(*j_)[key].is_null(); }

const Json& Reader::raw(const char* key) const {
  if (!has(key)) {
    const int line = line_of(source_, path_.substr(path_.rfind('.') + 1));
    throw ValidationError((line > 0 ? "line " + std::to_string(line) + ": " : "") + path_ + ": missing field '" +
                          key + "'");
  }
  return (*j_)[key];
}

Reader Reader::child(const char* key) const {
  const Json& c = raw(key);
  if (!c.is_object()) fail(key, "expected a JSON object");
  return Reader(c, path_ + "." + key, source_);
}

double Reader::num(const char* key) const {
  const Json& v = raw(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}
double Reader::num(const char* key, double fallback) const { return has(key) ? num(key) : fallback; }

int Reader::integer(const char* key) const {
  const Json& v = raw(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<int>();
}
int Reader::integer(const char* key, int fallback) const { return has(key) ? integer(key) : fallback; }

std::string Reader::str(const char* key) const {
  const Json& v = raw(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}
std::string Reader::str(const char* key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

bool Reader::flag(const char* key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& v = raw(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::vector<double> Reader::nums(const char* key) const {
  const Json& v = raw(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) fail(key, "expected a number or an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}
std::vector<double> Reader::nums(const char* key, const std::vector<double>& fallback) const {
  return has(key) ? nums(key) : fallback;
}

std::vector<int> Reader::ints(const char* key) const {
  const Json& v = raw(key);
  if (v.is_number_integer()) return {v.get<int>()};
  if (!v.is_array()) fail(key, "expected an integer or an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) fail(key, "expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

Complex Reader::complex(const char* key, Complex fallback) const {
  if (!has(key)) return fallback;
  const auto v = nums(key);
  if (v.size() == 1) return {v[0], 0.0};
  if (v.size() != 2) fail(key, "expected a number or [re, im]");
  return {v[0], v[1]};
}

IfsSpec ifs_from_descriptor(const Reader& r, const std::string& base_dir, std::uint64_t seed) {
  if (r.has("ifs")) {
    const Json& v = r.raw("ifs");
    if (v.is_string()) return io::read_ifs(resolve(base_dir, v.get<std::string>()));
    return io::ifs_from_json(v);
  }
  const std::string preset = r.str("preset");
  const int d = r.integer("d");
  if (preset == "full_cube") return IfsSpec::full_cube(d, r.integer("k", 2));
  if (preset == "cantor_dust") return IfsSpec::cantor_dust(d);
  if (preset == "menger") return IfsSpec::menger(d);
  if (preset == "random_grid")
    return IfsSpec::random_grid(d, r.integer("k"), r.integer("count"),
                                r.has("seed") ? static_cast<std::uint64_t>(r.integer("seed")) : seed);
  if (preset == "grid_subcubes") {
    const Json& cells = r.raw("cells");
    if (!cells.is_array()) r.fail("cells", "expected an array of integer corners");
    std::vector<std::vector<int>> cs;
    for (const auto& c : cells) {
      if (!c.is_array()) r.fail("cells", "expected an array of integer corners");
      cs.push_back(c.get<std::vector<int>>());
    }
    return IfsSpec::grid_subcubes(d, r.integer("k"), cs);
  }
  r.fail("preset", "unknown IFS preset '" + preset + "'");
}

GridMeasure measure_from_json(const Reader& r, const std::string& base_dir, std::uint64_t seed) {
  if (r.has("file")) return io::read_measure(resolve(base_dir, r.str("file")));
  const std::string preset = r.str("preset", "");
  GridSpec g{r.integer("d"), r.integer("n"), r.num("L")};
  g.validate();
  if (preset == "uniform_torus") return GridMeasure::uniform_torus(g);
  if (preset == "atom") {
    const double origin = r.num("origin", 0.5 * (g.L - 1.0));
    std::vector<double> x = r.nums("point", std::vector<double>(g.d, 0.5));
    if (static_cast<int>(x.size()) != g.d) r.fail("point", "expected d coordinates");
    return GridMeasure::atom(g, origin, x);
  }
  const IfsSpec spec = ifs_from_descriptor(r, base_dir, seed);
  if (spec.d != g.d) r.fail("d", "IFS dimension disagrees with the grid");
  MeasureBuildOptions opts;
  opts.reach = r.num("reach", 0.0);
  return build_self_similar_measure(spec, r.integer("depth"), g.n, g.L, opts);
}

KernelField kernel_from_json(const Reader& r, const GridSpec& g, const std::string& base_dir) {
  if (r.has("file")) {
    KernelField k = io::read_kernel(resolve(base_dir, r.str("file")));
    if (k.grid != g) throw ValidationError("kernel file grid does not match the measure grid");
    return k;
  }
  const std::string type = r.str("type", "sphere");
  const Mollifier mol{r.num("eps")};
  KernelField k;
  if (type == "sphere") {
    k = build_sphere_kernel(g, r.num("t", 1.0), mol);
  } else if (type == "alpha") {
    AlphaOptions ao;
    ao.t = r.num("t", 1.0);
    const std::string branch = r.str("branch", "automatic");
    if (branch == "spatial") ao.branch = AlphaBranch::spatial;
    else if (branch == "spectral") ao.branch = AlphaBranch::spectral;
    else if (branch != "automatic") r.fail("branch", "expected automatic, spatial or spectral");
    k = build_alpha_kernel(g, r.complex("alpha", {1.0, 0.0}), mol, ao);
  } else {
    r.fail("type", "unknown kernel type '" + type + "'");
  }
  if (r.flag("modulus", false)) k = modulus_kernel(k);
  return k;
}

PointCloud cloud_from_json(const Reader& r, const std::string& base_dir, std::uint64_t seed) {
  if (r.has("file")) return io::read_cloud(resolve(base_dir, r.str("file")));
  const IfsSpec spec = ifs_from_descriptor(r, base_dir, seed);
  const std::uint64_t s = r.has("seed") ? static_cast<std::uint64_t>(r.integer("seed")) : seed;
  const int count = r.integer("count");
  if (count < 1) r.fail("count", "expected a positive point count");
  return sample_point_cloud(spec, r.integer("depth", 12), static_cast<std::size_t>(count), s);
}

ExperimentSpec parse_spec(const std::string& text, const std::string& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ValidationError("line " + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  ExperimentSpec s;
  s.source = text;
  s.base_dir = base_dir;
  const Reader r(j, "spec", &s.source);
  s.kind = r.str("kind");
  static const char* kinds[] = {"measure", "kernel", "chain", "necklace", "alpha",
                                "energy",  "scan",   "search", "thresholds"};
  bool known = false;
  for (const char* k : kinds) known = known || s.kind == k;
  if (!known) r.fail("kind", "unknown experiment kind '" + s.kind + "'");
  if (r.has("inputs")) {
    s.inputs = r.raw("inputs");
    if (!s.inputs.is_object()) r.fail("inputs", "expected an object of artifact paths");
    for (const auto& [name, path] : s.inputs.items()) {
      if (!path.is_string()) r.fail("inputs", "input '" + name + "' must be a path string");
      const std::string full = resolve(base_dir, path.get<std::string>());
      if (!fs::exists(full)) r.fail("inputs", "input '" + name + "' does not exist: " + full);
    }
  }
  if (r.has("params")) {
    s.params = r.raw("params");
    if (!s.params.is_object()) r.fail("params", "expected a JSON object");
  }
  s.output = r.str("output", "out");
  if (r.has("seed")) {
    const Json& v = r.raw("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer()) r.fail("seed", "expected a nonnegative integer");
    s.seed = v.get<std::uint64_t>();
  }
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  return parse_spec(io::read_file(path), fs::path(path).parent_path().string());
}

std::string output_hash(const std::vector<Artifact>& artifacts) {
  std::string acc;
  for (const auto& a : artifacts) {
    acc += a.name;
    acc.push_back('\0');
    acc += hex64(fnv1a(a.bytes));
    acc.push_back('\n');
  }
  return hex64(fnv1a(acc));
}

namespace {

struct Ctx {
  const ExperimentSpec& spec;
  Reader params;
  std::vector<Artifact> out;

  // Inline descriptor in params, else a file listed under inputs.
  GridMeasure measure() const {
    if (params.has("measure")) return measure_from_json(params.child("measure"), spec.base_dir, spec.seed);
    if (spec.inputs.contains("measure"))
      return io::read_measure(resolve(spec.base_dir, spec.inputs["measure"].get<std::string>()));
    params.fail("measure", "missing measure descriptor or inputs.measure");
  }
  KernelField kernel(const GridSpec& g) const {
    if (params.has("kernel")) return kernel_from_json(params.child("kernel"), g, spec.base_dir);
    if (spec.inputs.contains("kernel")) {
      KernelField k = io::read_kernel(resolve(spec.base_dir, spec.inputs["kernel"].get<std::string>()));
      if (k.grid != g) throw ValidationError("inputs.kernel grid does not match the measure grid");
      return k;
    }
    params.fail("kernel", "missing kernel descriptor or inputs.kernel");
  }
  void add(std::string name, std::string bytes) { out.push_back({std::move(name), std::move(bytes)}); }
  void add_json(std::string name, const Json& j) { add(std::move(name), j.dump(2) + "\n"); }
  void add_lines(std::string name, const std::vector<Json>& lines) {
    std::string s;
    for (const auto& l : lines) s += l.dump() + "\n";
    add(std::move(name), std::move(s));
  }
};

Json measure_summary(const GridMeasure& mu) {
  Json j;
  j["grid"] = {{"d", mu.grid.d}, {"n", mu.grid.n}, {"L", mu.grid.L}};
  j["origin"] = mu.origin;
  j["mass"] = mu.mass;
  j["support_cells"] = mu.support().size();
  j["support_diameter"] = mu.support_diameter();
  j["coarse_warning"] = mu.coarse_warning;
  j["open_set_checked"] = mu.open_set_checked;
  j["depth"] = mu.depth;
  return j;
}

Json fit_json(const FrostmanFit& f) {
  return {{"s_hat", f.s_hat}, {"C_hat", f.C_hat}, {"residual", f.residual}, {"radii", f.radii},
          {"sup_mass", f.sup_mass}};
}

Json decay_json(const DecayFit& f) {
  Json prof = Json::array();
  for (const auto& s : f.profile)
    prof.push_back({{"r_lo", s.r_lo}, {"r_hi", s.r_hi}, {"sup", s.sup}, {"argmax_radius", s.argmax_radius}});
  return {{"gamma_hat", f.gamma_hat}, {"C_hat", f.C_hat}, {"residual", f.residual}, {"profile", prof}};
}

Json record_json(const ConfigurationRecord& r, int d) {
  Json verts = Json::array();
  for (std::size_t i = 0; i < r.ids.size(); ++i)
    verts.push_back(std::vector<double>(r.vertices.begin() + static_cast<std::ptrdiff_t>(i * d),
                                        r.vertices.begin() + static_cast<std::ptrdiff_t>((i + 1) * d)));
  Json j;
  j["type"] = config_type_name(r.type);
  j["ids"] = r.ids;
  j["vertices"] = verts;
  j["gaps"] = r.gaps;
  j["t"] = r.t;
  j["tol"] = r.tol;
  j["min_separation"] = r.min_separation;
  j["nondegenerate"] = r.nondegenerate;
  if (r.ids.size() == 4) j["nonplanarity"] = r.nonplanarity;
  if (r.type == ConfigType::corner) j["max_cosine"] = r.max_cosine;
  return j;
}

void run_measure(Ctx& c) {
  const GridMeasure mu = c.measure();
  c.add("measure.gmsr", io::encode_measure(mu));
  Json summary = measure_summary(mu);
  if (c.params.has("measure") && !c.params.child("measure").has("file") &&
      c.params.child("measure").str("preset", "") != "uniform_torus" &&
      c.params.child("measure").str("preset", "") != "atom") {
    const IfsSpec spec = ifs_from_descriptor(c.params.child("measure"), c.spec.base_dir, c.spec.seed);
    summary["similarity_dimension"] = similarity_dimension(spec);
    c.add_json("ifs.json", io::ifs_to_json(spec));
  }
  if (c.params.has("frostman_radii")) {
    const auto radii = c.params.nums("frostman_radii");
    summary["frostman"] = fit_json(estimate_frostman_exponent(mu, radii));
  }
  if (c.params.has("decay_radii")) summary["fourier_decay"] = decay_json(estimate_fourier_decay(mu, c.params.nums("decay_radii")));
  c.add_json("summary.json", summary);
  if (c.params.has("cloud")) {
    const Reader cr = c.params.child("cloud");
    const IfsSpec spec = ifs_from_descriptor(c.params.child("measure"), c.spec.base_dir, c.spec.seed);
    const PointCloud cloud = sample_point_cloud(spec, cr.integer("depth", 12),
                                                static_cast<std::size_t>(cr.integer("count")), c.spec.seed);
    c.add("cloud.csv", io::encode_cloud(cloud));
  }
}

void run_kernel(Ctx& c) {
  const Reader gr = c.params.child("grid");
  GridSpec g{gr.integer("d"), gr.integer("n"), gr.num("L")};
  g.validate();
  const KernelField k = c.kernel(g);
  Json side = io::kernel_sidecar(k);
  if (c.params.has("shell_radii")) side["fourier_decay"] = decay_json(kernel_fourier_profile(k, c.params.nums("shell_radii")));
  const Complex m = k.mass();
  side["mass"] = {m.real(), m.imag()};
  c.add("kernel.gmsr", io::encode_kernel(k));
  c.add_json("kernel.gmsr.json", side);
}

void run_chain(Ctx& c) {
  const GridMeasure mu = c.measure();
  const KernelField k = c.kernel(mu.grid);
  const auto levels = c.params.ints("k");
  int top = 0;
  for (int l : levels) {
    if (l < 1) c.params.fail("k", "chain length must be >= 1");
    top = std::max(top, l);
  }
  const auto chain = chain_density(mu, k, top);
  const double hv = mu.grid.cell_volume();
  std::vector<Json> lines;
  for (int l : levels) {
    const auto& f = chain[l - 1].f;
    FormReport r;
    r.form = "chain";
    r.value = deterministic_sum(f.size(), [&](std::size_t i) { return f[i] * mu.density[i] * hv; });
    r.params = {{"k", l}, {"t", k.t}, {"eps", k.eps}, {"n", mu.grid.n}, {"L", mu.grid.L}};
    if (chain[l - 1].clamped) r.note = std::to_string(chain[l - 1].clamped) + " cells clamped from roundoff negatives";
    lines.push_back(io::form_report_json(r));
  }
  c.add_lines("forms.jsonl", lines);
}

void run_necklace(Ctx& c) {
  const GridMeasure mu = c.measure();
  const KernelField k = c.kernel(mu.grid);
  std::vector<Json> lines;
  for (int m : c.params.ints("m")) lines.push_back(io::form_report_json(necklace_form(mu, k, m)));
  if (c.params.has("cs")) {
    for (int n : c.params.ints("cs")) {
      const CsGap g = cs_gap(mu, k, n);
      Json j{{"form", "cs_gap"}, {"params", {{"n", n}}}, {"necklace", g.necklace}, {"chain", g.chain},
             {"chain_squared", g.chain_squared}, {"slack", g.slack}};
      if (!g.note.empty()) j["note"] = g.note;
      lines.push_back(j);
    }
  }
  if (c.params.flag("two_necklace", false)) {
    const TwoNecklace t = two_necklace_form(mu, k);
    lines.push_back({{"form", "two_necklace"}, {"necklace4", t.necklace4}, {"necklace4_squared", t.necklace4_squared},
                     {"shared_vertex", t.shared_vertex}, {"two_necklaces", t.two_necklaces},
                     {"slack_low", t.slack_low}, {"slack_high", t.slack_high}});
  }
  if (c.params.has("power"))
    for (int p : c.params.ints("power")) lines.push_back(io::form_report_json(holder_power_form(mu, k, p)));
  c.add_lines("forms.jsonl", lines);
}

void run_alpha(Ctx& c) {
  const GridMeasure mu = c.measure();
  const Complex alpha = c.params.complex("alpha", {1.0, 0.0});
  AlphaFormOptions opts{c.params.num("t", 1.0), c.params.num("eps")};
  std::vector<Json> lines;
  for (int m : c.params.ints("m")) {
    FormReport r = alpha_necklace_form(mu, alpha, m, opts);
    if (c.params.flag("pipeline", false)) {
      const Mollifier mol{opts.eps};
      const KernelField km = build_alpha_kernel(mu.grid, -alpha, mol, {opts.t});
      const KernelField kp = build_alpha_kernel(mu.grid, alpha, mol, {opts.t});
      const Complex p = alpha_necklace_pipeline(mu, km, kp, m);
      r.params.emplace_back("pipeline_re", p.real());
      r.params.emplace_back("pipeline_im", p.imag());
    }
    lines.push_back(io::form_report_json(r));
  }
  c.add_lines("forms.jsonl", lines);
}

void run_energy(Ctx& c) {
  const GridMeasure mu = c.measure();
  std::vector<Json> lines;
  for (double a : c.params.nums("alpha_list", {})) {
    const EnergyReport e = energy_integral(mu.grid, mu.density, a, c.params.num("min_frequency", 0.0));
    lines.push_back({{"report", "energy"}, {"alpha", a}, {"value", e.value}, {"alpha_at_least_d", e.alpha_at_least_d},
                     {"octave_lo", e.octave_lo}, {"octave_value", e.octave_value}});
  }
  if (c.params.has("R_list")) {
    const BallEnergyFit f = ball_energy_profile(mu, c.params.nums("R_list"));
    lines.push_back({{"report", "ball_energy"}, {"exponent", f.exponent}, {"C_hat", f.C_hat},
                     {"residual", f.residual}, {"radii", f.radii}, {"energy", f.energy}});
  }
  for (double a : c.params.nums("riesz_alpha", {})) {
    const RieszReport r = riesz_row_sup(mu, a);
    lines.push_back({{"report", "riesz"}, {"alpha", a}, {"row_sup", r.sup}, {"column_sup", riesz_column_sup(mu, a)},
                     {"argmax_cell", r.argmax_cell}, {"self_term", r.self_term}, {"shell_value", r.shell_value}});
  }
  if (c.params.has("norm")) {
    const Reader nr = c.params.child("norm");
    const double t = nr.num("t", 1.0);
    NormSweepInputs in;
    in.gamma_hat = nr.num("gamma_hat", 0.5 * (mu.grid.d - 1));
    in.s_phi = nr.num("s_phi");
    in.s_psi = nr.num("s_psi", in.s_phi);
    const auto eps = nr.nums("eps_list");
    const auto est = operator_norm_estimate(
        [&](double e) { return build_sphere_kernel(mu.grid, t, Mollifier{e}); }, mu, mu, eps, in);
    lines.push_back({{"report", "operator_norm"}, {"t", t}, {"eps", est.eps}, {"norms", est.norms},
                     {"iterations", est.iterations}, {"ratio", est.ratio}, {"gamma_hat", est.gamma_hat},
                     {"hypothesis_holds", est.hypothesis_holds}});
  }
  c.add_lines("energy.jsonl", lines);
}

void run_scan(Ctx& c) {
  const GridMeasure mu = c.measure();
  const double t0 = c.params.num("t_min"), t1 = c.params.num("t_max");
  const int steps = c.params.integer("t_steps");
  if (steps < 2) c.params.fail("t_steps", "need at least 2 samples");
  if (!(t1 > t0) || t0 <= 0.0) c.params.fail("t_max", "need 0 < t_min < t_max");
  std::vector<double> ts(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) ts[i] = t0 + (t1 - t0) * i / (steps - 1);
  ScanOptions so;
  so.k = c.params.integer("k", 1);
  so.threshold = c.params.num("threshold", -1.0);
  if (c.params.has("kernel") && c.params.child("kernel").str("type", "sphere") != "sphere")
    c.params.fail("kernel", "scans use sphere kernels");
  const GapCurve curve = scan_gap(mu, ts, c.params.nums("eps_list"), so);
  c.add("curve.csv", io::encode_gap_curve(curve));
  Json iv = Json::array();
  for (const auto& [a, b] : curve.intervals) iv.push_back({curve.samples[a].t, curve.samples[b].t});
  c.add_json("scan.json", {{"k", curve.k}, {"eps_list", curve.eps_list}, {"threshold", curve.threshold},
                           {"integral", curve_integral(curve)}, {"intervals", iv},
                           {"support_diameter", mu.support_diameter()}});
}

void run_search(Ctx& c) {
  PointCloud cloud;
  if (c.params.has("cloud")) cloud = cloud_from_json(c.params.child("cloud"), c.spec.base_dir, c.spec.seed);
  else if (c.spec.inputs.contains("cloud"))
    cloud = io::read_cloud(resolve(c.spec.base_dir, c.spec.inputs["cloud"].get<std::string>()));
  else c.params.fail("cloud", "missing cloud descriptor or inputs.cloud");
  const Reader q = c.params.child("query");
  const std::string type = q.str("type");
  SearchQuery sq;
  sq.t = q.num("t");
  const double scale = (q.has("tol") && q.has("sep_min")) ? 0.0 : cloud_resolution(cloud);
  sq.tol = q.num("tol", 2.0 * scale);
  sq.sep_min = q.num("sep_min", 4.0 * sq.tol);
  sq.max_results = static_cast<std::size_t>(q.integer("max_results", 100000));
  SearchResult res;
  if (type == "chain") {
    sq.size = q.integer("k");
    res = find_chains(cloud, sq);
  } else if (type == "necklace") {
    sq.size = q.integer("m");
    res = find_necklaces(cloud, sq);
  } else if (type == "rhombus") {
    res = find_rhombuses(cloud, sq, q.num("min_nonplanarity", 0.0));
  } else if (type == "corner") {
    res = detect_corners_3d(cloud, sq.t, sq.tol, sq.max_results);
  } else {
    q.fail("type", "expected chain, necklace, rhombus or corner");
  }
  std::vector<Json> lines;
  std::size_t nondeg = 0;
  for (const auto& r : res.records) {
    lines.push_back(record_json(r, cloud.d));
    nondeg += r.nondegenerate;
  }
  c.add_lines("records.jsonl", lines);
  c.add_json("search.json", {{"type", type}, {"points", cloud.size()}, {"t", sq.t}, {"tol", sq.tol},
                             {"sep_min", sq.sep_min}, {"count", res.records.size()}, {"nondegenerate", nondeg},
                             {"truncated", res.truncated}});
}

void run_thresholds(Ctx& c) {
  const int d = c.params.integer("d");
  const std::string variant = c.params.str("variant");
  Rational delta;
  if (c.params.has("delta")) {
    const Json& v = c.params.raw("delta");
    delta = v.is_string() ? Rational::parse(v.get<std::string>()) : Rational::parse(v.dump());
  }
  const Rational th = dimension_threshold(d, parse_variant(variant), delta);
  Json j{{"d", d}, {"variant", variant}, {"threshold", th.value()}, {"rational", th.str()}};
  if (c.params.has("eps") && c.params.has("s")) {
    const double C = c.params.num("C", 1.0);
    j["nondegeneracy_N"] =
        nondegeneracy_threshold(c.params.num("eps"), c.params.num("s"), c.params.num("bottleneck_delta", 0.0), C);
  }
  c.add_json("thresholds.json", j);
}

}  // namespace

RunResult run(const ExperimentSpec& spec, const std::string& output_override) {
  const auto start = std::chrono::steady_clock::now();
  Ctx c{spec, Reader(spec.params, "params", &spec.source), {}};
  if (spec.kind == "measure") run_measure(c);
  else if (spec.kind == "kernel") run_kernel(c);
  else if (spec.kind == "chain") run_chain(c);
  else if (spec.kind == "necklace") run_necklace(c);
  else if (spec.kind == "alpha") run_alpha(c);
  else if (spec.kind == "energy") run_energy(c);
  else if (spec.kind == "scan") run_scan(c);
  else if (spec.kind == "search") run_search(c);
  else if (spec.kind == "thresholds") run_thresholds(c);
  else throw ValidationError("unknown experiment kind '" + spec.kind + "'");

  RunResult res;
  res.artifacts = std::move(c.out);
  res.output_hash = output_hash(res.artifacts);
  res.output_dir = output_override.empty() ? resolve(spec.base_dir, spec.output) : output_override;
  for (const auto& a : res.artifacts) io::atomic_write((fs::path(res.output_dir) / a.name).string(), a.bytes);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json m;
  m["tool"] = kTool;
  m["version"] = NLAB_VERSION;
  m["kind"] = spec.kind;
  m["seed"] = spec.seed;
  m["spec_hash"] = hex64(fnv1a(spec.source));
  m["output_hash"] = res.output_hash;
  Json files = Json::array();
  for (const auto& a : res.artifacts)
    files.push_back({{"name", a.name}, {"bytes", a.bytes.size()}, {"hash", hex64(fnv1a(a.bytes))}});
  m["outputs"] = files;
  m["threads"] = omp_get_max_threads();
  m["wall_time_s"] = wall;
  res.manifest = m;
  io::atomic_write((fs::path(res.output_dir) / "manifest.json").string(), m.dump(2) + "\n");
  return res;
}

}  // namespace nlab::experiment
