#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nlab/errors.hpp"
#include "nlab/experiment.hpp"
#include "nlab/verify.hpp"

namespace ex = nlab::experiment;
using nlab::io::Json;

namespace {

// Parses "a,b,c" into numbers.
std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0') throw nlab::ValidationError("cannot parse number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : split_numbers(s)) {
    if (v != std::floor(v)) throw nlab::ValidationError("expected integers in '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Json complex_json(const std::string& s) {
  const auto v = split_numbers(s);
  if (v.size() == 1) return Json::array({v[0], 0.0});
  if (v.size() != 2) throw nlab::ValidationError("expected re or re,im for alpha");
  return Json::array({v[0], v[1]});
}

struct Common {
  std::string spec;  // optional JSON: a full experiment spec or a params block
  std::string out = "out";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--spec", c.spec, "JSON experiment spec or parameter block");
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

// Builds the spec for a subcommand: --spec wins when given, otherwise the
// flag-derived params are used.
ex::ExperimentSpec make_spec(const std::string& kind, const Common& c, const Json& params, const Json& inputs) {
  if (!c.spec.empty()) {
    const std::string text = nlab::io::read_file(c.spec);
    const std::string base = std::filesystem::path(c.spec).parent_path().string();
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error&) {
      ex::parse_spec(text, base);  // rethrows with a line number
    }
    if (j.is_object() && j.contains("kind")) {
      ex::ExperimentSpec s = ex::parse_spec(text, base);
      if (s.kind != kind) throw nlab::ValidationError("spec kind '" + s.kind + "' does not match subcommand");
      return s;
    }
    Json wrapped{{"kind", kind}, {"params", j}, {"output", c.out}, {"seed", c.seed}};
    ex::ExperimentSpec s = ex::parse_spec(wrapped.dump(2), base);
    s.source = text;  // line numbers refer to the user's file
    return s;
  }
  Json j{{"kind", kind}, {"params", params}, {"output", c.out}, {"seed", c.seed}};
  if (!inputs.empty()) j["inputs"] = inputs;
  return ex::parse_spec(j.dump(2), "");
}

int run_and_report(const ex::ExperimentSpec& spec, const std::string& out_override) {
  const auto res = ex::run(spec, out_override);
  std::cout << res.manifest.dump() << "\n";
  return 0;
}

void set_threads(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("NECKLACE_LAB_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (*env == '\0' || *end != '\0' || v < 1) throw nlab::ValidationError("NECKLACE_LAB_THREADS must be a positive integer");
      n = static_cast<int>(v);
    }
  }
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for chains, necklaces and spherical averages of fractal measures"};
  app.set_version_flag("--version", NLAB_VERSION);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: NECKLACE_LAB_THREADS or all cores)");

  // run
  std::string run_spec, run_out;
  auto* run = app.add_subcommand("run", "Run a JSON experiment spec");
  run->add_option("spec", run_spec, "Experiment spec path")->required();
  run->add_option("--out", run_out, "Override the output directory");

  // gen-measure
  Common gm;
  std::string gm_preset = "cantor_dust", gm_ifs;
  int gm_d = 2, gm_n = 128, gm_depth = 4, gm_k = 4, gm_count = 0, gm_cloud = 0;
  double gm_L = 2.0, gm_reach = 0.0;
  auto* gen_measure = app.add_subcommand("gen-measure", "Discretize a self-similar measure onto a grid");
  add_common(gen_measure, gm);
  gen_measure->add_option("--preset", gm_preset,
                          "uniform_torus | atom | full_cube | cantor_dust | menger | random_grid")
      ->capture_default_str();
  gen_measure->add_option("--ifs", gm_ifs, "IFS JSON file (overrides --preset)");
  gen_measure->add_option("--d", gm_d)->capture_default_str();
  gen_measure->add_option("--n", gm_n, "Cells per axis (power of 2)")->capture_default_str();
  gen_measure->add_option("--L", gm_L, "Torus side")->capture_default_str();
  gen_measure->add_option("--depth", gm_depth)->capture_default_str();
  gen_measure->add_option("--reach", gm_reach, "Largest t + eps to be used with this measure")->capture_default_str();
  gen_measure->add_option("--k", gm_k, "Sub-grid factor for random_grid")->capture_default_str();
  gen_measure->add_option("--count", gm_count, "Number of sub-cubes for random_grid");
  gen_measure->add_option("--cloud", gm_cloud, "Also sample a point cloud of this size");

  // gen-kernel
  Common gk;
  std::string gk_type = "sphere", gk_alpha = "1", gk_branch = "automatic";
  int gk_d = 2, gk_n = 256;
  double gk_L = 4.0, gk_t = 1.0, gk_eps = 0.05;
  bool gk_modulus = false;
  std::string gk_shells;
  auto* gen_kernel = app.add_subcommand("gen-kernel", "Build a mollified sphere or complex-order kernel");
  add_common(gen_kernel, gk);
  gen_kernel->add_option("--type", gk_type, "sphere | alpha")->capture_default_str();
  gen_kernel->add_option("--d", gk_d)->capture_default_str();
  gen_kernel->add_option("--n", gk_n)->capture_default_str();
  gen_kernel->add_option("--L", gk_L)->capture_default_str();
  gen_kernel->add_option("--t", gk_t)->capture_default_str();
  gen_kernel->add_option("--eps", gk_eps)->capture_default_str();
  gen_kernel->add_option("--alpha", gk_alpha, "re or re,im")->capture_default_str();
  gen_kernel->add_option("--branch", gk_branch, "automatic | spatial | spectral")->capture_default_str();
  gen_kernel->add_flag("--modulus", gk_modulus, "Store |kernel|");
  gen_kernel->add_option("--shells", gk_shells, "Shell radii for a Fourier decay fit, comma separated");

  // Shared measure/kernel inputs for the form commands.
  struct FormArgs {
    Common c;
    std::string measure, kernel;
    double t = 1.0, eps = 0.1;
  };
  auto add_form_inputs = [](CLI::App* sub, FormArgs& f) {
    add_common(sub, f.c);
    sub->add_option("--measure", f.measure, "GMSR measure file");
    sub->add_option("--kernel", f.kernel, "GMSR kernel file (otherwise a sphere kernel from --t/--eps)");
    sub->add_option("--t", f.t, "Sphere radius")->capture_default_str();
    sub->add_option("--eps", f.eps, "Mollifier width")->capture_default_str();
  };
  auto form_inputs = [](const FormArgs& f, Json& params) {
    if (!f.measure.empty()) params["measure"] = {{"file", std::filesystem::absolute(f.measure).string()}};
    if (!f.kernel.empty()) params["kernel"] = {{"file", std::filesystem::absolute(f.kernel).string()}};
    else params["kernel"] = {{"type", "sphere"}, {"t", f.t}, {"eps", f.eps}};
  };

  FormArgs ch;
  std::string ch_k = "1,2,3";
  auto* chain = app.add_subcommand("chain", "Chain masses by iterated FFT convolution");
  add_form_inputs(chain, ch);
  chain->add_option("--k", ch_k, "Edge counts, comma separated")->capture_default_str();

  FormArgs nk;
  std::string nk_m = "2,3,4", nk_cs, nk_power;
  bool nk_two = false;
  auto* necklace = app.add_subcommand("necklace", "Necklace forms and inequality ledgers on the dense operator");
  add_form_inputs(necklace, nk);
  necklace->add_option("--m", nk_m, "Necklace sizes")->capture_default_str();
  necklace->add_option("--cs", nk_cs, "Cauchy-Schwarz gaps for these n");
  necklace->add_option("--power", nk_power, "Power forms for these p");
  necklace->add_flag("--two-necklace", nk_two, "Hölder ledger of the shared-vertex double loop");

  Common af;
  std::string af_measure, af_alpha = "1", af_m = "4";
  double af_t = 1.0, af_eps = 0.1;
  bool af_pipeline = false;
  auto* alpha_form = app.add_subcommand("alpha-form", "Complex-order necklace form");
  add_common(alpha_form, af);
  alpha_form->add_option("--measure", af_measure, "GMSR measure file");
  alpha_form->add_option("--alpha", af_alpha, "re or re,im")->capture_default_str();
  alpha_form->add_option("--m", af_m, "Even loop sizes")->capture_default_str();
  alpha_form->add_option("--t", af_t)->capture_default_str();
  alpha_form->add_option("--eps", af_eps)->capture_default_str();
  alpha_form->add_flag("--pipeline", af_pipeline, "Also evaluate by per-source convolutions");

  Common en;
  std::string en_measure, en_alpha, en_R, en_riesz;
  auto* energy = app.add_subcommand("energy", "Fourier and Riesz energies, ball-energy growth");
  add_common(energy, en);
  energy->add_option("--measure", en_measure, "GMSR measure file");
  energy->add_option("--alpha-list", en_alpha, "Energy exponents");
  energy->add_option("--R-list", en_R, "Dyadic ball radii in frequency");
  energy->add_option("--riesz-alpha", en_riesz, "Riesz exponents");

  Common sc;
  std::string sc_measure, sc_eps = "0.05,0.1";
  double sc_t0 = 0.1, sc_t1 = 1.0, sc_thr = -1.0;
  int sc_steps = 10, sc_k = 1;
  auto* scan = app.add_subcommand("scan", "Gap curve M(t) over a t-range and an eps sweep");
  add_common(scan, sc);
  scan->add_option("--measure", sc_measure, "GMSR measure file");
  scan->add_option("--t-min", sc_t0)->capture_default_str();
  scan->add_option("--t-max", sc_t1)->capture_default_str();
  scan->add_option("--t-steps", sc_steps)->capture_default_str();
  scan->add_option("--eps-list", sc_eps)->capture_default_str();
  scan->add_option("--k", sc_k)->capture_default_str();
  scan->add_option("--threshold", sc_thr, "Interval threshold (negative: half the median mass)");

  Common se;
  std::string se_cloud, se_type = "necklace";
  double se_t = 0.1, se_tol = -1.0, se_sep = -1.0, se_nonplanar = 0.0;
  int se_size = 4, se_max = 100000;
  auto* search = app.add_subcommand("search", "Configuration search in a point cloud");
  add_common(search, se);
  search->add_option("--cloud", se_cloud, "Point cloud CSV");
  search->add_option("--type", se_type, "chain | necklace | rhombus | corner")->capture_default_str();
  search->add_option("--size", se_size, "Chain edges k or necklace vertices m")->capture_default_str();
  search->add_option("--t", se_t)->capture_default_str();
  search->add_option("--tol", se_tol, "Default: twice the median nearest-neighbour distance");
  search->add_option("--sep-min", se_sep, "Default: 4 tol");
  search->add_option("--max-results", se_max)->capture_default_str();
  search->add_option("--min-nonplanarity", se_nonplanar)->capture_default_str();

  Common th;
  int th_d = 4;
  std::string th_variant = "chain", th_delta;
  auto* thresholds = app.add_subcommand("thresholds", "Dimension thresholds as exact rationals");
  add_common(thresholds, th);
  thresholds->add_option("--d", th_d)->capture_default_str();
  thresholds->add_option("--variant", th_variant, "chain | even_necklace | rhombus_decay | salem_rhombus")
      ->capture_default_str();
  thresholds->add_option("--delta", th_delta, "Decay parameter, p/q or decimal");

  std::string vf_suite;
  auto* verify = app.add_subcommand("verify", "Run a property suite");
  verify->add_option("suite", vf_suite, "oracles | inequalities | decay | uniformity | search")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_threads(threads);
    if (*run) {
      return run_and_report(ex::load_spec(run_spec), run_out);
    }
    if (*gen_measure) {
      Json m{{"d", gm_d}, {"n", gm_n}, {"L", gm_L}, {"depth", gm_depth}, {"reach", gm_reach}};
      if (!gm_ifs.empty()) m["ifs"] = std::filesystem::absolute(gm_ifs).string();
      else m["preset"] = gm_preset;
      if (gm_preset == "random_grid") {
        m["k"] = gm_k;
        m["count"] = gm_count;
      }
      Json p{{"measure", m}};
      if (gm_cloud > 0) p["cloud"] = {{"count", gm_cloud}};
      return run_and_report(make_spec("measure", gm, p, {}), "");
    }
    if (*gen_kernel) {
      Json k{{"type", gk_type}, {"t", gk_t}, {"eps", gk_eps}, {"modulus", gk_modulus}};
      if (gk_type == "alpha") {
        k["alpha"] = complex_json(gk_alpha);
        k["branch"] = gk_branch;
      }
      Json p{{"grid", {{"d", gk_d}, {"n", gk_n}, {"L", gk_L}}}, {"kernel", k}};
      if (!gk_shells.empty()) p["shell_radii"] = split_numbers(gk_shells);
      return run_and_report(make_spec("kernel", gk, p, {}), "");
    }
    if (*chain) {
      Json p{{"k", split_ints(ch_k)}};
      form_inputs(ch, p);
      return run_and_report(make_spec("chain", ch.c, p, {}), "");
    }
    if (*necklace) {
      Json p{{"m", split_ints(nk_m)}, {"two_necklace", nk_two}};
      if (!nk_cs.empty()) p["cs"] = split_ints(nk_cs);
      if (!nk_power.empty()) p["power"] = split_ints(nk_power);
      form_inputs(nk, p);
      return run_and_report(make_spec("necklace", nk.c, p, {}), "");
    }
    if (*alpha_form) {
      Json p{{"alpha", complex_json(af_alpha)}, {"m", split_ints(af_m)}, {"t", af_t}, {"eps", af_eps},
             {"pipeline", af_pipeline}};
      if (!af_measure.empty()) p["measure"] = {{"file", std::filesystem::absolute(af_measure).string()}};
      return run_and_report(make_spec("alpha", af, p, {}), "");
    }
    if (*energy) {
      Json p = Json::object();
      if (!en_measure.empty()) p["measure"] = {{"file", std::filesystem::absolute(en_measure).string()}};
      if (!en_alpha.empty()) p["alpha_list"] = split_numbers(en_alpha);
      if (!en_R.empty()) p["R_list"] = split_numbers(en_R);
      if (!en_riesz.empty()) p["riesz_alpha"] = split_numbers(en_riesz);
      return run_and_report(make_spec("energy", en, p, {}), "");
    }
    if (*scan) {
      Json p{{"t_min", sc_t0}, {"t_max", sc_t1}, {"t_steps", sc_steps}, {"eps_list", split_numbers(sc_eps)},
             {"k", sc_k}, {"threshold", sc_thr}};
      if (!sc_measure.empty()) p["measure"] = {{"file", std::filesystem::absolute(sc_measure).string()}};
      return run_and_report(make_spec("scan", sc, p, {}), "");
    }
    if (*search) {
      Json q{{"type", se_type}, {"t", se_t}, {"max_results", se_max}, {"min_nonplanarity", se_nonplanar}};
      q[se_type == "chain" ? "k" : "m"] = se_size;
      if (se_tol > 0.0) q["tol"] = se_tol;
      if (se_sep >= 0.0) q["sep_min"] = se_sep;
      Json p{{"query", q}};
      if (!se_cloud.empty()) p["cloud"] = {{"file", std::filesystem::absolute(se_cloud).string()}};
      return run_and_report(make_spec("search", se, p, {}), "");
    }
    if (*thresholds) {
      Json p{{"d", th_d}, {"variant", th_variant}};
      if (!th_delta.empty()) p["delta"] = th_delta;
      const auto res = ex::run(make_spec("thresholds", th, p, {}), "");
      std::cout << res.artifacts.front().bytes;
      return 0;
    }
    if (*verify) {
      const auto rep = nlab::verify::run_suite(vf_suite);
      for (const auto& r : rep.results)
        std::cout << Json{{"suite", rep.suite}, {"property", r.id}, {"pass", r.pass}, {"value", r.value},
                          {"detail", r.detail}}
                         .dump()
                  << "\n";
      if (!rep.all_pass()) {
        std::cerr << "failed property: " << rep.first_failure() << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const nlab::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlab::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
