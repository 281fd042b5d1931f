#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nlab/io.hpp"

namespace nlab::experiment {

using io::Json;

inline constexpr const char* kTool = "necklace_lab";

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Reads typed fields out of a JSON object and reports schema violations with
// the dotted path and the source line where the key appears.
class Reader {
 public:
  Reader(const Json& j, std::string path, const std::string* source = nullptr);

  bool has(const char* key) const;
  const Json& raw(const char* key) const;
  Reader child(const char* key) const;
  double num(const char* key) const;
  double num(const char* key, double fallback) const;
  int integer(const char* key) const;
  int integer(const char* key, int fallback) const;
  std::string str(const char* key) const;
  std::string str(const char* key, const std::string& fallback) const;
  bool flag(const char* key, bool fallback) const;
  std::vector<double> nums(const char* key) const;
  std::vector<double> nums(const char* key, const std::vector<double>& fallback) const;
  std::vector<int> ints(const char* key) const;
  Complex complex(const char* key, Complex fallback) const;

  [[noreturn]] void fail(const char* key, const std::string& what) const;
  const Json& json() const { return *j_; }

 private:
  const Json* j_;
  std::string path_;
  const std::string* source_;
};

// Measures: {"preset": uniform_torus | atom | full_cube | cantor_dust | menger
// | random_grid | grid_subcubes, "d", "n", "L", "depth", ...}, {"ifs": path
// or object, "depth", "n", "L"} or {"file": gmsr path}.
GridMeasure measure_from_json(const Reader& r, const std::string& base_dir, std::uint64_t seed);
IfsSpec ifs_from_descriptor(const Reader& r, const std::string& base_dir, std::uint64_t seed);
// Kernels: {"type": sphere | alpha, "t", "eps", "alpha": [re, im], "branch"}
// or {"file": path}.
KernelField kernel_from_json(const Reader& r, const GridSpec& g, const std::string& base_dir);
// Clouds: {"file": csv path} or an IFS descriptor with "count" and "depth".
PointCloud cloud_from_json(const Reader& r, const std::string& base_dir, std::uint64_t seed);

struct ExperimentSpec {
  std::string kind;
  Json inputs = Json::object();
  Json params = Json::object();
  std::string output;
  std::uint64_t seed = 0;
  std::string source;    // raw text, hashed into the manifest
  std::string base_dir;  // relative paths resolve against this
};

ExperimentSpec parse_spec(const std::string& text, const std::string& base_dir);
ExperimentSpec load_spec(const std::string& path);

struct Artifact {
  std::string name;
  std::string bytes;
};

struct RunResult {
  std::vector<Artifact> artifacts;  // numeric outputs, in write order
  std::string output_hash;
  Json manifest;
  std::string output_dir;
};

// Computes every artifact in memory, then writes them and the manifest
// atomically. An empty output_override keeps the spec's output directory.
RunResult run(const ExperimentSpec& spec, const std::string& output_override = "");

// Hash over artifact names and bytes; wall time never enters it.
std::string output_hash(const std::vector<Artifact>& artifacts);

}  // namespace nlab::experiment
