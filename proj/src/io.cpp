#include "nlab/io.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlab/errors.hpp"

namespace nlab::io {

namespace fs = std::filesystem;

void atomic_write(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      out.flush();
      if (!out) throw std::runtime_error("short write to " + tmp);
    }
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string format_double(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

IfsSpec ifs_from_json(const Json& j) {
  IfsSpec s;
  const Json& d = field(j, "d", "ifs");
  if (!d.is_number_integer()) throw ValidationError("ifs.d: expected an integer");
  s.d = d.get<int>();
  const Json& maps = field(j, "maps", "ifs");
  if (!maps.is_array()) throw ValidationError("ifs.maps: expected an array");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string where = "ifs.maps[" + std::to_string(i) + "]";
    SimilarityMap m;
    m.ratio = number(field(maps[i], "ratio", where), where + ".ratio");
    m.offset = numbers(field(maps[i], "offset", where), where + ".offset");
    if (maps[i].contains("rotation") && !maps[i]["rotation"].is_null()) {
      const Json& rot = maps[i]["rotation"];
      // Accept a flat row-major list or a list of rows.
      if (rot.is_array() && !rot.empty() && rot[0].is_array()) {
        for (std::size_t r = 0; r < rot.size(); ++r) {
          const auto row = numbers(rot[r], where + ".rotation[" + std::to_string(r) + "]");
          m.rotation.insert(m.rotation.end(), row.begin(), row.end());
        }
      } else {
        m.rotation = numbers(rot, where + ".rotation");
      }
    }
    s.maps.push_back(std::move(m));
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw ValidationError("ifs.seed: expected a nonnegative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  s.validate();
  return s;
}

Json ifs_to_json(const IfsSpec& spec) {
  Json j;
  j["d"] = spec.d;
  j["maps"] = Json::array();
  for (const auto& m : spec.maps) {
    Json e;
    e["ratio"] = m.ratio;
    e["offset"] = m.offset;
    if (m.rotated()) e["rotation"] = m.rotation;
    j["maps"].push_back(e);
  }
  j["seed"] = spec.seed;
  return j;
}

IfsSpec read_ifs(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return ifs_from_json(j);
}

namespace {

constexpr char kMagic[4] = {'G', 'M', 'S', 'R'};
constexpr std::size_t kHeader = 32;

template <class T>
void put(std::string& s, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  s.append(b, sizeof(T));
}

template <class T>
T get(const std::string& s, std::size_t off) {
  T v;
  std::memcpy(&v, s.data() + off, sizeof(T));
  return v;
}

std::string encode(const GridSpec& g, double origin, const std::vector<double>& a, const std::vector<double>* b) {
  std::string s;
  s.reserve(kHeader + 8 * (a.size() + (b ? b->size() : 0)));
  s.append(kMagic, 4);
  put<std::uint32_t>(s, b ? 2u : 1u);
  put<std::uint32_t>(s, static_cast<std::uint32_t>(g.d));
  put<std::uint32_t>(s, static_cast<std::uint32_t>(g.n));
  put<double>(s, g.L);
  put<double>(s, origin);
  s.append(reinterpret_cast<const char*>(a.data()), 8 * a.size());
  if (b) s.append(reinterpret_cast<const char*>(b->data()), 8 * b->size());
  return s;
}

struct Decoded {
  GridSpec grid;
  double origin = 0.0;
  std::vector<double> a, b;
};

Decoded decode(const std::string& s) {
  if (s.size() < kHeader || std::memcmp(s.data(), kMagic, 4) != 0) throw ValidationError("not a GMSR file");
  const auto version = get<std::uint32_t>(s, 4);
  if (version != 1 && version != 2) throw ValidationError("unsupported GMSR version " + std::to_string(version));
  Decoded out;
  out.grid.d = static_cast<int>(get<std::uint32_t>(s, 8));
  out.grid.n = static_cast<int>(get<std::uint32_t>(s, 12));
  out.grid.L = get<double>(s, 16);
  out.origin = get<double>(s, 24);
  out.grid.validate();
  const std::size_t count = out.grid.cells();
  if (s.size() != kHeader + 8 * count * version) throw ValidationError("GMSR payload size does not match the header");
  out.a.resize(count);
  std::memcpy(out.a.data(), s.data() + kHeader, 8 * count);
  if (version == 2) {
    out.b.resize(count);
    std::memcpy(out.b.data(), s.data() + kHeader + 8 * count, 8 * count);
  }
  return out;
}

}  // namespace

std::string encode_measure(const GridMeasure& mu) { return encode(mu.grid, mu.origin, mu.density, nullptr); }

GridMeasure decode_measure(const std::string& bytes) {
  Decoded d = decode(bytes);
  if (!d.b.empty()) throw ValidationError("GMSR file holds a complex field, not a measure");
  for (double v : d.a)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("measure density must be finite and nonnegative");
  return GridMeasure::from_density(d.grid, d.origin, std::move(d.a));
}

void write_measure(const std::string& path, const GridMeasure& mu) { atomic_write(path, encode_measure(mu)); }
GridMeasure read_measure(const std::string& path) { return decode_measure(read_file(path)); }

Json kernel_sidecar(const KernelField& k) {
  Json j;
  j["kind"] = kernel_kind_name(k.kind);
  j["t"] = k.t;
  j["alpha"] = {k.alpha.real(), k.alpha.imag()};
  j["eps"] = k.eps;
  j["construction"] = k.construction;
  j["raw_mass"] = k.raw_mass;
  j["components"] = k.is_complex() ? 2 : 1;
  j["grid"] = {{"d", k.grid.d}, {"n", k.grid.n}, {"L", k.grid.L}};
  return j;
}

std::string encode_kernel(const KernelField& k) { return encode(k.grid, 0.0, k.re, k.is_complex() ? &k.im : nullptr); }

void write_kernel(const std::string& path, const KernelField& k) {
  atomic_write(path, encode_kernel(k));
  atomic_write(path + ".json", kernel_sidecar(k).dump(2) + "\n");
}

KernelField read_kernel(const std::string& path) {
  Decoded d = decode(read_file(path));
  Json side;
  try {
    side = Json::parse(read_file(path + ".json"));
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ".json: " + e.what());
  }
  KernelField k;
  k.grid = d.grid;
  const std::string kind = field(side, "kind", "kernel sidecar").get<std::string>();
  if (kind == "sphere") k.kind = KernelKind::sphere;
  else if (kind == "alpha") k.kind = KernelKind::alpha;
  else if (kind == "modulus") k.kind = KernelKind::modulus;
  else throw ValidationError("kernel sidecar: unknown kind '" + kind + "'");
  k.t = number(field(side, "t", "kernel sidecar"), "kernel sidecar.t");
  const auto a = numbers(field(side, "alpha", "kernel sidecar"), "kernel sidecar.alpha");
  if (a.size() != 2) throw ValidationError("kernel sidecar.alpha: expected [re, im]");
  k.alpha = {a[0], a[1]};
  k.eps = number(field(side, "eps", "kernel sidecar"), "kernel sidecar.eps");
  if (side.contains("construction")) k.construction = side["construction"].get<std::string>();
  if (side.contains("raw_mass")) k.raw_mass = side["raw_mass"].get<double>();
  const int comps = field(side, "components", "kernel sidecar").get<int>();
  if (comps != (d.b.empty() ? 1 : 2)) throw ValidationError("kernel sidecar component count disagrees with the data");
  k.re = std::move(d.a);
  k.im = std::move(d.b);
  return k;
}

std::string encode_cloud(const PointCloud& c) {
  std::string s;
  for (int a = 0; a < c.d; ++a) s += "x" + std::to_string(a + 1) + ",";
  s += "w\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int a = 0; a < c.d; ++a) s += format_double(c.coords[i * c.d + a]) + ",";
    s += format_double(c.weights[i]) + "\n";
  }
  return s;
}

PointCloud decode_cloud(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("line 1: empty point cloud file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> head;
  {
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) head.push_back(tok);
  }
  const int d = static_cast<int>(head.size()) - 1;
  if (d < 1 || d > kMaxDim || head.back() != "w") throw ValidationError("line 1: expected header x1,...,xd,w");
  for (int a = 0; a < d; ++a)
    if (head[a] != "x" + std::to_string(a + 1)) throw ValidationError("line 1: expected header x1,...,xd,w");
  PointCloud c;
  c.d = d;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string tok;
    int col = 0;
    while (std::getline(ls, tok, ',')) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (tok.empty() || *end != '\0')
        throw ValidationError("line " + std::to_string(lineno) + ": cannot parse '" + tok + "'");
      if (col < d) c.coords.push_back(v);
      else if (col == d) c.weights.push_back(v);
      ++col;
    }
    if (col != d + 1)
      throw ValidationError("line " + std::to_string(lineno) + ": expected " + std::to_string(d + 1) + " columns");
  }
  c.validate();
  return c;
}

void write_cloud(const std::string& path, const PointCloud& c) { atomic_write(path, encode_cloud(c)); }
PointCloud read_cloud(const std::string& path) { return decode_cloud(read_file(path)); }

std::string encode_gap_curve(const GapCurve& c) {
  std::string s = "t,eps,mass,spread,flag\n";
  for (const auto& p : c.samples)
    s += format_double(p.t) + "," + format_double(p.eps) + "," + format_double(p.mass) + "," +
         format_double(p.spread) + "," + (p.flag ? "1" : "0") + "\n";
  return s;
}

Json form_report_json(const FormReport& r) {
  Json j;
  j["form"] = r.form;
  Json p = Json::object();
  for (const auto& [k, v] : r.params) p[k] = v;
  j["params"] = p;
  j["value"] = {r.value.real(), r.value.imag()};
  if (r.oracle) j["oracle"] = *r.oracle;
  if (r.rel_dev) j["rel_dev"] = *r.rel_dev;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace nlab::io
