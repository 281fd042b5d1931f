#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nlab/convolution.hpp"
#include "nlab/forms.hpp"
#include "nlab/fractal.hpp"
#include "nlab/kernels.hpp"

namespace nlab::io {

using Json = nlohmann::ordered_json;

// Writes to a sibling temp file and renames it over path; the temp file is
// removed if anything fails. Parent directories are created.
void atomic_write(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

// Shortest round-trip decimal for a double.
std::string format_double(double v);

IfsSpec ifs_from_json(const Json& j);
Json ifs_to_json(const IfsSpec& spec);
IfsSpec read_ifs(const std::string& path);

// GMSR container: "GMSR", u32 version, u32 d, u32 n, f64 L, f64 origin, then
// row-major f64 data. Version 1 carries one component, version 2 two
// (real block then imaginary block).
std::string encode_measure(const GridMeasure& mu);
GridMeasure decode_measure(const std::string& bytes);
void write_measure(const std::string& path, const GridMeasure& mu);
GridMeasure read_measure(const std::string& path);

// Kernel data in a GMSR container plus a JSON sidecar at path + ".json".
std::string encode_kernel(const KernelField& k);
Json kernel_sidecar(const KernelField& k);
void write_kernel(const std::string& path, const KernelField& k);
KernelField read_kernel(const std::string& path);

std::string encode_cloud(const PointCloud& c);
PointCloud decode_cloud(const std::string& text);
void write_cloud(const std::string& path, const PointCloud& c);
PointCloud read_cloud(const std::string& path);

std::string encode_gap_curve(const GapCurve& c);

Json form_report_json(const FormReport& r);

}  // namespace nlab::io
