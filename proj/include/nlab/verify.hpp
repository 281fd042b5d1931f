#pragma once

#include <string>
#include <vector>

namespace nlab::verify {

struct PropertyResult {
  std::string id;
  bool pass = false;
  double value = 0.0;  // the measured quantity: deviation, slack, ratio, exponent
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> results;
  bool all_pass() const;
  // First failing property id, or empty.
  std::string first_failure() const;
};

const std::vector<std::string>& suite_names();

// Throws ValidationError for an unknown suite name.
SuiteReport run_suite(const std::string& name);

}  // namespace nlab::verify
