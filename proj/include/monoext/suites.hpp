#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace monoext {

// Outcome of one property suite. Everything in to_json() is a function of the
// suite name and seed only, so two runs with the same seed serialize to the
// same bytes.
class SuiteReport {
 public:
  SuiteReport(std::string name, std::uint64_t seed) : name_(std::move(name)), seed_(seed) {}

  const std::string& name() const { return name_; }
  std::uint64_t seed() const { return seed_; }
  bool passed() const { return checks_ > 0 && failed_ == 0; }
  std::size_t checks() const { return checks_; }
  std::size_t failed() const { return failed_; }
  const std::vector<std::string>& failures() const { return failures_; }

  void expect(bool ok, const std::string& what) {
    if (record(ok)) failures_.push_back(what);
  }
  // describe() only runs on failure.
  template <class Describe>
  void expect_lazy(bool ok, Describe&& describe) {
    if (record(ok)) failures_.push_back(describe());
  }

  nlohmann::json metrics;
  nlohmann::json to_json() const;

 private:
  // True when a failure message should be kept; only the first few are.
  bool record(bool ok) {
    ++checks_;
    if (ok) return false;
    ++failed_;
    return failures_.size() < kMaxFailures;
  }
  static constexpr std::size_t kMaxFailures = 20;

  std::string name_;
  std::uint64_t seed_ = 0;
  std::size_t checks_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

struct SuiteInfo {
  std::string name;
  std::string summary;
};
const std::vector<SuiteInfo>& suites();
bool is_suite(std::string_view name);

struct SuiteOptions {
  std::uint64_t seed = 0;
  bool force_failure = false;  // adds one failing check, to exercise exit codes
};
// Throws InvalidArgument for an unknown name.
SuiteReport run_suite(std::string_view name, const SuiteOptions& opt = {});

}  // namespace monoext
