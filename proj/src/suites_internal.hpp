#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "monoext/suites.hpp"

namespace monoext::suite_detail {

// Independent stream per suite: splitmix64 of seed + salt.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t salt);

std::string fmt(double v);

void nesting(SuiteReport& r);
void choquet(SuiteReport& r);
void vertices(SuiteReport& r);
void gutmann(SuiteReport& r);
void rectangle(SuiteReport& r);
void extremes(SuiteReport& r);
void anti(SuiteReport& r);
void pubgood(SuiteReport& r);
void trade(SuiteReport& r);
void rfauction(SuiteReport& r);
void ppi(SuiteReport& r);

}  // namespace monoext::suite_detail
