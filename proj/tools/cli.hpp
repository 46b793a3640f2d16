#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tns/circuit.hpp"
#include "tns/config.hpp"

namespace tns::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs `tnscatter` with the given arguments (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Rows of the `resources` table for a configuration.
std::vector<ResourceRow> resource_table(const Config& cfg);

/// Default initial evolution time for the three reference (m, g) pairs.
double default_t0(double m, double g);

}  // namespace tns::cli
