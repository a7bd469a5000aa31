#pragma once

#include <string>

#include "mmab/harness.hpp"

namespace mmab {

// Static regret-vs-slot plot with a shaded confidence band, written as a
// self-contained SVG. The output format follows the file extension; only
// ".svg" is supported. Throws IoError on an empty curve or write failure and
// ConfigError on an unsupported extension; no file is created in either case.
void emit_plot(const AggregateCurve& curve, const std::string& path,
               const std::string& title);

} // namespace mmab
