#pragma once

// Shortest round-trip decimal formatting shared by the report writer, the
// targets files, and the CLI, so equal runs produce byte-equal output.

#include <string>

namespace featml {

std::string format_double(double v);            // shortest round-trip form
double parse_double(const std::string& text);   // throws on trailing junk

}  // namespace featml
