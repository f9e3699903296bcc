#pragma once

// Text formats:
//
//   torusfield v1 n=<n> s=<s> kmax=<kmax>
//   <k_1> ... <k_n> <re_1> <im_1> ... <re_n> <im_n>
//
// one line per nonzero mode, one representative per pair {k, -k} (first
// nonzero entry of k positive) plus k = 0, sorted lexicographically. The
// reader accepts either or both members of a pair.
//
//   freq v1 n=<n> tau=<tau> gamma=<gamma> gammabar=<gammabar>
//   <alpha~_1> ... <alpha~_{n-1}>

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "kam/diophantine.hpp"
#include "kam/spectral_field.hpp"

namespace kam {

void write_field(std::ostream& os, const FourierField& field);
FourierField read_field(std::istream& is);
void save_field(const std::string& path, const FourierField& field);
FourierField load_field(const std::string& path);

void write_frequency(std::ostream& os, const FrequencyVector& alpha);
FrequencyVector read_frequency(std::istream& is);
void save_frequency(const std::string& path, const FrequencyVector& alpha);
FrequencyVector load_frequency(const std::string& path);

/// JSON text with every floating-point number printed as %.17g.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace kam
