#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "impsynth/error.hpp"

namespace impsynth {

using Int = boost::multiprecision::mpz_int;

inline std::string to_string(const Int& v) { return v.str(); }

inline std::string to_hex(const Int& v) {
  if (v < 0) return "-" + to_hex(Int(-v));
  return "0x" + v.str(0, std::ios_base::hex);
}

/// Parses an optionally signed decimal (or 0x-prefixed hex) integer.
inline Int parse_int(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  bool hex = body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X');
  std::string_view digits = hex ? body.substr(2) : body;
  if (digits.empty()) throw FormatError("expected an integer, got '" + std::string(text) + "'");
  for (char c : digits) {
    bool ok = hex ? std::isxdigit(static_cast<unsigned char>(c)) != 0
                  : std::isdigit(static_cast<unsigned char>(c)) != 0;
    if (!ok) throw FormatError("expected an integer, got '" + std::string(text) + "'");
  }
  Int v(hex ? "0x" + std::string(digits) : std::string(digits));
  return negative ? Int(-v) : v;
}

}  // namespace impsynth
