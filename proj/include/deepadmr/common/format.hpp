#pragma once

#include <charconv>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deepadmr {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    // from_chars rejects "inf"/"nan" spelled differently on some platforms
    std::string s(text);
    char* e = nullptr;
    v = std::strtod(s.c_str(), &e);
    if (e == s.c_str() || *e != '\0') throw std::runtime_error("not a number: '" + s + "'");
  }
  return v;
}

}  // namespace deepadmr
