#pragma once

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace deepadmr {

/// Raised for malformed or out-of-contract configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace json_util {

using nlohmann::json;

/// Rejects any key of `obj` not listed in `allowed`.
inline void require_known_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                               std::string_view context) {
  if (!obj.is_object()) throw ConfigError(std::string(context) + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(std::string(context) + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_if_present(const json& obj, const char* key, T& out, std::string_view context) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(context) + "." + key + ": " + e.what());
  }
}

}  // namespace json_util
}  // namespace deepadmr
