#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../error.hpp"

// Key schema for run configs. A config is one JSON object; every key must be
// declared by the command's schema, values are type- and range-checked, and the
// resolved object (defaults filled in) is what gets hashed and reported.

namespace kinlab::lab {

using json = nlohmann::ordered_json;

struct Field {
  std::string key;
  std::string type;  // for docs
  std::string doc;
  std::string range;
  bool required = false;
  std::function<void(const json&)> set;
  std::function<json()> get;
};

class Schema {
 public:
  explicit Schema(std::string command) : command_(std::move(command)) {}

  const std::string& command() const { return command_; }
  const std::vector<Field>& fields() const { return fields_; }

  Schema& integer(const std::string& key, int& target, long lo, long hi, std::string doc) {
    return add_int(key, target, lo, hi, std::move(doc));
  }
  Schema& integer(const std::string& key, long& target, long lo, long hi, std::string doc) {
    return add_int(key, target, lo, hi, std::move(doc));
  }

  Schema& seed(std::uint64_t& target) {
    Field f{"seed", "unsigned integer", "RNG master seed (mandatory)", ">= 0", true, nullptr, nullptr};
    f.set = [&target](const json& v) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError("seed must be a nonnegative integer");
      target = v.get<std::uint64_t>();
    };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  Schema& real(const std::string& key, double& target, double lo, double hi, std::string doc, bool open_lo = false) {
    Field f{key, "number", std::move(doc), range_text(lo, hi, open_lo), false, nullptr, nullptr};
    f.set = [&target, key, lo, hi, open_lo](const json& v) { target = check_real(key, v, lo, hi, open_lo); };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  Schema& boolean(const std::string& key, bool& target, std::string doc) {
    Field f{key, "boolean", std::move(doc), "true | false", false, nullptr, nullptr};
    f.set = [&target, key](const json& v) {
      if (!v.is_boolean()) throw ConfigError(key + " must be a boolean");
      target = v.get<bool>();
    };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  Schema& choice(const std::string& key, std::string& target, std::vector<std::string> allowed, std::string doc) {
    std::string r;
    for (const auto& a : allowed) r += (r.empty() ? "" : " | ") + a;
    Field f{key, "string", std::move(doc), r, false, nullptr, nullptr};
    f.set = [&target, key, allowed](const json& v) {
      if (!v.is_string()) throw ConfigError(key + " must be a string");
      const auto s = v.get<std::string>();
      if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) throw ConfigError(key + ": unsupported value '" + s + "'");
      target = s;
    };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  Schema& choices(const std::string& key, std::vector<std::string>& target, std::vector<std::string> allowed, std::string doc) {
    std::string r;
    for (const auto& a : allowed) r += (r.empty() ? "" : " | ") + a;
    Field f{key, "list of strings", std::move(doc), "each " + r, false, nullptr, nullptr};
    f.set = [&target, key, allowed](const json& v) {
      if (!v.is_array()) throw ConfigError(key + " must be a list");
      std::vector<std::string> out;
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError(key + " entries must be strings");
        const auto s = e.get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) throw ConfigError(key + ": unsupported value '" + s + "'");
        out.push_back(s);
      }
      target = std::move(out);
    };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  Schema& integers(const std::string& key, std::vector<int>& target, long lo, long hi, std::size_t min_len, std::size_t max_len,
                   std::string doc) {
    Field f{key, "list of integers", std::move(doc), "each " + range_text(lo, hi, false) + ", length " + len_text(min_len, max_len),
            false, nullptr, nullptr};
    f.set = [&target, key, lo, hi, min_len, max_len](const json& v) {
      check_len(key, v, min_len, max_len);
      std::vector<int> out;
      for (const auto& e : v) out.push_back(static_cast<int>(check_int(key, e, lo, hi)));
      target = std::move(out);
    };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  Schema& reals(const std::string& key, std::vector<double>& target, double lo, double hi, std::size_t min_len, std::size_t max_len,
                std::string doc, bool open_lo = false) {
    Field f{key, "list of numbers", std::move(doc), "each " + range_text(lo, hi, open_lo) + ", length " + len_text(min_len, max_len),
            false, nullptr, nullptr};
    f.set = [&target, key, lo, hi, min_len, max_len, open_lo](const json& v) {
      check_len(key, v, min_len, max_len);
      std::vector<double> out;
      for (const auto& e : v) out.push_back(check_real(key, e, lo, hi, open_lo));
      target = std::move(out);
    };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  // Applies `cfg` and returns the resolved config (every key, schema order).
  json apply(const json& cfg) const {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      if (it.key() == "command") {
        if (!it.value().is_string() || it.value().get<std::string>() != command_)
          throw ConfigError("config is for command '" + it.value().dump() + "', not '" + command_ + "'");
        continue;
      }
      const Field* f = find(it.key());
      if (!f) throw ConfigError("unknown key '" + it.key() + "' for " + command_);
    }
    for (const auto& f : fields_) {
      if (cfg.contains(f.key))
        f.set(cfg.at(f.key));
      else if (f.required)
        throw ConfigError("missing mandatory key '" + f.key + "'");
    }
    json out = json::object();
    out["command"] = command_;
    for (const auto& f : fields_) out[f.key] = f.get();
    return out;
  }

 private:
  std::string command_;
  std::vector<Field> fields_;

  const Field* find(const std::string& key) const {
    for (const auto& f : fields_)
      if (f.key == key) return &f;
    return nullptr;
  }

  template <class T>
  Schema& add_int(const std::string& key, T& target, long lo, long hi, std::string doc) {
    Field f{key, "integer", std::move(doc), range_text(lo, hi, false), false, nullptr, nullptr};
    f.set = [&target, key, lo, hi](const json& v) { target = static_cast<T>(check_int(key, v, lo, hi)); };
    f.get = [&target] { return json(target); };
    fields_.push_back(std::move(f));
    return *this;
  }

  static long check_int(const std::string& key, const json& v, long lo, long hi) {
    if (!v.is_number_integer()) throw ConfigError(key + " must be an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) throw ConfigError(key + " = " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<long>(x);
  }

  static double check_real(const std::string& key, const json& v, double lo, double hi, bool open_lo) {
    if (!v.is_number()) throw ConfigError(key + " must be a number");
    const double x = v.get<double>();
    if (!(open_lo ? x > lo : x >= lo) || !(x <= hi)) throw ConfigError(key + " = " + v.dump() + " outside " + range_text(lo, hi, open_lo));
    return x;
  }

  static void check_len(const std::string& key, const json& v, std::size_t lo, std::size_t hi) {
    if (!v.is_array()) throw ConfigError(key + " must be a list");
    if (v.size() < lo || v.size() > hi) throw ConfigError(key + " must have length " + len_text(lo, hi));
  }

  static std::string num(double x) {
    std::ostringstream s;
    s << x;
    return s.str();
  }
  static std::string range_text(double lo, double hi, bool open_lo) {
    return std::string(open_lo ? "(" : "[") + num(lo) + ", " + num(hi) + "]";
  }
  static std::string len_text(std::size_t lo, std::size_t hi) {
    return lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi);
  }
};

inline json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

// FNV-1a over the compact dump of the resolved config.
inline std::string config_hash(const json& resolved) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : resolved.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kinlab::lab
