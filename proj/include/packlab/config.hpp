#pragma once

// Flat key-value run configuration. One `key = value` pair per line,
// '#' comments. Values are kept as strings; typed getters parse on
// demand. Numeric forms accepted everywhere: integer, decimal,
// rational "p/q", power "b^e" (integer base/exponent), hex float
// "0x1.8p-3". Lists use ';' separators.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "packlab/real.hpp"

namespace packlab {

struct Rational {
  long num = 0;
  unsigned long den = 1;
};

class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  void set_default(const std::string& key, const std::string& value) {
    kv_.emplace(key, value);
  }

  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& dflt) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long dflt) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  Real get_real(const std::string& key, Prec prec) const;
  Rational get_rational(const std::string& key) const;
  std::vector<Real> get_real_list(const std::string& key, Prec prec) const;

  // keys with the given prefix stripped, as a sub-config
  Config subsection(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  std::string serialize() const;

  // Stable content hash over semantic keys; execution-only keys
  // (threads, out, plus any listed extras) are excluded.
  std::uint64_t semantic_hash() const;

 private:
  std::map<std::string, std::string> kv_;
};

// numeric literal parsing used by Config and the CLI
Real parse_real(const std::string& text, Prec prec, Rnd rnd = Rnd::Near);
std::optional<Rational> parse_rational(const std::string& text);
std::vector<std::string> split_list(const std::string& text, char sep = ';');

std::uint64_t fnv1a64(const std::string& s);
std::string to_hex_u64(std::uint64_t v);

}  // namespace packlab
