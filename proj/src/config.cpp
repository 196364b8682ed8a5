#include "packlab/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "packlab/error.hpp"

namespace packlab {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_long(const std::string& s, long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::CONFIG_INVALID, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::CONFIG_INVALID,
                  "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::CONFIG_INVALID, "line " + std::to_string(lineno) + ": empty key");
    c.kv_[key] = value;
  }
  return c;
}

std::string Config::get_str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw Error(ErrorCode::CONFIG_INVALID, "missing key '" + key + "'");
  return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

long Config::get_int(const std::string& key) const {
  long v;
  if (!parse_long(get_str(key), v))
    throw Error(ErrorCode::CONFIG_INVALID, "key '" + key + "' is not an integer");
  return v;
}

long Config::get_int(const std::string& key, long dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  long v;
  if (!parse_long(it->second, v))
    throw Error(ErrorCode::CONFIG_INVALID, "key '" + key + "' is not an integer");
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  std::uint64_t v = 0;
  const std::string& s = it->second;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::CONFIG_INVALID, "key '" + key + "' is not a u64");
  return v;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  const std::string& s = it->second;
  if (s == "true" || s == "on" || s == "1") return true;
  if (s == "false" || s == "off" || s == "0") return false;
  throw Error(ErrorCode::CONFIG_INVALID, "key '" + key + "' is not a bool");
}

Real Config::get_real(const std::string& key, Prec prec) const {
  return parse_real(get_str(key), prec);
}

Rational Config::get_rational(const std::string& key) const {
  auto r = parse_rational(get_str(key));
  if (!r) throw Error(ErrorCode::CONFIG_INVALID, "key '" + key + "' is not a rational");
  return *r;
}

std::vector<Real> Config::get_real_list(const std::string& key, Prec prec) const {
  std::vector<Real> out;
  for (const auto& item : split_list(get_str(key))) out.push_back(parse_real(item, prec));
  return out;
}

Config Config::subsection(const std::string& prefix) const {
  Config c;
  std::string p = prefix + ".";
  for (const auto& [k, v] : kv_)
    if (k.rfind(p, 0) == 0) c.kv_[k.substr(p.size())] = v;
  return c;
}

std::string Config::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : kv_) out << k << " = " << v << "\n";
  return out.str();
}

std::uint64_t Config::semantic_hash() const {
  std::string buf;
  for (const auto& [k, v] : kv_) {
    if (k == "threads" || k == "out" || k == "cache_dir") continue;
    buf += k;
    buf += '=';
    buf += v;
    buf += '\n';
  }
  return fnv1a64(buf);
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      cur = trim(cur);
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cur = trim(cur);
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::optional<Rational> parse_rational(const std::string& text) {
  auto slash = text.find('/');
  long num;
  if (slash == std::string::npos) {
    if (!parse_long(text, num)) return std::nullopt;
    return Rational{num, 1};
  }
  long den;
  if (!parse_long(trim(text.substr(0, slash)), num)) return std::nullopt;
  if (!parse_long(trim(text.substr(slash + 1)), den)) return std::nullopt;
  if (den <= 0) return std::nullopt;
  long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, static_cast<unsigned long>(den)};
}

Real parse_real(const std::string& text, Prec prec, Rnd rnd) {
  std::string s = trim(text);
  if (s.empty()) throw Error(ErrorCode::CONFIG_INVALID, "empty numeric literal");
  // power form b^e with integer base and exponent, e.g. "2^-20", "4^-64"
  auto caret = s.find('^');
  if (caret != std::string::npos && s.find("0x") != 0) {
    long base, e;
    if (parse_long(trim(s.substr(0, caret)), base) && parse_long(trim(s.substr(caret + 1)), e) &&
        base > 0) {
      return pow_si(Real::of_long(base, prec), e, prec, rnd);
    }
    throw Error(ErrorCode::CONFIG_INVALID, "bad power literal '" + s + "'");
  }
  // rational form p/q, exact division at target precision
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    auto r = parse_rational(s);
    if (!r) throw Error(ErrorCode::CONFIG_INVALID, "bad rational literal '" + s + "'");
    return div(Real::of_long(r->num, prec), Real::of_ulong(r->den, prec), prec, rnd);
  }
  return Real::parse(s, prec, rnd);
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex_u64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace packlab
