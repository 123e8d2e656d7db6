#include "cxg/workspace.hpp"

#include <cstdio>
#include <fstream>

#include "cxg/hash.hpp"
#include "cxg/text.hpp"

namespace cxg {

Config Config::parse(std::istream& in) {
  Config config;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    auto key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    config.set(std::string(key), std::string(trim(t.substr(eq + 1))));
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return parse(in);
}

void Config::set(std::string key, std::string value) {
  values_[std::move(key)] = std::move(value);
}

std::optional<std::string> Config::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::string Config::hash(std::span<const std::string_view> keys) const {
  std::uint64_t h = kFnvOffset;
  for (auto key : keys) {
    h = fnv1a(key, h);
    h = fnv1a("=", h);
    h = fnv1a(get_or(key, ""), h);
    h = fnv1a("\n", h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path meta_path(const std::filesystem::path& derived) {
  auto p = derived;
  p += ".meta";
  return p;
}

void write_meta(const std::filesystem::path& derived, std::string_view stage,
                std::string_view config_hash) {
  const auto path = meta_path(derived);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "stage = " << stage << '\n' << "config_hash = " << config_hash << '\n';
}

std::optional<std::string> read_meta_hash(const std::filesystem::path& derived) {
  const auto path = meta_path(derived);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return Config::load(path).get("config_hash");
}

void check_fresh(const std::filesystem::path& derived, std::string_view expected_hash) {
  auto recorded = read_meta_hash(derived);
  if (recorded && *recorded != expected_hash) {
    throw StaleError(derived.string() + " was built with config hash " + *recorded +
                     " but the current configuration hashes to " + std::string(expected_hash));
  }
}

}  // namespace cxg
