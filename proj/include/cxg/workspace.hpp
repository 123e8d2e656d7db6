#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cxg/error.hpp"

namespace cxg {

// A derived file was built under a different configuration than the one in
// effect now.
class StaleError : public Error {
 public:
  using Error::Error;
};

// `key = value` settings. Blank lines and lines starting with '#' are
// ignored; later assignments override earlier ones.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

  // Hex FNV-1a over "key=value\n" for each listed key, in the given order.
  std::string hash(std::span<const std::string_view> keys) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Sidecar `<file>.meta` recording the stage and config hash a file was built
// from.
std::filesystem::path meta_path(const std::filesystem::path& derived);
void write_meta(const std::filesystem::path& derived, std::string_view stage,
                std::string_view config_hash);
std::optional<std::string> read_meta_hash(const std::filesystem::path& derived);

// Throws StaleError when `derived` has a sidecar whose hash differs from
// `expected_hash`. Files without a sidecar are accepted.
void check_fresh(const std::filesystem::path& derived, std::string_view expected_hash);

}  // namespace cxg
