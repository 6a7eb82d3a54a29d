#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace tgclstm {

/// Plain `key = value` lines; `#` starts a comment. Keys are normalised so
/// `batch-size` and `batch_size` name the same entry.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text, std::string_view source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  bool contains(std::string_view key) const { return get(key).has_value(); }
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  static std::string normalize_key(std::string_view key);

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace tgclstm
