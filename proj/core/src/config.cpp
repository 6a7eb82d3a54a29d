#include "tgclstm/config.hpp"

#include <fstream>
#include <sstream>

#include "tgclstm/csv.hpp"
#include "tgclstm/errors.hpp"

namespace tgclstm {

std::string ConfigFile::normalize_key(std::string_view key) {
  std::string out(csv::trim(key));
  while (out.starts_with("-")) out.erase(0, 1);
  for (char& c : out)
    if (c == '-') c = '_';
  return out;
}

ConfigFile ConfigFile::parse(std::string_view text, std::string_view source) {
  ConfigFile cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(std::string(source) + ":" + std::to_string(number) +
                        ": expected key = value");
    }
    const std::string key = normalize_key(trimmed.substr(0, eq));
    if (key.empty()) {
      throw FormatError(std::string(source) + ":" + std::to_string(number) + ": empty key");
    }
    cfg.entries_[key] = std::string(csv::trim(trimmed.substr(eq + 1)));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::optional<std::string> ConfigFile::get(std::string_view key) const {
  const auto it = entries_.find(normalize_key(key));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

}  // namespace tgclstm
