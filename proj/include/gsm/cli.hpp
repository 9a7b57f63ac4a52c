#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

using Settings = std::map<std::string, std::string>;

/// Flat `key = value` lines; `#` starts a comment. Throws ConfigError on malformed lines.
Settings parse_config_text(const std::string& text);
Settings read_config_file(const std::filesystem::path& path);

/// Entry point of the command-line tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gsm::cli
