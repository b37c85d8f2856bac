#pragma once

// Plain-text key=value configuration: one pair per line, '#' starts a comment.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace dfpc {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config(std::istream& is);
KeyValues read_config_file(const std::filesystem::path& path);

// Keys in sorted order; `comments` are written first as '# ' lines.
void write_config(std::ostream& os, const KeyValues& kv,
                  const std::vector<std::string>& comments = {});
void write_config_file(const std::filesystem::path& path, const KeyValues& kv,
                       const std::vector<std::string>& comments = {});

// Shortest text that reads back to the same double ("inf", "-inf", "nan" for
// non-finite values).
std::string format_double(double v);

// Comma-separated list of doubles; accepts "inf".
std::vector<double> parse_double_list(const std::string& s);

}  // namespace dfpc
