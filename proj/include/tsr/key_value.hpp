#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsr {

// Raised for malformed configuration, out-of-range fields and unknown keys.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Plain-text "key = value" document: one key per line, '#' starts a comment,
// list values are comma-separated. Keys may appear at most once.
class KeyValueDocument {
 public:
  static KeyValueDocument parse(std::istream& in, const std::string& source = "<input>");
  static KeyValueDocument load(const std::filesystem::path& path);

  bool contains(std::string_view key) const;
  const std::string& raw(std::string_view key) const;

  double get_double(std::string_view key, double fallback) const;
  std::size_t get_count(std::string_view key, std::size_t fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  std::string get_string(std::string_view key, const std::string& fallback) const;
  std::vector<double> get_double_list(std::string_view key) const;
  std::vector<std::string> get_string_list(std::string_view key) const;

  // Throws ValidationError naming the first key outside `allowed`.
  void reject_unknown(const std::set<std::string, std::less<>>& allowed) const;

  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string where(std::string_view key) const;

  std::string source_;
  std::map<std::string, Entry, std::less<>> entries_;
};

double parse_double(std::string_view text, const std::string& context);
std::vector<std::string> split_list(std::string_view text);

}  // namespace tsr
