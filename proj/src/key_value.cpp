#include "tsr/key_value.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tsr {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueDocument KeyValueDocument::parse(std::istream& in, const std::string& source) {
  KeyValueDocument doc;
  doc.source_ = source;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(source + ":" + std::to_string(line_no) +
                            ": expected 'key = value'");
    }
    const std::string key(trim(view.substr(0, eq)));
    const std::string value(trim(view.substr(eq + 1)));
    if (key.empty()) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    if (doc.entries_.contains(key)) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate key '" +
                            key + "'");
    }
    doc.entries_.emplace(key, Entry{value, line_no});
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open configuration file " + path.string());
  return parse(in, path.string());
}

bool KeyValueDocument::contains(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

const std::string& KeyValueDocument::raw(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ValidationError(source_ + ": missing key '" + std::string(key) + "'");
  }
  return it->second.value;
}

std::string KeyValueDocument::where(std::string_view key) const {
  const auto it = entries_.find(key);
  const int line = it == entries_.end() ? 0 : it->second.line;
  return source_ + ":" + std::to_string(line) + ": key '" + std::string(key) + "'";
}

double KeyValueDocument::get_double(std::string_view key, double fallback) const {
  if (!contains(key)) return fallback;
  return parse_double(raw(key), where(key));
}

std::size_t KeyValueDocument::get_count(std::string_view key, std::size_t fallback) const {
  if (!contains(key)) return fallback;
  return static_cast<std::size_t>(get_u64(key, 0));
}

std::uint64_t KeyValueDocument::get_u64(std::string_view key, std::uint64_t fallback) const {
  if (!contains(key)) return fallback;
  const std::string& text = raw(key);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(where(key) + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::string KeyValueDocument::get_string(std::string_view key,
                                         const std::string& fallback) const {
  return contains(key) ? raw(key) : fallback;
}

std::vector<double> KeyValueDocument::get_double_list(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) out.push_back(parse_double(item, where(key)));
  return out;
}

std::vector<std::string> KeyValueDocument::get_string_list(std::string_view key) const {
  return split_list(raw(key));
}

void KeyValueDocument::reject_unknown(
    const std::set<std::string, std::less<>>& allowed) const {
  for (const auto& [key, entry] : entries_) {
    if (!allowed.contains(key)) {
      throw ValidationError(source_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                            key + "'");
    }
  }
}

double parse_double(std::string_view text, const std::string& context) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ValidationError(context + ": expected a finite number, got '" + std::string(text) +
                          "'");
  }
  return value;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const auto item = trim(text.substr(start, end - start));
    if (!item.empty()) items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

}  // namespace tsr
