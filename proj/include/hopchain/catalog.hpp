#pragma once

// Language inventory with ancestry paths. File format, one language per line:
//   code<TAB>name<TAB>Family>Subfamily>...>Leaf
// Blank lines and lines starting with '#' are ignored.

#include <algorithm>
#include <compare>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hopchain/bundled_data.hpp"
#include "hopchain/errors.hpp"

namespace hopchain {

struct Language {
  std::string code;
  std::string name;
  std::vector<std::string> family_path;  // root first, leaf last
};

// Path length between two leaves of the family tree.
struct FamilyDistance {
  double value = 0.0;
  auto operator<=>(const FamilyDistance&) const = default;
};

class Catalog {
 public:
  Catalog(std::vector<Language> languages, std::string reference)
      : languages_(std::move(languages)), reference_(std::move(reference)) {
    std::sort(languages_.begin(), languages_.end(),
              [](const Language& a, const Language& b) { return a.code < b.code; });
    std::set<std::vector<std::string>> paths;
    for (std::size_t i = 0; i < languages_.size(); ++i) {
      const Language& lang = languages_[i];
      if (lang.code.empty()) throw IntegrityError("catalog: empty language code");
      if (lang.family_path.empty()) {
        throw IntegrityError("catalog: empty family path for '" + lang.code + "'");
      }
      if (!index_.emplace(lang.code, i).second) {
        throw IntegrityError("catalog: duplicate language code '" + lang.code + "'");
      }
      if (!paths.insert(lang.family_path).second) {
        throw IntegrityError("catalog: '" + lang.code +
                             "' shares its full family path with another language");
      }
    }
    if (languages_.size() < 2) {
      throw IntegrityError("catalog: needs at least two languages");
    }
    if (!contains(reference_)) {
      throw IntegrityError("catalog: reference language '" + reference_ +
                           "' is not listed");
    }
  }

  // Sorted by code.
  const std::vector<Language>& languages() const noexcept { return languages_; }
  std::size_t size() const noexcept { return languages_.size(); }
  const std::string& reference() const noexcept { return reference_; }

  bool contains(std::string_view code) const {
    return index_.find(std::string(code)) != index_.end();
  }

  const Language& at(std::string_view code) const {
    auto it = index_.find(std::string(code));
    if (it == index_.end()) {
      throw std::invalid_argument("unknown language code '" + std::string(code) + "'");
    }
    return languages_[it->second];
  }

  // Non-reference languages whose ancestry (excluding the leaf) contains
  // `family`, sorted by code.
  std::vector<std::string> family_members(std::string_view family) const {
    std::vector<std::string> out;
    for (const Language& lang : languages_) {
      if (lang.code == reference_) continue;
      const auto& path = lang.family_path;
      if (std::find(path.begin(), path.end() - 1, family) != path.end() - 1) {
        out.push_back(lang.code);
      }
    }
    return out;
  }

  std::vector<std::string> non_reference_codes() const {
    std::vector<std::string> out;
    for (const Language& lang : languages_) {
      if (lang.code != reference_) out.push_back(lang.code);
    }
    return out;
  }

  FamilyDistance max_distance() const;

 private:
  std::vector<Language> languages_;
  std::string reference_;
  std::map<std::string, std::size_t> index_;
};

// Edges up from `a` to the lowest common ancestor plus edges down to `b`.
// Paths without a common root meet at a virtual super-root.
inline FamilyDistance tree_distance(const Catalog& catalog, std::string_view a,
                                    std::string_view b) {
  const auto& pa = catalog.at(a).family_path;
  const auto& pb = catalog.at(b).family_path;
  std::size_t shared = 0;
  while (shared < pa.size() && shared < pb.size() && pa[shared] == pb[shared]) {
    ++shared;
  }
  return {static_cast<double>((pa.size() - shared) + (pb.size() - shared))};
}

inline FamilyDistance Catalog::max_distance() const {
  FamilyDistance best;
  for (std::size_t i = 0; i < languages_.size(); ++i) {
    for (std::size_t j = i + 1; j < languages_.size(); ++j) {
      best = std::max(best, tree_distance(*this, languages_[i].code,
                                          languages_[j].code));
    }
  }
  return best;
}

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

inline Catalog parse_catalog(std::string_view text,
                             const std::string& reference = "en") {
  std::vector<Language> languages;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty() || line.front() == '#') continue;

    auto fields = detail::split(line, '\t');
    if (fields.size() != 3) {
      throw IntegrityError("catalog line " + std::to_string(line_no) +
                           ": expected 3 tab-separated fields");
    }
    Language lang;
    lang.code = detail::trim(fields[0]);
    lang.name = detail::trim(fields[1]);
    for (auto& segment : detail::split(fields[2], '>')) {
      std::string label = detail::trim(segment);
      if (label.empty()) {
        throw IntegrityError("catalog line " + std::to_string(line_no) +
                             ": empty family path segment");
      }
      lang.family_path.push_back(std::move(label));
    }
    languages.push_back(std::move(lang));
  }
  return Catalog(std::move(languages), reference);
}

inline Catalog load_catalog(const std::filesystem::path& path,
                            const std::string& reference = "en") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open catalog file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str(), reference);
}

// The 71-language catalog shipped with the library.
inline const Catalog& bundled_catalog() {
  static const Catalog catalog = parse_catalog(bundled::kCatalogTsv, "en");
  return catalog;
}

}  // namespace hopchain
