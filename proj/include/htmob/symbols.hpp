#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace htmob {

using SymbolId = std::uint32_t;

/// Interns opaque string tokens (user, place and AP ids) as dense integers.
///
/// A table is *canonical* when ids follow ascending byte order of the names,
/// so that sorting by id sorts by name. `canonical()` produces one.
class SymbolTable {
 public:
  SymbolTable() = default;
  SymbolTable(const SymbolTable& other);
  SymbolTable& operator=(const SymbolTable& other);
  SymbolTable(SymbolTable&&) noexcept = default;
  SymbolTable& operator=(SymbolTable&&) noexcept = default;

  SymbolId intern(std::string_view name);
  std::optional<SymbolId> find(std::string_view name) const;
  std::string_view name(SymbolId id) const { return names_[id]; }
  std::size_t size() const noexcept { return names_.size(); }

  /// Sorted table restricted to `used` ids (all ids when `used` is empty),
  /// plus the old-id to new-id map. Unused ids map to a sentinel.
  struct Canonical;
  Canonical canonical(const std::vector<bool>& used = {}) const;

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) { return a.names_ == b.names_; }

  static constexpr SymbolId kNone = ~SymbolId{0};

 private:
  std::deque<std::string> names_;
  std::unordered_map<std::string_view, SymbolId> index_;
};

struct SymbolTable::Canonical {
  SymbolTable table;
  std::vector<SymbolId> remap;
};

}  // namespace htmob
