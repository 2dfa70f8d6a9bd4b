#include "htmob/symbols.hpp"

#include <algorithm>
#include <numeric>

namespace htmob {

SymbolTable::SymbolTable(const SymbolTable& other) : names_(other.names_) {
  index_.reserve(names_.size());
  for (SymbolId i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
}

SymbolTable& SymbolTable::operator=(const SymbolTable& other) {
  if (this != &other) {
    SymbolTable copy(other);
    *this = std::move(copy);
  }
  return *this;
}

SymbolId SymbolTable::intern(std::string_view name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  const auto id = static_cast<SymbolId>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<SymbolId> SymbolTable::find(std::string_view name) const {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  return std::nullopt;
}

SymbolTable::Canonical SymbolTable::canonical(const std::vector<bool>& used) const {
  std::vector<SymbolId> order;
  order.reserve(names_.size());
  for (SymbolId i = 0; i < names_.size(); ++i) {
    if (used.empty() || (i < used.size() && used[i])) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [this](SymbolId a, SymbolId b) { return names_[a] < names_[b]; });

  Canonical out;
  out.remap.assign(names_.size(), kNone);
  for (SymbolId rank = 0; rank < order.size(); ++rank) {
    out.remap[order[rank]] = rank;
    out.table.intern(names_[order[rank]]);
  }
  return out;
}

}  // namespace htmob
