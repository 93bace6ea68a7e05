#include <algorithm>
#include <cmath>
#include <map>

#include "analytics/workflow.hpp"
#include "common/errors.hpp"

namespace dcmsg::analytics {
namespace {

struct Occurrence {
  std::uint32_t sid;
  std::uint32_t eid;  // position of the pattern's last item

  bool operator==(const Occurrence&) const = default;
  auto operator<=>(const Occurrence&) const = default;
};

using IdList = std::vector<Occurrence>;

std::size_t distinct_sequences(const IdList& list) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < list.size(); ++i)
    if (i == 0 || list[i].sid != list[i - 1].sid) ++n;
  return n;
}

// Positions of `next` that follow some occurrence in `prefix`; both sorted.
IdList temporal_join(const IdList& prefix, const IdList& next) {
  IdList out;
  std::size_t i = 0;
  for (std::size_t j = 0; j < next.size(); ++j) {
    const auto sid = next[j].sid;
    while (i < prefix.size() && prefix[i].sid < sid) ++i;
    // earliest end of the prefix within this sequence
    if (i < prefix.size() && prefix[i].sid == sid && prefix[i].eid < next[j].eid) out.push_back(next[j]);
  }
  return out;
}

struct Atom {
  std::vector<int> items;
  IdList ids;
};

class Miner {
 public:
  Miner(std::size_t min_count, std::size_t max_len) : min_count_(min_count), max_len_(max_len) {}

  // Depth-first over the prefix equivalence classes.
  void enumerate(const std::vector<Atom>& members) {
    for (const auto& a : members) {
      found_.push_back(a);
      if (a.items.size() >= max_len_) continue;
      std::vector<Atom> child;
      for (const auto& b : members) {
        IdList ids = temporal_join(a.ids, b.ids);
        if (distinct_sequences(ids) < min_count_) continue;
        Atom c;
        c.items = a.items;
        c.items.push_back(b.items.back());
        c.ids = std::move(ids);
        child.push_back(std::move(c));
      }
      if (!child.empty()) enumerate(child);
    }
  }

  std::vector<Atom> found_;

 private:
  std::size_t min_count_;
  std::size_t max_len_;
};

}  // namespace

std::string SequentialPattern::label() const {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += " -> ";
    s += items[i];
  }
  return s;
}

std::vector<SymbolSequence> symbolize(const std::vector<WorkflowSequence>& sequences, SymbolLevel level) {
  std::vector<SymbolSequence> out;
  for (const auto& seq : sequences) {
    SymbolSequence s{seq.user_id, {}};
    for (const auto& item : seq.items)
      s.symbols.push_back(level == SymbolLevel::Phase ? std::string(session::phase_name(item.phase)) : item.action);
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t count_occurrences(const std::vector<std::string>& sequence, const std::vector<std::string>& pattern) {
  if (pattern.empty()) return 0;
  std::size_t count = 0, k = 0;
  for (const auto& s : sequence) {
    if (s == pattern[k] && ++k == pattern.size()) {
      ++count;
      k = 0;
    }
  }
  return count;
}

std::vector<SequentialPattern> mine_patterns(const std::vector<SymbolSequence>& db, double min_support,
                                             std::size_t max_len) {
  if (!(min_support > 0.0 && min_support <= 1.0))
    fail(ErrorCode::InvalidArgument, "minimum support must lie in (0, 1]");
  if (db.empty() || max_len == 0) return {};

  std::map<std::string, int> codes;
  for (const auto& s : db)
    for (const auto& sym : s.symbols) codes.emplace(sym, 0);
  std::vector<std::string> symbols;
  for (auto& [sym, code] : codes) {
    code = static_cast<int>(symbols.size());
    symbols.push_back(sym);
  }

  std::vector<IdList> vertical(symbols.size());
  for (std::size_t sid = 0; sid < db.size(); ++sid)
    for (std::size_t eid = 0; eid < db[sid].symbols.size(); ++eid)
      vertical[static_cast<std::size_t>(codes[db[sid].symbols[eid]])].push_back(
          {static_cast<std::uint32_t>(sid), static_cast<std::uint32_t>(eid)});

  const double needed = min_support * static_cast<double>(db.size());
  auto min_count = static_cast<std::size_t>(std::ceil(needed - 1e-9));
  min_count = std::max<std::size_t>(min_count, 1);

  std::vector<Atom> atoms;
  for (std::size_t c = 0; c < symbols.size(); ++c)
    if (distinct_sequences(vertical[c]) >= min_count) atoms.push_back({{static_cast<int>(c)}, vertical[c]});

  Miner miner(min_count, max_len);
  miner.enumerate(atoms);

  std::vector<SequentialPattern> out;
  for (const auto& a : miner.found_) {
    SequentialPattern p;
    for (int c : a.items) p.items.push_back(symbols[static_cast<std::size_t>(c)]);
    p.support = static_cast<double>(distinct_sequences(a.ids)) / static_cast<double>(db.size());
    for (const auto& s : db) {
      const auto n = count_occurrences(s.symbols, p.items);
      if (n) p.per_user_count[s.user_id] += n;
    }
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const SequentialPattern& a, const SequentialPattern& b) {
    if (a.items.size() != b.items.size()) return a.items.size() < b.items.size();
    return a.items < b.items;
  });
  return out;
}

}  // namespace dcmsg::analytics
