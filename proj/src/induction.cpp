#include "cxg/induction.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cxg/error.hpp"
#include "cxg/hash.hpp"

namespace cxg {

void InductionParams::validate() const {
  if (max_len < 2) throw Error("induction max_len must be >= 2");
  if (min_support < 2) throw Error("induction min_support must be >= 2");
  if (max_inventory == 0) throw Error("induction max_inventory must be > 0");
}

std::string InductionParams::describe() const {
  std::ostringstream s;
  s << "induced max_len=" << max_len << " min_support=" << min_support
    << " min_assoc=" << min_assoc << " max_inventory=" << max_inventory;
  return s.str();
}

namespace {

// A facet value packed as kind (top 2 bits) + interned value.
using Code = std::uint32_t;
using Key = std::vector<Code>;

constexpr Code pack(SlotKind kind, std::uint32_t value) {
  return (static_cast<Code>(kind) << 30) | value;
}
constexpr SlotKind kind_of(Code c) { return static_cast<SlotKind>(c >> 30); }
constexpr std::uint32_t value_of(Code c) { return c & 0x3FFFFFFFu; }

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::uint64_t h = kFnvOffset;
    for (Code c : k) h = (h ^ c) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

struct Counts {
  std::vector<SentenceId> sentences;
};

class Interner {
 public:
  std::uint32_t intern(const std::string& s) {
    auto [it, inserted] = ids_.try_emplace(s, static_cast<std::uint32_t>(strings_.size()));
    if (inserted) {
      if (strings_.size() >= 0x3FFFFFFFu) throw Error("induction vocabulary too large");
      strings_.push_back(s);
    }
    return it->second;
  }
  const std::string& str(std::uint32_t id) const { return strings_[id]; }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> strings_;
};

struct Encoded {
  SentenceId id;
  // Per token, the facet codes it carries (form, pos, and sem when present).
  std::vector<std::vector<Code>> facets;
};

}  // namespace

std::vector<InducedCandidate> induce_candidates(std::span<const AnnotatedSentence> corpus,
                                                const InductionParams& params) {
  params.validate();
  Interner forms, tags;
  std::vector<Encoded> encoded;
  encoded.reserve(corpus.size());
  for (const auto& s : corpus) {
    Encoded e{s.id, {}};
    e.facets.reserve(s.tokens.size());
    for (const auto& t : s.tokens) {
      std::vector<Code> f{pack(SlotKind::Lex, forms.intern(t.form)),
                          pack(SlotKind::Pos, tags.intern(t.pos))};
      if (t.sem) f.push_back(pack(SlotKind::Sem, *t.sem & 0x3FFFFFFFu));
      e.facets.push_back(std::move(f));
    }
    encoded.push_back(std::move(e));
  }

  // Level-wise counting of sentence support. A window of length k can only
  // reach min_support if its length k-1 prefix and suffix do, so level k
  // only extends frequent prefixes and checks the suffix before counting.
  std::vector<std::unordered_map<Key, Counts, KeyHash>> frequent(params.max_len + 1);
  for (std::size_t len = 2; len <= params.max_len; ++len) {
    std::unordered_map<Key, Counts, KeyHash> level;
    const auto* shorter = len > 2 ? &frequent[len - 1] : nullptr;
    Key key;
    for (const auto& e : encoded) {
      const std::size_t n = e.facets.size();
      if (n < len) continue;
      for (std::size_t start = 0; start + len <= n; ++start) {
        key.assign(len, 0);
        // Odometer over the facet choices of each token in the window.
        std::vector<std::size_t> choice(len, 0);
        while (true) {
          for (std::size_t i = 0; i < len; ++i) key[i] = e.facets[start + i][choice[i]];
          bool viable = true;
          if (shorter) {
            Key prefix(key.begin(), key.end() - 1);
            Key suffix(key.begin() + 1, key.end());
            viable = shorter->contains(prefix) && shorter->contains(suffix);
          }
          if (viable) {
            auto& c = level[key];
            if (c.sentences.empty() || c.sentences.back() != e.id) c.sentences.push_back(e.id);
          }
          std::size_t i = len;
          while (i > 0) {
            --i;
            if (++choice[i] < e.facets[start + i].size()) break;
            choice[i] = 0;
            if (i == 0) goto window_done;
          }
        }
      window_done:;
      }
    }
    for (auto it = level.begin(); it != level.end();) {
      if (it->second.sentences.size() < params.min_support) {
        it = level.erase(it);
      } else {
        ++it;
      }
    }
    if (level.empty()) break;
    frequent[len] = std::move(level);
  }

  // Token-level adjacency statistics for every slot pair that occurs inside
  // a surviving candidate.
  std::unordered_set<std::uint64_t> needed;
  for (const auto& level : frequent) {
    for (const auto& [key, c] : level) {
      for (std::size_t i = 0; i + 1 < key.size(); ++i) {
        needed.insert((std::uint64_t(key[i]) << 32) | key[i + 1]);
      }
    }
  }
  std::unordered_map<Code, std::uint64_t> left, right;
  std::unordered_map<std::uint64_t, std::uint64_t> joint;
  std::uint64_t positions = 0;
  for (const auto& e : encoded) {
    for (std::size_t j = 0; j + 1 < e.facets.size(); ++j) {
      ++positions;
      for (Code x : e.facets[j]) ++left[x];
      for (Code y : e.facets[j + 1]) ++right[y];
      for (Code x : e.facets[j]) {
        for (Code y : e.facets[j + 1]) {
          const std::uint64_t pair = (std::uint64_t(x) << 32) | y;
          if (needed.contains(pair)) ++joint[pair];
        }
      }
    }
  }
  auto delta_p = [&](Code x, Code y) {
    const double a = double(joint[(std::uint64_t(x) << 32) | y]);
    const double lx = double(left[x]);
    const double ry = double(right[y]);
    const double rest = double(positions) - lx;
    const double given = lx > 0 ? a / lx : 0.0;
    const double otherwise = rest > 0 ? (ry - a) / rest : 0.0;
    return given - otherwise;
  };

  auto to_slots = [&](const Key& key) {
    std::vector<SlotConstraint> slots;
    for (Code c : key) {
      const SlotKind kind = kind_of(c);
      std::string value = kind == SlotKind::Lex   ? forms.str(value_of(c))
                          : kind == SlotKind::Pos ? tags.str(value_of(c))
                                                  : std::to_string(value_of(c));
      slots.push_back({kind, std::move(value)});
    }
    return slots;
  };

  struct Scored {
    InducedCandidate cand;
    std::string tiebreak;  // unique slot rendering
  };
  std::vector<Scored> scored;
  for (const auto& level : frequent) {
    for (const auto& [key, c] : level) {
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < key.size(); ++i) sum += delta_p(key[i], key[i + 1]);
      const double score = sum / double(key.size() - 1);
      if (score < params.min_assoc) continue;
      Scored s;
      s.cand.slots = to_slots(key);
      s.cand.name = render_name(s.cand.slots);
      s.cand.score = score;
      s.cand.sentences = c.sentences;
      s.tiebreak = render_slots(s.cand.slots);
      scored.push_back(std::move(s));
    }
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.cand.score != b.cand.score) return a.cand.score > b.cand.score;
    if (a.cand.slots.size() != b.cand.slots.size()) {
      return a.cand.slots.size() > b.cand.slots.size();
    }
    if (a.cand.name != b.cand.name) return a.cand.name < b.cand.name;
    return a.tiebreak < b.tiebreak;
  });

  // Subset pruning. B covers A when M(A) is a subset of M(B) and B scores at
  // least as high; when the match sets and scores are identical the data
  // cannot tell them apart and the more specific one survives (more LEX
  // slots, then more SEM slots, then rank). The relation is a strict partial
  // order, so every dropped candidate is covered by a kept one.
  auto specificity = [](const InducedCandidate& c) {
    std::pair<std::size_t, std::size_t> n{0, 0};
    for (const auto& slot : c.slots) {
      n.first += slot.kind == SlotKind::Lex;
      n.second += slot.kind == SlotKind::Sem;
    }
    return n;
  };
  std::vector<std::pair<std::size_t, std::size_t>> specific;
  for (const auto& s : scored) specific.push_back(specificity(s.cand));
  auto preferred = [&](std::size_t a, std::size_t b) {
    if (specific[a] != specific[b]) return specific[a] > specific[b];
    return a < b;
  };
  std::unordered_map<SentenceId, std::vector<std::size_t>> by_sentence;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    for (SentenceId s : scored[i].cand.sentences) by_sentence[s].push_back(i);
  }
  std::vector<bool> drop(scored.size(), false);
  for (std::size_t a = 0; a < scored.size(); ++a) {
    const auto& ma = scored[a].cand.sentences;
    for (std::size_t b : by_sentence[ma.front()]) {
      if (b == a) continue;
      const auto& mb = scored[b].cand.sentences;
      if (mb.size() < ma.size() || scored[b].cand.score < scored[a].cand.score) continue;
      if (mb.size() == ma.size() && scored[b].cand.score == scored[a].cand.score &&
          preferred(a, b)) {
        continue;
      }
      if (std::includes(mb.begin(), mb.end(), ma.begin(), ma.end())) {
        drop[a] = true;
        break;
      }
    }
  }

  std::vector<InducedCandidate> out;
  for (std::size_t i = 0; i < scored.size() && out.size() < params.max_inventory; ++i) {
    if (!drop[i]) out.push_back(std::move(scored[i].cand));
  }
  return out;
}

Inventory induce_inventory(std::span<const AnnotatedSentence> corpus,
                           const InductionParams& params) {
  Inventory inv;
  inv.source = params.describe();
  if (corpus.size() < params.min_support) {
    params.validate();
    std::cerr << "warning: corpus of " << corpus.size()
              << " sentences is smaller than min_support=" << params.min_support
              << "; induced inventory is empty\n";
    return inv;
  }
  auto candidates = induce_candidates(corpus, params);
  if (candidates.empty()) {
    std::cerr << "warning: no candidate met the induction thresholds; inventory is empty\n";
  }
  CxgId id = 0;
  for (auto& c : candidates) {
    inv.constructions.push_back({id++, std::move(c.slots), std::move(c.name)});
  }
  return inv;
}

}  // namespace cxg
