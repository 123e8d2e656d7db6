#include "cxg/pair_sampler.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "cxg/error.hpp"
#include "cxg/random.hpp"
#include "cxg/text.hpp"

namespace cxg {

std::string_view label_name(PairLabel label) {
  return label == PairLabel::Same ? "same" : "different";
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<PairLabel> parse_label(std::string_view text) {
  if (text == "same") return PairLabel::Same;
  if (text == "different") return PairLabel::Different;
  return std::nullopt;
}

std::optional<Strictness> parse_strictness(std::string_view text) {
  if (text == "anchor") return Strictness::Anchor;
  if (text == "disjoint") return Strictness::Disjoint;
  return std::nullopt;
}

std::string_view strictness_name(Strictness s) {
  return s == Strictness::Anchor ? "anchor" : "disjoint";
}

void SamplerConfig::validate() const {
  for (const auto* q : {&train, &dev, &test}) {
    if (q->positive < 1 || q->negative < 1) throw Error("pair quotas must be >= 1");
  }
  for (std::size_t i = 1; i < inoculation_sizes.size(); ++i) {
    if (inoculation_sizes[i] <= inoculation_sizes[i - 1]) {
      throw Error("inoculation sizes must be strictly ascending");
    }
  }
}

const SplitQuota& SamplerConfig::quota(Split s) const {
  return s == Split::Train ? train : s == Split::Dev ? dev : test;
}

std::vector<PairExample>& PairSample::of(Split s) {
  return s == Split::Train ? train : s == Split::Dev ? dev : test;
}

const std::vector<PairExample>& PairSample::of(Split s) const {
  return s == Split::Train ? train : s == Split::Dev ? dev : test;
}

std::vector<PairExample> PairSample::all() const {
  std::vector<PairExample> out = train;
  out.insert(out.end(), dev.begin(), dev.end());
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

namespace {

constexpr Split kSplits[] = {Split::Train, Split::Dev, Split::Test};

std::uint64_t pair_key(SentenceId x, SentenceId y) {
  if (x > y) std::swap(x, y);
  return (std::uint64_t(x) << 32) | y;
}

bool intersects(std::span<const CxgId> a, std::span<const CxgId> b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

// Enumerating every pair is cheap up to this many; above it pairs are drawn
// by rejection.
constexpr std::uint64_t kEnumerateLimit = 4096;

}  // namespace

PairSample sample_pairs(const OccurrenceTable& table, const Band& band,
                        const SamplerConfig& config) {
  config.validate();
  std::vector<CxgId> selected;
  for (CxgId id : table.constructions()) {
    if (band.selects(table.frequency(id))) selected.push_back(id);
  }
  if (selected.empty()) {
    throw EmptyCorpusError("band " + band.label() + " selects no construction with frequency >= 2");
  }
  const auto& universe = table.sentences();
  std::unordered_set<std::uint64_t> used;
  PairSample sample;

  std::uint32_t want_pos = 0, want_neg = 0;
  for (Split s : kSplits) {
    want_pos += config.quota(s).positive;
    want_neg += config.quota(s).negative;
  }

  for (CxgId id : selected) {
    Rng rng(config.seed, id);
    const auto inst = table.instances(id);
    const std::uint64_t f = inst.size();

    std::vector<std::pair<SentenceId, SentenceId>> positives;
    const std::uint64_t possible = f * (f - 1) / 2;
    if (possible <= kEnumerateLimit) {
      std::vector<std::pair<SentenceId, SentenceId>> all;
      all.reserve(possible);
      for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t j = i + 1; j < f; ++j) all.emplace_back(inst[i], inst[j]);
      }
      rng.shuffle(std::span(all));
      for (const auto& p : all) {
        if (positives.size() == want_pos) break;
        if (used.insert(pair_key(p.first, p.second)).second) positives.push_back(p);
      }
    } else {
      for (std::uint32_t attempt = 0; positives.size() < want_pos && attempt < 100 * want_pos;
           ++attempt) {
        const auto x = inst[rng.below(f)];
        const auto y = inst[rng.below(f)];
        if (x == y) continue;
        if (used.insert(pair_key(x, y)).second) {
          positives.emplace_back(std::min(x, y), std::max(x, y));
        }
      }
    }

    std::vector<std::pair<SentenceId, SentenceId>> negatives;
    const std::uint32_t max_attempts = std::max<std::uint32_t>(1000, 100 * want_neg);
    if (universe.size() > f) {
      for (std::uint32_t attempt = 0; negatives.size() < want_neg && attempt < max_attempts;
           ++attempt) {
        const SentenceId x = inst[rng.below(f)];
        const SentenceId y = universe[rng.below(universe.size())];
        if (table.contains(id, y)) continue;
        if (config.strictness == Strictness::Disjoint &&
            intersects(table.constructions_of(x), table.constructions_of(y))) {
          continue;
        }
        if (used.insert(pair_key(x, y)).second) {
          negatives.emplace_back(std::min(x, y), std::max(x, y));
        }
      }
    }

    std::size_t pi = 0, ni = 0;
    for (Split s : kSplits) {
      const auto& q = config.quota(s);
      auto& out = sample.of(s);
      std::uint32_t delivered = 0;
      for (std::uint32_t k = 0; k < q.positive && pi < positives.size(); ++k, ++pi, ++delivered) {
        out.push_back({positives[pi].first, positives[pi].second, PairLabel::Same, id, band, s});
      }
      for (std::uint32_t k = 0; k < q.negative && ni < negatives.size(); ++k, ++ni, ++delivered) {
        out.push_back(
            {negatives[ni].first, negatives[ni].second, PairLabel::Different, id, band, s});
      }
      const std::uint32_t requested = q.positive + q.negative;
      if (delivered < requested) sample.shortfalls.push_back({id, s, requested, delivered});
    }
  }
  return sample;
}

std::vector<std::vector<PairExample>> make_inoculation_subsets(std::span<const PairExample> train,
                                                               std::span<const std::size_t> sizes,
                                                               std::uint64_t seed) {
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw Error("inoculation sizes must be strictly ascending");
  }
  std::vector<PairExample> pos, neg;
  for (const auto& p : train) (p.label == PairLabel::Same ? pos : neg).push_back(p);
  Rng rng(seed, /*stream=*/0x696e6f63ULL);
  rng.shuffle(std::span(pos));
  rng.shuffle(std::span(neg));
  const bool positive_first = rng.below(2) == 0;

  std::vector<PairExample> order;
  order.reserve(train.size());
  std::size_t i = 0, j = 0;
  while (i < pos.size() || j < neg.size()) {
    const bool take_pos = (order.size() % 2 == 0) == positive_first;
    if ((take_pos && i < pos.size()) || j == neg.size()) {
      order.push_back(pos[i++]);
    } else {
      order.push_back(neg[j++]);
    }
  }

  const std::size_t balanced = 2 * std::min(pos.size(), neg.size()) +
                               (pos.size() != neg.size() ? 1 : 0);
  std::vector<std::vector<PairExample>> subsets;
  for (std::size_t size : sizes) {
    if (size > train.size()) {
      throw Error("inoculation size " + std::to_string(size) + " exceeds the " +
                  std::to_string(train.size()) + " available training pairs");
    }
    if (size > balanced) {
      throw Error("inoculation size " + std::to_string(size) +
                  " cannot be label-balanced from the available training pairs");
    }
    subsets.emplace_back(order.begin(), order.begin() + std::ptrdiff_t(size));
  }
  return subsets;
}

AuditReport audit_pairs(std::span<const PairExample> pairs, const OccurrenceTable& table,
                        Strictness strictness) {
  AuditReport report;
  report.pairs = pairs.size();
  std::map<std::uint64_t, Split> seen;
  auto describe = [](const PairExample& p) {
    return "(" + std::to_string(p.a) + ", " + std::to_string(p.b) + ") anchor " +
           std::to_string(p.anchor) + " " + std::string(split_name(p.split));
  };
  for (const auto& p : pairs) {
    bool ok = p.a < p.b;
    if (ok) {
      const bool in_a = table.contains(p.anchor, p.a);
      const bool in_b = table.contains(p.anchor, p.b);
      if (p.label == PairLabel::Same) {
        ok = in_a && in_b;
      } else {
        ok = in_a != in_b;
        if (ok && strictness == Strictness::Disjoint) {
          ok = !intersects(table.constructions_of(p.a), table.constructions_of(p.b));
        }
      }
    }
    if (!ok) {
      ++report.label_violations;
      report.details.push_back("label violation: " + std::string(label_name(p.label)) + " " +
                               describe(p));
    }
    auto [it, inserted] = seen.emplace(pair_key(p.a, p.b), p.split);
    if (!inserted) {
      if (it->second == p.split) {
        ++report.duplicates;
        report.details.push_back("duplicate: " + describe(p));
      } else {
        ++report.leakage;
        report.details.push_back("leakage: " + describe(p) + " also in " +
                                 std::string(split_name(it->second)));
      }
    }
  }
  return report;
}

void AuditReport::write(std::ostream& out) const {
  out << "pairs = " << pairs << '\n'
      << "label_violations = " << label_violations << '\n'
      << "duplicates = " << duplicates << '\n'
      << "leakage = " << leakage << '\n'
      << "status = " << (clean() ? "pass" : "fail") << '\n';
  for (const auto& d : details) out << d << '\n';
}

void write_pairs(std::ostream& out, std::span<const PairExample> pairs,
                 std::span<const AnnotatedSentence> corpus) {
  std::vector<const PairExample*> sorted;
  for (const auto& p : pairs) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(), [](const PairExample* x, const PairExample* y) {
    if (x->anchor != y->anchor) return x->anchor < y->anchor;
    if (x->a != y->a) return x->a < y->a;
    return x->b < y->b;
  });
  auto text_of = [&](SentenceId id) {
    auto it = std::lower_bound(corpus.begin(), corpus.end(), id,
                               [](const AnnotatedSentence& s, SentenceId v) { return s.id < v; });
    if (it == corpus.end() || it->id != id) {
      throw Error("pair references unknown sentence " + std::to_string(id));
    }
    return it->text();
  };
  for (const auto* p : sorted) {
    out << label_name(p->label) << '\t' << text_of(p->a) << '\t' << text_of(p->b) << '\t'
        << p->anchor << '\t' << p->band.lo_text() << '\t' << p->band.hi_text() << '\n';
  }
}

std::vector<PairRecord> read_pairs(std::istream& in) {
  std::vector<PairRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 6) {
      throw ParseError(line_no, "expected 6 tab-separated columns, found " +
                                    std::to_string(cols.size()));
    }
    auto label = parse_label(cols[0]);
    auto anchor = parse_uint(cols[3]);
    auto band = Band::parse(std::string(cols[4]) + ":" + std::string(cols[5]));
    if (!label || !anchor || *anchor > 0xFFFFFFFFULL || !band) {
      throw ParseError(line_no, "malformed pair record");
    }
    out.push_back({*label, std::string(cols[1]), std::string(cols[2]),
                   static_cast<CxgId>(*anchor), *band});
  }
  return out;
}

void write_shortfalls(std::ostream& out, std::span<const Shortfall> shortfalls) {
  for (const auto& s : shortfalls) {
    out << s.cxg_id << '\t' << split_name(s.split) << '\t' << s.requested << '\t' << s.delivered
        << '\n';
  }
}

}  // namespace cxg
