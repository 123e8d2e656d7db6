#include "synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cxg/text.hpp"

namespace cxg::testing {

std::filesystem::path resource_dir() { return std::filesystem::path(CXG_SOURCE_DIR) / "resources/en"; }
std::filesystem::path data_dir() { return std::filesystem::path(CXG_SOURCE_DIR) / "tests/data"; }

Vocabulary Vocabulary::from_resources(const std::filesystem::path& dir) {
  std::set<std::string> abbreviations;
  {
    std::ifstream in(dir / "abbreviations.txt");
    std::string line;
    while (std::getline(in, line)) abbreviations.insert(std::string(trim(line)));
  }
  std::ifstream in(dir / "lexicon.tsv");
  if (!in) throw std::runtime_error("missing lexicon in " + dir.string());
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    auto cols = split(line, '\t');
    if (cols.size() != 2) continue;
    const std::string word(cols[0]);
    const bool letters = std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; });
    if (!letters || (word.size() < 2 && word != "a")) continue;
    std::string cap = word;
    cap[0] = char(cap[0] - 'a' + 'A');
    if (abbreviations.contains(word + ".") || abbreviations.contains(cap + ".")) continue;
    v.by_tag_[std::string(cols[1])].push_back(word);
  }
  return v;
}

const std::vector<std::string>& Vocabulary::words(const std::string& tag) const {
  auto it = by_tag_.find(tag);
  if (it == by_tag_.end() || it->second.empty()) throw std::runtime_error("no words tagged " + tag);
  return it->second;
}

std::vector<std::string> Vocabulary::tags() const {
  std::vector<std::string> out;
  for (const auto& [tag, words] : by_tag_) out.push_back(tag);
  return out;
}

namespace {

// Zipf(1) over a seeded permutation of each tag's word list.
class ZipfSampler {
 public:
  ZipfSampler(const std::vector<std::string>& words, Rng& rng) : words_(words) {
    rng.shuffle(std::span<std::string>(words_));
    double total = 0.0;
    for (std::size_t r = 0; r < words_.size(); ++r) {
      total += 1.0 / double(r + 1);
      cumulative_.push_back(total);
    }
  }

  const std::string& draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return words_[std::min<std::size_t>(it - cumulative_.begin(), words_.size() - 1)];
  }

 private:
  std::vector<std::string> words_;
  std::vector<double> cumulative_;
};

const std::vector<std::vector<std::string>>& skeletons() {
  static const std::vector<std::vector<std::string>> s = {
      {"DET", "ADJ", "NOUN", "VERB", "DET", "NOUN"},
      {"PRON", "VERB", "DET", "NOUN", "ADP", "DET", "ADJ", "NOUN"},
      {"DET", "NOUN", "AUX", "ADV", "VERB", "ADP", "DET", "NOUN"},
      {"ADP", "DET", "NOUN", ",", "PRON", "VERB", "ADJ", "NOUN"},
      {"DET", "NOUN", "CCONJ", "DET", "NOUN", "VERB", "ADV", "ADP", "NOUN"},
      {"PRON", "AUX", "VERB", "DET", "NOUN"},
      {"DET", "ADJ", "ADJ", "NOUN", "VERB", "ADP", "NOUN"},
      {"NOUN", "VERB", "NOUN", "ADP", "DET", "NOUN"},
      {"DET", "NOUN", "ADP", "DET", "NOUN", "AUX", "VERB", "ADP", "DET", "ADJ", "NOUN"},
  };
  return s;
}

const std::vector<std::string> kOpenTags = {"NOUN", "VERB", "ADJ", "ADV", "DET",
                                            "ADP",  "PRON", "AUX", "CCONJ"};

SlotConstraint lex(const std::string& w) { return {SlotKind::Lex, w}; }
SlotConstraint pos(const std::string& t) { return {SlotKind::Pos, t}; }

struct Planned {
  std::vector<SlotConstraint> slots;
  std::vector<std::string> lex_tags;  // tag of each slot's realization
};

}  // namespace

DeskCorpus make_desk_corpus(const Vocabulary& vocab, const DeskOptions& options) {
  Rng rng(options.seed, 0x6465736b);
  std::map<std::string, ZipfSampler> samplers;
  for (const auto& tag : vocab.tags()) samplers.emplace(tag, ZipfSampler(vocab.words(tag), rng));
  auto draw = [&](const std::string& tag) -> const std::string& { return samplers.at(tag).draw(rng); };
  auto uniform_word = [&](const std::string& tag) -> const std::string& {
    const auto& w = vocab.words(tag);
    return w[rng.below(w.size())];
  };

  DeskCorpus desk;
  std::vector<std::vector<Token>> sentences;
  std::vector<std::pair<ArticleId, std::uint32_t>> where;
  ArticleId article = 0;
  while (sentences.size() < options.sentences) {
    // Mostly short articles with an occasional long one.
    const std::size_t length = rng.uniform() < 0.15 ? 20 + rng.below(100) : 1 + rng.below(12);
    for (std::size_t k = 0; k < length && sentences.size() < options.sentences; ++k) {
      const auto& skeleton = skeletons()[rng.below(skeletons().size())];
      std::vector<Token> tokens;
      for (const auto& tag : skeleton) {
        if (tag == ",") {
          tokens.push_back({",", "PUNCT", std::nullopt});
        } else {
          tokens.push_back({draw(tag), tag, std::nullopt});
        }
      }
      sentences.push_back(std::move(tokens));
      where.emplace_back(article, std::uint32_t(k));
    }
    ++article;
  }

  std::vector<Planned> planned;
  std::set<std::vector<SlotConstraint>> seen;
  while (planned.size() < options.anchored) {
    Planned p;
    const std::string& n1 = uniform_word("NOUN");
    const std::string& n2 = uniform_word("NOUN");
    const std::string& a1 = uniform_word("ADJ");
    const std::string& v1 = uniform_word("VERB");
    switch (rng.below(5)) {
      case 0:
        p.slots = {lex(n1), pos("ADP"), lex(n2)};
        p.lex_tags = {"NOUN", "ADP", "NOUN"};
        break;
      case 1:
        p.slots = {lex(a1), lex(n1)};
        p.lex_tags = {"ADJ", "NOUN"};
        break;
      case 2:
        p.slots = {pos("DET"), lex(a1), pos("NOUN"), lex(v1)};
        p.lex_tags = {"DET", "ADJ", "NOUN", "VERB"};
        break;
      case 3:
        p.slots = {lex(v1), pos("DET"), pos("ADJ"), lex(n1)};
        p.lex_tags = {"VERB", "DET", "ADJ", "NOUN"};
        break;
      default:
        p.slots = {pos("PRON"), lex(v1), lex(n1)};
        p.lex_tags = {"PRON", "VERB", "NOUN"};
        break;
    }
    if (seen.insert(p.slots).second) planned.push_back(std::move(p));
  }

  for (std::size_t r = 0; r < planned.size(); ++r) {
    const std::size_t freq = std::max<std::size_t>(2, options.top_frequency / (r + 1));
    for (std::size_t k = 0; k < freq; ++k) {
      auto& tokens = sentences[rng.below(sentences.size())];
      std::vector<Token> piece;
      for (std::size_t s = 0; s < planned[r].slots.size(); ++s) {
        if (s > 0 && rng.uniform() < 0.25) piece.push_back({draw("ADV"), "ADV", std::nullopt});
        const auto& slot = planned[r].slots[s];
        const auto& tag = planned[r].lex_tags[s];
        piece.push_back({slot.kind == SlotKind::Lex ? slot.value : draw(tag), tag, std::nullopt});
      }
      const std::size_t at = 1 + rng.below(tokens.size());
      tokens.insert(tokens.begin() + std::ptrdiff_t(at), piece.begin(), piece.end());
    }
  }

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    AnnotatedSentence s;
    s.id = SentenceId(i);
    s.article_id = where[i].first;
    s.position = where[i].second;
    s.tokens = std::move(sentences[i]);
    auto& first = s.tokens.front().form;
    first[0] = char(first[0] - 'a' + 'A');
    s.tokens.push_back({".", "PUNCT", std::nullopt});
    desk.corpus.push_back(std::move(s));
  }

  for (auto& p : planned) {
    Construction c;
    c.id = CxgId(desk.inventory.constructions.size());
    c.slots = std::move(p.slots);
    c.name = render_name(c.slots);
    desk.inventory.constructions.push_back(std::move(c));
  }
  desk.anchored_count = desk.inventory.size();
  if (options.pos_patterns) {
    for (const auto& x : kOpenTags) {
      for (const auto& y : kOpenTags) {
        Construction c;
        c.id = CxgId(desk.inventory.constructions.size());
        c.slots = {pos(x), pos(y)};
        c.name = render_name(c.slots);
        desk.inventory.constructions.push_back(std::move(c));
      }
    }
  }
  desk.inventory.source = "desk corpus generator";
  return desk;
}

std::string to_wikitext(const std::vector<AnnotatedSentence>& corpus) {
  std::ostringstream out;
  std::size_t i = 0;
  while (i < corpus.size()) {
    const ArticleId a = corpus[i].article_id;
    out << " = Article " << a << " = \n \n";
    std::size_t in_paragraph = 0;
    while (i < corpus.size() && corpus[i].article_id == a) {
      if (in_paragraph == 6) {
        out << "\n";
        in_paragraph = 0;
      }
      out << ' ' << corpus[i].text();
      ++in_paragraph;
      ++i;
    }
    out << "\n \n";
  }
  return out.str();
}

Inventory random_inventory(const Vocabulary& vocab, std::size_t size, std::uint64_t seed) {
  Rng rng(seed, 0x696e76);
  const auto tags = vocab.tags();
  std::vector<std::string> all_words;
  std::vector<std::string> word_tags;
  for (const auto& t : tags) {
    for (const auto& w : vocab.words(t)) {
      all_words.push_back(w);
      word_tags.push_back(t);
    }
  }
  Inventory inv;
  std::set<std::vector<SlotConstraint>> seen;
  while (inv.size() < size) {
    std::vector<SlotConstraint> slots(2 + rng.below(3));
    for (auto& s : slots) {
      if (rng.uniform() < 0.5) {
        s = lex(all_words[rng.below(all_words.size())]);
      } else {
        s = pos(tags[rng.below(tags.size())]);
      }
    }
    if (!seen.insert(slots).second) continue;
    Construction c;
    c.id = CxgId(inv.size());
    c.slots = std::move(slots);
    c.name = render_name(c.slots);
    inv.constructions.push_back(std::move(c));
  }
  inv.source = "random inventory";
  return inv;
}

OracleCase random_oracle_case(Rng& rng) {
  static const std::vector<std::string> forms = {"a", "b", "c", "d", "e"};
  static const std::vector<std::string> tags = {"NOUN", "VERB", "DET"};
  OracleCase oc;
  oc.max_gap = unsigned(rng.below(3));
  oc.sentence.sem_annotated = true;
  const std::size_t len = rng.below(16);
  for (std::size_t i = 0; i < len; ++i) {
    Token t{forms[rng.below(forms.size())], tags[rng.below(tags.size())], std::nullopt};
    if (rng.below(4) != 0) t.sem = std::uint32_t(rng.below(3));
    oc.sentence.tokens.push_back(std::move(t));
  }
  std::set<std::vector<SlotConstraint>> seen;
  const std::size_t n = 1 + rng.below(12);
  while (oc.inventory.size() < n) {
    std::vector<SlotConstraint> slots(2 + rng.below(3));
    for (auto& s : slots) {
      switch (rng.below(3)) {
        case 0: s = lex(forms[rng.below(forms.size())]); break;
        case 1: s = pos(tags[rng.below(tags.size())]); break;
        default: s = {SlotKind::Sem, std::to_string(rng.below(3))}; break;
      }
    }
    if (!seen.insert(slots).second) continue;
    Construction c;
    c.id = CxgId(oc.inventory.size() * 3 + rng.below(3));
    c.slots = std::move(slots);
    c.name = render_name(c.slots);
    oc.inventory.constructions.push_back(std::move(c));
  }
  return oc;
}

}  // namespace cxg::testing
