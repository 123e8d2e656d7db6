#include "cxg/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cxg/error.hpp"
#include "cxg/parallel.hpp"
#include "cxg/text.hpp"

namespace cxg {

// ---------------------------------------------------------------------------
// Tagset

const std::vector<std::string>& Tagset::universal() {
  static const std::vector<std::string> tags = {
      "ADJ",  "ADP",  "ADV",   "AUX",   "CCONJ", "DET",   "INTJ", "NOUN", "NUM",
      "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM",   "VERB", "X"};
  return tags;
}

Tagset::Tagset() : Tagset(universal()) {}

Tagset::Tagset(std::vector<std::string> tags) : tags_(std::move(tags)) {
  lookup_.insert(tags_.begin(), tags_.end());
}

bool Tagset::contains(std::string_view tag) const {
  return lookup_.contains(std::string(tag));
}

// ---------------------------------------------------------------------------
// Resources

std::string AnnotatedSentence::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i].form;
  }
  return out;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return in;
}

// Calls fn(line_number, columns) for each non-blank line of a TSV file with
// exactly `width` columns.
template <typename Fn>
void for_each_tsv_row(const std::filesystem::path& path, std::size_t width, Fn&& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (find_invalid_utf8(line)) {
      throw ParseError(line_no, path.string() + ": invalid UTF-8");
    }
    auto cols = split(line, '\t');
    if (cols.size() != width) {
      throw ParseError(line_no, path.string() + ": expected " + std::to_string(width) +
                                    " tab-separated columns, found " +
                                    std::to_string(cols.size()));
    }
    fn(line_no, cols);
  }
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> words;
  std::string line;
  while (read_line(in, line)) {
    auto w = trim(line);
    if (!w.empty()) words.emplace_back(w);
  }
  return words;
}

}  // namespace

AnnotationResources AnnotationResources::load(const Paths& paths) {
  AnnotationResources r;
  if (paths.tagset) r.tagset = Tagset(read_word_list(*paths.tagset));
  if (paths.lexicon) {
    for_each_tsv_row(*paths.lexicon, 2, [&](std::size_t line_no, const auto& cols) {
      if (!r.tagset.contains(cols[1])) {
        throw ParseError(line_no, paths.lexicon->string() + ": tag '" + std::string(cols[1]) +
                                      "' not in tagset");
      }
      r.pos_lexicon.try_emplace(std::string(cols[0]), std::string(cols[1]));
    });
  }
  if (paths.suffixes) {
    for_each_tsv_row(*paths.suffixes, 2, [&](std::size_t line_no, const auto& cols) {
      if (cols[0].empty() || !r.tagset.contains(cols[1])) {
        throw ParseError(line_no, paths.suffixes->string() + ": invalid suffix rule");
      }
      r.suffix_rules.push_back({std::string(cols[0]), std::string(cols[1])});
    });
  }
  if (paths.clusters) {
    for_each_tsv_row(*paths.clusters, 2, [&](std::size_t line_no, const auto& cols) {
      auto id = parse_uint(cols[1]);
      if (!id || *id > 0xFFFFFFFFULL) {
        throw ParseError(line_no, paths.clusters->string() + ": cluster id must be a "
                                                             "non-negative integer");
      }
      r.cluster_map.try_emplace(std::string(cols[0]), static_cast<std::uint32_t>(*id));
    });
  }
  if (paths.abbreviations) {
    for (auto& w : read_word_list(*paths.abbreviations)) r.abbreviations.insert(std::move(w));
  }
  r.finalize();
  return r;
}

AnnotationResources AnnotationResources::load_directory(const std::filesystem::path& dir) {
  Paths paths;
  auto maybe = [&](const char* name) -> std::optional<std::filesystem::path> {
    auto p = dir / name;
    if (std::filesystem::exists(p)) return p;
    return std::nullopt;
  };
  if (!std::filesystem::is_directory(dir)) {
    throw IoError(dir.string(), "resource directory not found");
  }
  paths.lexicon = maybe("lexicon.tsv");
  paths.suffixes = maybe("suffixes.tsv");
  paths.clusters = maybe("clusters.tsv");
  paths.abbreviations = maybe("abbreviations.txt");
  paths.tagset = maybe("tagset.txt");
  return load(paths);
}

void AnnotationResources::finalize() {
  if (!tagset.contains(default_tag)) {
    throw Error("default tag '" + default_tag + "' is not in the tagset");
  }
  std::stable_sort(suffix_rules.begin(), suffix_rules.end(),
                   [](const SuffixRule& a, const SuffixRule& b) {
                     return a.suffix.size() > b.suffix.size();
                   });
  std::vector<bool> seen;
  for (const auto& [word, id] : cluster_map) {
    if (id >= seen.size()) seen.resize(id + 1, false);
    seen[id] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error("cluster ids must form a contiguous range starting at 0");
  }
  cluster_count = static_cast<std::uint32_t>(seen.size());
}

// ---------------------------------------------------------------------------
// WikiText articles

bool is_heading(std::string_view line) {
  auto t = trim(line);
  return t.size() >= 3 && t.front() == '=' && t.back() == '=';
}

bool is_top_level_heading(std::string_view line) {
  auto t = trim(line);
  if (t.size() < 5 || !t.starts_with("= ") || !t.ends_with(" =")) return false;
  auto inner = trim(t.substr(2, t.size() - 4));
  return !inner.empty() && inner.front() != '=' && inner.back() != '=';
}

std::optional<RawArticle> WikiTextReader::next() {
  if (done_) return std::nullopt;
  std::string body;
  bool has_content = false;
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) {
      done_ = true;
      break;
    }
    const std::size_t line_start = offset_;
    offset_ += line.size() + (in_.eof() ? 0 : 1);
    if (auto bad = find_invalid_utf8(line)) throw DecodeError(line_start + *bad);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_top_level_heading(line)) {
      // The heading itself carries no content, so consuming it here is
      // equivalent to handing it to the next call.
      if (has_content) break;
      body.clear();
      continue;
    }
    if (is_heading(line)) continue;
    if (!trim(line).empty()) has_content = true;
    body += line;
    body += '\n';
  }
  if (!has_content) return std::nullopt;
  return RawArticle{next_id_++, std::move(body)};
}

std::vector<RawArticle> parse_wikitext(std::istream& in) {
  std::vector<RawArticle> out;
  WikiTextReader reader(in);
  while (auto a = reader.next()) out.push_back(std::move(*a));
  return out;
}

// ---------------------------------------------------------------------------
// Sentence splitting

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

void split_line(std::string_view line, const std::unordered_set<std::string>& abbreviations,
                std::vector<std::string>& out) {
  const std::size_t n = line.size();
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminal(line[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && is_terminal(line[j])) ++j;
    const bool single_period = line[i] == '.' && j == i + 1;
    while (j < n && is_closer(line[j])) ++j;
    if (j == n || !is_space(line[j])) {
      i = j;
      continue;
    }
    std::size_t k = j;
    while (k < n && is_space(line[k])) ++k;
    std::size_t m = k;
    while (m < n && is_opener(line[m])) ++m;
    if (m < n && is_upper(line[m])) {
      bool suppress = false;
      if (single_period) {
        std::size_t w = i;
        while (w > start && !is_space(line[w - 1])) --w;
        while (w < i && is_opener(line[w])) ++w;
        const std::string word(line.substr(w, i + 1 - w));
        // Single-letter initials ("J. Smith") never end a sentence.
        suppress = abbreviations.contains(word) || (word.size() == 2 && is_upper(word[0]));
      }
      if (!suppress) {
        auto piece = trim(line.substr(start, j - start));
        if (!piece.empty()) out.emplace_back(piece);
        start = k;
      }
    }
    i = j;
  }
  auto rest = trim(line.substr(start));
  if (!rest.empty()) out.emplace_back(rest);
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view article_text,
                                         const std::unordered_set<std::string>& abbreviations) {
  std::vector<std::string> out;
  for (auto line : split(article_text, '\n')) {
    if (trim(line).empty()) continue;
    split_line(line, abbreviations, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

enum class CharClass { Letter, Digit, Punct };

struct Unit {
  std::string_view text;
  CharClass cls;
  char32_t cp;
};

bool is_unicode_punct(char32_t cp) {
  switch (cp) {
    case 0x00AB: case 0x00BB: case 0x2013: case 0x2014: case 0x2018:
    case 0x2019: case 0x201C: case 0x201D: case 0x2026:
      return true;
    default:
      return false;
  }
}

std::vector<Unit> decompose(std::string_view s) {
  std::vector<Unit> units;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if (c >= 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1F;
    }
    len = std::min(len, s.size() - i);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (s[i + k] & 0x3F);
    CharClass cls;
    if (c < 0x80) {
      if (c >= '0' && c <= '9') {
        cls = CharClass::Digit;
      } else if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
        cls = CharClass::Letter;
      } else {
        cls = CharClass::Punct;
      }
    } else {
      cls = is_unicode_punct(cp) ? CharClass::Punct : CharClass::Letter;
    }
    units.push_back({s.substr(i, len), cls, cp});
    i += len;
  }
  return units;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }
bool groups(char32_t cp) { return cp == '.' || cp == '-'; }

// Length of the punctuation run starting at units[i]: "..." and "--" stay
// together, everything else is one character.
std::size_t run_length(const std::vector<Unit>& u, std::size_t i, std::size_t end) {
  std::size_t k = i + 1;
  if (groups(u[i].cp)) {
    while (k < end && u[k].cp == u[i].cp) ++k;
  }
  return k - i;
}

std::string concat(const std::vector<Unit>& u, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t k = begin; k < end; ++k) out += u[k].text;
  return out;
}

bool keep_internal(const std::vector<Unit>& u, std::size_t k, std::size_t begin,
                   std::size_t end) {
  if (k == begin || k + 1 >= end) return false;
  const Unit& prev = u[k - 1];
  const Unit& next = u[k + 1];
  if (prev.cls == CharClass::Punct || next.cls == CharClass::Punct) return false;
  const char32_t cp = u[k].cp;
  if (is_apostrophe(cp)) return prev.cls == CharClass::Letter && next.cls == CharClass::Letter;
  if (cp == '-' || cp == '&') return true;
  if (cp == '.' || cp == ',' || cp == ':') {
    if (prev.cls == CharClass::Digit && next.cls == CharClass::Digit) return true;
    return cp == '.' && prev.cls == CharClass::Letter && next.cls == CharClass::Letter;
  }
  return false;
}

void tokenize_chunk(std::string_view chunk, const std::unordered_set<std::string>& abbreviations,
                    std::vector<std::string>& out) {
  if (abbreviations.contains(std::string(chunk))) {
    out.emplace_back(chunk);
    return;
  }
  // WikiText escapes in-number punctuation as "@-@", "@,@", "@.@".
  if (chunk.size() == 3 && chunk[0] == '@' && chunk[2] == '@') {
    out.emplace_back(chunk);
    return;
  }
  const auto u = decompose(chunk);
  std::size_t begin = 0;
  std::size_t end = u.size();
  while (begin < end && u[begin].cls == CharClass::Punct) {
    const std::size_t len = run_length(u, begin, end);
    out.push_back(concat(u, begin, begin + len));
    begin += len;
  }
  std::vector<std::string> trailing;
  while (end > begin && u[end - 1].cls == CharClass::Punct) {
    std::size_t s = end - 1;
    if (groups(u[s].cp)) {
      while (s > begin && u[s - 1].cp == u[s].cp) --s;
    }
    if (u[end - 1].cp == '.' && end - s == 1 && abbreviations.contains(concat(u, begin, end))) {
      break;
    }
    trailing.push_back(concat(u, s, end));
    end = s;
  }
  std::string current;
  std::size_t k = begin;
  while (k < end) {
    if (u[k].cls != CharClass::Punct || keep_internal(u, k, begin, end)) {
      current += u[k].text;
      ++k;
      continue;
    }
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
    const std::size_t len = run_length(u, k, end);
    out.push_back(concat(u, k, k + len));
    k += len;
  }
  if (!current.empty()) out.push_back(std::move(current));
  for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) out.push_back(std::move(*it));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view sentence,
                                  const std::unordered_set<std::string>& abbreviations) {
  std::vector<std::string> out;
  for (auto chunk : split_whitespace(sentence)) tokenize_chunk(chunk, abbreviations, out);
  return out;
}

// ---------------------------------------------------------------------------
// Tagging

namespace {

// Sentence-initial capitals are looked up a second time with the first
// letter lowered. The token itself is never modified.
template <typename Map>
auto find_with_initial_fold(const Map& map, const std::string& form) {
  auto it = map.find(form);
  if (it == map.end() && !form.empty() && is_upper(form[0])) {
    std::string folded = form;
    folded[0] = static_cast<char>(folded[0] - 'A' + 'a');
    it = map.find(folded);
  }
  return it;
}

}  // namespace

std::vector<std::string> tag_pos(std::span<const std::string> tokens,
                                 const AnnotationResources& resources) {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  const bool has_proper = resources.tagset.contains(resources.proper_tag);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    auto it = find_with_initial_fold(resources.pos_lexicon, tok);
    if (it != resources.pos_lexicon.end()) {
      tags.push_back(it->second);
      continue;
    }
    if (has_proper && i > 0 && tok[0] >= 'A' && tok[0] <= 'Z') {
      tags.push_back(resources.proper_tag);
      continue;
    }
    const SuffixRule* hit = nullptr;
    for (const auto& rule : resources.suffix_rules) {
      if (std::string_view(tok).ends_with(rule.suffix)) {
        hit = &rule;
        break;
      }
    }
    tags.push_back(hit ? hit->tag : resources.default_tag);
  }
  return tags;
}

std::vector<Token> annotate_sentence(std::string_view sentence,
                                     const AnnotationResources& resources) {
  auto forms = tokenize(sentence, resources.abbreviations);
  auto tags = tag_pos(forms, resources);
  std::vector<Token> tokens(forms.size());
  for (std::size_t i = 0; i < forms.size(); ++i) {
    auto it = find_with_initial_fold(resources.cluster_map, forms[i]);
    if (it != resources.cluster_map.end()) tokens[i].sem = it->second;
    tokens[i].form = std::move(forms[i]);
    tokens[i].pos = std::move(tags[i]);
  }
  return tokens;
}

std::optional<IngestMode> parse_ingest_mode(std::string_view name) {
  if (name == "raw") return IngestMode::Raw;
  if (name == "pre-split") return IngestMode::PreSplit;
  if (name == "pre-annotated") return IngestMode::PreAnnotated;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Pre-annotated TSV

void write_annotated_sentence(std::ostream& out, const AnnotatedSentence& s) {
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const auto& t = s.tokens[i];
    out << s.id << '\t' << s.article_id << '\t' << i << '\t' << t.form << '\t' << t.pos << '\t';
    if (t.sem) {
      out << *t.sem;
    } else {
      out << '-';
    }
    out << '\n';
  }
  out << '\n';
}

void write_annotated_tsv(std::ostream& out, std::span<const AnnotatedSentence> sentences) {
  for (const auto& s : sentences) write_annotated_sentence(out, s);
}

namespace {

class AnnotatedTsvParser {
 public:
  AnnotatedTsvParser(std::istream& in, const Tagset& tagset) : in_(in), tagset_(tagset) {}

  std::optional<AnnotatedSentence> next() {
    std::optional<AnnotatedSentence> current;
    if (pending_) {
      current = std::move(pending_);
      pending_.reset();
    }
    std::string line;
    while (read_line(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) {
        if (current) return finish(std::move(*current));
        continue;
      }
      if (find_invalid_utf8(line)) throw ParseError(line_no_, "invalid UTF-8");
      auto cols = split(line, '\t');
      if (cols.size() != 6) {
        throw ParseError(line_no_, "expected 6 tab-separated columns, found " +
                                       std::to_string(cols.size()));
      }
      auto sid = parse_uint(cols[0]);
      auto aid = parse_uint(cols[1]);
      auto idx = parse_uint(cols[2]);
      if (!sid || !aid || !idx || *sid > 0xFFFFFFFFULL || *aid > 0xFFFFFFFFULL) {
        throw ParseError(line_no_, "sentence_id, article_id and index must be integers");
      }
      if (cols[3].empty()) throw ParseError(line_no_, "empty token form");
      if (!tagset_.contains(cols[4])) {
        throw ParseError(line_no_, "tag '" + std::string(cols[4]) + "' not in tagset");
      }
      Token tok{std::string(cols[3]), std::string(cols[4]), std::nullopt};
      if (cols[5] != "-") {
        auto sem = parse_uint(cols[5]);
        if (!sem || *sem > 0xFFFFFFFFULL) {
          throw ParseError(line_no_, "sem must be a non-negative integer or '-'");
        }
        tok.sem = static_cast<std::uint32_t>(*sem);
      }
      if (current && current->id != *sid) {
        pending_ = start(*sid, *aid);
        check_index(*pending_, *idx);
        pending_->tokens.push_back(std::move(tok));
        return finish(std::move(*current));
      }
      if (!current) current = start(*sid, *aid);
      if (current->article_id != *aid) {
        throw ParseError(line_no_, "article_id changes within sentence " + std::to_string(*sid));
      }
      check_index(*current, *idx);
      current->tokens.push_back(std::move(tok));
    }
    if (current) return finish(std::move(*current));
    return std::nullopt;
  }

 private:
  AnnotatedSentence start(std::uint64_t sid, std::uint64_t aid) {
    if (last_id_ && sid <= *last_id_) {
      throw ParseError(line_no_, "sentence ids must be strictly increasing");
    }
    last_id_ = sid;
    AnnotatedSentence s;
    s.id = static_cast<SentenceId>(sid);
    s.article_id = static_cast<ArticleId>(aid);
    return s;
  }

  void check_index(const AnnotatedSentence& s, std::uint64_t idx) {
    if (idx != s.tokens.size()) {
      throw ParseError(line_no_, "token index " + std::to_string(idx) + " out of sequence");
    }
  }

  AnnotatedSentence finish(AnnotatedSentence s) {
    s.position = positions_[s.article_id]++;
    s.sem_annotated = std::any_of(s.tokens.begin(), s.tokens.end(),
                                  [](const Token& t) { return t.sem.has_value(); });
    return s;
  }

  std::istream& in_;
  const Tagset& tagset_;
  std::size_t line_no_ = 0;
  std::optional<std::uint64_t> last_id_;
  std::optional<AnnotatedSentence> pending_;
  std::unordered_map<ArticleId, std::uint32_t> positions_;
};

}  // namespace

std::vector<AnnotatedSentence> read_annotated_tsv(std::istream& in, const Tagset& tagset) {
  AnnotatedTsvParser parser(in, tagset);
  std::vector<AnnotatedSentence> out;
  while (auto s = parser.next()) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Streaming corpus annotation

namespace {
constexpr std::size_t kArticleBatch = 256;
}

struct CorpusReader::State {
  State(std::istream& in, const AnnotationResources& res, IngestMode m, unsigned j)
      : resources(res), mode(m), jobs(j), articles(in), tsv(in, res.tagset) {}

  const AnnotationResources& resources;
  IngestMode mode;
  unsigned jobs;
  WikiTextReader articles;
  AnnotatedTsvParser tsv;
  std::vector<AnnotatedSentence> buffer;
  std::size_t cursor = 0;
  SentenceId next_id = 0;
  bool exhausted = false;

  void refill() {
    buffer.clear();
    cursor = 0;
    std::vector<RawArticle> batch;
    while (batch.size() < kArticleBatch) {
      auto a = articles.next();
      if (!a) {
        exhausted = true;
        break;
      }
      batch.push_back(std::move(*a));
    }
    std::vector<std::vector<std::vector<Token>>> annotated(batch.size());
    parallel_chunks(batch.size(), jobs, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        std::vector<std::string> sentences;
        if (mode == IngestMode::Raw) {
          sentences = split_sentences(batch[i].text, resources.abbreviations);
        } else {
          for (auto line : split(batch[i].text, '\n')) {
            auto t = trim(line);
            if (!t.empty()) sentences.emplace_back(t);
          }
        }
        for (const auto& s : sentences) {
          auto tokens = annotate_sentence(s, resources);
          if (!tokens.empty()) annotated[i].push_back(std::move(tokens));
        }
      }
    });
    const bool sem = !resources.cluster_map.empty();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::uint32_t position = 0;
      for (auto& tokens : annotated[i]) {
        AnnotatedSentence s;
        s.id = next_id++;
        s.article_id = batch[i].id;
        s.position = position++;
        s.tokens = std::move(tokens);
        s.sem_annotated = sem;
        buffer.push_back(std::move(s));
      }
    }
  }
};

CorpusReader::CorpusReader(std::istream& in, const AnnotationResources& resources,
                           IngestMode mode, unsigned jobs)
    : state_(std::make_unique<State>(in, resources, mode, jobs)) {}

CorpusReader::~CorpusReader() = default;

std::optional<AnnotatedSentence> CorpusReader::next() {
  auto& st = *state_;
  if (st.mode == IngestMode::PreAnnotated) return st.tsv.next();
  while (st.cursor >= st.buffer.size()) {
    if (st.exhausted) return std::nullopt;
    st.refill();
  }
  return std::move(st.buffer[st.cursor++]);
}

std::vector<AnnotatedSentence> annotate_corpus(std::istream& in,
                                               const AnnotationResources& resources,
                                               IngestMode mode, unsigned jobs) {
  CorpusReader reader(in, resources, mode, jobs);
  std::vector<AnnotatedSentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace cxg
