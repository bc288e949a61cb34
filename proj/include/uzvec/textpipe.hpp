#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uzvec/utf8.hpp"

namespace uzvec {

struct Document {
  std::string id;
  std::string text;
};

struct CorpusStats {
  std::int64_t documents_seen = 0;
  std::int64_t documents_rejected = 0;
  std::int64_t tokens_emitted = 0;

  bool operator==(const CorpusStats&) const = default;
};

namespace detail {
constexpr char32_t kYeru = 0x044B;          // ы
constexpr char32_t kYeruCapital = 0x042B;   // Ы
constexpr char32_t kShcha = 0x0449;         // щ
constexpr char32_t kHyphen = 0x002D;
}  // namespace detail

// The 35 lowercase Cyrillic-Uzbek letters. Tokens may additionally contain
// a hyphen. ы is never a member; щ is off by default but can be enabled for
// corpora that kept Russian loanword spellings.
class Alphabet {
 public:
  static Alphabet standard(bool include_shcha = false) {
    static constexpr char32_t base[] = {
        0x0430, 0x0431, 0x0432, 0x0433, 0x0434, 0x0435, 0x0451,  // а б в г д е ё
        0x0436, 0x0437, 0x0438, 0x0439, 0x043A, 0x043B, 0x043C,  // ж з и й к л м
        0x043D, 0x043E, 0x043F, 0x0440, 0x0441, 0x0442, 0x0443,  // н о п р с т у
        0x0444, 0x0445, 0x0446, 0x0447, 0x0448, 0x044A, 0x044C,  // ф х ц ч ш ъ ь
        0x044D, 0x044E, 0x044F, 0x045E, 0x049B, 0x0493, 0x04B3,  // э ю я ў қ ғ ҳ
    };
    Alphabet a;
    for (char32_t cp : base) a.add(cp);
    if (include_shcha) a.add(detail::kShcha);
    return a;
  }

  bool contains(char32_t cp) const {
    return cp < kTableSize && member_[cp];
  }

  bool is_token_char(char32_t cp) const {
    return cp == detail::kHyphen || contains(cp);
  }

  std::vector<char32_t> letters() const {
    std::vector<char32_t> out;
    for (char32_t cp = 0; cp < kTableSize; ++cp) {
      if (member_[cp]) out.push_back(cp);
    }
    return out;
  }

 private:
  static constexpr std::size_t kTableSize = 0x500;

  void add(char32_t cp) { member_[cp] = true; }

  std::array<bool, kTableSize> member_{};
};

// Lowercases one Cyrillic code point; identity outside the Cyrillic block.
inline char32_t to_lower_cyrillic(char32_t cp) {
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;  // Ѐ..Џ incl. Ё Ў
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;  // А..Я
  // Extended Cyrillic pairs directly after the base block: uppercase at even
  // code points, lowercase at odd. 0x482..0x489 are signs, not letters.
  if (cp >= 0x0460 && cp <= 0x04FF && (cp & 1) == 0 &&
      !(cp >= 0x0482 && cp <= 0x0489)) {
    return cp + 1;
  }
  return cp;
}

// False iff the text contains ы or Ы anywhere. This is the whole language
// filter: the letter exists in Russian but not in Uzbek.
inline bool is_uzbek_document(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = decode_utf8(text, pos);
    if (cp == detail::kYeru || cp == detail::kYeruCapital) return false;
  }
  return true;
}

inline std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = decode_utf8(text, pos);
    if (cp == kInvalidCodePoint) {
      throw std::runtime_error("normalize: malformed UTF-8 input");
    }
    append_utf8(to_lower_cyrillic(cp), out);
  }
  return out;
}

// Splits lowercased text into maximal runs of alphabet letters and hyphens,
// then strips leading/trailing hyphens from each run. Runs that end up
// empty (digits, Latin, punctuation, bare hyphens) yield no token.
inline std::vector<std::string> tokenize(std::string_view text,
                                         const Alphabet& alphabet) {
  std::vector<std::string> tokens;
  std::vector<char32_t> run;
  auto flush = [&] {
    std::size_t begin = 0, end = run.size();
    while (begin < end && run[begin] == detail::kHyphen) ++begin;
    while (end > begin && run[end - 1] == detail::kHyphen) --end;
    if (begin < end) {
      std::string token;
      for (std::size_t i = begin; i < end; ++i) append_utf8(run[i], token);
      tokens.push_back(std::move(token));
    }
    run.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = decode_utf8(text, pos);
    if (cp == kInvalidCodePoint) {
      throw std::runtime_error("tokenize: malformed UTF-8 input");
    }
    if (alphabet.is_token_char(cp)) {
      run.push_back(cp);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

// One accepted document becomes one line of space-separated tokens.
// Rejected documents emit nothing, not even an empty line.
inline void ingest_document(const Document& doc, std::ostream& sink,
                            const Alphabet& alphabet, CorpusStats& stats) {
  ++stats.documents_seen;
  if (!valid_utf8(doc.text)) {
    throw std::runtime_error("ingest: malformed UTF-8 in document '" + doc.id +
                             "'");
  }
  if (!is_uzbek_document(doc.text)) {
    ++stats.documents_rejected;
    return;
  }
  std::vector<std::string> tokens = tokenize(normalize(doc.text), alphabet);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) sink.put(' ');
    sink.write(tokens[i].data(),
               static_cast<std::streamsize>(tokens[i].size()));
  }
  sink.put('\n');
  if (!sink) {
    throw std::runtime_error("ingest: write failed while processing document '" +
                             doc.id + "'");
  }
  stats.tokens_emitted += static_cast<std::int64_t>(tokens.size());
}

template <typename DocRange>
CorpusStats ingest(DocRange&& docs, std::ostream& sink,
                   const Alphabet& alphabet) {
  CorpusStats stats;
  for (const Document& doc : docs) {
    ingest_document(doc, sink, alphabet, stats);
  }
  return stats;
}

// Single file, one document per line.
inline CorpusStats ingest_lines(std::istream& in, std::string_view source_name,
                                std::ostream& sink, const Alphabet& alphabet) {
  CorpusStats stats;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    Document doc{std::string(source_name) + ":" + std::to_string(line_no),
                 line};
    ingest_document(doc, sink, alphabet, stats);
  }
  return stats;
}

// Directory tree of .txt files, one document per file. Paths are sorted so
// the emitted token stream does not depend on directory iteration order.
inline CorpusStats ingest_tree(const std::filesystem::path& root,
                               std::ostream& sink, const Alphabet& alphabet) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  CorpusStats stats;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw std::runtime_error("ingest: cannot open '" + path.string() + "'");
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    Document doc{path.string(), std::move(text)};
    ingest_document(doc, sink, alphabet, stats);
  }
  return stats;
}

}  // namespace uzvec
