#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "uzvec/utf8.hpp"

namespace uzvec {

// Frequency-ranked vocabulary. Ids are positions: sorted by descending
// count, ties broken lexicographically, so identical counts always produce
// identical vocabularies regardless of insertion order.
class Vocabulary {
 public:
  struct Entry {
    std::string word;
    std::int64_t count;
  };

  Vocabulary() = default;
  Vocabulary(std::vector<Entry> entries, std::int64_t total_tokens)
      : entries_(std::move(entries)), total_tokens_(total_tokens) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      index_.emplace(entries_[i].word, static_cast<std::int32_t>(i));
    }
  }

  std::int64_t size() const {
    return static_cast<std::int64_t>(entries_.size());
  }
  const Entry& entry(std::int64_t id) const { return entries_[id]; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::int64_t total_tokens() const { return total_tokens_; }

  // -1 when absent.
  std::int32_t id_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? -1 : it->second;
  }

  const std::string& word(std::int64_t id) const { return entries_[id].word; }
  std::int64_t count(std::int64_t id) const { return entries_[id].count; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::int64_t total_tokens_ = 0;
};

// Exact multiset counts over a textpipe-format token stream (spaces within
// a line, one document per line; counting crosses document boundaries).
inline std::unordered_map<std::string, std::int64_t> count_tokens(
    std::istream& in) {
  std::unordered_map<std::string, std::int64_t> counts;
  std::string line;
  while (std::getline(in, line)) {
    if (!valid_utf8(line)) {
      throw std::runtime_error("count_tokens: malformed UTF-8 in token stream");
    }
    std::size_t start = 0;
    while (start < line.size()) {
      std::size_t end = line.find(' ', start);
      if (end == std::string::npos) end = line.size();
      if (end > start) ++counts[line.substr(start, end - start)];
      start = end + 1;
    }
  }
  return counts;
}

inline Vocabulary build_vocab(
    const std::unordered_map<std::string, std::int64_t>& counts,
    std::int64_t min_count) {
  std::int64_t total = 0;
  std::vector<Vocabulary::Entry> entries;
  for (const auto& [word, count] : counts) {
    total += count;
    if (count >= min_count) entries.push_back({word, count});
  }
  if (entries.empty()) {
    throw std::runtime_error("vocabulary empty at min_count " +
                             std::to_string(min_count));
  }
  std::sort(entries.begin(), entries.end(),
            [](const Vocabulary::Entry& a, const Vocabulary::Entry& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.word < b.word;
            });
  return Vocabulary(std::move(entries), total);
}

// Top-k and bottom-k (word, count) slices, both in id order.
inline std::pair<std::vector<Vocabulary::Entry>, std::vector<Vocabulary::Entry>>
freq_table(const Vocabulary& vocab, std::int64_t k) {
  if (k > vocab.size()) {
    throw std::runtime_error("freq_table: k=" + std::to_string(k) +
                             " exceeds vocabulary size " +
                             std::to_string(vocab.size()));
  }
  std::vector<Vocabulary::Entry> top(vocab.entries().begin(),
                                     vocab.entries().begin() + k);
  std::vector<Vocabulary::Entry> bottom(vocab.entries().end() - k,
                                        vocab.entries().end());
  return {std::move(top), std::move(bottom)};
}

// Probability of keeping an occurrence of a word under frequency
// subsampling. Words rarer than the threshold are always kept.
inline double keep_probability(std::int64_t count, std::int64_t total_tokens,
                               double sample) {
  double threshold = sample * static_cast<double>(total_tokens);
  double p = (std::sqrt(static_cast<double>(count) / threshold) + 1.0) *
             threshold / static_cast<double>(count);
  return std::min(1.0, p);
}

// Vocabulary file: "#total_tokens=<N>" header, then one "word<TAB>count"
// line per entry in id order.
inline void save_vocab(const Vocabulary& vocab,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_vocab: cannot open '" + path.string() +
                             "'");
  }
  out << "#total_tokens=" << vocab.total_tokens() << "\n";
  for (const auto& e : vocab.entries()) {
    out << e.word << '\t' << e.count << '\n';
  }
  if (!out) {
    throw std::runtime_error("save_vocab: write failed for '" + path.string() +
                             "'");
  }
}

inline Vocabulary load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_vocab: cannot open '" + path.string() +
                             "'");
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("#total_tokens=", 0) != 0) {
    throw std::runtime_error("load_vocab: missing #total_tokens header in '" +
                             path.string() + "'");
  }
  std::int64_t total = std::stoll(line.substr(14));
  std::vector<Vocabulary::Entry> entries;
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("load_vocab: missing tab at line " +
                               std::to_string(line_no) + " of '" +
                               path.string() + "'");
    }
    entries.push_back({line.substr(0, tab), std::stoll(line.substr(tab + 1))});
  }
  if (entries.empty()) {
    throw std::runtime_error("load_vocab: no entries in '" + path.string() +
                             "'");
  }
  return Vocabulary(std::move(entries), total);
}

}  // namespace uzvec
