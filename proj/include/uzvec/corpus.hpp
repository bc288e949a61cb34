#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uzvec/vocab.hpp"

namespace uzvec {

// A token stream mapped to vocabulary ids, one document per entry.
// Out-of-vocabulary tokens are dropped here and do not occupy window
// positions during training.
struct TokenDocs {
  std::vector<std::vector<std::int32_t>> docs;
  std::int64_t total_ids = 0;
};

inline TokenDocs load_token_ids(std::istream& in, const Vocabulary& vocab) {
  TokenDocs out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::int32_t> ids;
    std::size_t start = 0;
    while (start < line.size()) {
      std::size_t end = line.find(' ', start);
      if (end == std::string::npos) end = line.size();
      if (end > start) {
        std::int32_t id = vocab.id_of(line.substr(start, end - start));
        if (id >= 0) ids.push_back(id);
      }
      start = end + 1;
    }
    out.total_ids += static_cast<std::int64_t>(ids.size());
    out.docs.push_back(std::move(ids));
  }
  return out;
}

inline TokenDocs load_token_ids(const std::filesystem::path& path,
                                const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open token stream '" + path.string() +
                             "'");
  }
  return load_token_ids(in, vocab);
}

}  // namespace uzvec
