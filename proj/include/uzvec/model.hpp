#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uzvec/config.hpp"
#include "uzvec/matrix.hpp"

namespace uzvec {

// A trained embedding model. `input` holds the published word vectors (rows
// 0..vocab_size-1); for fastText it is followed by `bucket` n-gram rows.
// `output` is the loss-side matrix: context rows under negative sampling,
// internal tree nodes under hierarchical softmax, empty for GloVe.
struct EmbeddingModel {
  TrainConfig config;
  std::vector<std::string> words;            // id order
  std::vector<std::int64_t> counts;          // zeros when unknown
  Matrix<float> input;
  Matrix<float> output;

  std::int64_t vocab_size() const {
    return static_cast<std::int64_t>(words.size());
  }
  std::int32_t dim() const { return config.dim; }

  bool has_subwords() const {
    return config.algo == Algo::fasttext && input.rows() > vocab_size();
  }

  std::int32_t id_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? -1 : it->second;
  }

  void rebuild_index() {
    index_.clear();
    index_.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      index_.emplace(words[i], static_cast<std::int32_t>(i));
    }
  }

 private:
  std::unordered_map<std::string, std::int32_t> index_;
};

}  // namespace uzvec
