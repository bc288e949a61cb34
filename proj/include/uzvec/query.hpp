#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uzvec/fasttext.hpp"
#include "uzvec/matrix.hpp"
#include "uzvec/model.hpp"

namespace uzvec {

struct Neighbor {
  std::int32_t id;
  std::string word;
  double similarity;
};

using NeighborResult = std::vector<Neighbor>;

template <typename Real>
double cosine(std::span<const Real> u, std::span<const Real> v) {
  double uu = 0, vv = 0, uv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += static_cast<double>(u[i]) * static_cast<double>(u[i]);
    vv += static_cast<double>(v[i]) * static_cast<double>(v[i]);
    uv += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  }
  if (uu == 0.0 || vv == 0.0) {
    throw std::runtime_error("cosine: undefined similarity for a zero vector");
  }
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

inline double cosine(const std::vector<float>& u, const std::vector<float>& v) {
  return cosine(std::span<const float>(u), std::span<const float>(v));
}

// The vector used both as query and as candidate for a vocabulary word:
// the raw input row, or the subword-composed mean for fastText models.
inline std::vector<float> vocab_vector(const EmbeddingModel& model,
                                       std::int32_t id) {
  if (model.has_subwords()) {
    return word_representation(model, model.words[id]);
  }
  auto row = model.input.row(id);
  return {row.begin(), row.end()};
}

// Query vector for any word; OOV words are composable only on subword models.
inline std::vector<float> query_vector(const EmbeddingModel& model,
                                       std::string_view word) {
  std::int32_t id = model.id_of(word);
  if (id >= 0) return vocab_vector(model, id);
  if (model.has_subwords()) return oov_vector(model, word);
  throw std::runtime_error("'" + std::string(word) + "' is out of vocabulary");
}

// Vocabulary vectors L2-normalized once; queries are dot products after
// that. Zero rows cannot be ranked and are skipped at query time.
class QueryIndex {
 public:
  explicit QueryIndex(const EmbeddingModel& model)
      : model_(&model),
        normalized_(model.vocab_size(), model.dim()),
        zero_(model.vocab_size(), false) {
    for (std::int64_t i = 0; i < model.vocab_size(); ++i) {
      std::vector<float> v = vocab_vector(model, static_cast<std::int32_t>(i));
      double norm = 0;
      for (float x : v) norm += static_cast<double>(x) * static_cast<double>(x);
      auto row = normalized_.row(i);
      if (norm == 0.0) {
        zero_[i] = true;
        continue;
      }
      norm = std::sqrt(norm);
      for (std::int64_t d = 0; d < model.dim(); ++d) {
        row[d] = static_cast<float>(static_cast<double>(v[d]) / norm);
      }
    }
  }

  const EmbeddingModel& model() const { return *model_; }

  NeighborResult nearest(std::string_view word, std::int64_t k) const {
    if (k < 1) throw std::runtime_error("nearest_neighbors: k must be >= 1");
    const std::int32_t query_id = model_->id_of(word);
    std::vector<float> q = query_vector(*model_, word);
    double norm = 0;
    for (float x : q) norm += static_cast<double>(x) * static_cast<double>(x);
    if (norm == 0.0) {
      throw std::runtime_error("cosine: undefined similarity for a zero vector");
    }
    norm = std::sqrt(norm);
    std::vector<float> qn(q.size());
    for (std::size_t d = 0; d < q.size(); ++d) {
      qn[d] = static_cast<float>(static_cast<double>(q[d]) / norm);
    }

    std::vector<std::pair<double, std::int32_t>> sims;
    sims.reserve(model_->vocab_size());
    for (std::int64_t i = 0; i < model_->vocab_size(); ++i) {
      if (i == query_id || zero_[i]) continue;
      double s = 0;
      auto row = normalized_.row(i);
      for (std::size_t d = 0; d < qn.size(); ++d) {
        s += static_cast<double>(qn[d]) * static_cast<double>(row[d]);
      }
      sims.emplace_back(s, static_cast<std::int32_t>(i));
    }
    const std::int64_t take =
        std::min<std::int64_t>(k, static_cast<std::int64_t>(sims.size()));
    auto better = [](const std::pair<double, std::int32_t>& a,
                     const std::pair<double, std::int32_t>& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    };
    std::partial_sort(sims.begin(), sims.begin() + take, sims.end(), better);

    NeighborResult result;
    result.reserve(take);
    for (std::int64_t r = 0; r < take; ++r) {
      result.push_back(
          {sims[r].second, model_->words[sims[r].second], sims[r].first});
    }
    return result;
  }

 private:
  const EmbeddingModel* model_;
  Matrix<float> normalized_;
  std::vector<char> zero_;
};

// Convenience one-shot query; builds the index each call. Use QueryIndex
// directly when issuing many queries against the same model.
inline NeighborResult nearest_neighbors(const EmbeddingModel& model,
                                        std::string_view word, std::int64_t k) {
  return QueryIndex(model).nearest(word, k);
}

}  // namespace uzvec
