#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "uzvec/config.hpp"
#include "uzvec/corpus.hpp"
#include "uzvec/matrix.hpp"
#include "uzvec/model.hpp"
#include "uzvec/rng.hpp"
#include "uzvec/sampler.hpp"
#include "uzvec/vocab.hpp"
#include "uzvec/w2v.hpp"

namespace uzvec {

// Character n-grams of the boundary-wrapped word "<word>", sizes minn..maxn
// in scan order, smaller sizes first. The n-gram equal to the whole wrapped
// form is excluded: the word already has its own vocabulary row.
inline std::vector<std::string> subwords(std::string_view word,
                                         std::int32_t minn, std::int32_t maxn) {
  std::string wrapped = "<";
  wrapped += word;
  wrapped += ">";
  // Code point boundaries as byte offsets; n counts characters, not bytes.
  std::vector<std::size_t> bounds;
  std::size_t pos = 0;
  while (pos < wrapped.size()) {
    bounds.push_back(pos);
    if (decode_utf8(wrapped, pos) == kInvalidCodePoint) {
      throw std::runtime_error("subwords: malformed UTF-8 in word");
    }
  }
  bounds.push_back(wrapped.size());
  const std::int64_t len = static_cast<std::int64_t>(bounds.size()) - 1;

  std::vector<std::string> grams;
  for (std::int64_t n = minn; n <= maxn; ++n) {
    if (n == len) continue;  // full wrapped form
    for (std::int64_t i = 0; i + n <= len; ++i) {
      grams.emplace_back(wrapped.substr(bounds[i], bounds[i + n] - bounds[i]));
    }
  }
  return grams;
}

// FNV-1a over the n-gram's UTF-8 bytes.
inline std::uint32_t ngram_hash(std::string_view ngram) {
  std::uint32_t h = 2166136261u;
  for (unsigned char byte : ngram) {
    h ^= byte;
    h *= 16777619u;
  }
  return h;
}

inline std::int64_t ngram_row(std::string_view ngram, std::int64_t vocab_size,
                              std::int64_t bucket) {
  return vocab_size + static_cast<std::int64_t>(ngram_hash(ngram) %
                                                static_cast<std::uint64_t>(bucket));
}

// Input rows contributing to a word: its own row followed by its n-gram
// bucket rows. Collisions between n-grams are accepted silently.
inline std::vector<std::int32_t> word_row_set(std::string_view word,
                                              std::int32_t word_id,
                                              std::int64_t vocab_size,
                                              const TrainConfig& config) {
  std::vector<std::int32_t> rows;
  rows.push_back(word_id);
  for (const auto& g : subwords(word, config.minn, config.maxn)) {
    rows.push_back(
        static_cast<std::int32_t>(ngram_row(g, vocab_size, config.bucket)));
  }
  return rows;
}

namespace detail {

template <typename Real>
std::vector<Real> mean_of_rows(const Matrix<Real>& input,
                               std::span<const std::int32_t> rows) {
  std::vector<Real> v(input.cols(), Real(0));
  if (rows.empty()) return v;
  for (std::int32_t r : rows) {
    axpy(Real(1), std::span<const Real>(input.row(r)), std::span<Real>(v));
  }
  const Real inv = Real(1) / static_cast<Real>(rows.size());
  for (auto& x : v) x *= inv;
  return v;
}

}  // namespace detail

// In-vocabulary representation: mean of the word's own row and its n-gram
// rows, identical at training and query time.
inline std::vector<float> word_representation(const EmbeddingModel& model,
                                              std::string_view word) {
  std::int32_t id = model.id_of(word);
  if (id < 0) {
    throw std::runtime_error("word_representation: '" + std::string(word) +
                             "' is out of vocabulary");
  }
  auto rows = word_row_set(word, id, model.vocab_size(), model.config);
  return detail::mean_of_rows(model.input, rows);
}

// Out-of-vocabulary composition: mean of n-gram rows only; the zero vector
// when the word yields no n-grams.
inline std::vector<float> oov_vector(const EmbeddingModel& model,
                                     std::string_view word) {
  std::vector<std::int32_t> rows;
  for (const auto& g : subwords(word, model.config.minn, model.config.maxn)) {
    rows.push_back(static_cast<std::int32_t>(
        ngram_row(g, model.vocab_size(), model.config.bucket)));
  }
  return detail::mean_of_rows(model.input, rows);
}

// Negative-sampling update through the composed representation: forward
// pass on the mean of `rows`, input gradient scattered back equally to
// every gathered row, scaled by 1/row-count.
template <typename Real, typename DrawNeg>
Real ft_composed_update(Matrix<Real>& input, std::span<const std::int32_t> rows,
                        Matrix<Real>& out, std::int32_t target,
                        DrawNeg&& draw_negative, std::int32_t negatives,
                        Real lr, std::vector<Real>& hidden,
                        std::vector<Real>& grad) {
  hidden.assign(input.cols(), Real(0));
  for (std::int32_t r : rows) {
    axpy(Real(1), std::span<const Real>(input.row(r)),
         std::span<Real>(hidden));
  }
  const Real inv = Real(1) / static_cast<Real>(rows.size());
  for (auto& x : hidden) x *= inv;

  grad.assign(input.cols(), Real(0));
  const Real loss =
      ns_update<Real>(hidden, out, target, draw_negative, negatives, lr, grad);
  const Real scale = -lr * inv;
  for (std::int32_t r : rows) {
    axpy(scale, std::span<const Real>(grad), input.row(r));
  }
  return loss;
}

// Word2vec training loop with negative sampling where every word is
// represented by its row set. Skipgram gathers the center word's set; CBOW
// gathers the union of the context words' sets.
inline EmbeddingModel train_fasttext(const TokenDocs& corpus,
                                     const Vocabulary& vocab,
                                     const TrainConfig& config,
                                     TrainStats* stats = nullptr) {
  config.validate();
  if (config.algo != Algo::fasttext) {
    throw std::runtime_error("train_fasttext: config.algo is not fasttext");
  }
  if (config.loss != Loss::negative_sampling) {
    throw std::runtime_error("train_fasttext: only ns loss is supported");
  }
  if (vocab.size() < 2) {
    throw std::runtime_error(
        "vocabulary has fewer than two words; nothing to train");
  }
  if (corpus.total_ids == 0) {
    throw std::runtime_error("token stream is empty or disjoint from the vocabulary");
  }

  const std::int64_t vocab_size = vocab.size();
  const std::int32_t dim = config.dim;

  EmbeddingModel model;
  model.config = config;
  model.words.reserve(vocab_size);
  model.counts.reserve(vocab_size);
  for (const auto& e : vocab.entries()) {
    model.words.push_back(e.word);
    model.counts.push_back(e.count);
  }
  model.input = init_input_matrix(vocab_size + config.bucket, dim, config.seed);
  model.output = Matrix<float>(vocab_size, dim);

  // Immutable per-word row sets, shared across workers.
  std::vector<std::vector<std::int32_t>> row_sets(vocab_size);
  for (std::int64_t w = 0; w < vocab_size; ++w) {
    row_sets[w] = word_row_set(vocab.word(w), static_cast<std::int32_t>(w),
                               vocab_size, config);
  }

  NegativeSampler sampler(vocab, kNsPower);
  const std::vector<double> keep = detail::keep_probs(vocab, config.sample);
  const auto ranges = detail::partition_docs(corpus, config.workers);
  const std::int64_t total_work =
      static_cast<std::int64_t>(config.epochs) * corpus.total_ids;
  std::atomic<std::int64_t> processed{0};
  std::vector<detail::EpochTally> tallies(ranges.size());

  auto worker = [&](std::size_t widx) {
    Rng rng(derive_seed(config.seed, widx));
    auto& tally = tallies[widx];
    tally.loss_sum.assign(config.epochs, 0.0);
    tally.updates.assign(config.epochs, 0);
    std::vector<std::int32_t> sent, gathered;
    std::vector<float> hidden, grad;
    auto [doc_begin, doc_end] = ranges[widx];

    for (std::int32_t epoch = 0; epoch < config.epochs; ++epoch) {
      for (std::size_t d = doc_begin; d < doc_end; ++d) {
        const auto& doc = corpus.docs[d];
        if (doc.empty()) continue;
        const double progress =
            static_cast<double>(processed.load(std::memory_order_relaxed)) /
            static_cast<double>(total_work);
        const float lr =
            static_cast<float>(linear_lr(std::min(progress, 1.0), config.alpha0));

        sent.clear();
        for (std::int32_t id : doc) {
          if (keep[id] >= 1.0 || rng.uniform01() < keep[id]) sent.push_back(id);
        }
        processed.fetch_add(static_cast<std::int64_t>(doc.size()),
                            std::memory_order_relaxed);

        const std::int64_t n = static_cast<std::int64_t>(sent.size());
        for (std::int64_t c = 0; c < n; ++c) {
          const std::int64_t b =
              1 + static_cast<std::int64_t>(rng.below(config.window));
          const std::int64_t lo = std::max<std::int64_t>(0, c - b);
          const std::int64_t hi = std::min<std::int64_t>(n - 1, c + b);

          if (config.arch == Arch::skipgram) {
            const auto& rows = row_sets[sent[c]];
            for (std::int64_t j = lo; j <= hi; ++j) {
              if (j == c) continue;
              const std::int32_t target = sent[j];
              float loss = ft_composed_update<float>(
                  model.input, rows, model.output, target,
                  [&] { return sampler.draw_excluding(target, rng); },
                  config.negatives, lr, hidden, grad);
              tally.loss_sum[epoch] += loss;
              ++tally.updates[epoch];
            }
          } else {
            gathered.clear();
            for (std::int64_t j = lo; j <= hi; ++j) {
              if (j == c) continue;
              const auto& rows = row_sets[sent[j]];
              gathered.insert(gathered.end(), rows.begin(), rows.end());
            }
            if (gathered.empty()) continue;
            const std::int32_t target = sent[c];
            float loss = ft_composed_update<float>(
                model.input, gathered, model.output, target,
                [&] { return sampler.draw_excluding(target, rng); },
                config.negatives, lr, hidden, grad);
            tally.loss_sum[epoch] += loss;
            ++tally.updates[epoch];
          }
        }
      }
    }
  };

  if (ranges.size() == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(ranges.size());
    for (std::size_t w = 0; w < ranges.size(); ++w) {
      threads.emplace_back(worker, w);
    }
    for (auto& t : threads) t.join();
  }

  detail::merge_tallies(tallies, config.epochs, stats);
  if (!model.input.all_finite() || !model.output.all_finite()) {
    throw std::runtime_error("training produced non-finite parameters");
  }
  model.rebuild_index();
  return model;
}

}  // namespace uzvec
