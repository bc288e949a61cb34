#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "uzvec/config.hpp"
#include "uzvec/corpus.hpp"
#include "uzvec/huffman.hpp"
#include "uzvec/matrix.hpp"
#include "uzvec/model.hpp"
#include "uzvec/rng.hpp"
#include "uzvec/sampler.hpp"
#include "uzvec/vocab.hpp"

namespace uzvec {

inline constexpr double kNsPower = 0.75;

template <typename Real>
inline Real sigmoid(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  Real e = std::exp(x);
  return e / (Real(1) + e);
}

// log(1 + e^x), stable for large |x|.
template <typename Real>
inline Real softplus(Real x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Linear decay to a floor of 1e-4 of the initial rate.
inline double linear_lr(double progress, double alpha0) {
  return alpha0 * std::max(1.0 - progress, 1e-4);
}

// One negative-sampling step against the positive output row `target` and
// `negatives` noise rows. Output rows are updated in place; the gradient
// w.r.t. the input representation is accumulated into `input_grad` and
// applied by the caller once all output rows are done. Returns the loss.
template <typename Real, typename DrawNeg>
Real ns_update(std::span<const Real> u, Matrix<Real>& out, std::int32_t target,
               DrawNeg&& draw_negative, std::int32_t negatives, Real lr,
               std::span<Real> input_grad) {
  Real loss = 0;
  for (std::int32_t k = 0; k <= negatives; ++k) {
    const bool positive = (k == 0);
    const std::int32_t row_id = positive ? target : draw_negative();
    auto row = out.row(row_id);
    const Real f = dot(std::span<const Real>(row), u);
    const Real label = positive ? Real(1) : Real(0);
    loss += positive ? softplus(-f) : softplus(f);
    const Real g = sigmoid(f) - label;  // dLoss/df
    axpy(g, std::span<const Real>(row), input_grad);
    axpy(-lr * g, u, row);
  }
  return loss;
}

// One hierarchical-softmax step along the target word's Huffman path.
// Same deferred input-gradient contract as ns_update. Zero-length codes
// (single-word vocabulary) are a no-op with zero loss.
template <typename Real>
Real hs_update(std::span<const Real> u, Matrix<Real>& out,
               std::span<const std::uint8_t> code,
               std::span<const std::int32_t> path, Real lr,
               std::span<Real> input_grad) {
  Real loss = 0;
  for (std::size_t j = 0; j < code.size(); ++j) {
    auto row = out.row(path[j]);
    const Real f = dot(std::span<const Real>(row), u);
    const Real sign = Real(1) - Real(2) * Real(code[j]);
    loss += softplus(-sign * f);
    const Real g = sigmoid(f) - (Real(1) - Real(code[j]));  // label = 1-code
    axpy(g, std::span<const Real>(row), input_grad);
    axpy(-lr * g, u, row);
  }
  return loss;
}

inline Matrix<float> init_input_matrix(std::int64_t rows, std::int32_t dim,
                                       std::uint64_t seed) {
  Matrix<float> m(rows, dim);
  Rng rng(seed);
  double half = 0.5 / static_cast<double>(dim);
  m.fill_uniform(rng, static_cast<float>(-half), static_cast<float>(half));
  return m;
}

struct TrainStats {
  std::vector<double> epoch_loss;  // mean update loss per epoch
};

namespace detail {

// Per-word keep probabilities for frequency subsampling; 1 disables.
inline std::vector<double> keep_probs(const Vocabulary& vocab, double sample) {
  std::vector<double> keep(vocab.size(), 1.0);
  if (sample > 0.0) {
    for (std::int64_t i = 0; i < vocab.size(); ++i) {
      keep[i] = keep_probability(vocab.count(i), vocab.total_tokens(), sample);
    }
  }
  return keep;
}

// Contiguous document ranges balanced by token mass.
inline std::vector<std::pair<std::size_t, std::size_t>> partition_docs(
    const TokenDocs& corpus, std::int32_t workers) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  const std::int64_t per_worker =
      (corpus.total_ids + workers - 1) / std::max(workers, 1);
  std::size_t begin = 0;
  std::int64_t mass = 0;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    mass += static_cast<std::int64_t>(corpus.docs[i].size());
    if (mass >= per_worker &&
        ranges.size() + 1 < static_cast<std::size_t>(workers)) {
      ranges.emplace_back(begin, i + 1);
      begin = i + 1;
      mass = 0;
    }
  }
  ranges.emplace_back(begin, corpus.docs.size());
  return ranges;
}

struct EpochTally {
  std::vector<double> loss_sum;
  std::vector<std::int64_t> updates;
};

inline void merge_tallies(const std::vector<EpochTally>& tallies,
                          std::int32_t epochs, TrainStats* stats) {
  if (!stats) return;
  stats->epoch_loss.assign(epochs, 0.0);
  for (std::int32_t e = 0; e < epochs; ++e) {
    double sum = 0;
    std::int64_t n = 0;
    for (const auto& t : tallies) {
      sum += t.loss_sum[e];
      n += t.updates[e];
    }
    stats->epoch_loss[e] = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
}

}  // namespace detail

// Trains CBOW or skipgram vectors under negative sampling or hierarchical
// softmax. Sentence = document line; windows never cross lines. Workers
// apply unsynchronized updates to the shared matrices (lost updates are
// accepted); workers=1 with a fixed seed is byte-reproducible.
inline EmbeddingModel train_word2vec(const TokenDocs& corpus,
                                     const Vocabulary& vocab,
                                     const TrainConfig& config,
                                     TrainStats* stats = nullptr) {
  config.validate();
  if (config.algo != Algo::word2vec) {
    throw std::runtime_error("train_word2vec: config.algo is not word2vec");
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
  const bool use_hs = config.loss == Loss::hierarchical_softmax;

  EmbeddingModel model;
  model.config = config;
  model.words.reserve(vocab_size);
  model.counts.reserve(vocab_size);
  for (const auto& e : vocab.entries()) {
    model.words.push_back(e.word);
    model.counts.push_back(e.count);
  }
  model.input = init_input_matrix(vocab_size, dim, config.seed);
  model.output = Matrix<float>(use_hs ? vocab_size - 1 : vocab_size, dim);

  HuffmanCoding huffman;
  std::vector<NegativeSampler> sampler;
  if (use_hs) {
    huffman = build_huffman(vocab);
  } else {
    sampler.emplace_back(vocab, kNsPower);
  }

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
    std::vector<std::int32_t> sent;
    std::vector<float> hidden(dim), grad(dim);
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
            // Center word is the input; each context word is a target.
            for (std::int64_t j = lo; j <= hi; ++j) {
              if (j == c) continue;
              auto u = model.input.row(sent[c]);
              std::fill(grad.begin(), grad.end(), 0.0f);
              const std::int32_t target = sent[j];
              float loss;
              if (use_hs) {
                const auto& wc = huffman.words[target];
                loss = hs_update<float>(u, model.output, wc.code, wc.path, lr,
                                        grad);
              } else {
                loss = ns_update<float>(
                    u, model.output, target,
                    [&] { return sampler[0].draw_excluding(target, rng); },
                    config.negatives, lr, grad);
              }
              axpy(-lr, std::span<const float>(grad), u);
              tally.loss_sum[epoch] += loss;
              ++tally.updates[epoch];
            }
          } else {
            // CBOW: mean of the context predicts the center; the mean
            // gradient is applied to every contributing context row.
            std::fill(hidden.begin(), hidden.end(), 0.0f);
            std::int32_t cw = 0;
            for (std::int64_t j = lo; j <= hi; ++j) {
              if (j == c) continue;
              axpy(1.0f, std::span<const float>(model.input.row(sent[j])),
                   std::span<float>(hidden));
              ++cw;
            }
            if (cw == 0) continue;
            const float inv = 1.0f / static_cast<float>(cw);
            for (auto& h : hidden) h *= inv;
            std::fill(grad.begin(), grad.end(), 0.0f);
            const std::int32_t target = sent[c];
            float loss;
            if (use_hs) {
              const auto& wc = huffman.words[target];
              loss = hs_update<float>(hidden, model.output, wc.code, wc.path,
                                      lr, grad);
            } else {
              loss = ns_update<float>(
                  hidden, model.output, target,
                  [&] { return sampler[0].draw_excluding(target, rng); },
                  config.negatives, lr, grad);
            }
            for (std::int64_t j = lo; j <= hi; ++j) {
              if (j == c) continue;
              axpy(-lr, std::span<const float>(grad),
                   model.input.row(sent[j]));
            }
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
