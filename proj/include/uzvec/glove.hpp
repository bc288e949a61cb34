#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

#include "uzvec/config.hpp"
#include "uzvec/corpus.hpp"
#include "uzvec/matrix.hpp"
#include "uzvec/model.hpp"
#include "uzvec/rng.hpp"
#include "uzvec/vocab.hpp"
#include "uzvec/w2v.hpp"

namespace uzvec {

struct CooccurrenceRecord {
  std::int32_t i;
  std::int32_t j;
  double x;  // distance-weighted count, sum of 1/d over pair occurrences

  bool operator==(const CooccurrenceRecord&) const = default;
};

// Symmetric distance-weighted co-occurrence counts. For every ordered pair
// of in-vocabulary tokens at distance d <= window within a line, X[i][j]
// gains 1/d. Distances are measured after out-of-vocabulary tokens have
// been dropped. Records are merged and returned sorted by (i, j).
inline std::vector<CooccurrenceRecord> build_cooccurrence(
    const TokenDocs& corpus, std::int32_t window) {
  if (window < 1) throw std::runtime_error("cooccurrence window must be >= 1");
  std::unordered_map<std::uint64_t, double> acc;
  for (const auto& doc : corpus.docs) {
    const std::int64_t n = static_cast<std::int64_t>(doc.size());
    for (std::int64_t p = 0; p < n; ++p) {
      const std::int64_t lo = std::max<std::int64_t>(0, p - window);
      for (std::int64_t q = lo; q < p; ++q) {
        const double w = 1.0 / static_cast<double>(p - q);
        const std::uint64_t a = static_cast<std::uint32_t>(doc[p]);
        const std::uint64_t b = static_cast<std::uint32_t>(doc[q]);
        acc[(a << 32) | b] += w;
        acc[(b << 32) | a] += w;
      }
    }
  }
  std::vector<CooccurrenceRecord> records;
  records.reserve(acc.size());
  for (const auto& [key, x] : acc) {
    records.push_back({static_cast<std::int32_t>(key >> 32),
                       static_cast<std::int32_t>(key & 0xFFFFFFFFu), x});
  }
  std::sort(records.begin(), records.end(),
            [](const CooccurrenceRecord& a, const CooccurrenceRecord& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  return records;
}

// Weighting function f(x): (x/xmax)^alpha below the cap, 1 at and above it.
inline double glove_weight(double x, double xmax, double alpha) {
  return x < xmax ? std::pow(x / xmax, alpha) : 1.0;
}

// Main vectors, context vectors, biases, and their AdaGrad accumulators.
template <typename Real>
struct GloveParams {
  Matrix<Real> w, wt;
  std::vector<Real> b, bt;
  Matrix<Real> gw, gwt;
  std::vector<Real> gb, gbt;
  double xmax;
  double weight_alpha;

  GloveParams(std::int64_t vocab_size, std::int32_t dim, std::uint64_t seed,
              double xmax_, double weight_alpha_)
      : w(vocab_size, dim),
        wt(vocab_size, dim),
        b(vocab_size),
        bt(vocab_size),
        gw(vocab_size, dim),
        gwt(vocab_size, dim),
        gb(vocab_size, Real(1)),
        gbt(vocab_size, Real(1)),
        xmax(xmax_),
        weight_alpha(weight_alpha_) {
    Rng rng(seed);
    const double half = 0.5 / static_cast<double>(dim + 1);
    w.fill_uniform(rng, Real(-half), Real(half));
    wt.fill_uniform(rng, Real(-half), Real(half));
    for (auto& v : b) v = static_cast<Real>(rng.uniform(-half, half));
    for (auto& v : bt) v = static_cast<Real>(rng.uniform(-half, half));
    gw.fill(Real(1));
    gwt.fill(Real(1));
  }
};

// One AdaGrad step on the record's cost f(x) * (w_i.wt_j + b_i + bt_j - ln x)^2.
// All gradients are taken at the pre-update parameters; each coordinate is
// scaled by lr/sqrt(accumulator) and the accumulator then gains the squared
// gradient. Returns the cost before the update.
template <typename Real>
Real glove_step(const CooccurrenceRecord& rec, GloveParams<Real>& p, Real lr) {
  auto wi = p.w.row(rec.i);
  auto wj = p.wt.row(rec.j);
  auto gwi = p.gw.row(rec.i);
  auto gwj = p.gwt.row(rec.j);

  Real diff = p.b[rec.i] + p.bt[rec.j] - static_cast<Real>(std::log(rec.x));
  diff += dot(std::span<const Real>(wi), std::span<const Real>(wj));
  const Real f = static_cast<Real>(glove_weight(rec.x, p.xmax, p.weight_alpha));
  const Real cost = f * diff * diff;
  const Real g = Real(2) * f * diff;

  for (std::size_t d = 0; d < wi.size(); ++d) {
    const Real a = wi[d], c = wj[d];
    const Real gi = g * c, gj = g * a;
    wi[d] = a - lr * gi / std::sqrt(gwi[d]);
    wj[d] = c - lr * gj / std::sqrt(gwj[d]);
    gwi[d] += gi * gi;
    gwj[d] += gj * gj;
  }
  p.b[rec.i] -= lr * g / std::sqrt(p.gb[rec.i]);
  p.bt[rec.j] -= lr * g / std::sqrt(p.gbt[rec.j]);
  p.gb[rec.i] += g * g;
  p.gbt[rec.j] += g * g;
  return cost;
}

// AdaGrad training over the record set; records are reshuffled once per
// epoch under the seed. The emitted vector for each word is w + wt.
// TrainStats holds the total cost per epoch.
inline EmbeddingModel train_glove(std::vector<CooccurrenceRecord> records,
                                  const Vocabulary& vocab,
                                  const TrainConfig& config,
                                  TrainStats* stats = nullptr) {
  config.validate();
  if (config.algo != Algo::glove) {
    throw std::runtime_error("train_glove: config.algo is not glove");
  }
  if (records.empty()) {
    throw std::runtime_error("co-occurrence record set is empty");
  }
  for (const auto& r : records) {
    if (r.i < 0 || r.i >= vocab.size() || r.j < 0 || r.j >= vocab.size()) {
      throw std::runtime_error("co-occurrence record id out of range");
    }
    if (!(r.x > 0.0)) {
      throw std::runtime_error("co-occurrence record weight must be positive");
    }
  }

  const std::int64_t vocab_size = vocab.size();
  GloveParams<double> params(vocab_size, config.dim, config.seed, config.xmax,
                             config.weight_alpha);
  Rng shuffle_rng(derive_seed(config.seed, 0x517));
  if (stats) stats->epoch_loss.assign(config.epochs, 0.0);

  const std::int32_t workers = config.workers;
  for (std::int32_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(records, shuffle_rng);
    double epoch_cost = 0.0;
    if (workers <= 1) {
      for (const auto& rec : records) {
        epoch_cost += glove_step(rec, params, config.alpha0);
      }
    } else {
      std::vector<double> costs(workers, 0.0);
      std::vector<std::thread> threads;
      const std::size_t chunk = (records.size() + workers - 1) / workers;
      for (std::int32_t t = 0; t < workers; ++t) {
        threads.emplace_back([&, t] {
          const std::size_t begin = static_cast<std::size_t>(t) * chunk;
          const std::size_t end = std::min(records.size(), begin + chunk);
          for (std::size_t r = begin; r < end; ++r) {
            costs[t] += glove_step(records[r], params, config.alpha0);
          }
        });
      }
      for (auto& t : threads) t.join();
      for (double c : costs) epoch_cost += c;
    }
    if (stats) stats->epoch_loss[epoch] = epoch_cost;
  }

  EmbeddingModel model;
  model.config = config;
  model.words.reserve(vocab_size);
  model.counts.reserve(vocab_size);
  for (const auto& e : vocab.entries()) {
    model.words.push_back(e.word);
    model.counts.push_back(e.count);
  }
  model.input = Matrix<float>(vocab_size, config.dim);
  for (std::int64_t i = 0; i < vocab_size; ++i) {
    auto dst = model.input.row(i);
    auto a = params.w.row(i);
    auto b = params.wt.row(i);
    for (std::int32_t d = 0; d < config.dim; ++d) {
      dst[d] = static_cast<float>(a[d] + b[d]);
    }
  }
  model.output = Matrix<float>(0, config.dim);
  if (!model.input.all_finite()) {
    throw std::runtime_error("training produced non-finite parameters");
  }
  model.rebuild_index();
  return model;
}

}  // namespace uzvec
