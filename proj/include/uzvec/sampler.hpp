#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uzvec/rng.hpp"
#include "uzvec/vocab.hpp"

namespace uzvec {

// Noise distribution for negative sampling: p(w) proportional to
// count(w)^power. Backed by the alias method, so draws are O(1) and the
// table is O(vocab) instead of the classic fixed 10^8-slot array.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<std::int64_t>& counts, double power) {
    const std::size_t n = counts.size();
    if (n == 0) throw std::runtime_error("NegativeSampler: empty counts");
    probs_.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      probs_[i] = std::pow(static_cast<double>(counts[i]), power);
      total += probs_[i];
    }
    for (auto& p : probs_) p /= total;

    // Vose alias construction; stacks filled in id order for determinism.
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = probs_[i] * static_cast<double>(n);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      std::uint32_t s = small.back();
      small.pop_back();
      std::uint32_t l = large.back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    while (!large.empty()) {
      prob_[large.back()] = 1.0;
      large.pop_back();
    }
    while (!small.empty()) {  // numerical leftovers
      prob_[small.back()] = 1.0;
      small.pop_back();
    }
  }

  NegativeSampler(const Vocabulary& vocab, double power)
      : NegativeSampler(extract_counts(vocab), power) {}

  std::int32_t draw(Rng& rng) const {
    std::size_t i = static_cast<std::size_t>(rng.below(prob_.size()));
    return rng.uniform01() < prob_[i] ? static_cast<std::int32_t>(i)
                                      : static_cast<std::int32_t>(alias_[i]);
  }

  // Negative draws must not hit the positive target; rejected and redrawn.
  std::int32_t draw_excluding(std::int32_t target, Rng& rng) const {
    if (prob_.size() < 2) {
      throw std::runtime_error(
          "NegativeSampler: cannot exclude the only word in the vocabulary");
    }
    while (true) {
      std::int32_t d = draw(rng);
      if (d != target) return d;
    }
  }

  std::int64_t size() const { return static_cast<std::int64_t>(prob_.size()); }

  // Analytic distribution, for tests and diagnostics.
  const std::vector<double>& probabilities() const { return probs_; }

 private:
  static std::vector<std::int64_t> extract_counts(const Vocabulary& vocab) {
    std::vector<std::int64_t> counts;
    counts.reserve(vocab.size());
    for (const auto& e : vocab.entries()) counts.push_back(e.count);
    return counts;
  }

  std::vector<double> probs_;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace uzvec
