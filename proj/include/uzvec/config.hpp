#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uzvec {

enum class Algo : std::uint8_t { word2vec = 0, glove = 1, fasttext = 2 };
enum class Arch : std::uint8_t { cbow = 0, skipgram = 1 };
enum class Loss : std::uint8_t { negative_sampling = 0, hierarchical_softmax = 1 };

inline std::string to_string(Algo a) {
  switch (a) {
    case Algo::word2vec: return "word2vec";
    case Algo::glove: return "glove";
    case Algo::fasttext: return "fasttext";
  }
  return "?";
}
inline std::string to_string(Arch a) {
  return a == Arch::cbow ? "cbow" : "skipgram";
}
inline std::string to_string(Loss l) {
  return l == Loss::negative_sampling ? "ns" : "hs";
}

inline Algo parse_algo(std::string_view s) {
  if (s == "word2vec") return Algo::word2vec;
  if (s == "glove") return Algo::glove;
  if (s == "fasttext") return Algo::fasttext;
  throw std::runtime_error("unknown algorithm '" + std::string(s) + "'");
}
inline Arch parse_arch(std::string_view s) {
  if (s == "cbow") return Arch::cbow;
  if (s == "skipgram") return Arch::skipgram;
  throw std::runtime_error("unknown architecture '" + std::string(s) + "'");
}
inline Loss parse_loss(std::string_view s) {
  if (s == "ns") return Loss::negative_sampling;
  if (s == "hs") return Loss::hierarchical_softmax;
  throw std::runtime_error("unknown loss '" + std::string(s) + "'");
}

// Full training configuration for every algorithm; a resolved snapshot of
// this struct travels with each trained model and its manifest.
struct TrainConfig {
  Algo algo = Algo::word2vec;
  Arch arch = Arch::cbow;
  Loss loss = Loss::negative_sampling;
  std::int32_t dim = 100;
  std::int32_t window = 5;
  std::int32_t epochs = 5;
  double alpha0 = 0.05;      // initial learning rate
  std::int32_t negatives = 5;
  double sample = 1e-3;      // subsampling threshold; 0 disables
  std::uint64_t seed = 1;
  std::int32_t workers = 1;
  std::int32_t min_count = 5;
  // fastText subwords
  std::int32_t minn = 2;
  std::int32_t maxn = 5;
  std::int64_t bucket = 2000000;
  // GloVe weighting
  double xmax = 100.0;
  double weight_alpha = 0.75;

  bool operator==(const TrainConfig&) const = default;

  void validate() const {
    if (dim < 1) throw std::runtime_error("dim must be >= 1");
    if (window < 1) throw std::runtime_error("window must be >= 1");
    if (epochs < 1) throw std::runtime_error("epochs must be >= 1");
    if (alpha0 <= 0.0) throw std::runtime_error("alpha must be > 0");
    if (workers < 1) throw std::runtime_error("workers must be >= 1");
    if (sample < 0.0) throw std::runtime_error("sample must be >= 0");
    if (algo != Algo::glove && loss == Loss::negative_sampling &&
        negatives < 1) {
      throw std::runtime_error("negatives must be >= 1 with ns loss");
    }
    if (algo == Algo::fasttext) {
      if (minn < 1 || minn > maxn) {
        throw std::runtime_error("subword range requires 1 <= minn <= maxn");
      }
      if (bucket < 1) throw std::runtime_error("bucket must be >= 1");
    }
    if (algo == Algo::glove && xmax <= 0.0) {
      throw std::runtime_error("xmax must be > 0");
    }
  }
};

}  // namespace uzvec
