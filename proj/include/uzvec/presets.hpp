#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uzvec/config.hpp"

namespace uzvec {

// The nine published training configurations, addressable by name.
inline const std::vector<std::pair<std::string, TrainConfig>>&
pipeline_presets() {
  static const std::vector<std::pair<std::string, TrainConfig>> presets = [] {
    std::vector<std::pair<std::string, TrainConfig>> list;

    auto w2v = [](Arch arch, Loss loss, std::int32_t dim, std::int32_t window) {
      TrainConfig c;
      c.algo = Algo::word2vec;
      c.arch = arch;
      c.loss = loss;
      c.dim = dim;
      c.window = window;
      c.epochs = 5;
      c.alpha0 = arch == Arch::skipgram ? 0.025 : 0.05;
      c.negatives = 5;
      c.sample = 1e-3;
      return c;
    };
    list.emplace_back("w2v-cbow-ns-100",
                      w2v(Arch::cbow, Loss::negative_sampling, 100, 5));
    list.emplace_back("w2v-cbow-hs-300",
                      w2v(Arch::cbow, Loss::hierarchical_softmax, 300, 5));
    list.emplace_back("w2v-skipgram-ns-100",
                      w2v(Arch::skipgram, Loss::negative_sampling, 100, 10));
    list.emplace_back("w2v-skipgram-hs-300",
                      w2v(Arch::skipgram, Loss::hierarchical_softmax, 300, 10));

    {
      TrainConfig c;
      c.algo = Algo::glove;
      c.dim = 300;
      c.window = 15;
      c.epochs = 15;
      c.alpha0 = 0.05;
      c.xmax = 100.0;
      c.weight_alpha = 0.75;
      list.emplace_back("glove-300", c);
    }

    auto ft = [](Arch arch, std::int32_t dim) {
      TrainConfig c;
      c.algo = Algo::fasttext;
      c.arch = arch;
      c.loss = Loss::negative_sampling;
      c.dim = dim;
      c.window = 5;
      c.epochs = 5;
      c.alpha0 = 0.05;
      c.negatives = 5;
      c.sample = 1e-4;
      c.minn = 2;
      c.maxn = 5;
      c.bucket = 2000000;
      return c;
    };
    list.emplace_back("fasttext-cbow-100", ft(Arch::cbow, 100));
    list.emplace_back("fasttext-cbow-300", ft(Arch::cbow, 300));
    list.emplace_back("fasttext-skipgram-100", ft(Arch::skipgram, 100));
    list.emplace_back("fasttext-skipgram-300", ft(Arch::skipgram, 300));
    return list;
  }();
  return presets;
}

inline std::string preset_names() {
  std::string names;
  for (const auto& [name, cfg] : pipeline_presets()) {
    if (!names.empty()) names += ", ";
    names += name;
  }
  return names;
}

inline const TrainConfig& find_preset(std::string_view name) {
  for (const auto& [pname, cfg] : pipeline_presets()) {
    if (pname == name) return cfg;
  }
  throw std::runtime_error("unknown preset '" + std::string(name) +
                           "'; valid presets: " + preset_names());
}

}  // namespace uzvec
