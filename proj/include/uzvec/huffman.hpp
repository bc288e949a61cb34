#pragma once

#include <cstdint>
#include <queue>
#include <utility>
#include <vector>

#include "uzvec/vocab.hpp"

namespace uzvec {

// Per-word Huffman code over the count-weighted vocabulary, used as the
// binary decision tree for hierarchical softmax. code[j] is the branch taken
// at internal node path[j], root first; both have equal length.
struct HuffmanCoding {
  struct WordCode {
    std::vector<std::uint8_t> code;
    std::vector<std::int32_t> path;  // internal node ids in [0, vocab_size-2]
  };

  std::vector<WordCode> words;  // indexed by word id

  std::int64_t internal_nodes() const {
    return words.empty() ? 0 : static_cast<std::int64_t>(words.size()) - 1;
  }
};

// Repeatedly merges the two lowest-count nodes; ties go to the lower node
// id, and the first node popped becomes the 0-branch. Leaves are word ids,
// internal nodes are numbered in creation order.
inline HuffmanCoding build_huffman(const std::vector<std::int64_t>& counts) {
  const std::int64_t n = static_cast<std::int64_t>(counts.size());
  HuffmanCoding coding;
  coding.words.resize(n);
  if (n <= 1) return coding;  // single word: zero-length code

  const std::int64_t total_nodes = 2 * n - 1;
  std::vector<std::int32_t> parent(total_nodes, -1);
  std::vector<std::uint8_t> branch(total_nodes, 0);

  using Node = std::pair<std::int64_t, std::int32_t>;  // (count, id)
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;
  for (std::int32_t i = 0; i < n; ++i) {
    heap.emplace(counts[i], i);
  }
  std::int32_t next_id = static_cast<std::int32_t>(n);
  while (heap.size() > 1) {
    auto [c0, id0] = heap.top();
    heap.pop();
    auto [c1, id1] = heap.top();
    heap.pop();
    parent[id0] = next_id;
    parent[id1] = next_id;
    branch[id0] = 0;
    branch[id1] = 1;
    heap.emplace(c0 + c1, next_id);
    ++next_id;
  }

  for (std::int32_t w = 0; w < n; ++w) {
    auto& wc = coding.words[w];
    for (std::int32_t node = w; parent[node] != -1; node = parent[node]) {
      wc.code.push_back(branch[node]);
      wc.path.push_back(parent[node] - static_cast<std::int32_t>(n));
    }
    std::reverse(wc.code.begin(), wc.code.end());
    std::reverse(wc.path.begin(), wc.path.end());
  }
  return coding;
}

inline HuffmanCoding build_huffman(const Vocabulary& vocab) {
  std::vector<std::int64_t> counts;
  counts.reserve(vocab.size());
  for (const auto& e : vocab.entries()) counts.push_back(e.count);
  return build_huffman(counts);
}

}  // namespace uzvec
