#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "uzvec/query.hpp"

using namespace uzvec;

namespace {

EmbeddingModel model_from(std::vector<std::pair<std::string, std::vector<float>>>
                              rows) {
  EmbeddingModel m;
  m.config.dim = static_cast<std::int32_t>(rows[0].second.size());
  m.input = Matrix<float>(static_cast<std::int64_t>(rows.size()), m.config.dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.words.push_back(rows[i].first);
    m.counts.push_back(1);
    std::copy(rows[i].second.begin(), rows[i].second.end(),
              m.input.row(static_cast<std::int64_t>(i)).begin());
  }
  m.output = Matrix<float>(0, m.config.dim);
  m.rebuild_index();
  return m;
}

EmbeddingModel random_model(std::mt19937& gen, std::int64_t vocab,
                            std::int32_t dim) {
  std::vector<std::pair<std::string, std::vector<float>>> rows;
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::int64_t i = 0; i < vocab; ++i) {
    std::vector<float> v(dim);
    for (auto& x : v) x = dist(gen);
    rows.emplace_back("w" + std::to_string(i), std::move(v));
  }
  return model_from(std::move(rows));
}

// Full-sort scan mirroring the index arithmetic: per-row normalization in
// double, dot products accumulated in double, ties to the lower id.
NeighborResult brute_force_nn(const EmbeddingModel& m, const std::string& word,
                              std::int64_t k) {
  const std::int32_t qid = m.id_of(word);
  const std::int64_t dim = m.dim();
  auto normalized = [&](std::int64_t i) {
    std::vector<float> v(m.input.row(i).begin(), m.input.row(i).end());
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * static_cast<double>(x);
    norm = std::sqrt(norm);
    for (auto& x : v) x = static_cast<float>(static_cast<double>(x) / norm);
    return v;
  };
  std::vector<float> qn = normalized(qid);
  std::vector<std::pair<double, std::int32_t>> sims;
  for (std::int64_t i = 0; i < m.vocab_size(); ++i) {
    if (i == qid) continue;
    std::vector<float> rn = normalized(i);
    double s = 0;
    for (std::int64_t d = 0; d < dim; ++d) {
      s += static_cast<double>(qn[d]) * static_cast<double>(rn[d]);
    }
    sims.emplace_back(s, static_cast<std::int32_t>(i));
  }
  std::sort(sims.begin(), sims.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  sims.resize(std::min<std::size_t>(sims.size(), static_cast<std::size_t>(k)));
  NeighborResult out;
  for (const auto& [s, id] : sims) out.push_back({id, m.words[id], s});
  return out;
}

}  // namespace

TEST_CASE("cosine basics") {
  std::vector<float> v{0.3f, -1.2f, 4.0f};
  CHECK_THAT(cosine(v, v), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}),
             Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK_THAT(cosine(std::vector<float>{1, 0}, std::vector<float>{1, 1}),
             Catch::Matchers::WithinAbs(0.7071067811865476, 1e-9));
  CHECK_THROWS_WITH(cosine(std::vector<float>{0, 0}, v),
                    Catch::Matchers::ContainsSubstring("undefined"));
}

TEST_CASE("nearest neighbor on a hand-built model") {
  const float s = 1.0f / std::sqrt(2.0f);
  EmbeddingModel m = model_from({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {s, s}}});
  NeighborResult r = nearest_neighbors(m, "a", 1);
  REQUIRE(r.size() == 1);
  CHECK(r[0].word == "c");
  CHECK_THAT(r[0].similarity, Catch::Matchers::WithinAbs(0.70711, 1e-5));
}

TEST_CASE("k larger than the vocabulary returns everything ordered") {
  std::mt19937 gen(3);
  EmbeddingModel m = random_model(gen, 9, 4);
  NeighborResult r = nearest_neighbors(m, "w0", 100);
  CHECK(r.size() == 8);  // query excluded
  for (std::size_t i = 1; i < r.size(); ++i) {
    CHECK(r[i - 1].similarity >= r[i].similarity);
  }
  for (const auto& n : r) CHECK(n.word != "w0");
}

TEST_CASE("query word absent from a plain model is an error") {
  std::mt19937 gen(4);
  EmbeddingModel m = random_model(gen, 5, 3);
  CHECK_THROWS_WITH(nearest_neighbors(m, "nope", 3),
                    Catch::Matchers::ContainsSubstring("out of vocabulary"));
}

TEST_CASE("ties break toward the lower word id") {
  EmbeddingModel m = model_from({{"q", {1, 0}},
                                 {"dup1", {2, 2}},
                                 {"dup0", {1, 1}},
                                 {"far", {-1, 0}}});
  // dup1 (id 1) and dup0 (id 2) point the same direction. Identical floats
  // after normalization make an exact similarity tie.
  NeighborResult r = nearest_neighbors(m, "q", 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].word == "dup1");
  CHECK(r[1].word == "dup0");
  CHECK(r[0].similarity == r[1].similarity);
  CHECK(r[2].word == "far");
}

TEST_CASE("nearest neighbors equals the brute-force scan") {
  std::mt19937 gen(777);
  for (int trial = 0; trial < 10; ++trial) {
    const std::int64_t vocab = 20 + gen() % 480;
    const std::int32_t dim = 2 + gen() % 30;
    EmbeddingModel m = random_model(gen, vocab, dim);
    QueryIndex index(m);
    const std::string query = "w" + std::to_string(gen() % vocab);
    const std::int64_t k = 1 + gen() % 15;
    NeighborResult got = index.nearest(query, k);
    NeighborResult expected = brute_force_nn(m, query, k);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == expected[i].id);
      CHECK(got[i].similarity == expected[i].similarity);
    }
  }
}

TEST_CASE("ordering is invariant under uniform scaling") {
  std::mt19937 gen(888);
  for (int trial = 0; trial < 5; ++trial) {
    const std::int64_t vocab = 50 + gen() % 200;
    EmbeddingModel m = random_model(gen, vocab, 8);
    EmbeddingModel scaled = m;
    for (std::size_t i = 0; i < scaled.input.size(); ++i) {
      scaled.input.data()[i] *= 3.7f;
    }
    NeighborResult a = nearest_neighbors(m, "w1", 10);
    NeighborResult b = nearest_neighbors(scaled, "w1", 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].id == b[i].id);
      CHECK_THAT(a[i].similarity,
                 Catch::Matchers::WithinAbs(b[i].similarity, 1e-6));
    }
  }
}

TEST_CASE("subword models compose query vectors") {
  EmbeddingModel m;
  m.config.algo = Algo::fasttext;
  m.config.dim = 4;
  m.config.minn = 2;
  m.config.maxn = 3;
  m.config.bucket = 128;
  for (int i = 0; i < 6; ++i) {
    m.words.push_back("word" + std::to_string(i));
    m.counts.push_back(5);
  }
  m.input = Matrix<float>(6 + 128, 4);
  std::mt19937 gen(9);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::size_t k = 0; k < m.input.size(); ++k) m.input.data()[k] = dist(gen);
  m.output = Matrix<float>(6, 4);
  m.rebuild_index();

  // In-vocab: query-time representation equals the training-time gather.
  std::vector<float> rep = word_representation(m, "word2");
  NeighborResult r = nearest_neighbors(m, "word2", 3);
  REQUIRE(r.size() == 3);
  double best = -2.0;
  std::string best_word;
  for (int i = 0; i < 6; ++i) {
    if (i == 2) continue;
    std::vector<float> other = word_representation(m, m.words[i]);
    double s = cosine(rep, other);
    if (s > best) {
      best = s;
      best_word = m.words[i];
    }
  }
  CHECK(r[0].word == best_word);
  // The index stores normalized rows as float32; direct double cosine
  // differs in the last bits.
  CHECK_THAT(r[0].similarity, Catch::Matchers::WithinAbs(best, 1e-6));

  // OOV queries compose from n-grams and still return k neighbors.
  NeighborResult oov = nearest_neighbors(m, "wordX", 4);
  CHECK(oov.size() == 4);
}
