#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "uzvec/fasttext.hpp"

using namespace uzvec;

namespace {

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Independent n-gram counter: decode to code points, count windows, drop
// the full wrapped form when its size is in range.
std::int64_t expected_subword_count(const std::string& word, int minn,
                                    int maxn) {
  std::string wrapped = "<" + word + ">";
  std::int64_t len = 0;
  std::size_t pos = 0;
  while (pos < wrapped.size()) {
    decode_utf8(wrapped, pos);
    ++len;
  }
  std::int64_t total = 0;
  for (int n = minn; n <= maxn; ++n) {
    total += std::max<std::int64_t>(0, len - n + 1);
  }
  if (minn <= len && len <= maxn) --total;
  return total;
}

std::string random_cyrillic_word(std::mt19937& gen, std::size_t len) {
  static const std::u32string pool = U"абвгдеёжзийклмнопрстуфхўқғҳ-";
  std::u32string w;
  for (std::size_t i = 0; i < len; ++i) w.push_back(pool[gen() % pool.size()]);
  std::string out;
  for (char32_t cp : w) append_utf8(cp, out);
  return out;
}

EmbeddingModel subword_model(std::int32_t dim, std::int64_t vocab,
                             std::int64_t bucket, std::int32_t minn,
                             std::int32_t maxn) {
  EmbeddingModel m;
  m.config.algo = Algo::fasttext;
  m.config.dim = dim;
  m.config.minn = minn;
  m.config.maxn = maxn;
  m.config.bucket = bucket;
  for (std::int64_t i = 0; i < vocab; ++i) {
    m.words.push_back("w" + std::to_string(i));
    m.counts.push_back(10);
  }
  m.input = Matrix<float>(vocab + bucket, dim);
  m.output = Matrix<float>(vocab, dim);
  m.rebuild_index();
  return m;
}

Vocabulary vocab_of(std::vector<std::string> words) {
  std::unordered_map<std::string, std::int64_t> counts;
  std::int64_t c = 100;
  for (const auto& w : words) counts[w] = c--;
  return build_vocab(counts, 1);
}

}  // namespace

TEST_CASE("subwords enumerates sizes in order, excluding the full form") {
  CHECK(subwords("сув", 2, 5) ==
        std::vector<std::string>{"<с", "су", "ув", "в>", "<су", "сув", "ув>",
                                 "<сув", "сув>"});
  CHECK(subwords("а", 2, 5) == std::vector<std::string>{"<а", "а>"});
  // Only candidate is the wrapped form itself.
  CHECK(subwords("а", 3, 3).empty());
  CHECK(subwords("ab", 2, 2) == std::vector<std::string>{"<a", "ab", "b>"});
}

TEST_CASE("subword count matches the brute-force formula") {
  std::mt19937 gen(616);
  for (int trial = 0; trial < 200; ++trial) {
    std::string word = random_cyrillic_word(gen, 1 + gen() % 12);
    int minn = 1 + static_cast<int>(gen() % 4);
    int maxn = minn + static_cast<int>(gen() % 4);
    auto grams = subwords(word, minn, maxn);
    CHECK(static_cast<std::int64_t>(grams.size()) ==
          expected_subword_count(word, minn, maxn));
    for (const auto& g : grams) {
      CHECK(g != "<" + word + ">");
    }
  }
}

TEST_CASE("ngram_hash matches FNV-1a reference vectors") {
  CHECK(ngram_hash("") == 2166136261u);
  CHECK(ngram_hash("a") == 0xE40C292Cu);
  CHECK(ngram_hash("сув") == ngram_hash("сув"));
  CHECK(ngram_row("a", 1000, 50) == 1000 + 0xE40C292Cu % 50);
}

TEST_CASE("word_representation gathers and averages") {
  EmbeddingModel m = subword_model(3, 2, 100, 2, 5);

  SECTION("word with no n-grams is its own row") {
    // minn == maxn == wrapped length leaves only the excluded full form.
    m.config.minn = m.config.maxn = 4;
    m.words[0] = "ab";
    m.rebuild_index();
    auto row = m.input.row(0);
    row[0] = 1.5f;
    row[1] = -2.0f;
    row[2] = 0.25f;
    std::vector<float> v = word_representation(m, "ab");
    CHECK(v == std::vector<float>{1.5f, -2.0f, 0.25f});
  }

  SECTION("all contributing rows equal v gives v") {
    for (std::int64_t r = 0; r < m.input.rows(); ++r) {
      auto row = m.input.row(r);
      row[0] = 0.5f;
      row[1] = 1.0f;
      row[2] = -1.0f;
    }
    std::vector<float> v = word_representation(m, "w0");
    CHECK_THAT(v[0], Catch::Matchers::WithinRel(0.5f, 1e-6f));
    CHECK_THAT(v[1], Catch::Matchers::WithinRel(1.0f, 1e-6f));
  }

  SECTION("random model matches a gather-and-average oracle") {
    std::mt19937 gen(99);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (std::size_t k = 0; k < m.input.size(); ++k) {
      m.input.data()[k] = dist(gen);
    }
    std::vector<float> got = word_representation(m, "w1");
    std::vector<double> expect(3, 0.0);
    std::vector<std::int64_t> rows{m.id_of("w1")};
    for (const auto& g : subwords("w1", 2, 5)) {
      rows.push_back(ngram_row(g, 2, 100));
    }
    for (std::int64_t r : rows) {
      for (int d = 0; d < 3; ++d) expect[d] += m.input.row(r)[d];
    }
    for (int d = 0; d < 3; ++d) {
      CHECK_THAT(got[d], Catch::Matchers::WithinAbs(
                             expect[d] / static_cast<double>(rows.size()),
                             1e-6));
    }
  }

  SECTION("unknown word throws") {
    CHECK_THROWS_AS(word_representation(m, "yoq"), std::runtime_error);
  }
}

TEST_CASE("oov_vector composes from n-gram rows only") {
  EmbeddingModel m = subword_model(2, 2, 64, 2, 3);

  SECTION("no n-grams yields the zero vector") {
    m.config.minn = m.config.maxn = 3;
    std::vector<float> v = oov_vector(m, "x");  // wrapped length 3
    CHECK(v == std::vector<float>{0.0f, 0.0f});
  }

  SECTION("uniform bucket rows pass through") {
    for (std::int64_t r = 2; r < m.input.rows(); ++r) {
      m.input.row(r)[0] = 3.0f;
      m.input.row(r)[1] = -1.0f;
    }
    // Word rows are zero but must not contribute.
    std::vector<float> v = oov_vector(m, "новап");
    CHECK_THAT(v[0], Catch::Matchers::WithinRel(3.0f, 1e-6f));
    CHECK_THAT(v[1], Catch::Matchers::WithinRel(-1.0f, 1e-6f));
  }

  SECTION("random model matches the composition oracle") {
    std::mt19937 gen(123);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    for (std::size_t k = 0; k < m.input.size(); ++k) {
      m.input.data()[k] = dist(gen);
    }
    std::string word = "қўшма";
    std::vector<float> got = oov_vector(m, word);
    auto grams = subwords(word, 2, 3);
    std::vector<double> expect(2, 0.0);
    for (const auto& g : grams) {
      auto row = m.input.row(ngram_row(g, 2, 64));
      for (int d = 0; d < 2; ++d) expect[d] += row[d];
    }
    for (int d = 0; d < 2; ++d) {
      CHECK_THAT(got[d],
                 Catch::Matchers::WithinAbs(
                     expect[d] / static_cast<double>(grams.size()), 1e-6));
    }
  }
}

TEST_CASE("composed update gradients match central finite differences") {
  std::mt19937 gen(31337);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double h = 1e-5;

  for (int trial = 0; trial < 20; ++trial) {
    const std::int64_t dim = 2 + gen() % 5;
    const std::int64_t in_rows = 8;
    const std::int64_t out_rows = 6;
    Matrix<double> input(in_rows, dim), output(out_rows, dim);
    for (std::size_t k = 0; k < input.size(); ++k) input.data()[k] = dist(gen);
    for (std::size_t k = 0; k < output.size(); ++k)
      output.data()[k] = dist(gen);

    // Gathered set with a deliberate duplicate on odd trials.
    std::vector<std::int32_t> rows{0, 3, 5};
    if (trial % 2 == 1) rows.push_back(3);
    const std::int32_t target = 0;
    std::vector<std::int32_t> negs{1, 2};

    auto loss_at = [&]() {
      Matrix<double> in_copy = input, out_copy = output;
      std::vector<double> hid, grd;
      std::size_t k = 0;
      return ft_composed_update<double>(in_copy, rows, out_copy, target,
                                        [&] { return negs[k++]; },
                                        static_cast<std::int32_t>(negs.size()),
                                        0.0, hid, grd);
    };

    const double lr = 0.5;
    Matrix<double> in_trained = input, out_trained = output;
    {
      std::vector<double> hid, grd;
      std::size_t k = 0;
      ft_composed_update<double>(in_trained, rows, out_trained, target,
                                 [&] { return negs[k++]; },
                                 static_cast<std::int32_t>(negs.size()), lr,
                                 hid, grd);
    }

    std::set<std::int32_t> unique_rows(rows.begin(), rows.end());
    for (std::int32_t r : unique_rows) {
      for (std::int64_t d = 0; d < dim; ++d) {
        double analytic = (input.row(r)[d] - in_trained.row(r)[d]) / lr;
        double orig = input.row(r)[d];
        input.row(r)[d] = orig + h;
        double up = loss_at();
        input.row(r)[d] = orig - h;
        double down = loss_at();
        input.row(r)[d] = orig;
        CHECK(rel_err(analytic, (up - down) / (2 * h)) < 1e-4);
      }
    }
    for (std::int32_t r : {target, negs[0], negs[1]}) {
      for (std::int64_t d = 0; d < dim; ++d) {
        double analytic = (output.row(r)[d] - out_trained.row(r)[d]) / lr;
        double orig = output.row(r)[d];
        output.row(r)[d] = orig + h;
        double up = loss_at();
        output.row(r)[d] = orig - h;
        double down = loss_at();
        output.row(r)[d] = orig;
        CHECK(rel_err(analytic, (up - down) / (2 * h)) < 1e-4);
      }
    }
  }
}

TEST_CASE("train_fasttext shapes and determinism") {
  std::mt19937 gen(8);
  Vocabulary vocab = vocab_of({"сув", "дарё", "кўл", "олма", "узум", "анор"});
  TokenDocs docs;
  for (int l = 0; l < 50; ++l) {
    std::vector<std::int32_t> line(4 + gen() % 6);
    for (auto& t : line) t = static_cast<std::int32_t>(gen() % 6);
    docs.total_ids += static_cast<std::int64_t>(line.size());
    docs.docs.push_back(std::move(line));
  }

  TrainConfig cfg;
  cfg.algo = Algo::fasttext;
  cfg.arch = Arch::skipgram;
  cfg.dim = 6;
  cfg.window = 3;
  cfg.epochs = 2;
  cfg.bucket = 500;
  cfg.seed = 21;
  cfg.workers = 1;
  cfg.sample = 1e-4;

  EmbeddingModel a = train_fasttext(docs, vocab, cfg);
  CHECK(a.input.rows() == vocab.size() + cfg.bucket);
  CHECK(a.input.cols() == cfg.dim);
  CHECK(a.output.rows() == vocab.size());
  CHECK(a.has_subwords());

  EmbeddingModel b = train_fasttext(docs, vocab, cfg);
  CHECK(a.input == b.input);
  CHECK(a.output == b.output);

  cfg.arch = Arch::cbow;
  EmbeddingModel c = train_fasttext(docs, vocab, cfg);
  CHECK(c.input.all_finite());

  cfg.loss = Loss::hierarchical_softmax;
  CHECK_THROWS_WITH(train_fasttext(docs, vocab, cfg),
                    Catch::Matchers::ContainsSubstring("only ns"));
}
