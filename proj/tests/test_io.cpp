#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "uzvec/io.hpp"
#include "uzvec/presets.hpp"

using namespace uzvec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("uzvec_io_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

EmbeddingModel random_model(std::mt19937& gen, std::int64_t vocab,
                            std::int32_t dim, Algo algo = Algo::word2vec,
                            std::int64_t bucket = 0) {
  EmbeddingModel m;
  m.config.algo = algo;
  m.config.dim = dim;
  m.config.bucket = bucket;
  m.config.seed = gen();
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  for (std::int64_t i = 0; i < vocab; ++i) {
    m.words.push_back((i % 3 == 0 ? "сўз" : "w") + std::to_string(i));
    m.counts.push_back(gen() % 1000);
  }
  m.input = Matrix<float>(vocab + bucket, dim);
  for (std::size_t k = 0; k < m.input.size(); ++k) m.input.data()[k] = dist(gen);
  m.output = Matrix<float>(algo == Algo::glove ? 0 : vocab, dim);
  for (std::size_t k = 0; k < m.output.size(); ++k)
    m.output.data()[k] = dist(gen);
  m.rebuild_index();
  return m;
}

}  // namespace

TEST_CASE("text round trip is value-exact") {
  TempDir tmp;
  std::mt19937 gen(42);
  for (int trial = 0; trial < 20; ++trial) {
    EmbeddingModel m =
        random_model(gen, 1 + gen() % 30, 1 + gen() % 12);
    fs::path p = tmp.path / "model.vec";
    write_text(m, p);
    EmbeddingModel r = read_text(p);
    CHECK(r.words == m.words);
    CHECK(r.input == m.input);
    CHECK(r.dim() == m.dim());
  }
}

TEST_CASE("headerless text file is parsed with inferred dimensions") {
  TempDir tmp;
  fs::path p = tmp.path / "glove_style.txt";
  {
    std::ofstream out(p, std::ios::binary);
    out << "сув 0.25 -1.5 3\n";
    out << "тоза 1 2.5 -0.125\n";
  }
  EmbeddingModel m = read_text(p, /*has_header=*/false);
  REQUIRE(m.vocab_size() == 2);
  REQUIRE(m.dim() == 3);
  CHECK(m.words[0] == "сув");
  CHECK(m.input.row(0)[0] == 0.25f);
  CHECK(m.input.row(0)[1] == -1.5f);
  CHECK(m.input.row(1)[2] == -0.125f);
  CHECK(m.id_of("тоза") == 1);
}

TEST_CASE("text reader reports malformed input with line numbers") {
  TempDir tmp;
  fs::path p = tmp.path / "bad.vec";

  auto write_file = [&](const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
  };

  write_file("nonsense\n");
  CHECK_THROWS_WITH(read_text(p), Catch::Matchers::ContainsSubstring(":1"));

  write_file("2 3\nа 1 2 3\n");
  CHECK_THROWS_WITH(read_text(p),
                    Catch::Matchers::ContainsSubstring("declares 2"));

  write_file("1 3\nа 1 x 3\n");
  CHECK_THROWS_WITH(read_text(p),
                    Catch::Matchers::ContainsSubstring("non-numeric"));

  write_file("1 3\nа 1 2\n");
  CHECK_THROWS_WITH(read_text(p),
                    Catch::Matchers::ContainsSubstring("expected 3 values"));
}

TEST_CASE("binary round trip is bit-exact and sized exactly") {
  TempDir tmp;
  std::mt19937 gen(43);
  for (int trial = 0; trial < 20; ++trial) {
    EmbeddingModel m = random_model(gen, 1 + gen() % 30, 1 + gen() % 12);
    fs::path p = tmp.path / "model.bin";
    write_binary(m, p);

    std::uintmax_t expected =
        std::to_string(m.vocab_size()).size() + 1 +
        std::to_string(m.dim()).size() + 1;
    for (const auto& w : m.words) {
      expected += w.size() + 1 + 4 * static_cast<std::uintmax_t>(m.dim()) + 1;
    }
    CHECK(fs::file_size(p) == expected);

    EmbeddingModel r = read_binary(p);
    CHECK(r.words == m.words);
    CHECK(r.input == m.input);
  }
}

TEST_CASE("binary reader names the word index on truncation") {
  TempDir tmp;
  std::mt19937 gen(44);
  EmbeddingModel m = random_model(gen, 10, 4);
  fs::path p = tmp.path / "model.bin";
  write_binary(m, p);
  fs::resize_file(p, fs::file_size(p) - 7);
  CHECK_THROWS_WITH(read_binary(p),
                    Catch::Matchers::ContainsSubstring("word index 9"));

  fs::resize_file(p, 20);
  CHECK_THROWS_WITH(read_binary(p),
                    Catch::Matchers::ContainsSubstring("too small"));
}

TEST_CASE("writers reject non-finite models") {
  TempDir tmp;
  std::mt19937 gen(45);
  EmbeddingModel m = random_model(gen, 4, 3);
  m.input.row(2)[1] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_WITH(write_text(m, tmp.path / "x.vec"),
                    Catch::Matchers::ContainsSubstring("non-finite"));
  CHECK_THROWS_WITH(write_binary(m, tmp.path / "x.bin"),
                    Catch::Matchers::ContainsSubstring("non-finite"));
  CHECK_THROWS_WITH(write_native(m, tmp.path / "x.uzv"),
                    Catch::Matchers::ContainsSubstring("non-finite"));
  // Failed writes must not leave the destination behind.
  CHECK_FALSE(fs::exists(tmp.path / "x.vec"));
  CHECK_FALSE(fs::exists(tmp.path / "x.vec.tmp"));
}

TEST_CASE("native round trip preserves everything") {
  TempDir tmp;
  std::mt19937 gen(46);
  for (int trial = 0; trial < 20; ++trial) {
    const bool subword = trial % 2 == 0;
    EmbeddingModel m = random_model(
        gen, 2 + gen() % 20, 1 + gen() % 10,
        subword ? Algo::fasttext : Algo::word2vec, subword ? 64 : 0);
    m.config.arch = Arch::skipgram;
    m.config.loss = Loss::hierarchical_softmax;
    m.config.window = 10;
    m.config.epochs = 3;
    m.config.alpha0 = 0.0123;
    m.config.sample = 2e-4;
    m.config.minn = 2;
    m.config.maxn = 5;
    m.config.xmax = 50.0;
    m.config.weight_alpha = 0.8;
    m.config.workers = 4;
    m.config.min_count = 7;

    fs::path p = tmp.path / "model.uzv";
    write_native(m, p);
    EmbeddingModel r = read_native(p);
    CHECK(r.config == m.config);
    CHECK(r.words == m.words);
    CHECK(r.counts == m.counts);
    CHECK(r.input == m.input);    // includes bucket rows
    CHECK(r.output == m.output);
  }
}

TEST_CASE("preset configs survive a native round trip field-for-field") {
  TempDir tmp;
  std::mt19937 gen(47);
  for (const auto& [name, cfg] : pipeline_presets()) {
    EmbeddingModel m = random_model(gen, 5, 4);
    m.config = cfg;
    m.config.dim = 4;  // keep the matrix small; other fields untouched
    fs::path p = tmp.path / (name + ".uzv");
    write_native(m, p);
    CHECK(read_native(p).config == m.config);
  }
}

TEST_CASE("native reader rejects foreign files") {
  TempDir tmp;
  fs::path p = tmp.path / "foreign";
  {
    std::ofstream out(p, std::ios::binary);
    out << "MAGIC????????????????";
  }
  CHECK_THROWS_WITH(read_native(p),
                    Catch::Matchers::ContainsSubstring("bad magic"));
}

TEST_CASE("text to native to text keeps word vectors") {
  TempDir tmp;
  std::mt19937 gen(48);
  EmbeddingModel m = random_model(gen, 12, 5);
  write_text(m, tmp.path / "a.vec");
  EmbeddingModel t = read_text(tmp.path / "a.vec");
  write_native(t, tmp.path / "b.uzv");
  EmbeddingModel n = read_native(tmp.path / "b.uzv");
  CHECK(n.words == m.words);
  CHECK(n.input == m.input);
}

TEST_CASE("native to text export drops bucket rows") {
  TempDir tmp;
  std::mt19937 gen(49);
  EmbeddingModel m = random_model(gen, 6, 4, Algo::fasttext, 32);
  write_native(m, tmp.path / "ft.uzv");
  EmbeddingModel n = read_native(tmp.path / "ft.uzv");
  write_text(n, tmp.path / "ft.vec");
  EmbeddingModel t = read_text(tmp.path / "ft.vec");
  REQUIRE(t.vocab_size() == 6);
  CHECK(t.input.rows() == 6);  // word rows only
  for (std::int64_t i = 0; i < 6; ++i) {
    for (std::int32_t d = 0; d < 4; ++d) {
      CHECK(t.input.row(i)[d] == m.input.row(i)[d]);
    }
  }
}

TEST_CASE("cooccurrence record file round trip") {
  TempDir tmp;
  std::vector<CooccurrenceRecord> records{
      {0, 1, 1.5}, {1, 0, 1.5}, {2, 2, 0.333333333333333}};
  fs::path p = tmp.path / "records.bin";
  write_cooccurrence(records, p);
  CHECK(fs::file_size(p) == records.size() * 16);
  auto r = read_cooccurrence(p);
  CHECK(r == records);

  fs::resize_file(p, 17);
  CHECK_THROWS_WITH(read_cooccurrence(p),
                    Catch::Matchers::ContainsSubstring("16-byte"));
}

TEST_CASE("model format detection") {
  TempDir tmp;
  std::mt19937 gen(50);
  EmbeddingModel m = random_model(gen, 8, 5);
  write_text(m, tmp.path / "m.vec");
  write_binary(m, tmp.path / "m.bin");
  write_native(m, tmp.path / "m.uzv");
  CHECK(detect_model_format(tmp.path / "m.vec") == ModelFormat::text);
  CHECK(detect_model_format(tmp.path / "m.bin") == ModelFormat::binary);
  CHECK(detect_model_format(tmp.path / "m.uzv") == ModelFormat::native);

  // Headerless text still detects as text.
  {
    std::ofstream out(tmp.path / "nohdr.txt", std::ios::binary);
    out << "сув 1 2 3\n";
  }
  CHECK(detect_model_format(tmp.path / "nohdr.txt") == ModelFormat::text);
}
