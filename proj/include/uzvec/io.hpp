#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uzvec/glove.hpp"
#include "uzvec/model.hpp"

namespace uzvec {

enum class ModelFormat { text, binary, native };

inline std::string to_string(ModelFormat f) {
  switch (f) {
    case ModelFormat::text: return "text";
    case ModelFormat::binary: return "binary";
    case ModelFormat::native: return "native";
  }
  return "?";
}

inline ModelFormat parse_model_format(std::string_view s) {
  if (s == "text") return ModelFormat::text;
  if (s == "binary") return ModelFormat::binary;
  if (s == "native") return ModelFormat::native;
  throw std::runtime_error("unknown model format '" + std::string(s) + "'");
}

namespace detail {

inline constexpr char kNativeMagic[4] = {'U', 'Z', 'V', '1'};

// All multi-byte fields are little-endian regardless of host order.
inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::ostream& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void read_exact(std::istream& in, void* dst, std::size_t n,
                       const std::string& what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error("unexpected end of file while reading " + what);
  }
}

inline std::uint32_t get_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  read_exact(in, b, 4, what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& in, const std::string& what) {
  std::uint64_t lo = get_u32(in, what);
  std::uint64_t hi = get_u32(in, what);
  return lo | (hi << 32);
}

inline float get_f32(std::istream& in, const std::string& what) {
  return std::bit_cast<float>(get_u32(in, what));
}

inline double get_f64(std::istream& in, const std::string& what) {
  return std::bit_cast<double>(get_u64(in, what));
}

// Temp-file-plus-rename so readers never observe a half-written model.
class AtomicFile {
 public:
  explicit AtomicFile(const std::filesystem::path& path)
      : final_(path), tmp_(path.string() + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) {
      throw std::runtime_error("cannot open '" + tmp_.string() +
                               "' for writing");
    }
  }

  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) {
      throw std::runtime_error("write failed for '" + final_.string() + "'");
    }
    out_.close();
    std::filesystem::rename(tmp_, final_);
    committed_ = true;
  }

 private:
  std::filesystem::path final_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void require_finite(const EmbeddingModel& model,
                           const std::string& op) {
  if (!model.input.all_finite() || !model.output.all_finite()) {
    throw std::runtime_error(op + ": refusing to write non-finite model");
  }
}

inline void require_plain_words(const EmbeddingModel& model,
                                const std::string& op) {
  for (const auto& w : model.words) {
    if (w.empty() || w.find(' ') != std::string::npos ||
        w.find('\n') != std::string::npos) {
      throw std::runtime_error(op + ": word not representable in this format");
    }
  }
}

// 17 significant digits: enough that any float32 round-trips value-exact.
inline void append_float(std::string& buf, float v) {
  char tmp[40];
  int n = std::snprintf(tmp, sizeof tmp, "%.17g", static_cast<double>(v));
  buf.append(tmp, static_cast<std::size_t>(n));
}

inline std::size_t remaining_bytes(std::istream& in, std::uintmax_t file_size) {
  auto pos = in.tellg();
  if (pos < 0) return 0;
  return static_cast<std::size_t>(file_size - static_cast<std::uintmax_t>(pos));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Text format: "vocab_size dim\n", then one line per word in id order with
// space-separated decimal floats. Word rows only; bucket rows are dropped.

inline void write_text(const EmbeddingModel& model,
                       const std::filesystem::path& path) {
  detail::require_finite(model, "write_text");
  detail::require_plain_words(model, "write_text");
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  std::string line;
  for (std::int64_t i = 0; i < model.vocab_size(); ++i) {
    line.clear();
    line += model.words[i];
    for (float v : model.input.row(i)) {
      line += ' ';
      detail::append_float(line, v);
    }
    line += '\n';
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  file.commit();
}

inline EmbeddingModel read_text(const std::filesystem::path& path,
                                bool has_header = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  std::string line;
  std::int64_t line_no = 0;
  std::int64_t declared_vocab = -1;
  std::int64_t dim = -1;

  if (has_header) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(path.string() + ":1: missing header line");
    }
    ++line_no;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    auto r1 = std::from_chars(p, end, declared_vocab);
    if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != ' ') {
      throw std::runtime_error(path.string() +
                               ":1: malformed header, expected 'vocab_size dim'");
    }
    auto r2 = std::from_chars(r1.ptr + 1, end, dim);
    if (r2.ec != std::errc() || r2.ptr != end || declared_vocab < 1 || dim < 1) {
      throw std::runtime_error(path.string() +
                               ":1: malformed header, expected 'vocab_size dim'");
    }
  }

  std::vector<std::string> words;
  std::vector<float> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::size_t space = line.find(' ');
    if (space == std::string::npos || space == 0) {
      throw std::runtime_error(where + ": expected 'word v1 ... vN'");
    }
    words.push_back(line.substr(0, space));
    const char* p = line.data() + space;
    const char* end = line.data() + line.size();
    std::int64_t fields = 0;
    while (p != end) {
      if (*p != ' ') {
        throw std::runtime_error(where + ": expected single-space separators");
      }
      ++p;
      double v;
      auto r = std::from_chars(p, end, v);
      if (r.ec != std::errc()) {
        throw std::runtime_error(where + ": non-numeric field " +
                                 std::to_string(fields + 2));
      }
      values.push_back(static_cast<float>(v));
      ++fields;
      p = r.ptr;
    }
    if (dim < 0) {
      dim = fields;  // headerless: first line fixes the dimension
      if (dim < 1) {
        throw std::runtime_error(where + ": no vector values on first line");
      }
    } else if (fields != dim) {
      throw std::runtime_error(where + ": expected " + std::to_string(dim) +
                               " values, got " + std::to_string(fields));
    }
  }

  const std::int64_t vocab = static_cast<std::int64_t>(words.size());
  if (vocab == 0) {
    throw std::runtime_error(path.string() + ": no vector rows");
  }
  if (has_header && vocab != declared_vocab) {
    throw std::runtime_error(path.string() + ": header declares " +
                             std::to_string(declared_vocab) + " rows, found " +
                             std::to_string(vocab));
  }

  EmbeddingModel model;
  model.config.dim = static_cast<std::int32_t>(dim);
  model.words = std::move(words);
  model.counts.assign(vocab, 0);
  model.input = Matrix<float>(vocab, dim, std::move(values));
  model.output = Matrix<float>(0, dim);
  model.rebuild_index();
  return model;
}

// ---------------------------------------------------------------------------
// Binary format (word2vec-compatible): text header "vocab_size dim\n", then
// per word: word bytes, 0x20, dim little-endian float32 values, '\n'.

inline void write_binary(const EmbeddingModel& model,
                         const std::filesystem::path& path) {
  detail::require_finite(model, "write_binary");
  detail::require_plain_words(model, "write_binary");
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out << model.vocab_size() << ' ' << model.dim() << '\n';
  for (std::int64_t i = 0; i < model.vocab_size(); ++i) {
    out.write(model.words[i].data(),
              static_cast<std::streamsize>(model.words[i].size()));
    out.put(' ');
    for (float v : model.input.row(i)) detail::put_f32(out, v);
    out.put('\n');
  }
  file.commit();
}

inline EmbeddingModel read_binary(const std::filesystem::path& path) {
  const std::uintmax_t file_size = std::filesystem::file_size(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error(path.string() + ": missing header line");
  }
  std::int64_t vocab = -1, dim = -1;
  {
    const char* p = header.data();
    const char* end = header.data() + header.size();
    auto r1 = std::from_chars(p, end, vocab);
    if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != ' ') {
      throw std::runtime_error(path.string() + ": malformed header");
    }
    auto r2 = std::from_chars(r1.ptr + 1, end, dim);
    if (r2.ec != std::errc() || r2.ptr != end || vocab < 1 || dim < 1) {
      throw std::runtime_error(path.string() + ": malformed header");
    }
  }
  // Every row takes at least word(1) + space + 4*dim + newline bytes.
  const std::uintmax_t min_needed =
      header.size() + 1 +
      static_cast<std::uintmax_t>(vocab) * (static_cast<std::uintmax_t>(dim) * 4 + 3);
  if (min_needed > file_size) {
    throw std::runtime_error(path.string() + ": header declares " +
                             std::to_string(vocab) + "x" + std::to_string(dim) +
                             " vectors but the file is too small");
  }

  EmbeddingModel model;
  model.config.dim = static_cast<std::int32_t>(dim);
  model.words.reserve(vocab);
  model.counts.assign(vocab, 0);
  model.input = Matrix<float>(vocab, dim);
  for (std::int64_t i = 0; i < vocab; ++i) {
    const std::string where = "word index " + std::to_string(i);
    std::string word;
    char c;
    while (true) {
      if (!in.get(c)) {
        throw std::runtime_error(path.string() + ": truncated at " + where);
      }
      if (c == ' ') break;
      if (c == '\n' || word.size() > 4096) {
        throw std::runtime_error(path.string() + ": malformed word at " + where);
      }
      word.push_back(c);
    }
    if (word.empty()) {
      throw std::runtime_error(path.string() + ": empty word at " + where);
    }
    model.words.push_back(std::move(word));
    auto row = model.input.row(i);
    for (std::int64_t d = 0; d < dim; ++d) {
      unsigned char b[4];
      in.read(reinterpret_cast<char*>(b), 4);
      if (in.gcount() != 4) {
        throw std::runtime_error(path.string() + ": truncated at " + where);
      }
      row[d] = std::bit_cast<float>(static_cast<std::uint32_t>(b[0]) |
                                    (static_cast<std::uint32_t>(b[1]) << 8) |
                                    (static_cast<std::uint32_t>(b[2]) << 16) |
                                    (static_cast<std::uint32_t>(b[3]) << 24));
    }
    if (!in.get(c) || c != '\n') {
      throw std::runtime_error(path.string() + ": missing row terminator at " +
                               where);
    }
  }
  model.output = Matrix<float>(0, dim);
  model.rebuild_index();
  return model;
}

// ---------------------------------------------------------------------------
// Native format: magic "UZV1", full config snapshot, vocabulary with counts,
// then input and output matrices. Lossless, including subword bucket rows.

inline void write_native(const EmbeddingModel& model,
                         const std::filesystem::path& path) {
  detail::require_finite(model, "write_native");
  detail::AtomicFile file(path);
  auto& out = file.stream();
  out.write(detail::kNativeMagic, 4);
  const TrainConfig& c = model.config;
  out.put(static_cast<char>(c.algo));
  out.put(static_cast<char>(c.arch));
  out.put(static_cast<char>(c.loss));
  detail::put_u32(out, static_cast<std::uint32_t>(c.dim));
  detail::put_u32(out, static_cast<std::uint32_t>(c.window));
  detail::put_u32(out, static_cast<std::uint32_t>(c.epochs));
  detail::put_u32(out, static_cast<std::uint32_t>(c.negatives));
  detail::put_u32(out, static_cast<std::uint32_t>(c.minn));
  detail::put_u32(out, static_cast<std::uint32_t>(c.maxn));
  detail::put_u32(out, static_cast<std::uint32_t>(c.workers));
  detail::put_u32(out, static_cast<std::uint32_t>(c.min_count));
  detail::put_u64(out, static_cast<std::uint64_t>(c.bucket));
  detail::put_u64(out, c.seed);
  detail::put_f64(out, c.alpha0);
  detail::put_f64(out, c.sample);
  detail::put_f64(out, c.xmax);
  detail::put_f64(out, c.weight_alpha);

  detail::put_u64(out, static_cast<std::uint64_t>(model.vocab_size()));
  for (std::int64_t i = 0; i < model.vocab_size(); ++i) {
    detail::put_u32(out, static_cast<std::uint32_t>(model.words[i].size()));
    out.write(model.words[i].data(),
              static_cast<std::streamsize>(model.words[i].size()));
    detail::put_u64(out, static_cast<std::uint64_t>(model.counts[i]));
  }
  for (const auto* m : {&model.input, &model.output}) {
    detail::put_u64(out, static_cast<std::uint64_t>(m->rows()));
    detail::put_u64(out, static_cast<std::uint64_t>(m->cols()));
    for (std::size_t k = 0; k < m->size(); ++k) {
      detail::put_f32(out, m->data()[k]);
    }
  }
  file.commit();
}

inline EmbeddingModel read_native(const std::filesystem::path& path) {
  const std::uintmax_t file_size = std::filesystem::file_size(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  char magic[4];
  detail::read_exact(in, magic, 4, "magic");
  if (std::memcmp(magic, detail::kNativeMagic, 4) != 0) {
    throw std::runtime_error(path.string() +
                             ": bad magic, not a UZV1 model file");
  }
  EmbeddingModel model;
  TrainConfig& c = model.config;
  char byte;
  in.get(byte);
  if (byte < 0 || byte > 2) {
    throw std::runtime_error(path.string() + ": invalid algorithm byte");
  }
  c.algo = static_cast<Algo>(byte);
  in.get(byte);
  if (byte < 0 || byte > 1) {
    throw std::runtime_error(path.string() + ": invalid architecture byte");
  }
  c.arch = static_cast<Arch>(byte);
  in.get(byte);
  if (byte < 0 || byte > 1) {
    throw std::runtime_error(path.string() + ": invalid loss byte");
  }
  c.loss = static_cast<Loss>(byte);
  if (!in) {
    throw std::runtime_error(path.string() + ": truncated header");
  }
  c.dim = static_cast<std::int32_t>(detail::get_u32(in, "dim"));
  c.window = static_cast<std::int32_t>(detail::get_u32(in, "window"));
  c.epochs = static_cast<std::int32_t>(detail::get_u32(in, "epochs"));
  c.negatives = static_cast<std::int32_t>(detail::get_u32(in, "negatives"));
  c.minn = static_cast<std::int32_t>(detail::get_u32(in, "minn"));
  c.maxn = static_cast<std::int32_t>(detail::get_u32(in, "maxn"));
  c.workers = static_cast<std::int32_t>(detail::get_u32(in, "workers"));
  c.min_count = static_cast<std::int32_t>(detail::get_u32(in, "min_count"));
  c.bucket = static_cast<std::int64_t>(detail::get_u64(in, "bucket"));
  c.seed = detail::get_u64(in, "seed");
  c.alpha0 = detail::get_f64(in, "alpha");
  c.sample = detail::get_f64(in, "sample");
  c.xmax = detail::get_f64(in, "xmax");
  c.weight_alpha = detail::get_f64(in, "weight_alpha");

  const std::uint64_t vocab = detail::get_u64(in, "vocab_size");
  if (vocab == 0 || vocab * 5 > file_size) {
    throw std::runtime_error(path.string() + ": implausible vocabulary size");
  }
  model.words.reserve(vocab);
  model.counts.reserve(vocab);
  for (std::uint64_t i = 0; i < vocab; ++i) {
    const std::uint32_t len = detail::get_u32(in, "word length");
    if (len == 0 || len > detail::remaining_bytes(in, file_size)) {
      throw std::runtime_error(path.string() + ": word " + std::to_string(i) +
                               " has implausible length");
    }
    std::string word(len, '\0');
    detail::read_exact(in, word.data(), len, "word bytes");
    model.words.push_back(std::move(word));
    model.counts.push_back(
        static_cast<std::int64_t>(detail::get_u64(in, "word count")));
  }
  for (auto* m : {&model.input, &model.output}) {
    const std::uint64_t rows = detail::get_u64(in, "matrix rows");
    const std::uint64_t cols = detail::get_u64(in, "matrix cols");
    const std::uint64_t remaining = detail::remaining_bytes(in, file_size);
    // Overflow-safe bound before allocating rows*cols floats.
    if (rows != 0 && cols != 0 &&
        (cols > remaining / 4 || rows > remaining / (cols * 4))) {
      throw std::runtime_error(path.string() +
                               ": matrix larger than remaining file");
    }
    *m = Matrix<float>(static_cast<std::int64_t>(rows),
                       static_cast<std::int64_t>(cols));
    std::vector<unsigned char> raw(rows * cols * 4);
    detail::read_exact(in, raw.data(), raw.size(), "matrix data");
    for (std::size_t k = 0; k < rows * cols; ++k) {
      m->data()[k] =
          std::bit_cast<float>(static_cast<std::uint32_t>(raw[4 * k]) |
                               (static_cast<std::uint32_t>(raw[4 * k + 1]) << 8) |
                               (static_cast<std::uint32_t>(raw[4 * k + 2]) << 16) |
                               (static_cast<std::uint32_t>(raw[4 * k + 3]) << 24));
    }
  }
  model.rebuild_index();
  return model;
}

// ---------------------------------------------------------------------------
// Co-occurrence records: flat little-endian (i: u32, j: u32, x: f64) triples.

inline void write_cooccurrence(const std::vector<CooccurrenceRecord>& records,
                               const std::filesystem::path& path) {
  detail::AtomicFile file(path);
  auto& out = file.stream();
  for (const auto& r : records) {
    detail::put_u32(out, static_cast<std::uint32_t>(r.i));
    detail::put_u32(out, static_cast<std::uint32_t>(r.j));
    detail::put_f64(out, r.x);
  }
  file.commit();
}

inline std::vector<CooccurrenceRecord> read_cooccurrence(
    const std::filesystem::path& path) {
  const std::uintmax_t file_size = std::filesystem::file_size(path);
  if (file_size % 16 != 0) {
    throw std::runtime_error(path.string() +
                             ": size is not a multiple of the 16-byte record");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  std::vector<CooccurrenceRecord> records;
  records.reserve(file_size / 16);
  for (std::uintmax_t k = 0; k < file_size / 16; ++k) {
    CooccurrenceRecord r;
    r.i = static_cast<std::int32_t>(detail::get_u32(in, "record i"));
    r.j = static_cast<std::int32_t>(detail::get_u32(in, "record j"));
    r.x = detail::get_f64(in, "record x");
    records.push_back(r);
  }
  return records;
}

// ---------------------------------------------------------------------------

inline ModelFormat detect_model_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, detail::kNativeMagic, 4) == 0) {
    return ModelFormat::native;
  }
  in.seekg(0);
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error(path.string() + ": unrecognized model format");
  }
  std::int64_t vocab = -1, dim = -1;
  const char* p = header.data();
  const char* end = header.data() + header.size();
  auto r1 = std::from_chars(p, end, vocab);
  if (r1.ec != std::errc() || r1.ptr == end || *r1.ptr != ' ') {
    // GloVe-style headerless text is the only remaining candidate.
    return ModelFormat::text;
  }
  auto r2 = std::from_chars(r1.ptr + 1, end, dim);
  if (r2.ec != std::errc() || r2.ptr != end || vocab < 1 || dim < 1) {
    return ModelFormat::text;
  }
  // Header parsed; decide text vs binary from the first body row. A text row
  // is 'word' plus exactly dim parseable floats.
  std::string row;
  if (!std::getline(in, row)) return ModelFormat::text;
  std::size_t space = row.find(' ');
  if (space == std::string::npos) return ModelFormat::binary;
  const char* q = row.data() + space;
  const char* qend = row.data() + row.size();
  std::int64_t fields = 0;
  while (q != qend && *q == ' ') {
    double v;
    auto r = std::from_chars(q + 1, qend, v);
    if (r.ec != std::errc()) return ModelFormat::binary;
    ++fields;
    q = r.ptr;
  }
  return (q == qend && fields == dim) ? ModelFormat::text : ModelFormat::binary;
}

inline EmbeddingModel load_model(const std::filesystem::path& path,
                                 ModelFormat format, bool has_header = true) {
  switch (format) {
    case ModelFormat::text: return read_text(path, has_header);
    case ModelFormat::binary: return read_binary(path);
    case ModelFormat::native: return read_native(path);
  }
  throw std::runtime_error("unreachable");
}

inline void save_model(const EmbeddingModel& model,
                       const std::filesystem::path& path, ModelFormat format) {
  switch (format) {
    case ModelFormat::text: write_text(model, path); return;
    case ModelFormat::binary: write_binary(model, path); return;
    case ModelFormat::native: write_native(model, path); return;
  }
}

}  // namespace uzvec
