#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uzvec/config.hpp"
#include "uzvec/corpus.hpp"
#include "uzvec/fasttext.hpp"
#include "uzvec/glove.hpp"
#include "uzvec/io.hpp"
#include "uzvec/manifest.hpp"
#include "uzvec/presets.hpp"
#include "uzvec/query.hpp"
#include "uzvec/textpipe.hpp"
#include "uzvec/version.hpp"
#include "uzvec/vocab.hpp"
#include "uzvec/w2v.hpp"

namespace uzvec {

// Command misuse that CLI11 validators cannot catch; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cli_detail {

// Flat key=value config file; '#' starts a comment line.
inline std::map<std::string, std::string> load_flat_config(
    const std::string& path) {
  std::map<std::string, std::string> values;
  if (path.empty()) return values;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::string line;
  std::int64_t line_no = 0;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config file " + path + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    values[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return values;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

inline void do_clean(const std::string& input, const std::string& output,
                     const std::string& stats_path, bool include_shcha) {
  const Alphabet alphabet = Alphabet::standard(include_shcha);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + output + "' for writing");

  CorpusStats stats;
  if (std::filesystem::is_directory(input)) {
    stats = ingest_tree(input, out, alphabet);
  } else {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + input + "'");
    stats = ingest_lines(in, input, out, alphabet);
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + output + "'");

  if (!stats_path.empty()) {
    nlohmann::json j;
    j["documents_seen"] = stats.documents_seen;
    j["documents_rejected"] = stats.documents_rejected;
    j["tokens_emitted"] = stats.tokens_emitted;
    std::ofstream sf(stats_path, std::ios::binary | std::ios::trunc);
    if (!sf) throw std::runtime_error("cannot open '" + stats_path + "'");
    sf << j.dump(2) << '\n';
  }
  std::cerr << "clean: " << stats.documents_seen << " documents, "
            << stats.documents_rejected << " rejected, "
            << stats.tokens_emitted << " tokens\n";
}

inline void do_vocab(const std::string& input, const std::string& output,
                     std::int64_t min_count) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + input + "'");
  auto counts = count_tokens(in);
  Vocabulary vocab = build_vocab(counts, min_count);
  save_vocab(vocab, output);
  std::cerr << "vocab: " << vocab.size() << " words (min_count=" << min_count
            << "), " << vocab.total_tokens() << " total tokens\n";
}

inline void do_stats(const std::string& vocab_path, std::int64_t top,
                     std::int64_t bottom) {
  Vocabulary vocab = load_vocab(vocab_path);
  auto top_list = freq_table(vocab, std::min(top, vocab.size())).first;
  auto bottom_list = freq_table(vocab, std::min(bottom, vocab.size())).second;
  std::cout << "word\tfrequency\tword\tfrequency\n";
  const std::size_t rows = std::max(top_list.size(), bottom_list.size());
  for (std::size_t r = 0; r < rows; ++r) {
    if (r < top_list.size()) {
      std::cout << top_list[r].word << '\t' << top_list[r].count;
    } else {
      std::cout << '\t';
    }
    std::cout << '\t';
    if (r < bottom_list.size()) {
      std::cout << bottom_list[r].word << '\t' << bottom_list[r].count;
    } else {
      std::cout << '\t';
    }
    std::cout << '\n';
  }
}

inline void do_cooccur(const std::string& input, const std::string& vocab_path,
                       std::int32_t window, const std::string& output) {
  Vocabulary vocab = load_vocab(vocab_path);
  TokenDocs docs = load_token_ids(std::filesystem::path(input), vocab);
  auto records = build_cooccurrence(docs, window);
  write_cooccurrence(records, output);
  std::cerr << "cooccur: " << records.size() << " records (window=" << window
            << ")\n";
}

struct TrainPaths {
  std::string input;
  std::string vocab;
  std::string cooccur;
  std::string output;
};

inline void do_train(const TrainConfig& config, const TrainPaths& paths) {
  config.validate();
  Vocabulary vocab = load_vocab(paths.vocab);
  RunManifest manifest;
  manifest.subcommand = "train";
  manifest.config = config;
  manifest.output = paths.output;
  manifest.inputs.emplace_back(paths.vocab, file_digest(paths.vocab));

  Timer timer;
  EmbeddingModel model;
  if (config.algo == Algo::glove) {
    std::vector<CooccurrenceRecord> records;
    if (!paths.cooccur.empty()) {
      records = read_cooccurrence(paths.cooccur);
      manifest.inputs.emplace_back(paths.cooccur, file_digest(paths.cooccur));
    } else if (!paths.input.empty()) {
      TokenDocs docs = load_token_ids(std::filesystem::path(paths.input), vocab);
      records = build_cooccurrence(docs, config.window);
      manifest.inputs.emplace_back(paths.input, file_digest(paths.input));
    } else {
      throw UsageError("glove training needs --cooccur or --input");
    }
    model = train_glove(std::move(records), vocab, config);
  } else {
    if (paths.input.empty()) {
      throw UsageError("training needs --input with a token stream");
    }
    TokenDocs docs = load_token_ids(std::filesystem::path(paths.input), vocab);
    manifest.inputs.emplace_back(paths.input, file_digest(paths.input));
    if (config.algo == Algo::word2vec) {
      model = train_word2vec(docs, vocab, config);
    } else {
      model = train_fasttext(docs, vocab, config);
    }
  }

  write_native(model, paths.output);
  write_manifest(manifest, manifest_path_for(paths.output));
  std::fprintf(stderr, "train: %s %s dim=%d done in %.2fs -> %s\n",
               to_string(config.algo).c_str(), to_string(config.arch).c_str(),
               config.dim, timer.seconds(), paths.output.c_str());
}

inline void do_convert(const std::string& input, const std::string& from,
                       const std::string& output, const std::string& to,
                       bool no_header) {
  ModelFormat src = from == "auto" ? detect_model_format(input)
                                   : parse_model_format(from);
  EmbeddingModel model = load_model(input, src, !no_header);
  save_model(model, output, parse_model_format(to));
  std::cerr << "convert: " << to_string(src) << " -> " << to << " ("
            << model.vocab_size() << " words, dim " << model.dim() << ")\n";
}

inline void print_neighbors(const NeighborResult& neighbors,
                            const std::string& format) {
  char buf[64];
  for (const auto& n : neighbors) {
    if (format == "tsv") {
      std::snprintf(buf, sizeof buf, "%.6f", n.similarity);
      std::cout << n.word << '\t' << buf << '\n';
    } else if (format == "json-lines") {
      nlohmann::json j;
      j["word"] = n.word;
      j["similarity"] = n.similarity;
      std::cout << j.dump() << '\n';
    } else {
      std::snprintf(buf, sizeof buf, "%.6f", n.similarity);
      std::cout << n.word << " (" << buf << ")\n";
    }
  }
}

inline void do_nn(const std::string& model_path, const std::string& fmt,
                  bool no_header, const std::string& word, std::int64_t k,
                  const std::string& out_format) {
  ModelFormat src = fmt == "auto" ? detect_model_format(model_path)
                                  : parse_model_format(fmt);
  EmbeddingModel model = load_model(model_path, src, !no_header);
  QueryIndex index(model);
  print_neighbors(index.nearest(word, k), out_format);
}

inline void do_oov(const std::string& model_path, const std::string& word) {
  EmbeddingModel model = read_native(model_path);
  if (!model.has_subwords()) {
    throw std::runtime_error(
        "model has no subword table; cannot compose vectors");
  }
  std::vector<float> v = model.id_of(word) >= 0 ? word_representation(model, word)
                                                : oov_vector(model, word);
  char buf[48];
  for (std::size_t d = 0; d < v.size(); ++d) {
    std::snprintf(buf, sizeof buf, "%.8g", static_cast<double>(v[d]));
    if (d) std::cout << ' ';
    std::cout << buf;
  }
  std::cout << '\n';
}

}  // namespace cli_detail

// Dispatches one toolkit invocation. Returns 0 on success, 1 on usage
// errors, 2 on data or I/O errors.
inline int run(std::vector<std::string> args) {
  CLI::App app{"uzvec - word embedding toolkit for Cyrillic Uzbek"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // --- clean -------------------------------------------------------------
  auto* clean = app.add_subcommand(
      "clean", "Filter and tokenize raw documents into a token stream");
  std::string clean_input, clean_output, clean_stats;
  bool include_shcha = false;
  clean->add_option("--input", clean_input,
                    "Document file (one per line) or directory of .txt files")
      ->required();
  clean->add_option("--output", clean_output, "Token stream destination")
      ->required();
  clean->add_option("--stats", clean_stats, "Write corpus stats JSON here");
  clean->add_flag("--include-shcha", include_shcha,
                  "Accept the letter щ as part of the alphabet");
  clean->callback([&] {
    cli_detail::do_clean(clean_input, clean_output, clean_stats,
                         include_shcha);
  });

  // --- vocab ---------------------------------------------------------------
  auto* vocab_cmd = app.add_subcommand(
      "vocab", "Build a frequency-ranked vocabulary from a token stream");
  std::string vocab_input, vocab_output;
  std::int64_t min_count = 5;
  vocab_cmd->add_option("--input", vocab_input, "Token stream")->required();
  vocab_cmd->add_option("--output", vocab_output, "Vocabulary destination")
      ->required();
  vocab_cmd->add_option("--min-count", min_count,
                        "Drop words rarer than this count");
  vocab_cmd->callback(
      [&] { cli_detail::do_vocab(vocab_input, vocab_output, min_count); });

  // --- stats ---------------------------------------------------------------
  auto* stats_cmd = app.add_subcommand(
      "stats", "List the most and least frequent vocabulary words");
  std::string stats_vocab;
  std::int64_t stats_top = 10, stats_bottom = 10;
  stats_cmd->add_option("--vocab", stats_vocab, "Vocabulary file")->required();
  stats_cmd->add_option("--top", stats_top, "Top-k words to list");
  stats_cmd->add_option("--bottom", stats_bottom, "Bottom-k words to list");
  stats_cmd->callback(
      [&] { cli_detail::do_stats(stats_vocab, stats_top, stats_bottom); });

  // --- cooccur -------------------------------------------------------------
  auto* cooccur_cmd = app.add_subcommand(
      "cooccur", "Extract distance-weighted co-occurrence records");
  std::string co_input, co_vocab, co_output;
  std::int32_t co_window = 15;
  cooccur_cmd->add_option("--input", co_input, "Token stream")->required();
  cooccur_cmd->add_option("--vocab", co_vocab, "Vocabulary file")->required();
  cooccur_cmd->add_option("--window", co_window, "Context window per side");
  cooccur_cmd->add_option("--output", co_output, "Record file destination")
      ->required();
  cooccur_cmd->callback([&] {
    cli_detail::do_cooccur(co_input, co_vocab, co_window, co_output);
  });

  // --- train -----------------------------------------------------------
  auto* train_cmd =
      app.add_subcommand("train", "Train word2vec, GloVe or fastText vectors");
  cli_detail::TrainPaths paths;
  std::string algo_str = "word2vec", arch_str = "cbow", loss_str = "ns";
  std::string preset_name, train_config_path;
  TrainConfig flags;  // bound targets; preset/defaults applied afterwards
  double lr_flag = 0.0;
  train_cmd->add_option("--config", train_config_path,
                        "Flat key=value config file; flags override it");
  train_cmd->add_option("--input", paths.input, "Token stream");
  train_cmd->add_option("--vocab", paths.vocab, "Vocabulary file")->required();
  train_cmd->add_option("--cooccur", paths.cooccur,
                        "Pre-extracted co-occurrence records (glove)");
  train_cmd->add_option("--output", paths.output, "Model destination (native format)")
      ->required();
  std::vector<std::string> preset_list;
  for (const auto& [name, cfg] : pipeline_presets()) preset_list.push_back(name);
  auto* o_preset = train_cmd->add_option("--preset", preset_name,
                                         "Start from a published configuration")
                       ->check(CLI::IsMember(preset_list));
  auto* o_algo = train_cmd->add_option("--algo", algo_str, "Algorithm")
                     ->check(CLI::IsMember({"word2vec", "glove", "fasttext"}));
  auto* o_arch = train_cmd->add_option("--arch", arch_str, "Architecture")
                     ->check(CLI::IsMember({"cbow", "skipgram"}));
  auto* o_loss = train_cmd->add_option("--loss", loss_str, "Loss")
                     ->check(CLI::IsMember({"ns", "hs"}));
  auto* o_dim = train_cmd->add_option("--dim", flags.dim, "Vector dimension");
  auto* o_window = train_cmd->add_option("--window", flags.window,
                                         "Context window per side");
  auto* o_epochs = train_cmd->add_option("--epochs", flags.epochs, "Epochs");
  auto* o_alpha = train_cmd->add_option(
      "--alpha", flags.alpha0,
      "Learning rate (word2vec/fasttext) or weighting exponent (glove)");
  auto* o_lr = train_cmd->add_option("--lr", lr_flag, "Learning rate");
  auto* o_neg =
      train_cmd->add_option("--negatives", flags.negatives, "Negative samples");
  auto* o_sample = train_cmd->add_option("--sample", flags.sample,
                                         "Subsampling threshold (0 disables)");
  auto* o_seed = train_cmd->add_option("--seed", flags.seed, "Random seed");
  auto* o_workers = train_cmd->add_option("--workers", flags.workers, "Worker threads")
                        ->envname("UZVEC_WORKERS");
  auto* o_minc = train_cmd->add_option("--min-count", flags.min_count,
                                       "Vocabulary min count (recorded)");
  auto* o_minn = train_cmd->add_option("--minn", flags.minn, "Min subword size");
  auto* o_maxn = train_cmd->add_option("--maxn", flags.maxn, "Max subword size");
  auto* o_bucket =
      train_cmd->add_option("--bucket", flags.bucket, "Subword bucket rows");
  auto* o_xmax = train_cmd->add_option("--xmax", flags.xmax,
                                       "Co-occurrence weighting cap (glove)");
  train_cmd->callback([&, o_preset, o_algo, o_arch, o_loss, o_dim, o_window,
                       o_epochs, o_alpha, o_lr, o_neg, o_sample, o_seed,
                       o_workers, o_minc, o_minn, o_maxn, o_bucket, o_xmax] {
    // Precedence: command line > env > config file > preset > defaults.
    auto cfgfile = cli_detail::load_flat_config(train_config_path);
    static const std::set<std::string> known_keys{
        "preset", "algo",    "arch",      "loss",   "dim",     "window",
        "epochs", "alpha",   "lr",        "negatives", "sample", "seed",
        "workers", "min-count", "minn",   "maxn",   "bucket",  "xmax"};
    for (const auto& [key, value] : cfgfile) {
      if (!known_keys.count(key)) {
        throw UsageError("config file: unknown key '" + key + "'");
      }
    }
    auto given = [&](CLI::Option* o, const char* key) {
      return o->count() > 0 || cfgfile.count(key) > 0;
    };
    auto text_of = [&](CLI::Option* o, const char* key, std::string& bound) {
      return o->count() > 0 ? bound : cfgfile.at(key);
    };
    // Fold config-file values into the bound targets the flags didn't set.
    auto fold = [&](CLI::Option* o, const char* key, auto& target) {
      if (o->count() == 0 && cfgfile.count(key)) {
        using T = std::decay_t<decltype(target)>;
        const std::string& s = cfgfile.at(key);
        try {
          if constexpr (std::is_floating_point_v<T>) {
            target = static_cast<T>(std::stod(s));
          } else {
            target = static_cast<T>(std::stoll(s));
          }
        } catch (const std::exception&) {
          throw UsageError("config file: bad value for '" + std::string(key) +
                           "': " + s);
        }
      }
    };
    fold(o_dim, "dim", flags.dim);
    fold(o_window, "window", flags.window);
    fold(o_epochs, "epochs", flags.epochs);
    fold(o_alpha, "alpha", flags.alpha0);
    fold(o_lr, "lr", lr_flag);
    fold(o_neg, "negatives", flags.negatives);
    fold(o_sample, "sample", flags.sample);
    fold(o_seed, "seed", flags.seed);
    fold(o_workers, "workers", flags.workers);
    fold(o_minc, "min-count", flags.min_count);
    fold(o_minn, "minn", flags.minn);
    fold(o_maxn, "maxn", flags.maxn);
    fold(o_bucket, "bucket", flags.bucket);
    fold(o_xmax, "xmax", flags.xmax);

    const bool preset_given = given(o_preset, "preset");
    TrainConfig cfg;
    try {
      if (preset_given) {
        cfg = find_preset(text_of(o_preset, "preset", preset_name));
      }
      if (given(o_algo, "algo")) {
        cfg.algo = parse_algo(text_of(o_algo, "algo", algo_str));
      }
      if (given(o_arch, "arch")) {
        cfg.arch = parse_arch(text_of(o_arch, "arch", arch_str));
      }
      if (given(o_loss, "loss")) {
        cfg.loss = parse_loss(text_of(o_loss, "loss", loss_str));
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
    if (!preset_given) {
      // Materialize algorithm-dependent defaults for anything not given.
      switch (cfg.algo) {
        case Algo::word2vec:
          cfg.alpha0 = cfg.arch == Arch::skipgram ? 0.025 : 0.05;
          break;
        case Algo::fasttext:
          cfg.sample = 1e-4;
          cfg.alpha0 = 0.05;
          break;
        case Algo::glove:
          cfg.window = 15;
          cfg.epochs = 15;
          cfg.alpha0 = 0.05;
          break;
      }
    }
    if (given(o_dim, "dim")) cfg.dim = flags.dim;
    if (given(o_window, "window")) cfg.window = flags.window;
    if (given(o_epochs, "epochs")) cfg.epochs = flags.epochs;
    if (given(o_neg, "negatives")) cfg.negatives = flags.negatives;
    if (given(o_sample, "sample")) cfg.sample = flags.sample;
    if (given(o_seed, "seed")) cfg.seed = flags.seed;
    if (given(o_workers, "workers")) cfg.workers = flags.workers;
    if (given(o_minc, "min-count")) cfg.min_count = flags.min_count;
    if (given(o_minn, "minn")) cfg.minn = flags.minn;
    if (given(o_maxn, "maxn")) cfg.maxn = flags.maxn;
    if (given(o_bucket, "bucket")) cfg.bucket = flags.bucket;
    if (given(o_xmax, "xmax")) cfg.xmax = flags.xmax;
    if (given(o_alpha, "alpha")) {
      if (cfg.algo == Algo::glove) {
        cfg.weight_alpha = flags.alpha0;
      } else {
        cfg.alpha0 = flags.alpha0;
      }
    }
    if (given(o_lr, "lr")) cfg.alpha0 = lr_flag;
    if (cfg.algo == Algo::fasttext && cfg.loss != Loss::negative_sampling) {
      throw UsageError("fasttext supports only --loss ns");
    }
    cli_detail::do_train(cfg, paths);
  });

  // --- convert -------------------------------------------------------------
  auto* convert_cmd =
      app.add_subcommand("convert", "Convert a model between formats");
  std::string cv_input, cv_output, cv_from = "auto", cv_to;
  bool cv_no_header = false;
  convert_cmd->add_option("--input", cv_input, "Source model")->required();
  convert_cmd->add_option("--output", cv_output, "Destination")->required();
  convert_cmd->add_option("--from", cv_from, "Source format")
      ->check(CLI::IsMember({"auto", "text", "binary", "native"}));
  convert_cmd->add_option("--to", cv_to, "Destination format")
      ->required()
      ->check(CLI::IsMember({"text", "binary", "native"}));
  convert_cmd->add_flag("--no-header", cv_no_header,
                        "Source text file has no 'vocab dim' header");
  convert_cmd->callback([&] {
    cli_detail::do_convert(cv_input, cv_from, cv_output, cv_to, cv_no_header);
  });

  // --- nn --------------------------------------------------------------
  auto* nn_cmd =
      app.add_subcommand("nn", "List nearest neighbors by cosine similarity");
  std::string nn_model, nn_word, nn_format = "plain", nn_model_format = "auto";
  bool nn_no_header = false;
  std::int64_t nn_k = 10;
  nn_cmd->add_option("--model", nn_model, "Model file")->required();
  nn_cmd->add_option("--word", nn_word, "Query word")->required();
  nn_cmd->add_option("--k", nn_k, "Number of neighbors");
  nn_cmd->add_option("--format", nn_format, "Output format")
      ->check(CLI::IsMember({"plain", "tsv", "json-lines"}));
  nn_cmd->add_option("--model-format", nn_model_format, "Model file format")
      ->check(CLI::IsMember({"auto", "text", "binary", "native"}));
  nn_cmd->add_flag("--no-header", nn_no_header,
                   "Model text file has no 'vocab dim' header");
  nn_cmd->callback([&] {
    cli_detail::do_nn(nn_model, nn_model_format, nn_no_header, nn_word, nn_k,
                      nn_format);
  });

  // --- oov -------------------------------------------------------------
  auto* oov_cmd = app.add_subcommand(
      "oov", "Print the subword-composed vector for a word");
  std::string oov_model, oov_word;
  oov_cmd->add_option("--model", oov_model, "Native fastText model")->required();
  oov_cmd->add_option("--word", oov_word, "Word to compose")->required();
  oov_cmd->callback([&] { cli_detail::do_oov(oov_model, oov_word); });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace uzvec
