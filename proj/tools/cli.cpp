#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "matilda/alignment.hpp"
#include "matilda/analysis.hpp"
#include "matilda/corpus_io.hpp"
#include "matilda/errors.hpp"
#include "matilda/io.hpp"
#include "matilda/mtl_stream.hpp"
#include "matilda/subword.hpp"

namespace matilda::cli {
namespace {

namespace fs = std::filesystem;
using Summary = nlohmann::ordered_json;

struct CorpusFlags {
  std::string src;
  std::string tgt;
  std::string ids;
};

void add_corpus_flags(CLI::App& cmd, CorpusFlags& flags) {
  cmd.add_option("--src", flags.src, "Source side, one sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  cmd.add_option("--tgt", flags.tgt, "Target side, line-parallel with --src")
      ->required()
      ->check(CLI::ExistingFile);
  cmd.add_option("--ids", flags.ids,
                 "Pair ids of the corpus lines (written by prepare); default: line numbers")
      ->check(CLI::ExistingFile);
}

std::vector<ParallelPair> load_corpus(const std::string& src, const std::string& tgt,
                                      const std::string& ids, Origin origin) {
  auto pairs = read_parallel(src, tgt, origin);
  if (ids.empty()) return pairs;
  const auto lines = read_lines(fs::path(ids));
  if (lines.size() != pairs.size())
    throw DataError(ids + ": " + std::to_string(lines.size()) + " ids for " +
                    std::to_string(pairs.size()) + " pairs");
  for (std::size_t k = 0; k < lines.size(); ++k) {
    std::size_t id = 0;
    const auto* end = lines[k].data() + lines[k].size();
    auto [ptr, ec] = std::from_chars(lines[k].data(), end, id);
    if (ec != std::errc{} || ptr != end || (k > 0 && id <= pairs[k - 1].pair_id))
      throw DataError(ids + ":" + std::to_string(k + 1) + ": ids must be increasing integers");
    pairs[k].pair_id = id;
  }
  return pairs;
}

void write_corpus(const std::string& prefix, std::span<const ParallelPair> pairs) {
  write_file_atomically(prefix + ".src", [&](std::ostream& out) { write_side(out, pairs, true); });
  write_file_atomically(prefix + ".tgt", [&](std::ostream& out) { write_side(out, pairs, false); });
  write_file_atomically(prefix + ".ids", [&](std::ostream& out) {
    for (const auto& pair : pairs) out << pair.pair_id << '\n';
  });
}

AlignmentTable one_to_one_table(const AlignmentTable& st, const AlignmentTable& ts) {
  AlignmentTable out;
  for (const auto& [id, a_st] : st) out.emplace(id, intersect(a_st, ts.at(id)));
  return out;
}

// Drops pairs whose subword encoding exceeds `max_tokens` on either side.
std::vector<ParallelPair> filter_encoded(std::span<const ParallelPair> pairs,
                                         const BpeEncoder& encoder, std::size_t max_tokens,
                                         std::vector<ParallelPair>* encoded = nullptr) {
  std::vector<ParallelPair> as_subwords;
  as_subwords.reserve(pairs.size());
  for (const auto& pair : pairs)
    as_subwords.push_back({pair.pair_id, encoder.apply(pair.src), encoder.apply(pair.tgt),
                           pair.origin});
  const auto kept = filter_pairs(as_subwords, 1, max_tokens);
  std::vector<ParallelPair> words;
  std::size_t next = 0;
  for (const auto& pair : pairs) {
    if (next < kept.size() && kept[next].pair_id == pair.pair_id) {
      words.push_back(pair);
      ++next;
    }
  }
  if (encoded) *encoded = kept;
  return words;
}

// "name" or "name:alpha".
std::vector<TransformSpec> parse_transforms(const std::string& text, bool allow_off_grid) {
  std::vector<TransformSpec> specs;
  std::stringstream list(text);
  std::string item;
  while (std::getline(list, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const auto name = item.substr(0, colon);
    const auto task = parse_task(name);
    if (!task || *task == Task::original)
      throw UsageError("unknown transformation \"" + name + "\"");
    TransformSpec spec{*task, 0.0};
    if (colon == std::string::npos) {
      if (uses_alpha(*task)) spec.alpha = 0.5;
    } else {
      if (!uses_alpha(*task))
        throw UsageError("transformation " + name + " does not take an alpha");
      const auto value = item.substr(colon + 1);
      std::size_t used = 0;
      try {
        spec.alpha = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || value.empty())
        throw UsageError("bad alpha \"" + value + "\" for " + name);
      if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0))
        throw UsageError("alpha for " + name + " must lie in [0,1]");
      const double tenths = spec.alpha * 10.0;
      const bool on_grid = std::abs(tenths - std::round(tenths)) < 1e-9 && spec.alpha >= 0.1 - 1e-9 &&
                           spec.alpha <= 0.9 + 1e-9;
      if (!on_grid && !allow_off_grid)
        throw UsageError("alpha " + value + " for " + name +
                         " is off the 0.1..0.9 grid (pass --allow-off-grid to accept it)");
    }
    specs.push_back(spec);
  }
  return specs;
}

std::map<std::string, std::string> parse_token_overrides(const std::vector<std::string>& items) {
  std::map<std::string, std::string> overrides;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw UsageError("--task-token expects KEY=TOKEN, got \"" + item + "\"");
    const auto token = item.substr(eq + 1);
    if (split_tokens(token).size() != 1 || token.find_first_of(" \t") != std::string::npos)
      throw UsageError("task token \"" + token + "\" must be a single whitespace-free token");
    overrides[item.substr(0, eq)] = token;
  }
  return overrides;
}

// Subcommand state. Each struct wires its flags and knows how to run.

struct Prepare {
  CorpusFlags corpus;
  std::string out;
  std::size_t min_tokens = kDefaultMinTokens;
  std::size_t max_tokens = kDefaultMaxTokens;

  void attach(CLI::App& cmd) {
    add_corpus_flags(cmd, corpus);
    cmd.add_option("--out", out, "Output prefix (.src/.tgt/.ids)")->required();
    cmd.add_option("--min-tokens", min_tokens, "Minimum tokens per side")->capture_default_str();
    cmd.add_option("--max-tokens", max_tokens, "Maximum tokens per side")->capture_default_str();
  }

  Summary run() const {
    const auto pairs = load_corpus(corpus.src, corpus.tgt, corpus.ids, Origin::parallel);
    if (min_tokens < 1 || max_tokens < min_tokens)
      throw UsageError("need 1 <= --min-tokens <= --max-tokens");
    const auto kept = filter_pairs(pairs, min_tokens, max_tokens);
    write_corpus(out, kept);
    return {{"read", pairs.size()}, {"kept", kept.size()}, {"out", out}};
  }
};

struct LearnBpe {
  CorpusFlags corpus;
  std::string out;
  std::size_t num_merges = 10000;

  void attach(CLI::App& cmd) {
    add_corpus_flags(cmd, corpus);
    cmd.add_option("--num-merges", num_merges, "Number of merge operations")->capture_default_str();
    cmd.add_option("--out", out, "Merge table file")->required();
  }

  Summary run() const {
    const auto pairs = load_corpus(corpus.src, corpus.tgt, corpus.ids, Origin::parallel);
    std::vector<TokenSeq> lines;
    lines.reserve(2 * pairs.size());
    for (const auto& pair : pairs) lines.push_back(pair.src);
    for (const auto& pair : pairs) lines.push_back(pair.tgt);
    const auto table = learn_bpe(lines, num_merges);
    write_file_atomically(out, [&](std::ostream& os) { write_merge_table(os, table); });
    return {{"merges", table.merges.size()}, {"out", out}};
  }
};

struct ApplyBpe {
  CorpusFlags corpus;
  std::string merges;
  std::string out;
  std::size_t max_tokens = kDefaultMaxTokens;

  void attach(CLI::App& cmd) {
    add_corpus_flags(cmd, corpus);
    cmd.add_option("--merges", merges, "Merge table")->required()->check(CLI::ExistingFile);
    cmd.add_option("--max-tokens", max_tokens, "Drop pairs with more subwords than this")
        ->capture_default_str();
    cmd.add_option("--out", out, "Output prefix (.src/.tgt/.ids)")->required();
  }

  Summary run() const {
    const auto pairs = load_corpus(corpus.src, corpus.tgt, corpus.ids, Origin::parallel);
    const BpeEncoder encoder(read_merge_table(fs::path(merges)));
    std::vector<ParallelPair> encoded;
    filter_encoded(pairs, encoder, max_tokens, &encoded);
    write_corpus(out, encoded);
    return {{"read", pairs.size()}, {"kept", encoded.size()}, {"out", out}};
  }
};

struct AlignIntersect {
  CorpusFlags corpus;
  std::string align_st;
  std::string align_ts;
  std::string out;

  void attach(CLI::App& cmd) {
    add_corpus_flags(cmd, corpus);
    cmd.add_option("--align-st", align_st, "Source-to-target Pharaoh file (i-j)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--align-ts", align_ts, "Target-to-source Pharaoh file (j-i)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--out", out, "One-to-one Pharaoh file, line-parallel by pair id")->required();
  }

  Summary run() const {
    const auto pairs = load_corpus(corpus.src, corpus.tgt, corpus.ids, Origin::parallel);
    const auto st = read_alignment_file(align_st, pairs);
    const auto ts = read_alignment_file(align_ts, pairs, true);
    const auto one_to_one = one_to_one_table(st, ts);
    std::size_t links = 0;
    write_file_atomically(out, [&](std::ostream& os) {
      std::size_t next_id = 0;
      for (const auto& [id, alignment] : one_to_one) {
        for (; next_id < id; ++next_id) os << '\n';
        os << format_pharaoh(alignment) << '\n';
        links += alignment.size();
        next_id = id + 1;
      }
    });
    return {{"pairs", one_to_one.size()}, {"links", links}, {"out", out}};
  }
};

struct Lexicon {
  CorpusFlags corpus;
  std::string align_st;
  std::string align_ts;
  std::string out;

  void attach(CLI::App& cmd) {
    add_corpus_flags(cmd, corpus);
    cmd.add_option("--align-st", align_st, "Source-to-target Pharaoh file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--align-ts", align_ts, "Target-to-source Pharaoh file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--out", out, "Lexicon TSV")->required();
  }

  Summary run() const {
    const auto pairs = load_corpus(corpus.src, corpus.tgt, corpus.ids, Origin::parallel);
    const auto one_to_one = one_to_one_table(read_alignment_file(align_st, pairs),
                                             read_alignment_file(align_ts, pairs, true));
    const auto lexicon = build_lexicon(pairs, one_to_one);
    write_file_atomically(out, [&](std::ostream& os) { write_lexicon(os, lexicon); });
    return {{"entries", lexicon.size()}, {"out", out}};
  }
};

struct BtFlags {
  std::string src;
  std::string tgt;
  std::string mode = "plain";

  void attach(CLI::App& cmd, bool required) {
    auto* s = cmd.add_option("--bt-src", src, "Back-translated source side")
                  ->check(CLI::ExistingFile);
    auto* t = cmd.add_option("--bt-tgt", tgt, "Back-translated target side")
                  ->check(CLI::ExistingFile);
    if (required) {
      s->required();
      t->required();
    } else {
      s->needs(t);
      t->needs(s);
    }
    cmd.add_option("--bt-mode", mode, "plain | augment | tag | tag_augment")->capture_default_str();
  }
};

struct Augment {
  CorpusFlags corpus;
  BtFlags bt;
  std::string align_st;
  std::string align_ts;
  std::string bt_align_st;
  std::string bt_align_ts;
  std::string lexicon;
  std::string merges;
  std::string transforms;
  std::string phase = "augment";
  std::string out;
  std::vector<std::string> task_tokens;
  std::optional<std::uint64_t> seed;
  std::uint64_t epoch = 0;
  std::uint64_t epochs = 1;
  std::size_t max_batch_tokens = kDefaultMaxBatchTokens;
  std::size_t max_subword_tokens = kDefaultMaxTokens;
  unsigned workers = 1;
  bool allow_off_grid = false;

  void attach(CLI::App& cmd) {
    add_corpus_flags(cmd, corpus);
    bt.attach(cmd, false);
    cmd.add_option("--seed", seed, "Stream seed (mandatory)")->required();
    cmd.add_option("--epoch", epoch, "First epoch index")->capture_default_str();
    cmd.add_option("--epochs", epochs, "Number of epochs to emit")->capture_default_str();
    cmd.add_option("--transforms", transforms,
                   "Comma list of name[:alpha]: swap, unk, source, reverse, mono, replace");
    cmd.add_flag("--allow-off-grid", allow_off_grid, "Accept alphas outside 0.1..0.9 step 0.1");
    cmd.add_option("--phase", phase, "augment | fine-tune")->capture_default_str();
    cmd.add_option("--align-st", align_st, "Source-to-target Pharaoh file")
        ->check(CLI::ExistingFile);
    cmd.add_option("--align-ts", align_ts, "Target-to-source Pharaoh file")
        ->check(CLI::ExistingFile);
    cmd.add_option("--bt-align-st", bt_align_st, "Back-translated source-to-target alignments")
        ->check(CLI::ExistingFile);
    cmd.add_option("--bt-align-ts", bt_align_ts, "Back-translated target-to-source alignments")
        ->check(CLI::ExistingFile);
    cmd.add_option("--lexicon", lexicon, "Lexicon TSV for replace (default: built from alignments)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--merges", merges, "Apply this BPE merge table when serializing")
        ->check(CLI::ExistingFile);
    cmd.add_option("--max-subword-tokens", max_subword_tokens,
                   "With --merges, drop pairs longer than this in subwords")
        ->capture_default_str();
    cmd.add_option("--max-batch-tokens", max_batch_tokens, "Batch size in label tokens")
        ->capture_default_str();
    cmd.add_option("--workers", workers, "Augmentation worker threads")->capture_default_str();
    cmd.add_option("--task-token", task_tokens, "Override a task token, KEY=TOKEN (e.g. orig=<o>)");
    cmd.add_option("--out", out, "JSON Lines stream")->required();
  }

  Summary run() const {
    StreamConfig config;
    config.phase = parse_phase(phase);
    config.transforms = parse_transforms(transforms, allow_off_grid);
    config.seed = *seed;
    config.max_batch_tokens = max_batch_tokens;
    config.bt_mode = parse_bt_mode(bt.mode);
    config.task_tokens = TaskTokenMap(parse_token_overrides(task_tokens));
    config.validate();

    const bool wants_mono = std::ranges::any_of(
        config.transforms, [](const TransformSpec& s) { return s.task == Task::mono; });
    const bool wants_replace = std::ranges::any_of(
        config.transforms, [](const TransformSpec& s) { return s.task == Task::replace; });
    const bool alignments_used = config.phase == Phase::augment && (wants_mono || wants_replace);
    if (alignments_used && align_st.empty())
      throw UsageError("mono and replace need --align-st");
    if (alignments_used && wants_replace && align_ts.empty())
      throw UsageError("replace needs --align-ts to build one-to-one alignments");

    auto pairs = load_corpus(corpus.src, corpus.tgt, corpus.ids, Origin::parallel);
    std::vector<ParallelPair> bt_pairs;
    if (!bt.src.empty()) bt_pairs = read_parallel(bt.src, bt.tgt, Origin::back_translated);

    std::optional<BpeEncoder> encoder;
    if (!merges.empty()) {
      ReservedSymbols reserved;
      for (const auto& [key, token] : config.task_tokens.overrides()) reserved.add(token);
      encoder.emplace(read_merge_table(fs::path(merges)), reserved);
      pairs = filter_encoded(pairs, *encoder, max_subword_tokens);
      bt_pairs = filter_encoded(bt_pairs, *encoder, max_subword_tokens);
    }

    const auto offset = bt_id_offset(pairs);
    const auto entries = combine_bt(pairs, bt_pairs, config.bt_mode);
    const bool bt_augmented = config.bt_mode == BtMode::augment || config.bt_mode == BtMode::tag_augment;

    AlignmentTable st, one_to_one;
    BilingualLexicon lex;
    if (alignments_used) {
      st = read_alignment_file(align_st, pairs);
      if (wants_replace) one_to_one = one_to_one_table(st, read_alignment_file(align_ts, pairs, true));
      lex = lexicon.empty() ? build_lexicon(pairs, one_to_one) : read_lexicon(fs::path(lexicon));
      if (bt_augmented && !bt_pairs.empty()) {
        if (bt_align_st.empty() || (wants_replace && bt_align_ts.empty()))
          throw UsageError("augmenting back-translated pairs with mono/replace needs "
                           "--bt-align-st/--bt-align-ts");
        const auto bt_st = read_alignment_file(bt_align_st, bt_pairs);
        for (const auto& [id, a] : bt_st) st.emplace(offset + id, a);
        if (wants_replace) {
          const auto bt_o2o = one_to_one_table(bt_st, read_alignment_file(bt_align_ts, bt_pairs, true));
          for (const auto& [id, a] : bt_o2o) one_to_one.emplace(offset + id, a);
        }
      }
    }
    const StreamResources resources{alignments_used ? &st : nullptr,
                                    wants_replace && alignments_used ? &one_to_one : nullptr,
                                    wants_replace && alignments_used ? &lex : nullptr};

    std::size_t samples = 0, batches = 0;
    write_file_atomically(out, [&](std::ostream& os) {
      for (std::uint64_t e = epoch; e < epoch + epochs; ++e) {
        auto stream = epoch_stream(entries, resources, config, e, workers);
        if (encoder)
          for (auto& sample : stream) sample = encode_sample(sample, *encoder);
        samples += stream.size();
        const auto packed = make_batches(std::move(stream), config.max_batch_tokens);
        batches += packed.size();
        write_stream(os, packed, config.task_tokens);
      }
    });
    return {{"pairs", entries.size()}, {"epochs", epochs}, {"samples", samples},
            {"batches", batches}, {"out", out}};
  }
};

struct CombineBt {
  CorpusFlags corpus;
  BtFlags bt;
  std::string out;

  void attach(CLI::App& cmd) {
    add_corpus_flags(cmd, corpus);
    bt.attach(cmd, true);
    cmd.add_option("--out", out, "Output prefix (.src/.tgt/.ids/.flags.tsv)")->required();
  }

  Summary run() const {
    const auto mode = parse_bt_mode(bt.mode);
    const auto pairs = load_corpus(corpus.src, corpus.tgt, corpus.ids, Origin::parallel);
    const auto bt_pairs = read_parallel(bt.src, bt.tgt, Origin::back_translated);
    const auto entries = combine_bt(pairs, bt_pairs, mode);
    std::vector<ParallelPair> combined;
    combined.reserve(entries.size());
    for (const auto& entry : entries) combined.push_back(entry.pair);
    write_corpus(out, combined);
    write_file_atomically(out + ".flags.tsv", [&](std::ostream& os) {
      os << "pair_id\torigin\taugment\tbt_tag\n";
      for (const auto& e : entries)
        os << e.pair.pair_id << '\t' << origin_name(e.pair.origin) << '\t' << e.augment << '\t'
           << e.bt_tag << '\n';
    });
    return {{"parallel", pairs.size()}, {"bt", bt_pairs.size()}, {"mode", bt_mode_name(mode)},
            {"out", out}};
  }
};

struct AnalyzeSource {
  std::string dumps;
  std::string out;
  int degree = analysis::kDefaultDegree;
  std::size_t expected_n = 0;

  void attach(CLI::App& cmd) {
    cmd.add_option("--dumps", dumps, "Perturbation dump JSON Lines")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--degree", degree, "Position-curve polynomial degree")->capture_default_str();
    cmd.add_option("--n", expected_n, "Require exactly this many perturbations per token");
    cmd.add_option("--out", out, "Position-curve JSON")->required();
  }

  Summary run() const {
    const auto records = analysis::read_dumps(fs::path(dumps));
    std::size_t tokens = 0, skipped = 0;
    for (const auto& dump : records) {
      if (expected_n && !dump.tokens.empty() && dump.perturbations() != expected_n)
        throw DataError(dumps + ": sentence " + std::to_string(dump.sentence_id) + " has N=" +
                        std::to_string(dump.perturbations()) + ", expected " +
                        std::to_string(expected_n));
      for (const auto& csr : analysis::token_csr(dump)) {
        ++tokens;
        skipped += !csr;
      }
    }
    const auto stats = analysis::corpus_mean_csr(records);
    const auto curve = analysis::position_curve(records, degree);
    write_file_atomically(out, [&](std::ostream& os) { os << analysis::curve_to_json(curve) << '\n'; });
    return {{"sentences", records.size()}, {"tokens", tokens}, {"skipped", skipped},
            {"mean_csr", stats.mean}, {"std_csr", stats.std}, {"curve_points", curve.sample_count},
            {"out", out}};
  }
};

struct AnalyzeKde {
  std::string embeddings;
  std::string out;
  double bandwidth = analysis::kDefaultBandwidth;
  double grid_min = -1.0;
  double grid_max = 1.0;
  std::size_t grid_points = 401;

  void attach(CLI::App& cmd) {
    cmd.add_option("--embeddings", embeddings, "Similarity records JSON Lines")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--bandwidth", bandwidth, "Gaussian kernel bandwidth")->capture_default_str();
    cmd.add_option("--grid-min", grid_min, "First grid point")->capture_default_str();
    cmd.add_option("--grid-max", grid_max, "Last grid point")->capture_default_str();
    cmd.add_option("--grid-points", grid_points, "Number of grid points")->capture_default_str();
    cmd.add_option("--out", out, "Density TSV (x, density)")->required();
  }

  Summary run() const {
    const auto records = analysis::read_similarities(fs::path(embeddings));
    if (records.empty()) throw DataError(embeddings + ": no similarity records");
    if (!(bandwidth > 0.0)) throw UsageError("--bandwidth must be positive");
    if (grid_points < 2 || !(grid_max > grid_min))
      throw UsageError("need --grid-max > --grid-min and --grid-points >= 2");
    std::vector<double> cosines;
    cosines.reserve(records.size());
    for (const auto& r : records) cosines.push_back(analysis::cosine(r.hyp_embedding, r.ref_embedding));
    const auto grid = analysis::linear_grid(grid_min, grid_max, grid_points);
    const auto density = analysis::kde(cosines, bandwidth, grid);
    write_file_atomically(out, [&](std::ostream& os) { analysis::write_kde_tsv(os, grid, density); });
    double mean = 0.0;
    for (double c : cosines) mean += c;
    return {{"records", records.size()}, {"mean_cosine", mean / static_cast<double>(cosines.size())},
            {"bandwidth", bandwidth}, {"out", out}};
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-task data augmentation toolkit for sequence-to-sequence corpora", "matilda"};
  app.set_version_flag("--version", std::string("matilda ") + kVersion);
  app.require_subcommand(1, 1);

  Prepare prepare;
  LearnBpe learn;
  ApplyBpe apply;
  AlignIntersect align;
  Lexicon lexicon;
  Augment augment;
  CombineBt combine;
  AnalyzeSource source;
  AnalyzeKde kde;

  std::vector<std::pair<CLI::App*, std::function<Summary()>>> commands;
  auto add = [&](const char* name, const char* help, auto& command) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->set_version_flag("--version", std::string("matilda ") + kVersion);
    command.attach(*cmd);
    commands.emplace_back(cmd, [&command] { return command.run(); });
  };
  add("prepare", "Read and length-filter a parallel corpus", prepare);
  add("learn-bpe", "Learn a joint BPE merge table over both sides", learn);
  add("apply-bpe", "Segment a corpus with a merge table", apply);
  add("align-intersect", "Intersect directional alignments into one-to-one links", align);
  add("lexicon", "Build the bilingual lexicon from one-to-one alignments", lexicon);
  add("augment", "Emit the per-epoch multi-task training stream", augment);
  add("combine-bt", "Concatenate a back-translated corpus with its handling flags", combine);
  add("analyze-source", "Relative source contribution statistics and position curve", source);
  add("analyze-kde", "Kernel density of hypothesis/reference cosine similarities", kde);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  for (auto& [cmd, runner] : commands) {
    if (!cmd->parsed()) continue;
    try {
      auto summary = runner();
      Summary line{{"command", cmd->get_name()}, {"status", "ok"}};
      line.update(summary);
      out << line.dump() << '\n';
      return kSuccess;
    } catch (const UsageError& e) {
      err << cmd->get_name() << ": " << e.what() << "\n\n" << cmd->help();
      return kUsageError;
    } catch (const std::exception& e) {
      err << cmd->get_name() << ": " << e.what() << '\n';
      return kDataError;
    }
  }
  return kUsageError;
}

}  // namespace matilda::cli
