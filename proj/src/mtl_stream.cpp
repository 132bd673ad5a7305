#include "matilda/mtl_stream.hpp"

#include <algorithm>
#include <exception>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "matilda/errors.hpp"
#include "matilda/unicode.hpp"

namespace matilda {
namespace {

nlohmann::ordered_json token_array(std::span<const std::string> tokens, const std::string* lead = nullptr) {
  auto array = nlohmann::ordered_json::array();
  if (lead) array.push_back(unicode::to_nfc(*lead));
  for (const auto& token : tokens) array.push_back(unicode::to_nfc(token));
  return array;
}

const AlignmentSet& lookup(const AlignmentTable* table, std::size_t pair_id, Task task) {
  const auto it = table->find(pair_id);
  if (it == table->end())
    throw DataError("missing alignment for pair_id " + std::to_string(pair_id) + " (needed by " +
                    std::string(task_name(task)) + ")");
  return it->second;
}

std::vector<AugmentedSample> pair_samples(const CorpusEntry& entry,
                                          const StreamResources& resources,
                                          const StreamConfig& config, std::uint64_t epoch) {
  const auto& pair = entry.pair;
  const bool augment = entry.augment && config.phase == Phase::augment;
  const Rational weight{1, augment ? config.transforms.size() + 1 : 1};

  std::vector<AugmentedSample> out;
  out.reserve(augment ? config.transforms.size() + 1 : 1);
  out.push_back(original_sample(pair));
  if (augment) {
    for (const auto& spec : config.transforms) {
      auto rng = derive_stream(config.seed, epoch, pair.pair_id, spec.task);
      switch (spec.task) {
        case Task::swap: out.push_back(t_swap(pair, spec.alpha, rng)); break;
        case Task::unk: out.push_back(t_unk(pair, spec.alpha, rng)); break;
        case Task::source: out.push_back(t_source(pair)); break;
        case Task::reverse: out.push_back(t_reverse(pair)); break;
        case Task::mono:
          out.push_back(t_mono(pair, lookup(resources.source_to_target, pair.pair_id, spec.task)));
          break;
        case Task::replace:
          out.push_back(t_replace(pair, lookup(resources.one_to_one, pair.pair_id, spec.task),
                                  *resources.lexicon, spec.alpha, rng));
          break;
        case Task::original: throw std::logic_error("original is not a transformation");
      }
    }
  }
  for (auto& sample : out) {
    sample.weight = weight;
    sample.epoch = epoch;
    sample.bt_tagged = entry.bt_tag;
  }
  return out;
}

}  // namespace

std::string_view bt_mode_name(BtMode mode) {
  switch (mode) {
    case BtMode::plain: return "plain";
    case BtMode::augment: return "augment";
    case BtMode::tag: return "tag";
    case BtMode::tag_augment: return "tag_augment";
  }
  return "?";
}

BtMode parse_bt_mode(std::string_view name) {
  for (auto mode : {BtMode::plain, BtMode::augment, BtMode::tag, BtMode::tag_augment})
    if (bt_mode_name(mode) == name) return mode;
  if (name == "tag-augment") return BtMode::tag_augment;
  throw UsageError("unknown back-translation mode \"" + std::string(name) +
                   "\" (expected plain, augment, tag or tag_augment)");
}

Phase parse_phase(std::string_view name) {
  if (name == "augment") return Phase::augment;
  if (name == "fine-tune" || name == "fine_tune") return Phase::fine_tune;
  throw UsageError("unknown phase \"" + std::string(name) + "\" (expected augment or fine-tune)");
}

TaskTokenMap::TaskTokenMap(std::map<std::string, std::string> overrides)
    : overrides_(std::move(overrides)) {}

std::string TaskTokenMap::token(Task task, bool bt_tagged) const {
  std::string key;
  if (!bt_tagged)
    key = task_name(task);
  else if (task == Task::original)
    key = "bt";
  else
    key = "bt+" + std::string(task_name(task));
  if (auto it = overrides_.find(key); it != overrides_.end()) return it->second;
  return "<mtl:" + key + ">";
}

void StreamConfig::validate() const {
  if (phase == Phase::augment && transforms.empty())
    throw UsageError("the augment phase needs at least one transformation");
  std::set<Task> seen;
  for (const auto& spec : transforms) {
    if (spec.task == Task::original) throw UsageError("\"orig\" is not a transformation");
    if (!seen.insert(spec.task).second)
      throw UsageError("transformation " + std::string(task_name(spec.task)) + " listed twice");
    if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0))
      throw UsageError("alpha for " + std::string(task_name(spec.task)) + " must lie in [0,1]");
  }
  if (max_batch_tokens == 0) throw UsageError("max batch tokens must be positive");
}

SeededStream derive_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t pair_id,
                           Task task) {
  // Each chain word is a bijection of one input given the previous word; the
  // last word depends on every input and is folded into the other three.
  std::array<std::uint64_t, 4> chain;
  chain[0] = mix64(seed ^ 0x6a09e667f3bcc908ULL);
  chain[1] = mix64(epoch + chain[0]);
  chain[2] = mix64(pair_id + chain[1]);
  chain[3] = mix64(static_cast<std::uint64_t>(task) + chain[2]);
  return SeededStream({chain[0] ^ mix64(chain[3] ^ 0xbb67ae8584caa73bULL),
                       chain[1] ^ mix64(chain[3] ^ 0x3c6ef372fe94f82bULL),
                       chain[2] ^ mix64(chain[3] ^ 0xa54ff53a5f1d36f1ULL), chain[3]});
}

std::vector<CorpusEntry> as_entries(std::span<const ParallelPair> pairs) {
  std::vector<CorpusEntry> entries;
  entries.reserve(pairs.size());
  for (const auto& pair : pairs) entries.push_back({pair, true, false});
  return entries;
}

std::size_t bt_id_offset(std::span<const ParallelPair> parallel) {
  std::size_t offset = 0;
  for (const auto& pair : parallel) offset = std::max(offset, pair.pair_id + 1);
  return offset;
}

std::vector<CorpusEntry> combine_bt(std::span<const ParallelPair> parallel,
                                    std::span<const ParallelPair> bt, BtMode mode) {
  const bool augment_bt = mode == BtMode::augment || mode == BtMode::tag_augment;
  const bool tag_bt = mode == BtMode::tag || mode == BtMode::tag_augment;
  const std::size_t offset = bt_id_offset(parallel);

  auto entries = as_entries(parallel);
  entries.reserve(parallel.size() + bt.size());
  for (const auto& pair : bt) {
    CorpusEntry entry{pair, augment_bt, tag_bt};
    entry.pair.pair_id = offset + pair.pair_id;
    entry.pair.origin = Origin::back_translated;
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto rng = derive_stream(seed, epoch, kCorpusStreamId, Task::original);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::vector<AugmentedSample> epoch_stream(std::span<const CorpusEntry> corpus,
                                          const StreamResources& resources,
                                          const StreamConfig& config, std::uint64_t epoch,
                                          unsigned workers) {
  config.validate();
  if (config.phase == Phase::augment) {
    for (const auto& spec : config.transforms) {
      if (spec.task == Task::mono && !resources.source_to_target)
        throw UsageError("mono needs source-to-target alignments");
      if (spec.task == Task::replace && (!resources.one_to_one || !resources.lexicon))
        throw UsageError("replace needs one-to-one alignments and a lexicon");
    }
    // Every alignment the transforms need must be present.
    for (const auto& entry : corpus) {
      if (!entry.augment) continue;
      for (const auto& spec : config.transforms) {
        if (spec.task == Task::mono) lookup(resources.source_to_target, entry.pair.pair_id, spec.task);
        if (spec.task == Task::replace) lookup(resources.one_to_one, entry.pair.pair_id, spec.task);
      }
    }
  }

  const auto order = epoch_order(config.seed, epoch, corpus.size());
  std::vector<std::vector<AugmentedSample>> groups(corpus.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      groups[i] = pair_samples(corpus[order[i]], resources, config, epoch);
  };

  workers = std::max(1u, workers);
  if (workers == 1 || corpus.size() < 2) {
    run(0, corpus.size());
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = corpus.size() * w / workers;
        const std::size_t end = corpus.size() * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
          try {
            run(begin, end);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& error : errors)
      if (error) std::rethrow_exception(error);
  }

  std::size_t total = 0;
  for (const auto& group : groups) total += group.size();
  std::vector<AugmentedSample> stream;
  stream.reserve(total);
  for (auto& group : groups)
    for (auto& sample : group) stream.push_back(std::move(sample));
  return stream;
}

std::vector<Batch> make_batches(std::vector<AugmentedSample> samples,
                                std::size_t max_batch_tokens) {
  if (max_batch_tokens == 0) throw std::invalid_argument("max_batch_tokens must be positive");
  std::vector<Batch> batches;
  Batch current;
  for (auto& sample : samples) {
    const std::size_t length = sample.tgt_lbl.size();
    if (!current.samples.empty() && current.token_count + length > max_batch_tokens) {
      batches.push_back(std::move(current));
      current = Batch{};
    }
    current.token_count += length;
    current.samples.push_back(std::move(sample));
    if (current.token_count > max_batch_tokens) current.oversize = true;
  }
  if (!current.samples.empty()) batches.push_back(std::move(current));
  return batches;
}

AugmentedSample encode_sample(const AugmentedSample& sample, const BpeEncoder& encoder) {
  AugmentedSample out = sample;
  out.src = encoder.apply(sample.src);
  out.tgt_ctx.clear();
  out.tgt_lbl.clear();
  for (std::size_t i = 0; i < sample.tgt_lbl.size(); ++i) {
    auto label = encoder.segment(sample.tgt_lbl[i]);
    if (sample.tgt_ctx[i] == sample.tgt_lbl[i]) {
      out.tgt_ctx.insert(out.tgt_ctx.end(), label.begin(), label.end());
    } else if (sample.tgt_ctx[i] == kUnkToken) {
      out.tgt_ctx.insert(out.tgt_ctx.end(), label.size(), std::string(kUnkToken));
    } else {
      auto context = encoder.segment(sample.tgt_ctx[i]);
      if (context.size() != label.size())
        throw std::logic_error("context and label segment to different lengths");
      out.tgt_ctx.insert(out.tgt_ctx.end(), context.begin(), context.end());
    }
    out.tgt_lbl.insert(out.tgt_lbl.end(), label.begin(), label.end());
  }
  return out;
}

std::string sample_to_json(const AugmentedSample& sample, const TaskTokenMap& tokens) {
  const auto task_token = tokens.token(sample.task, sample.bt_tagged);
  nlohmann::ordered_json line;
  line["epoch"] = sample.epoch;
  line["pair_id"] = sample.pair_id;
  line["task"] = task_name(sample.task);
  line["origin"] = origin_name(sample.origin);
  line["weight"] = sample.weight.value();
  line["src"] = token_array(sample.src, &task_token);
  line["tgt_ctx"] = token_array(sample.tgt_ctx);
  line["tgt_lbl"] = token_array(sample.tgt_lbl);
  return line.dump();
}

void write_stream(std::ostream& out, std::span<const Batch> batches, const TaskTokenMap& tokens) {
  for (const auto& batch : batches) {
    for (const auto& sample : batch.samples) out << sample_to_json(sample, tokens) << '\n';
    out << R"({"batch_end":true,"token_count":)" << batch.token_count << "}\n";
  }
}

}  // namespace matilda
