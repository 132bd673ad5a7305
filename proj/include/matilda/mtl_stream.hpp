#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matilda/alignment.hpp"
#include "matilda/random_stream.hpp"
#include "matilda/subword.hpp"
#include "matilda/transforms.hpp"

namespace matilda {

enum class BtMode { plain, augment, tag, tag_augment };
enum class Phase { augment, fine_tune };

std::string_view bt_mode_name(BtMode mode);
// Throws UsageError on an unknown name.
BtMode parse_bt_mode(std::string_view name);
Phase parse_phase(std::string_view name);

// Surface forms of the task tokens prepended to the source side. Keys are
// task names ("orig", "swap", ...), "bt" for a tagged back-translated
// original and "bt+<task>" for a tagged back-translated transform sample.
// Keys without an override render as "<mtl:KEY>".
class TaskTokenMap {
 public:
  TaskTokenMap() = default;
  explicit TaskTokenMap(std::map<std::string, std::string> overrides);

  std::string token(Task task, bool bt_tagged) const;
  const std::map<std::string, std::string>& overrides() const { return overrides_; }

 private:
  std::map<std::string, std::string> overrides_;
};

struct TransformSpec {
  Task task = Task::reverse;
  double alpha = 0.0;
};

inline constexpr std::size_t kDefaultMaxBatchTokens = 4000;

struct StreamConfig {
  std::vector<TransformSpec> transforms;
  std::uint64_t seed = 0;
  std::size_t max_batch_tokens = kDefaultMaxBatchTokens;
  BtMode bt_mode = BtMode::plain;
  Phase phase = Phase::augment;
  TaskTokenMap task_tokens;

  // Throws UsageError on an empty transform list in the augment phase, a
  // repeated or non-transform task, alpha outside [0,1] or a zero cap.
  void validate() const;
};

// Key used for the epoch shuffle stream in place of a pair id.
inline constexpr std::uint64_t kCorpusStreamId = std::numeric_limits<std::uint64_t>::max();

// Random stream keyed by all four inputs. The key-to-state mapping is
// injective, so distinct keys never share a generator state.
SeededStream derive_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t pair_id,
                           Task task);

// A corpus pair with its back-translation handling flags.
struct CorpusEntry {
  ParallelPair pair;
  bool augment = true;  // apply the configured transformations
  bool bt_tag = false;  // use the back-translation task tokens

  bool operator==(const CorpusEntry&) const = default;
};

std::vector<CorpusEntry> as_entries(std::span<const ParallelPair> pairs);

// First pair id given to back-translated pairs by combine_bt: one past the
// largest parallel id (0 for an empty parallel corpus).
std::size_t bt_id_offset(std::span<const ParallelPair> parallel);

// Concatenates both corpora. Back-translated pairs are renumbered by
// bt_id_offset and flagged according to `mode`:
//   plain        no transforms, no tag
//   augment      transforms, no tag
//   tag          no transforms, bt tag
//   tag_augment  transforms, bt tag (combined bt+transform tokens)
std::vector<CorpusEntry> combine_bt(std::span<const ParallelPair> parallel,
                                    std::span<const ParallelPair> bt, BtMode mode);

// Alignment inputs for mono (source-to-target) and replace (one-to-one plus
// lexicon). Null members are simply unavailable.
struct StreamResources {
  const AlignmentTable* source_to_target = nullptr;
  const AlignmentTable* one_to_one = nullptr;
  const BilingualLexicon* lexicon = nullptr;
};

// One epoch of samples: pairs in a seeded per-epoch shuffle; for each pair its
// original sample followed by one sample per configured transform, all with
// weight 1/(r+1). Pairs not flagged for augmentation, and every pair in the
// fine-tune phase, contribute only their original with weight 1. Output is
// identical for any worker count.
std::vector<AugmentedSample> epoch_stream(std::span<const CorpusEntry> corpus,
                                          const StreamResources& resources,
                                          const StreamConfig& config, std::uint64_t epoch,
                                          unsigned workers = 1);

// Seeded Fisher-Yates permutation of [0, n) for one epoch.
std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch, std::size_t n);

struct Batch {
  std::vector<AugmentedSample> samples;
  std::size_t token_count = 0;  // sum of label lengths
  bool oversize = false;        // a single sample longer than the cap
};

// Greedy packing in stream order by label token count.
std::vector<Batch> make_batches(std::vector<AugmentedSample> samples,
                                std::size_t max_batch_tokens);

// Applies BPE to all three sequences. For unk samples each masked word
// becomes one UNK per subword of its label, keeping context and label aligned.
AugmentedSample encode_sample(const AugmentedSample& sample, const BpeEncoder& encoder);

// One JSON object per line, keys in contract order, NFC-normalized text.
std::string sample_to_json(const AugmentedSample& sample, const TaskTokenMap& tokens);
void write_stream(std::ostream& out, std::span<const Batch> batches, const TaskTokenMap& tokens);

}  // namespace matilda
