#include "matilda/subword.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "matilda/errors.hpp"
#include "matilda/io.hpp"
#include "matilda/unicode.hpp"

namespace matilda {
namespace {

std::vector<std::string> initial_symbols(std::string_view word) {
  std::vector<std::string> symbols;
  for (auto cp : unicode::code_points(word)) symbols.emplace_back(cp);
  if (!symbols.empty()) symbols.back() += kEndOfWord;
  return symbols;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Incremental pair statistics for learn_bpe. Pairs live in an ordered set so
// the best candidate is always at begin().
class PairStats {
 public:
  using SymbolId = std::uint32_t;

  SymbolId intern(const std::string& name) {
    auto [it, inserted] = ids_.try_emplace(name, static_cast<SymbolId>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }

  const std::string& name(SymbolId id) const { return names_[id]; }

  void add(SymbolId left, SymbolId right, std::int64_t delta, std::uint32_t word) {
    const auto key = pack(left, right);
    auto& count = counts_[key];
    if (count > 0) queue_.erase(Entry{count, left, right});
    count += delta;
    if (count > 0) queue_.insert(Entry{count, left, right});
    if (delta > 0) index_[key].push_back(word);
  }

  bool empty() const { return queue_.empty(); }

  struct Entry {
    std::int64_t count;
    SymbolId left;
    SymbolId right;
  };

  Entry best() const { return *queue_.begin(); }

  std::vector<std::uint32_t> take_words(SymbolId left, SymbolId right) {
    auto it = index_.find(pack(left, right));
    if (it == index_.end()) return {};
    auto words = std::move(it->second);
    index_.erase(it);
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    return words;
  }

 private:
  static std::uint64_t pack(SymbolId left, SymbolId right) {
    return (static_cast<std::uint64_t>(left) << 32) | right;
  }

  struct Order {
    const std::vector<std::string>* names;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.count != b.count) return a.count > b.count;
      const auto& al = (*names)[a.left];
      const auto& bl = (*names)[b.left];
      if (al != bl) return al < bl;
      return (*names)[a.right] < (*names)[b.right];
    }
  };

  std::vector<std::string> names_;
  std::unordered_map<std::string, SymbolId> ids_;
  std::unordered_map<std::uint64_t, std::int64_t> counts_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index_;
  std::set<Entry, Order> queue_{Order{&names_}};
};

}  // namespace

bool ReservedSymbols::contains(std::string_view token) const {
  if (token == "UNK") return true;
  if (token.starts_with("<mtl:") && token.ends_with(">")) return true;
  return !extra_.empty() && extra_.contains(std::string(token));
}

MergeTable learn_bpe(std::span<const TokenSeq> lines, std::size_t num_merges,
                     const ReservedSymbols& reserved) {
  std::unordered_map<std::string, std::int64_t> word_freq;
  for (const auto& line : lines)
    for (const auto& token : line)
      if (!reserved.contains(token)) ++word_freq[token];
  if (word_freq.empty()) throw DataError("cannot learn BPE from an empty corpus");

  // Sorted vocabulary keeps symbol interning order reproducible.
  std::vector<std::pair<std::string, std::int64_t>> vocab(word_freq.begin(), word_freq.end());
  std::sort(vocab.begin(), vocab.end());

  PairStats stats;
  struct Word {
    std::vector<PairStats::SymbolId> symbols;
    std::int64_t freq;
  };
  std::vector<Word> words;
  words.reserve(vocab.size());
  for (const auto& [text, freq] : vocab) {
    Word word{{}, freq};
    for (const auto& s : initial_symbols(text)) word.symbols.push_back(stats.intern(s));
    words.push_back(std::move(word));
  }
  for (std::uint32_t w = 0; w < words.size(); ++w) {
    const auto& syms = words[w].symbols;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i)
      stats.add(syms[i], syms[i + 1], words[w].freq, w);
  }

  MergeTable table;
  while (table.merges.size() < num_merges && !stats.empty()) {
    const auto best = stats.best();
    if (best.count < 2) break;
    const auto left = best.left;
    const auto right = best.right;
    table.merges.push_back({stats.name(left), stats.name(right)});
    const auto merged = stats.intern(stats.name(left) + stats.name(right));

    for (const auto w : stats.take_words(left, right)) {
      auto& word = words[w];
      auto& syms = word.symbols;
      bool present = false;
      for (std::size_t i = 0; i + 1 < syms.size() && !present; ++i)
        present = syms[i] == left && syms[i + 1] == right;
      if (!present) continue;

      for (std::size_t i = 0; i + 1 < syms.size(); ++i)
        stats.add(syms[i], syms[i + 1], -word.freq, w);
      std::vector<PairStats::SymbolId> next;
      next.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size();) {
        if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(syms[i++]);
        }
      }
      syms = std::move(next);
      for (std::size_t i = 0; i + 1 < syms.size(); ++i)
        stats.add(syms[i], syms[i + 1], word.freq, w);
    }
  }
  return table;
}

std::size_t BpeEncoder::PairHash::operator()(
    const std::pair<std::string, std::string>& p) const {
  const auto h = std::hash<std::string>{}(p.first);
  return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

BpeEncoder::BpeEncoder(MergeTable table, ReservedSymbols reserved)
    : table_(std::move(table)), reserved_(std::move(reserved)) {
  rank_.reserve(table_.merges.size());
  for (std::size_t r = 0; r < table_.merges.size(); ++r)
    rank_.try_emplace({table_.merges[r].left, table_.merges[r].right}, r);
}

std::vector<std::string> BpeEncoder::segment(std::string_view word) const {
  if (reserved_.contains(word)) return {std::string(word)};
  auto symbols = initial_symbols(word);
  std::pair<std::string, std::string> key;
  while (symbols.size() > 1) {
    std::size_t best_rank = table_.merges.size();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      key.first = symbols[i];
      key.second = symbols[i + 1];
      if (auto it = rank_.find(key); it != rank_.end() && it->second < best_rank)
        best_rank = it->second;
    }
    if (best_rank == table_.merges.size()) break;
    const auto& [left, right] = table_.merges[best_rank];
    std::vector<std::string> next;
    next.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        next.push_back(symbols[i] + symbols[i + 1]);
        i += 2;
      } else {
        next.push_back(std::move(symbols[i++]));
      }
    }
    symbols = std::move(next);
  }
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) symbols[i] += table_.separator;
  auto& last = symbols.back();
  last.resize(last.size() - kEndOfWord.size());
  return symbols;
}

TokenSeq BpeEncoder::apply(std::span<const std::string> seq) const {
  TokenSeq out;
  out.reserve(seq.size() * 2);
  for (const auto& word : seq)
    for (auto& piece : segment(word)) out.push_back(std::move(piece));
  return out;
}

TokenSeq apply_bpe(std::span<const std::string> seq, const MergeTable& table) {
  return BpeEncoder(table).apply(seq);
}

TokenSeq undo_bpe(std::span<const std::string> seq, std::string_view separator) {
  TokenSeq out;
  std::string pending;
  bool open = false;
  for (const auto& piece : seq) {
    if (ends_with(piece, separator)) {
      pending.append(piece, 0, piece.size() - separator.size());
      open = true;
    } else {
      pending += piece;
      out.push_back(std::move(pending));
      pending.clear();
      open = false;
    }
  }
  if (open) throw DataError("dangling continuation subword at end of sequence");
  return out;
}

void write_merge_table(std::ostream& out, const MergeTable& table) {
  for (const auto& merge : table.merges) out << merge.left << ' ' << merge.right << '\n';
}

MergeTable read_merge_table(std::istream& in) {
  MergeTable table;
  std::set<Merge> seen;
  const auto lines = read_lines(in);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty() || (n == 0 && lines[n].starts_with("#version"))) continue;
    auto fields = split_tokens(lines[n]);
    if (fields.size() != 2)
      throw DataError("merge table line " + std::to_string(n + 1) + ": expected \"LEFT RIGHT\"");
    Merge merge{std::move(fields[0]), std::move(fields[1])};
    if (!seen.insert(merge).second)
      throw DataError("merge table line " + std::to_string(n + 1) + ": duplicate merge");
    table.merges.push_back(std::move(merge));
  }
  return table;
}

MergeTable read_merge_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_merge_table(in);
}

}  // namespace matilda
