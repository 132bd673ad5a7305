#include "matilda/alignment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "matilda/errors.hpp"
#include "matilda/io.hpp"

namespace matilda {
namespace {

bool parse_index(std::string_view text, std::size_t& value) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

AlignmentSet::AlignmentSet(std::size_t src_len, std::size_t tgt_len, std::vector<Link> links)
    : src_len_(src_len), tgt_len_(tgt_len), links_(std::move(links)) {
  for (const auto& link : links_) {
    if (link.src >= src_len_ || link.tgt >= tgt_len_)
      throw DataError("link " + std::to_string(link.src) + "-" + std::to_string(link.tgt) +
                      " out of range for lengths (" + std::to_string(src_len_) + "," +
                      std::to_string(tgt_len_) + ")");
  }
  std::sort(links_.begin(), links_.end());
  links_.erase(std::unique(links_.begin(), links_.end()), links_.end());
}

AlignmentSet AlignmentSet::transposed() const {
  std::vector<Link> swapped;
  swapped.reserve(links_.size());
  for (const auto& link : links_) swapped.push_back({link.tgt, link.src});
  return AlignmentSet(tgt_len_, src_len_, std::move(swapped));
}

AlignmentSet parse_pharaoh(std::string_view line, std::size_t src_len, std::size_t tgt_len) {
  std::vector<Link> links;
  for (const auto& item : split_tokens(line)) {
    const auto dash = item.find('-');
    Link link;
    if (dash == std::string::npos || !parse_index(std::string_view(item).substr(0, dash), link.src) ||
        !parse_index(std::string_view(item).substr(dash + 1), link.tgt))
      throw DataError("malformed alignment item \"" + item + "\"");
    if (link.src >= src_len || link.tgt >= tgt_len)
      throw DataError("alignment item \"" + item + "\" out of range for lengths (" +
                      std::to_string(src_len) + "," + std::to_string(tgt_len) + ")");
    links.push_back(link);
  }
  return AlignmentSet(src_len, tgt_len, std::move(links));
}

std::string format_pharaoh(const AlignmentSet& alignment) {
  std::string out;
  for (const auto& link : alignment.links()) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(link.src);
    out.push_back('-');
    out += std::to_string(link.tgt);
  }
  return out;
}

AlignmentSet intersect(const AlignmentSet& a_st, const AlignmentSet& a_ts) {
  if (a_st.src_len() != a_ts.src_len() || a_st.tgt_len() != a_ts.tgt_len())
    throw DataError("alignment length mismatch: (" + std::to_string(a_st.src_len()) + "," +
                    std::to_string(a_st.tgt_len()) + ") vs (" + std::to_string(a_ts.src_len()) +
                    "," + std::to_string(a_ts.tgt_len()) + ")");
  std::vector<Link> common;
  std::set_intersection(a_st.links().begin(), a_st.links().end(), a_ts.links().begin(),
                        a_ts.links().end(), std::back_inserter(common));

  std::vector<std::size_t> src_degree(a_st.src_len()), tgt_degree(a_st.tgt_len());
  for (const auto& link : common) {
    ++src_degree[link.src];
    ++tgt_degree[link.tgt];
  }
  std::erase_if(common, [&](const Link& link) {
    return src_degree[link.src] > 1 || tgt_degree[link.tgt] > 1;
  });
  return AlignmentSet(a_st.src_len(), a_st.tgt_len(), std::move(common));
}

std::vector<std::optional<std::size_t>> target_to_source(const AlignmentSet& a_st) {
  std::vector<std::optional<std::size_t>> map(a_st.tgt_len());
  for (const auto& link : a_st.links()) {
    if (map[link.tgt])
      throw DataError("target index " + std::to_string(link.tgt) +
                      " has more than one link; expected a source-to-target alignment");
    map[link.tgt] = link.src;
  }
  return map;
}

BilingualLexicon::BilingualLexicon(std::vector<LexiconEntry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const LexiconEntry& a, const LexiconEntry& b) { return a.source < b.source; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].count == 0)
      throw DataError("lexicon entry \"" + entries_[i].source + "\" has count 0");
    if (i > 0 && entries_[i].source == entries_[i - 1].source)
      throw DataError("duplicate lexicon source word \"" + entries_[i].source + "\"");
  }
}

const LexiconEntry* BilingualLexicon::find(std::string_view source) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), source,
      [](const LexiconEntry& e, std::string_view key) { return e.source < key; });
  return it != entries_.end() && it->source == source ? &*it : nullptr;
}

BilingualLexicon build_lexicon(std::span<const ParallelPair> pairs,
                               const AlignmentTable& one_to_one) {
  std::unordered_map<std::size_t, const ParallelPair*> by_id;
  by_id.reserve(pairs.size());
  for (const auto& pair : pairs) by_id.emplace(pair.pair_id, &pair);

  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& [pair_id, alignment] : one_to_one) {
    const auto it = by_id.find(pair_id);
    if (it == by_id.end())
      throw DataError("alignment given for unknown pair_id " + std::to_string(pair_id));
    const auto& pair = *it->second;
    if (alignment.src_len() != pair.src.size() || alignment.tgt_len() != pair.tgt.size())
      throw DataError("alignment lengths disagree with pair_id " + std::to_string(pair_id));
    for (const auto& link : alignment.links()) ++counts[pair.src[link.src]][pair.tgt[link.tgt]];
  }

  std::vector<LexiconEntry> entries;
  entries.reserve(counts.size());
  for (auto& [source, targets] : counts) {
    // std::map iterates targets in byte order, so the first maximum wins ties.
    auto best = targets.begin();
    for (auto it = targets.begin(); it != targets.end(); ++it)
      if (it->second > best->second) best = it;
    entries.push_back({source, best->first, best->second});
  }
  return BilingualLexicon(std::move(entries));
}

void write_lexicon(std::ostream& out, const BilingualLexicon& lexicon) {
  for (const auto& e : lexicon.entries())
    out << e.source << '\t' << e.target << '\t' << e.count << '\n';
}

BilingualLexicon read_lexicon(std::istream& in) {
  std::vector<LexiconEntry> entries;
  const auto lines = read_lines(in);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const std::string_view line = lines[n];
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
    LexiconEntry entry;
    if (tab2 == std::string_view::npos || tab1 == 0 || tab2 == tab1 + 1 ||
        !parse_index(line.substr(tab2 + 1), entry.count))
      throw DataError("lexicon line " + std::to_string(n + 1) +
                      ": expected \"source<TAB>target<TAB>count\"");
    entry.source = line.substr(0, tab1);
    entry.target = line.substr(tab1 + 1, tab2 - tab1 - 1);
    entries.push_back(std::move(entry));
  }
  return BilingualLexicon(std::move(entries));
}

BilingualLexicon read_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_lexicon(in);
}

AlignmentTable read_alignment_file(const std::filesystem::path& path,
                                   std::span<const ParallelPair> pairs,
                                   bool target_to_source_file) {
  const auto lines = read_lines(path);
  AlignmentTable table;
  for (const auto& pair : pairs) {
    if (pair.pair_id >= lines.size())
      throw DataError(path.string() + ": no alignment line for pair_id " +
                      std::to_string(pair.pair_id) + " (file has " +
                      std::to_string(lines.size()) + " lines)");
    try {
      auto set = target_to_source_file
                     ? parse_pharaoh(lines[pair.pair_id], pair.tgt.size(), pair.src.size()).transposed()
                     : parse_pharaoh(lines[pair.pair_id], pair.src.size(), pair.tgt.size());
      table.emplace(pair.pair_id, std::move(set));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(pair.pair_id + 1) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace matilda
