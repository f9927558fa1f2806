#pragma once

#include <istream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pvstat/ingest.hpp"

namespace pvstat::text {

using StopWords = std::set<std::string, std::less<>>;

/// Lowercased ASCII-alphanumeric runs (non-ASCII UTF-8 bytes count as word
/// characters). Tokens shorter than two bytes and purely numeric tokens are
/// dropped.
std::vector<std::string> tokenize(std::string_view text);

struct TermCount {
  std::string term;
  std::size_t count = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// Descending by count, then ascending by term.
using TermFrequencies = std::vector<TermCount>;

/// Notes are tokenized in parallel; counts do not depend on `threads`.
TermFrequencies term_frequencies(std::span<const std::string> notes, const StopWords& stopwords,
                                 unsigned threads = 1);
TermFrequencies term_frequencies(std::span<const ingest::EventRecord> events,
                                 const StopWords& stopwords, unsigned threads = 1);

/// One word per line; blank lines and lines starting with '#' are skipped.
StopWords load_stopwords(std::istream& in);
/// The English list shipped in data/stopwords_en.txt, compiled in.
const StopWords& default_stopwords();

}  // namespace pvstat::text
