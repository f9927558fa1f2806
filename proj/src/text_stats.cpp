#include "pvstat/text_stats.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "pvstat/parallel.hpp"

namespace pvstat::text {

extern const char* const kDefaultStopwordsText;  // generated from data/stopwords_en.txt

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const bool numeric = std::all_of(cur.begin(), cur.end(),
                                     [](unsigned char c) { return std::isdigit(c); });
    if (cur.size() >= 2 && !numeric) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (is_word_byte(c))
      cur += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
    else
      flush();
  }
  flush();
  return out;
}

TermFrequencies term_frequencies(std::span<const std::string> notes, const StopWords& stopwords,
                                 unsigned threads) {
  std::vector<std::vector<std::string>> tokens(notes.size());
  parallel_for(notes.size(), threads, [&](std::size_t i) { tokens[i] = tokenize(notes[i]); });
  std::map<std::string, std::size_t, std::less<>> counts;
  for (auto& toks : tokens)
    for (auto& tok : toks)
      if (!stopwords.contains(tok)) ++counts[std::move(tok)];
  TermFrequencies out;
  out.reserve(counts.size());
  for (auto& [term, c] : counts) out.push_back({term, c});
  std::stable_sort(out.begin(), out.end(),
                   [](const TermCount& a, const TermCount& b) { return a.count > b.count; });
  return out;
}

TermFrequencies term_frequencies(std::span<const ingest::EventRecord> events,
                                 const StopWords& stopwords, unsigned threads) {
  std::vector<std::string> notes;
  notes.reserve(events.size());
  for (const auto& e : events) notes.push_back(e.notes);
  return term_frequencies(std::span<const std::string>(notes), stopwords, threads);
}

StopWords load_stopwords(std::istream& in) {
  StopWords out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::transform(line.begin(), line.end(), line.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.insert(line);
  }
  return out;
}

const StopWords& default_stopwords() {
  static const StopWords words = [] {
    std::istringstream in(kDefaultStopwordsText);
    return load_stopwords(in);
  }();
  return words;
}

}  // namespace pvstat::text
