#pragma once

#include <map>
#include <string>
#include <vector>

namespace bivicap {

/// Lowercases, splits on whitespace, strips leading/trailing ASCII
/// punctuation per token, drops empties.
std::vector<std::string> tokenize(const std::string& text);

struct CorpusEntry {
  std::string id;
  std::vector<std::string> hypothesis;
  std::vector<std::vector<std::string>> references;  // nonempty
};

struct TokenizedCorpus {
  std::vector<CorpusEntry> entries;
};

struct BleuOptions {
  int max_n = 4;
  bool smooth = false;  // add-one smoothing on orders >= 2, for tiny corpora
};

/// Corpus-level BLEU on the 0–100 scale: clipped n-gram precisions pooled
/// over the corpus, uniform-weight geometric mean, brevity penalty from the
/// closest-reference length (ties to the shorter). Orders that never occur
/// (every hypothesis shorter than n) are dropped from the mean so a perfect
/// short corpus still scores 100.
double bleu(const TokenizedCorpus& corpus, const BleuOptions& opts = {});

/// Consensus tf-idf n-gram cosine score, mean over n = 1..max_n and over
/// references, scaled so an exact match with informative n-grams scores 100.
/// Requires >= 2 entries (idf needs a document population).
double cider(const TokenizedCorpus& corpus, int max_n = 4);

/// Reads `id TAB text` files (refs may repeat ids), checks the id sets match,
/// and computes the requested metrics ("bleu", "cider").
std::map<std::string, double> evaluate_files(const std::string& hyp_path,
                                             const std::string& ref_path,
                                             const std::vector<std::string>& metrics);

std::string format_metric_report(const std::map<std::string, double>& scores);

}  // namespace bivicap
