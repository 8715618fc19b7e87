#include "bivicap/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace bivicap {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string word;
  while (in >> word) {
    std::size_t begin = 0, end = word.size();
    auto is_ascii_punct = [](unsigned char ch) {
      return ch < 0x80 && std::ispunct(ch);
    };
    while (begin < end && is_ascii_punct(word[begin])) ++begin;
    while (end > begin && is_ascii_punct(word[end - 1])) --end;
    if (begin == end) continue;
    std::string tok = word.substr(begin, end - begin);
    for (char& ch : tok)
      ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    out.push_back(std::move(tok));
  }
  return out;
}

namespace {

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

// n-grams joined with '\x1f' so multi-word grams can't collide
NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

void require_nonempty(const TokenizedCorpus& corpus, const char* op) {
  if (corpus.entries.empty())
    throw std::invalid_argument(std::string(op) + ": empty corpus");
  for (const auto& e : corpus.entries)
    if (e.references.empty())
      throw std::invalid_argument(std::string(op) + ": entry '" + e.id +
                                  "' has no references");
}

}  // namespace

double bleu(const TokenizedCorpus& corpus, const BleuOptions& opts) {
  require_nonempty(corpus, "bleu");
  if (opts.max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");

  std::vector<std::int64_t> matches(opts.max_n, 0), totals(opts.max_n, 0);
  std::int64_t hyp_len_sum = 0, ref_len_sum = 0;

  for (const auto& entry : corpus.entries) {
    const auto& hyp = entry.hypothesis;
    hyp_len_sum += static_cast<std::int64_t>(hyp.size());

    // closest reference length, ties to the shorter
    std::int64_t best_ref = static_cast<std::int64_t>(entry.references[0].size());
    for (const auto& ref : entry.references) {
      const auto len = static_cast<std::int64_t>(ref.size());
      const auto hlen = static_cast<std::int64_t>(hyp.size());
      if (std::llabs(len - hlen) < std::llabs(best_ref - hlen) ||
          (std::llabs(len - hlen) == std::llabs(best_ref - hlen) && len < best_ref))
        best_ref = len;
    }
    ref_len_sum += best_ref;

    for (int n = 1; n <= opts.max_n; ++n) {
      NgramCounts hyp_counts = count_ngrams(hyp, n);
      NgramCounts max_ref_counts;
      for (const auto& ref : entry.references)
        for (const auto& [gram, cnt] : count_ngrams(ref, n))
          max_ref_counts[gram] = std::max(max_ref_counts[gram], cnt);
      std::int64_t clipped = 0, total = 0;
      for (const auto& [gram, cnt] : hyp_counts) {
        total += cnt;
        auto it = max_ref_counts.find(gram);
        if (it != max_ref_counts.end()) clipped += std::min(cnt, it->second);
      }
      matches[n - 1] += clipped;
      totals[n - 1] += total;
    }
  }

  if (hyp_len_sum == 0) return 0.0;

  double log_precision_sum = 0.0;
  int effective_orders = 0;
  for (int n = 1; n <= opts.max_n; ++n) {
    double num = static_cast<double>(matches[n - 1]);
    double den = static_cast<double>(totals[n - 1]);
    if (opts.smooth && n >= 2) {
      num += 1.0;
      den += 1.0;
    }
    if (den == 0.0) continue;  // no hypothesis long enough for this order
    if (num == 0.0) return 0.0;
    log_precision_sum += std::log(num / den);
    ++effective_orders;
  }
  if (effective_orders == 0) return 0.0;

  const double brevity = hyp_len_sum < ref_len_sum
                             ? std::exp(1.0 - static_cast<double>(ref_len_sum) /
                                                  static_cast<double>(hyp_len_sum))
                             : 1.0;
  return 100.0 * brevity * std::exp(log_precision_sum / effective_orders);
}

double cider(const TokenizedCorpus& corpus, int max_n) {
  require_nonempty(corpus, "cider");
  if (corpus.entries.size() < 2)
    throw std::invalid_argument("cider: needs >= 2 entries for document "
                                "frequencies, got " +
                                std::to_string(corpus.entries.size()));
  if (max_n < 1) throw std::invalid_argument("cider: max_n must be >= 1");

  const double log_population = std::log(static_cast<double>(corpus.entries.size()));

  double corpus_score = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    // document frequency: an n-gram counts once per entry whose reference set contains it
    NgramCounts doc_freq;
    for (const auto& entry : corpus.entries) {
      std::set<std::string> seen;
      for (const auto& ref : entry.references)
        for (const auto& [gram, cnt] : count_ngrams(ref, n)) seen.insert(gram);
      for (const auto& gram : seen) ++doc_freq[gram];
    }
    auto idf = [&](const std::string& gram) {
      auto it = doc_freq.find(gram);
      const double df = it == doc_freq.end() ? 1.0
                                             : std::max<double>(1.0, it->second);
      return log_population - std::log(df);
    };
    auto tfidf = [&](const std::vector<std::string>& tokens) {
      std::unordered_map<std::string, double> vec;
      for (const auto& [gram, cnt] : count_ngrams(tokens, n))
        vec[gram] = static_cast<double>(cnt) * idf(gram);
      return vec;
    };
    auto norm = [](const std::unordered_map<std::string, double>& v) {
      double s = 0.0;
      for (const auto& [gram, x] : v) s += x * x;
      return std::sqrt(s);
    };

    double order_score = 0.0;
    for (const auto& entry : corpus.entries) {
      auto hyp_vec = tfidf(entry.hypothesis);
      const double hyp_norm = norm(hyp_vec);
      double entry_score = 0.0;
      for (const auto& ref : entry.references) {
        auto ref_vec = tfidf(ref);
        const double ref_norm = norm(ref_vec);
        if (hyp_norm == 0.0 || ref_norm == 0.0) continue;  // similarity 0
        double dot = 0.0;
        for (const auto& [gram, x] : hyp_vec) {
          auto it = ref_vec.find(gram);
          if (it != ref_vec.end()) dot += x * it->second;
        }
        entry_score += dot / (hyp_norm * ref_norm);
      }
      order_score += entry_score / static_cast<double>(entry.references.size());
    }
    corpus_score += order_score / static_cast<double>(corpus.entries.size());
  }
  // mean cosine in [0,1] presented on the 0–100 scale
  return 100.0 * corpus_score / static_cast<double>(max_n);
}

namespace {

std::vector<std::pair<std::string, std::string>> read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open caption file: " + path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed line (no TAB) in " + path + ": " + line);
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

}  // namespace

std::map<std::string, double> evaluate_files(const std::string& hyp_path,
                                             const std::string& ref_path,
                                             const std::vector<std::string>& metrics) {
  auto hyp_rows = read_tsv(hyp_path);
  auto ref_rows = read_tsv(ref_path);

  std::map<std::string, std::vector<std::string>> hyps;
  for (auto& [id, text] : hyp_rows) {
    if (hyps.count(id))
      throw std::runtime_error("duplicate hypothesis for id '" + id + "' in " +
                               hyp_path);
    hyps[id] = tokenize(text);
  }
  std::map<std::string, std::vector<std::vector<std::string>>> refs;
  for (auto& [id, text] : ref_rows) refs[id].push_back(tokenize(text));

  std::vector<std::string> missing_refs, missing_hyps;
  for (const auto& [id, _] : hyps)
    if (!refs.count(id)) missing_refs.push_back(id);
  for (const auto& [id, _] : refs)
    if (!hyps.count(id)) missing_hyps.push_back(id);
  if (!missing_refs.empty() || !missing_hyps.empty()) {
    std::string msg = "id sets differ:";
    for (const auto& id : missing_refs) msg += " '" + id + "' lacks references;";
    for (const auto& id : missing_hyps) msg += " '" + id + "' lacks a hypothesis;";
    throw std::runtime_error(msg);
  }

  TokenizedCorpus corpus;
  for (auto& [id, hyp] : hyps)
    corpus.entries.push_back({id, hyp, refs.at(id)});

  std::map<std::string, double> out;
  for (const auto& metric : metrics) {
    if (metric == "bleu")
      out["bleu"] = bleu(corpus);
    else if (metric == "cider")
      out["cider"] = cider(corpus);
    else
      throw std::invalid_argument("unknown metric '" + metric +
                                  "' (valid: bleu, cider)");
  }
  return out;
}

std::string format_metric_report(const std::map<std::string, double>& scores) {
  std::ostringstream out;
  for (const auto& [name, score] : scores) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s\t%.2f\n", name.c_str(), score);
    out << buf;
  }
  return out.str();
}

}  // namespace bivicap
