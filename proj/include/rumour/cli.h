#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace rumour {

// Everything a pipeline run can be configured with. Empty input paths
// default to the stage file of the same name inside out_dir.
struct RunConfig {
  std::string corpus;
  std::string tweets;
  std::string preprocessed;
  std::string threads;
  std::string queries;
  std::string evidence;
  std::string sentences;
  std::string dataset;
  std::string predictions = "baseline";
  std::string parses;
  std::string triples;
  std::string sentence_triples;
  std::string dictionary;
  std::string stopwords;
  std::string embeddings;
  std::string url_embeddings;
  std::string paragraph_embeddings;
  std::string scorer;
  std::string expansions;
  std::string offline_corpus;

  std::string strategy = "preprocessed";
  std::string backend;
  std::size_t max_results = 10;
  std::size_t passes = 2;
  double rate_limit = 1.0;
  std::size_t min_len = 5;
  std::size_t max_len = 20;
  double penalty = 0.02;
  std::size_t top_k = 5;
  std::string scenario = "rumour+evidence";
  bool no_quota = false;
  bool check_responses = false;
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  std::string out_dir = ".";
};

// key=value lines for every setting except out_dir, in a fixed order.
std::string canonical_config(const RunConfig& cfg);
// FNV-1a 64 of canonical_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Exit codes: 0 success, 1 invalid input or usage, 2 runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rumour
