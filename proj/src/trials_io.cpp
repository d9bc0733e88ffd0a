#include <sstream>

#include <nlohmann/json.hpp>

#include "telextiles/errors.hpp"
#include "telextiles/evaluation.hpp"

namespace telextiles {

std::string write_trials_jsonl(const std::vector<SimilarityTrial>& trials) {
  std::string out;
  for (const auto& t : trials) {
    nlohmann::json line = {
        {"query_sample_id", t.query_sample_id}, {"human_top5", t.human_top5}, {"model_ranking", t.model_ranking}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<SimilarityTrial> read_trials_jsonl(const std::string& text) {
  std::vector<SimilarityTrial> trials;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SimilarityTrial t;
    try {
      const auto j = nlohmann::json::parse(line);
      j.at("query_sample_id").get_to(t.query_sample_id);
      j.at("human_top5").get_to(t.human_top5);
      j.at("model_ranking").get_to(t.model_ranking);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("trials line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      t.validate();
    } catch (const std::exception& e) {
      throw ValidationError("trials line " + std::to_string(line_no) + ": " + e.what());
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

}  // namespace telextiles
