#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cotlens/types.hpp"

namespace cotlens::dataset {

/// Validation outcome for one dataset record.
struct ValidationEntry {
    std::string id;
    std::size_t position = 0;  // 0-based record position in the input
    bool ok = true;
    std::vector<std::string> reasons;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    std::size_t n_pass = 0;
    std::size_t n_fail = 0;

    bool ok() const { return n_fail == 0; }
};

// One JSON object per line: {"id", "question", "choices":[{"label","text"}...],
// "answer_label", "facts":[...] optional}. Labels are lowercased at ingestion;
// an answer_label that matches no choice leaves gold_index = -1 for validation
// to flag.
Question parse_question(const nlohmann::json& j);
std::vector<Question> parse_dataset(std::istream& in);
std::vector<Question> load_dataset(const std::filesystem::path& file);

nlohmann::json serialize_question(const Question& q);
void save_dataset(const std::vector<Question>& qs, const std::filesystem::path& file);

ValidationReport validate_dataset(const std::vector<Question>& records);

}  // namespace cotlens::dataset
