#include "cotlens/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cotlens::dataset {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool single_token(const std::string& s) {
    return !s.empty() && s.find_first_of(" \t\r\n") == std::string::npos;
}

}  // namespace

Question parse_question(const json& j) {
    Question q;
    q.id = j.at("id").get<std::string>();
    q.text = j.at("question").get<std::string>();
    for (const auto& cj : j.at("choices")) {
        Choice c = cj.get<Choice>();
        c.label = lower(trim(c.label));
        q.choices.push_back(std::move(c));
    }
    const std::string gold_label = lower(trim(j.at("answer_label").get<std::string>()));
    q.gold_index = -1;
    for (std::size_t i = 0; i < q.choices.size(); ++i) {
        if (q.choices[i].label == gold_label) {
            q.gold_index = static_cast<int>(i);
            break;
        }
    }
    if (j.contains("facts") && !j.at("facts").is_null()) {
        q.facts = j.at("facts").get<std::vector<std::string>>();
    }
    return q;
}

std::vector<Question> parse_dataset(std::istream& in) {
    std::vector<Question> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        json j;
        try {
            j = json::parse(t);
        } catch (const json::exception& e) {
            throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                     ": invalid JSON: " + e.what());
        }
        try {
            out.push_back(parse_question(j));
        } catch (const json::exception& e) {
            throw std::runtime_error("dataset line " + std::to_string(line_no) +
                                     ": missing or malformed field: " + e.what());
        }
    }
    return out;
}

std::vector<Question> load_dataset(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open dataset file: " + file.string());
    return parse_dataset(in);
}

json serialize_question(const Question& q) {
    json j;
    j["id"] = q.id;
    j["question"] = q.text;
    j["choices"] = q.choices;
    j["answer_label"] =
        (q.gold_index >= 0 && q.gold_index < q.num_choices()) ? q.choices[q.gold_index].label : "";
    if (q.facts) j["facts"] = *q.facts;
    return j;
}

void save_dataset(const std::vector<Question>& qs, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write dataset file: " + file.string());
    for (const auto& q : qs) out << serialize_question(q).dump() << '\n';
}

ValidationReport validate_dataset(const std::vector<Question>& records) {
    ValidationReport report;
    std::set<std::string> seen_ids;
    for (std::size_t pos = 0; pos < records.size(); ++pos) {
        const Question& q = records[pos];
        ValidationEntry entry;
        entry.id = q.id;
        entry.position = pos;

        if (q.id.empty()) entry.reasons.push_back("empty id");
        if (!seen_ids.insert(q.id).second) entry.reasons.push_back("duplicate id");
        if (q.text.empty()) entry.reasons.push_back("empty question text");
        if (q.num_choices() < 2) entry.reasons.push_back("fewer than 2 choices");

        std::set<std::string> labels;
        for (const auto& c : q.choices) {
            if (c.label.empty()) entry.reasons.push_back("empty choice label");
            else if (!single_token(c.label)) entry.reasons.push_back("label is not a single token");
            if (c.text.empty()) entry.reasons.push_back("empty choice text");
            if (!labels.insert(c.label).second)
                entry.reasons.push_back("duplicate label \"" + c.label + "\"");
        }
        if (q.gold_index < 0 || q.gold_index >= q.num_choices())
            entry.reasons.push_back("gold index out of range");
        if (q.facts) {
            if (q.facts->empty()) entry.reasons.push_back("facts present but empty");
            for (const auto& f : *q.facts)
                if (trim(f).empty()) entry.reasons.push_back("empty fact");
        }

        entry.ok = entry.reasons.empty();
        entry.ok ? ++report.n_pass : ++report.n_fail;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace cotlens::dataset
