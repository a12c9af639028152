#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cotlens/backends.hpp"

namespace cotlens {

/// Scripted responses for the deterministic test backends. Synthetic
/// populations are generated together with these tables so the full pipeline
/// can run without any model server. Lookups are exact; an unscripted request
/// is a BackendError, which catches prompt drift between the generator and
/// the pipeline.
struct MockTables {
    struct GenScript {
        std::vector<std::string> texts;
        std::vector<bool> truncated;
    };

    // key: prompt + '\x1f' + completion
    std::unordered_map<std::string, std::vector<double>> score;
    std::unordered_map<std::string, GenScript> generate;
    // key: premise + '\x1f' + hypothesis
    std::unordered_map<std::string, std::array<double, 3>> nli;
    // judge id -> prompt -> reply text
    std::map<std::string, std::unordered_map<std::string, std::string>> judges;

    static std::string key(std::string_view a, std::string_view b);

    nlohmann::json to_json() const;
    static MockTables from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& file) const;
    static std::shared_ptr<MockTables> load(const std::filesystem::path& file);
};

class MockScoringBackend : public ScoringBackend {
  public:
    MockScoringBackend(std::string id, std::shared_ptr<const MockTables> tables)
        : id_(std::move(id)), tables_(std::move(tables)) {}

    std::string identity() const override { return id_; }
    std::vector<ScoredCompletion> score(const ScoreRequest& req) override;

  private:
    std::string id_;
    std::shared_ptr<const MockTables> tables_;
};

class MockGenerationBackend : public GenerationBackend {
  public:
    MockGenerationBackend(std::string id, std::shared_ptr<const MockTables> tables)
        : id_(std::move(id)), tables_(std::move(tables)) {}

    std::string identity() const override { return id_; }
    GenerationResult generate(const std::string& prompt, const GenParams& params) override;

  private:
    std::string id_;
    std::shared_ptr<const MockTables> tables_;
};

/// Serves one judge's scripted replies from tables->judges[judge_id].
class MockJudgeBackend : public GenerationBackend {
  public:
    MockJudgeBackend(std::string judge_id, std::shared_ptr<const MockTables> tables)
        : id_(std::move(judge_id)), tables_(std::move(tables)) {}

    std::string identity() const override { return id_; }
    GenerationResult generate(const std::string& prompt, const GenParams& params) override;

  private:
    std::string id_;
    std::shared_ptr<const MockTables> tables_;
};

class MockNliBackend : public NliBackend {
  public:
    MockNliBackend(std::string id, std::shared_ptr<const MockTables> tables)
        : id_(std::move(id)), tables_(std::move(tables)) {}

    std::string identity() const override { return id_; }
    std::vector<EntailmentScores> entail(std::span<const NliPair> pairs) override;

  private:
    std::string id_;
    std::shared_ptr<const MockTables> tables_;
};

}  // namespace cotlens
