#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cotlens/backends.hpp"

namespace cotlens::store {

namespace fs = std::filesystem;

// Canonical serialization used for cache keys: sorted object keys, no
// insignificant whitespace, UTF-8.
std::string canonical_json(const nlohmann::json& j);
std::string sha256_hex(std::string_view bytes);

/// Content-addressed cache of backend responses.
/// Layout: <root>/<backend_id>/<2-hex-prefix>/<sha256-of-canonical-request>.
class ResponseCache {
  public:
    explicit ResponseCache(fs::path root) : root_(std::move(root)) {}

    // Parsed response on hit; corrupt entries are quarantined and treated as
    // misses.
    std::optional<nlohmann::json> lookup(const std::string& backend_id,
                                         const std::string& canonical_request) const;
    void put(const std::string& backend_id, const std::string& canonical_request,
             const nlohmann::json& response) const;

    fs::path entry_path(const std::string& backend_id, const std::string& canonical_request) const;
    const fs::path& root() const { return root_; }

  private:
    fs::path root_;
};

/// Cache wrappers. The key covers the request kind, backend identity, and the
/// full request payload, so two backends or two parameter sets never share an
/// entry. Cached and live responses are byte-identical.
class CachingScoringBackend : public ScoringBackend {
  public:
    CachingScoringBackend(ScoringBackend& inner, const ResponseCache& cache)
        : inner_(inner), cache_(cache) {}
    std::string identity() const override { return inner_.identity(); }
    std::vector<ScoredCompletion> score(const ScoreRequest& req) override;

  private:
    ScoringBackend& inner_;
    const ResponseCache& cache_;
};

class CachingGenerationBackend : public GenerationBackend {
  public:
    CachingGenerationBackend(GenerationBackend& inner, const ResponseCache& cache)
        : inner_(inner), cache_(cache) {}
    std::string identity() const override { return inner_.identity(); }
    GenerationResult generate(const std::string& prompt, const GenParams& params) override;

  private:
    GenerationBackend& inner_;
    const ResponseCache& cache_;
};

class CachingNliBackend : public NliBackend {
  public:
    CachingNliBackend(NliBackend& inner, const ResponseCache& cache)
        : inner_(inner), cache_(cache) {}
    std::string identity() const override { return inner_.identity(); }
    std::vector<EntailmentScores> entail(std::span<const NliPair> pairs) override;

  private:
    NliBackend& inner_;
    const ResponseCache& cache_;
};

/// Append-only JSONL writer. Opening an existing file drops a trailing
/// partial line (crash recovery) before appending.
class JsonlWriter {
  public:
    explicit JsonlWriter(fs::path file);

    void append(const nlohmann::json& row);
    std::size_t appended() const { return appended_; }
    const fs::path& path() const { return file_; }

  private:
    fs::path file_;
    std::ofstream out_;
    std::size_t appended_ = 0;
};

std::vector<nlohmann::json> read_jsonl(const fs::path& file);

/// Paths of one experiment run: runs/<run_id>/manifest.json, stage JSONL
/// files, and reports/.
struct RunDir {
    fs::path root;

    static RunDir open(const fs::path& runs_root, const std::string& run_id);

    fs::path manifest() const { return root / "manifest.json"; }
    fs::path beliefs() const { return root / "beliefs.jsonl"; }
    fs::path rationales() const { return root / "rationales.jsonl"; }
    fs::path judgments() const { return root / "judgments.jsonl"; }
    fs::path records() const { return root / "records.jsonl"; }
    fs::path failures() const { return root / "failures.jsonl"; }
    fs::path reports() const { return root / "reports"; }

    void write_manifest(const nlohmann::json& manifest) const;
    std::optional<nlohmann::json> read_manifest() const;
};

std::size_t append_run_records(const RunDir& run, const std::vector<MetricRecord>& records);

}  // namespace cotlens::store
