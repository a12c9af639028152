#include "cotlens/store.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <thread>

#include "cotlens/logging.hpp"

namespace cotlens::store {

using nlohmann::json;

std::string canonical_json(const json& j) {
    // nlohmann objects are key-sorted; a plain dump is the canonical form.
    return j.dump();
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

namespace {

std::string sanitize_id(const std::string& id) {
    std::string out;
    out.reserve(id.size());
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "backend" : out;
}

std::string unique_tmp_suffix() {
    static std::atomic<unsigned long> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    return ".tmp." + std::to_string(tid % 100000) + "." + std::to_string(counter.fetch_add(1));
}

void atomic_write(const fs::path& target, const std::string& bytes) {
    fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + unique_tmp_suffix();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace

fs::path ResponseCache::entry_path(const std::string& backend_id,
                                   const std::string& canonical_request) const {
    const std::string key = sha256_hex(canonical_request);
    return root_ / sanitize_id(backend_id) / key.substr(0, 2) / key;
}

std::optional<json> ResponseCache::lookup(const std::string& backend_id,
                                          const std::string& canonical_request) const {
    const fs::path path = entry_path(backend_id, canonical_request);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(bytes);
    } catch (const json::exception&) {
        const fs::path quarantine = path.string() + ".corrupt";
        std::error_code ec;
        fs::rename(path, quarantine, ec);
        log_warn("quarantined corrupt cache entry " + path.string());
        return std::nullopt;
    }
}

void ResponseCache::put(const std::string& backend_id, const std::string& canonical_request,
                        const json& response) const {
    atomic_write(entry_path(backend_id, canonical_request), response.dump());
}

namespace {

json score_request_json(const std::string& backend_id, const ScoreRequest& req) {
    return json{{"kind", "score"},
                {"backend", backend_id},
                {"prompt", req.prompt},
                {"completions", req.completions}};
}

json generate_request_json(const std::string& backend_id, const std::string& prompt,
                           const GenParams& params) {
    return json{{"kind", "generate"}, {"backend", backend_id}, {"prompt", prompt},
                {"params", params}};
}

json nli_request_json(const std::string& backend_id, const NliPair& pair) {
    return json{{"kind", "nli"},
                {"backend", backend_id},
                {"premise", pair.premise},
                {"hypothesis", pair.hypothesis}};
}

}  // namespace

std::vector<ScoredCompletion> CachingScoringBackend::score(const ScoreRequest& req) {
    const std::string key = canonical_json(score_request_json(identity(), req));
    if (auto hit = cache_.lookup(identity(), key)) {
        std::vector<ScoredCompletion> out;
        for (const auto& item : *hit)
            out.push_back(ScoredCompletion::from_tokens(item.get<std::vector<double>>()));
        return out;
    }
    const auto live = inner_.score(req);
    json entry = json::array();
    for (const auto& sc : live) entry.push_back(sc.token_logprobs);
    cache_.put(identity(), key, entry);
    return live;
}

GenerationResult CachingGenerationBackend::generate(const std::string& prompt,
                                                    const GenParams& params) {
    const std::string key = canonical_json(generate_request_json(identity(), prompt, params));
    if (auto hit = cache_.lookup(identity(), key)) {
        GenerationResult out;
        hit->at("texts").get_to(out.texts);
        out.truncated.assign(out.texts.size(), false);
        const auto flags = hit->at("truncated").get<std::vector<bool>>();
        for (std::size_t i = 0; i < flags.size() && i < out.truncated.size(); ++i)
            out.truncated[i] = flags[i];
        return out;
    }
    const GenerationResult live = inner_.generate(prompt, params);
    std::vector<bool> flags(live.truncated.begin(), live.truncated.end());
    cache_.put(identity(), key, json{{"texts", live.texts}, {"truncated", flags}});
    return live;
}

std::vector<EntailmentScores> CachingNliBackend::entail(std::span<const NliPair> pairs) {
    // Cached per pair so replays hit regardless of how requests were batched.
    std::vector<EntailmentScores> out(pairs.size());
    std::vector<std::size_t> misses;
    std::vector<std::string> keys(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        keys[i] = canonical_json(nli_request_json(identity(), pairs[i]));
        if (auto hit = cache_.lookup(identity(), keys[i])) {
            out[i] = EntailmentScores{hit->at("entail").get<double>(),
                                      hit->at("neutral").get<double>(),
                                      hit->at("contradict").get<double>()};
        } else {
            misses.push_back(i);
        }
    }
    if (!misses.empty()) {
        std::vector<NliPair> missing;
        missing.reserve(misses.size());
        for (std::size_t i : misses) missing.push_back(pairs[i]);
        const auto live = inner_.entail(missing);
        if (live.size() != missing.size()) throw BackendError("NLI backend returned wrong arity");
        for (std::size_t m = 0; m < misses.size(); ++m) {
            out[misses[m]] = live[m];
            cache_.put(identity(), keys[misses[m]],
                       json{{"entail", live[m].entail},
                            {"neutral", live[m].neutral},
                            {"contradict", live[m].contradict}});
        }
    }
    return out;
}

JsonlWriter::JsonlWriter(fs::path file) : file_(std::move(file)) {
    fs::create_directories(file_.parent_path());
    if (fs::exists(file_) && fs::file_size(file_) > 0) {
        // Crash recovery: drop a trailing line that never got its newline.
        std::ifstream in(file_, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        if (!bytes.empty() && bytes.back() != '\n') {
            const auto last_nl = bytes.find_last_of('\n');
            const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
            log_warn("dropping partial trailing line in " + file_.string());
            fs::resize_file(file_, keep);
        }
    }
    out_.open(file_, std::ios::app);
    if (!out_) throw std::runtime_error("cannot open " + file_.string());
}

void JsonlWriter::append(const json& row) {
    out_ << row.dump() << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write failed on " + file_.string());
    ++appended_;
}

std::vector<json> read_jsonl(const fs::path& file) {
    std::vector<json> rows;
    std::ifstream in(file);
    if (!in) return rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(json::parse(line));
    }
    return rows;
}

RunDir RunDir::open(const fs::path& runs_root, const std::string& run_id) {
    RunDir run{runs_root / run_id};
    fs::create_directories(run.root);
    fs::create_directories(run.reports());
    return run;
}

void RunDir::write_manifest(const json& manifest) const {
    atomic_write(this->manifest(), manifest.dump(2) + "\n");
}

std::optional<json> RunDir::read_manifest() const {
    std::ifstream in(manifest());
    if (!in) return std::nullopt;
    json j;
    in >> j;
    return j;
}

std::size_t append_run_records(const RunDir& run, const std::vector<MetricRecord>& records) {
    JsonlWriter writer(run.records());
    for (const auto& rec : records) writer.append(rec);
    return writer.appended();
}

}  // namespace cotlens::store
