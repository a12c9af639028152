#pragma once

// Shared helpers for the test suites: independent brute-force oracles
// (deliberately written with plain loops, separate from the library code
// paths they check), counting backend wrappers, and scratch-directory
// management.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "cotlens/backends.hpp"
#include "cotlens/eigen_types.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("cotlens_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

  private:
    fs::path path_;
};

// ---- analytic oracles -------------------------------------------------

inline std::vector<double> oracle_softmax(const std::vector<double>& x) {
    long double m = x[0];
    for (double v : x)
        if (v > m) m = v;
    long double z = 0.0L;
    std::vector<long double> e(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        e[i] = std::exp(static_cast<long double>(x[i]) - m);
        z += e[i];
    }
    std::vector<double> p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) p[i] = static_cast<double>(e[i] / z);
    return p;
}

inline double oracle_entropy(const std::vector<double>& p) {
    long double h = 0.0L;
    for (double v : p)
        if (v > 0.0) h -= static_cast<long double>(v) * std::log(static_cast<long double>(v));
    return static_cast<double>(h / std::log(static_cast<long double>(p.size())));
}

inline double oracle_lse(const std::vector<double>& x) {
    long double m = x[0];
    for (double v : x)
        if (v > m) m = v;
    long double s = 0.0L;
    for (double v : x) s += std::exp(static_cast<long double>(v) - m);
    return static_cast<double>(m + std::log(s));
}

inline double oracle_difficulty(const std::vector<double>& x, std::size_t gold) {
    long double best = -1e300L;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (i != gold && x[i] > best) best = x[i];
    return static_cast<double>(best - static_cast<long double>(x[gold]));
}

inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    long double sx = 0.0L, sy = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / n, my = sy / n;
    long double cov = 0.0L, vx = 0.0L, vy = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(cov / std::sqrt(vx * vy));
}

// O(n^2) average ranks, independent of the library's sort-based version.
inline std::vector<double> oracle_ranks(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t less = 0, equal = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j] < x[i]) ++less;
            if (x[j] == x[i]) ++equal;
        }
        r[i] = static_cast<double>(less) + 0.5 * static_cast<double>(equal - 1) + 1.0;
    }
    return r;
}

inline double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return oracle_pearson(oracle_ranks(x), oracle_ranks(y));
}

// ---- counting backend wrappers ----------------------------------------

class CountingScoring : public cotlens::ScoringBackend {
  public:
    explicit CountingScoring(cotlens::ScoringBackend& inner) : inner_(inner) {}
    std::string identity() const override { return inner_.identity(); }
    std::vector<cotlens::ScoredCompletion> score(const cotlens::ScoreRequest& req) override {
        ++calls;
        return inner_.score(req);
    }
    cotlens::ScoringBackend& inner_;
    std::atomic<long> calls{0};
};

class CountingGeneration : public cotlens::GenerationBackend {
  public:
    explicit CountingGeneration(cotlens::GenerationBackend& inner) : inner_(inner) {}
    std::string identity() const override { return inner_.identity(); }
    cotlens::GenerationResult generate(const std::string& prompt,
                                       const cotlens::GenParams& params) override {
        ++calls;
        return inner_.generate(prompt, params);
    }
    cotlens::GenerationBackend& inner_;
    std::atomic<long> calls{0};
};

class CountingNli : public cotlens::NliBackend {
  public:
    explicit CountingNli(cotlens::NliBackend& inner) : inner_(inner) {}
    std::string identity() const override { return inner_.identity(); }
    std::vector<cotlens::EntailmentScores> entail(std::span<const cotlens::NliPair> pairs) override {
        ++calls;
        return inner_.entail(pairs);
    }
    cotlens::NliBackend& inner_;
    std::atomic<long> calls{0};
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace testsupport
