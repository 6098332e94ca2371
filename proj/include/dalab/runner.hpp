#pragma once

// Scenario files, content-addressed caching and task orchestration behind
// the dalab command line.

#include "dalab/similarity.hpp"
#include "dalab/variety.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dalab::runner {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultDimCap = 20000;
inline constexpr const char* kCacheEnv = "DALAB_CACHE_DIR";

/// dims, hilbert, angles, closedness, essnorm, similarity (dependency order).
const std::vector<std::string>& taskOrder();

using Subject = std::variant<std::monostate, IdealSpec, VarietySpec>;  // monostate only before parsing

struct SimilarityInput {
    Matrix matrix;
    VarietySpec target;
};

struct Scenario {
    std::string name;
    int d = 0;
    int maxDegree = 0;
    double tolerance = 1e-9;
    double rankThreshold = 1e-10;
    double intersectionThreshold = 1e-8;
    double subspaceTolerance = 1e-8;  // subspace distances (radical consistency)
    std::uint64_t dimCap = kDefaultDimCap;
    Subject subject;
    std::optional<Subject> companion;
    std::optional<SimilarityInput> similarity;
    std::vector<std::string> tasks;  // expanded, in dependency order
    std::vector<double> pList;
    std::vector<std::pair<int, int>> pairs;
    std::string outDir;
    std::string cacheDir;
    int threads = 1;
    /// Normalized document with defaults applied; the cache keys hash the
    /// parts of it that affect results.
    Json canonical;
};

struct ScenarioOverrides {
    std::optional<int> maxDegree;
    std::optional<std::vector<double>> pList;
    std::optional<std::vector<std::string>> tasks;
    std::optional<int> threads;
};

/// Strict parse: unknown fields, wrong types and violated ranges raise
/// InvalidInput with a JSON path ("$.subject.components[1]: ..."); an
/// oversized H_n raises ScaleGuard.
Scenario parseScenario(const std::filesystem::path& path, const ScenarioOverrides& overrides = {});
Scenario parseScenarioJson(const Json& document, const ScenarioOverrides& overrides = {});

std::string sha256Hex(const std::string& bytes);
/// SHA-256 of the canonical serialization of `description` plus the version.
std::string cacheKey(const Json& description, const std::string& version = kVersion);

class Cache {
public:
    Cache() = default;
    explicit Cache(std::filesystem::path dir, std::ostream* warnings = nullptr);

    bool enabled() const { return !dir_.empty(); }
    /// The stored payload, or nothing when absent or failing verification
    /// (the latter with a warning).
    std::optional<Json> load(const std::string& key, const Json& description) const;
    void store(const std::string& key, const Json& description, const Json& payload) const;
    std::filesystem::path entryPath(const std::string& key) const;

private:
    std::filesystem::path dir_;
    std::ostream* warnings_ = nullptr;
};

enum class Verdict { Pass, Fail, Heuristic };
std::string verdictName(Verdict v);

struct TaskResult {
    std::string task;
    Verdict verdict = Verdict::Pass;
    Json details;
    std::vector<std::pair<std::string, std::string>> files;  // name, CSV contents
    bool fromCache = false;
    double seconds = 0.0;
};

struct RunOptions {
    std::filesystem::path outDir;
    std::optional<std::filesystem::path> cacheDir;
    std::ostream* log = nullptr;
};

struct RunSummary {
    std::vector<TaskResult> tasks;
    Json summary;  // deterministic
    Json runInfo;  // timing and cache statistics
    int cacheHits = 0;
    int cacheMisses = 0;
    int exitCode = 0;
};

/// Runs every task, then writes the CSV tables, summary.json and
/// run_info.json into outDir. A task error propagates (prefixed with the
/// task name) after summary.json has been written with status "incomplete"
/// and no tables.
RunSummary runScenario(const Scenario& scenario, const RunOptions& options);

/// %.17g
std::string formatDouble(double x);

/// 0 pass, 1 violation or numerical failure, 2 invalid input, 3 scale guard.
int exitCodeFor(const std::exception& e);

}  // namespace dalab::runner
