#include "dalab/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace dalab;
using namespace dalab::runner;

namespace {

struct Options {
    std::string scenario;
    std::string out;
    std::string cache;
    std::optional<int> maxDegree;
    std::vector<double> p;
    std::optional<int> threads;
    bool quiet = false;
};

void addCommon(CLI::App* cmd, Options& o) {
    cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output directory (default: the scenario's outDir, else ./dalab-out)");
    cmd->add_option("--cache", o.cache, std::string("Cache directory (default: the scenario's cacheDir, else $") +
                                            kCacheEnv + ")");
    cmd->add_option("--max-degree", o.maxDegree, "Override maxDegree");
    cmd->add_option("--p", o.p, "Override the Schatten exponents")->delimiter(',');
    cmd->add_option("--threads", o.threads, "Override the parallelism hint");
    cmd->add_flag("--quiet,-q", o.quiet, "Only report errors");
}

int run(const std::string& task, const Options& o) {
    ScenarioOverrides ov;
    ov.maxDegree = o.maxDegree;
    ov.threads = o.threads;
    if (!o.p.empty()) ov.pList = o.p;
    if (task != "report") ov.tasks = std::vector<std::string>{task};
    const Scenario s = parseScenario(o.scenario, ov);

    RunOptions ro;
    ro.outDir = !o.out.empty() ? o.out : !s.outDir.empty() ? s.outDir : "dalab-out";
    if (!o.cache.empty())
        ro.cacheDir = o.cache;
    else if (!s.cacheDir.empty())
        ro.cacheDir = s.cacheDir;
    else if (const char* env = std::getenv(kCacheEnv); env && *env)
        ro.cacheDir = env;
    ro.log = &std::cerr;

    const RunSummary summary = runScenario(s, ro);
    if (!o.quiet) {
        for (const auto& t : summary.tasks)
            std::cout << t.task << ": " << verdictName(t.verdict) << (t.fromCache ? " (cached)" : "") << "\n";
        std::cout << "verdict: " << summary.summary["verdict"].get<std::string>() << "\n";
        std::cout << "outputs: " << ro.outDir.string() << "\n";
    }
    return summary.exitCode;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graded Drury-Arveson diagnostics for homogeneous ideals and unions of subspaces"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options options;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"dims", "Graded dimensions of F_n"},
        {"hilbert", "Hilbert polynomial fit and radical consistency"},
        {"angles", "Pairwise and tensor-power Friedrichs angles"},
        {"essnorm", "Commutator blocks, Schatten partial sums and decay fits"},
        {"closedness", "Component-sum closedness witness"},
        {"similarity", "Graded similarity map, polar data and intertwining"},
        {"report", "Every task listed in the scenario"}};
    std::string chosen;
    for (const auto& [name, help] : commands) {
        CLI::App* cmd = app.add_subcommand(name, help);
        addCommon(cmd, options);
        cmd->callback([&chosen, name = name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        return run(chosen, options);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exitCodeFor(e);
    }
}
