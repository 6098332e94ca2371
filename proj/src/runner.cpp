#include "dalab/runner.hpp"

#include "dalab/essnorm.hpp"
#include "dalab/geometry.hpp"
#include "dalab/parallel.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dalab::runner {

namespace {

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

    Csv& row(std::initializer_list<std::string> fields) {
        line(std::vector<std::string>(fields));
        return *this;
    }
    std::string str() const { return out_.str(); }

private:
    void line(const std::vector<std::string>& fields) {
        if (fields.size() != width_) throw std::logic_error("CSV row width mismatch");
        for (std::size_t k = 0; k < fields.size(); ++k) out_ << (k ? "," : "") << fields[k];
        out_ << '\n';
    }
    std::size_t width_;
    std::ostringstream out_;
};

std::string num(double x) { return formatDouble(x); }
std::string num(long long x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }
std::string flag(bool b) { return b ? "true" : "false"; }

std::string pLabel(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", p);
    return buf;
}

Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

const std::vector<SubspaceComponent>& componentsOf(const Scenario& s) {
    return std::get<VarietySpec>(s.subject).components();
}

std::vector<long long> subjectDims(const Scenario& s) {
    if (const auto* ideal = std::get_if<IdealSpec>(&s.subject))
        return hilbertDimensions(*ideal, 0, s.maxDegree, s.rankThreshold);
    return hilbertDimensions(std::get<VarietySpec>(s.subject), 0, s.maxDegree, s.rankThreshold);
}

QuotientModel subjectModel(const Scenario& s) {
    if (const auto* ideal = std::get_if<IdealSpec>(&s.subject))
        return QuotientModel::fromIdeal(*ideal, s.maxDegree, s.rankThreshold, s.threads);
    return QuotientModel::fromVariety(std::get<VarietySpec>(s.subject), s.maxDegree, s.rankThreshold, s.threads);
}

std::vector<std::string> rationalStrings(const std::vector<Rational>& xs) {
    std::vector<std::string> out;
    for (const auto& x : xs) out.push_back(x.str());
    return out;
}

TaskResult runDims(const Scenario& s) {
    TaskResult r;
    const auto dims = subjectDims(s);
    Csv csv({"degree", "dim_H", "dim_F"});
    bool ok = true;
    Json dimH = Json::array();
    for (int n = 0; n <= s.maxDegree; ++n) {
        const auto h = static_cast<long long>(degreeDimension(s.d, n));
        ok = ok && dims[static_cast<std::size_t>(n)] <= h;
        dimH.push_back(h);
        csv.row({num(n), num(h), num(dims[static_cast<std::size_t>(n)])});
    }
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    r.details = {{"dimH", dimH}, {"dimF", dims}};
    r.files.emplace_back("dims.csv", csv.str());
    return r;
}

TaskResult runHilbert(const Scenario& s) {
    TaskResult r;
    const auto dims = subjectDims(s);
    const HilbertFit fit = hilbertPolynomialFit(dims, 0);
    Csv csv({"degree", "dim_F", "hilbert_polynomial"});
    for (int n = 0; n <= s.maxDegree; ++n)
        csv.row({num(n), num(dims[static_cast<std::size_t>(n)]), fit(n).str()});
    r.files.emplace_back("hilbert.csv", csv.str());
    r.details = {{"binomialCoefficients", rationalStrings(fit.binomialCoefficients)},
                 {"monomialCoefficients", rationalStrings(fit.monomialCoefficients)},
                 {"polynomialDegree", fit.polynomialDegree},
                 {"dimI", fit.dimI},
                 {"stabilizationDegree", fit.stabilizationDegree}};
    r.verdict = Verdict::Pass;
    if (s.companion) {
        const IdealSpec& ideal = std::holds_alternative<IdealSpec>(s.subject) ? std::get<IdealSpec>(s.subject)
                                                                              : std::get<IdealSpec>(*s.companion);
        const VarietySpec& variety = std::holds_alternative<VarietySpec>(s.subject) ? std::get<VarietySpec>(s.subject)
                                                                                    : std::get<VarietySpec>(*s.companion);
        const auto rows = checkRadicalConsistency(ideal, variety, s.maxDegree, s.rankThreshold);
        Csv cc({"degree", "quotient_dim", "variety_dim", "distance"});
        double worst = 0.0;
        Json firstMismatch = nullptr;
        for (const auto& row : rows) {
            cc.row({num(row.degree), num(static_cast<long long>(row.quotientDim)),
                    num(static_cast<long long>(row.varietyDim)), num(row.distance)});
            worst = std::max(worst, row.distance);
            if (firstMismatch.is_null() && row.distance > s.subspaceTolerance) firstMismatch = row.degree;
        }
        r.files.emplace_back("radical_consistency.csv", cc.str());
        r.details["radicalConsistency"] = {{"maxDistance", worst}, {"firstMismatchDegree", firstMismatch}};
        r.details["residuals"] = {{"radicalConsistencyDistance", worst}};
        if (worst > s.subspaceTolerance) r.verdict = Verdict::Fail;
    }
    return r;
}

TaskResult runAngles(const Scenario& s) {
    TaskResult r;
    const auto& comps = componentsOf(s);
    std::vector<GradedSubspace> spans;
    for (const auto& c : comps) spans.push_back(spanOf(c));
    const AngleReport angles = pairwiseAngles(spans, s.intersectionThreshold);
    Csv pairs({"first", "second", "cos", "intersection_dim"});
    for (const auto& p : angles.pairs)
        pairs.row({num(p.first), num(p.second), num(p.cos), num(static_cast<long long>(p.intersectionDim))});
    r.files.emplace_back("angles.csv", pairs.str());
    r.details = {{"maxCos", angles.maxCos}, {"allIntersectionsZero", angles.allIntersectionsZero}};
    r.verdict = Verdict::Pass;
    if (comps.size() >= 2 && angles.allIntersectionsZero) {
        const TensorAngleTable table =
            tensorAngleDecay(comps, s.maxDegree, s.tolerance, s.intersectionThreshold, s.threads);
        Csv t({"first", "second", "power", "cos", "pair_bound", "global_bound", "pass"});
        double excess = 0.0;
        for (const auto& row : table.rows) {
            t.row({num(row.first), num(row.second), num(row.power), num(row.cos), num(row.pairBound),
                   num(row.globalBound), flag(row.pass)});
            excess = std::max(excess, row.cos - row.globalBound);
        }
        r.files.emplace_back("tensor_angles.csv", t.str());
        r.details["tensorDecay"] = {{"c", table.c}, {"pass", table.pass}, {"maxExcessOverBound", excess}};
        if (!table.pass) r.verdict = Verdict::Fail;
    }
    return r;
}

TaskResult runClosedness(const Scenario& s) {
    TaskResult r;
    const auto& comps = componentsOf(s);
    Json details = Json::object();
    r.verdict = Verdict::Pass;
    if (comps.size() >= 2) {
        const ClosednessReport rep =
            closednessWitness(comps, s.maxDegree, s.tolerance, s.intersectionThreshold, s.threads);
        Csv c({"degree", "sigma_min", "bound_squared", "bound", "bound_active", "pass"});
        for (const auto& row : rep.rows)
            c.row({num(row.degree), num(row.sigmaMin), num(row.boundSquared), num(row.bound), flag(row.boundActive),
                   flag(row.pass)});
        r.files.emplace_back("closedness.csv", c.str());
        details["c"] = rep.c;
        details["witnessPass"] = rep.pass;
        if (!rep.pass) r.verdict = Verdict::Fail;
    }
    const SumCheckReport sums = subspaceSumCheck(comps, s.maxDegree, s.rankThreshold, s.threads);
    Csv c({"degree", "rank", "sigma_min", "sigma_max", "ratio"});
    for (const auto& row : sums.rows)
        c.row({num(row.degree), num(static_cast<long long>(row.rank)), num(row.sigmaMin), num(row.sigmaMax),
               num(row.ratio)});
    r.files.emplace_back("sum_check.csv", c.str());
    details["sumFloor"] = sums.floor;
    details["ratioFloor"] = sums.ratioFloor;
    r.details = details;
    return r;
}

TaskResult runEssnorm(const Scenario& s) {
    TaskResult r;
    const QuotientModel model = subjectModel(s);
    bool violated = false;
    double worstLemma = 0.0;
    double worstArveson = -std::numeric_limits<double>::infinity();
    Json pairs = Json::array();
    for (const auto& [i, j] : s.pairs) {
        const CommutatorSeries series = commutatorSeries(model, i, j, s.rankThreshold, s.threads);
        std::vector<double> lemma(static_cast<std::size_t>(s.maxDegree) + 1);
        parallelFor(s.maxDegree + 1, s.threads,
                    [&](int n) { lemma[static_cast<std::size_t>(n)] = model.lemmaIdentityResidual(i, j, n); });
        const std::string tag = std::to_string(i) + "_" + std::to_string(j);
        Csv c({"degree", "dim_F", "commutator_norm", "commutator_rank", "principal_norm", "principal_rank",
               "lemma_residual", "boundary"});
        double pairLemma = 0.0;
        bool arveson = true;
        for (std::size_t n = 0; n < series.commutator.size(); ++n) {
            const SeriesEntry& ce = series.commutator[n];
            const SeriesEntry& pe = series.principal[n];
            pairLemma = std::max(pairLemma, lemma[n]);
            const double bound = 2.0 / (static_cast<double>(n) + 1.0);
            worstArveson = std::max(worstArveson, pe.norm - bound);
            arveson = arveson && pe.norm <= bound + 1e-10;
            c.row({num(static_cast<long long>(n)), num(static_cast<long long>(model.piece(static_cast<int>(n)).dim())),
                   num(ce.norm), num(static_cast<long long>(ce.rank)), num(pe.norm),
                   num(static_cast<long long>(pe.rank)), num(lemma[n]), flag(ce.boundary)});
        }
        r.files.emplace_back("essnorm_" + tag + ".csv", c.str());
        worstLemma = std::max(worstLemma, pairLemma);
        violated = violated || pairLemma > s.tolerance || !arveson;

        Json schatten = Json::array();
        for (double p : s.pList) {
            const SchattenReport rep = schattenPartialSum(series, p, s.maxDegree);
            Csv sc({"degree", "contribution", "partial_sum", "majorant_partial_sum"});
            for (std::size_t n = 0; n < rep.contributions.size(); ++n)
                sc.row({num(static_cast<long long>(n)), num(rep.contributions[n]), num(rep.partialSums[n]),
                        num(rep.majorantPartialSums[n])});
            r.files.emplace_back("schatten_" + tag + "_p" + pLabel(p) + ".csv", sc.str());
            violated = violated || !rep.dominatedByMajorant;
            schatten.push_back({{"p", p},
                                {"flag", flagName(rep.flag)},
                                {"slope", nullable(rep.contributionSlope)},
                                {"slopeDefined", rep.slopeDefined},
                                {"tailIncrement", rep.tailIncrement},
                                {"partialSum", rep.partialSums.back()},
                                {"majorantPartialSum", rep.majorantPartialSums.back()},
                                {"dominatedByMajorant", rep.dominatedByMajorant}});
        }
        Json fit;
        try {
            const DecayFit df = decayFit(series);
            fit = {{"commutatorGamma", df.commutator.gamma}, {"commutatorDelta", df.commutator.delta},
                   {"principalGamma", df.principal.gamma},   {"principalDelta", df.principal.delta},
                   {"pStar", nullable(df.pStar)},            {"heuristic", true}};
        } catch (const NumericalFailure& e) {
            fit = {{"pStar", nullptr}, {"error", e.what()}, {"heuristic", true}};
        }
        pairs.push_back({{"i", i},
                         {"j", j},
                         {"maxLemmaResidual", pairLemma},
                         {"principalWithinArvesonBound", arveson},
                         {"schatten", schatten},
                         {"decayFit", fit}});
    }
    r.details = {{"pairs", pairs},
                 {"residuals", {{"lemmaIdentity", worstLemma}, {"principalOverArvesonBound", nullable(worstArveson)}}}};
    r.verdict = violated ? Verdict::Fail : Verdict::Heuristic;
    return r;
}

TaskResult runSimilarity(const Scenario& s) {
    TaskResult r;
    const SimilarityInput& in = *s.similarity;
    const LinearMapSpec spec(in.matrix, std::get<VarietySpec>(s.subject), in.target, 1e-10);
    const SimilarityModel model(spec, s.maxDegree, s.tolerance, s.rankThreshold, s.threads);
    const PolarReport polar = polarAnalysis(model, 1e-6, s.tolerance);
    const int d = spec.sourceDim(), dt = spec.targetDim();
    const int top = s.maxDegree;

    bool envelope = true;
    Csv pc({"degree", "dim_V", "dim_W", "sigma_min", "sigma_max", "max_deviation", "deviation_sum", "partial_sum",
            "envelope", "est_applicable", "est2", "est3", "invertible"});
    for (const auto& row : polar.rows) {
        const auto& blk = model.at(row.degree).block.matrix;
        const double smin = row.singularValues.size() ? row.singularValues.minCoeff() : 0.0;
        const double smax = row.singularValues.size() ? row.singularValues.maxCoeff() : 0.0;
        envelope = envelope && row.maxDeviation <= row.envelope + s.tolerance;
        pc.row({num(row.degree), num(static_cast<long long>(blk.cols())), num(static_cast<long long>(blk.rows())),
                num(smin), num(smax), num(row.maxDeviation), num(row.deviationSum), num(row.partialSum),
                num(row.envelope), flag(row.estApplicable), flag(row.est2Holds), flag(row.est3Holds),
                flag(row.invertible)});
    }
    r.files.emplace_back("polar.csv", pc.str());

    // Kernel action at one interior point per component.
    std::vector<Vector> points;
    for (const auto& comp : spec.source().components())
        points.push_back(0.5 * comp.basis() * Vector::Ones(comp.dim()) / std::sqrt(static_cast<double>(comp.dim())));
    std::vector<double> kernel(static_cast<std::size_t>(top) + 1), escape(static_cast<std::size_t>(top) + 1);
    std::vector<std::vector<double>> literal(static_cast<std::size_t>(top)), adjoint(static_cast<std::size_t>(top));
    parallelFor(top + 1, s.threads, [&](int n) {
        const SimilarityBlock& blk = model.at(n);
        double worst = 0.0;
        for (const Vector& lambda : points) {
            const Vector x = blk.source.basis().adjoint() * kernelCoordinates(lambda, n);
            const Vector image = blk.target.basis() * (blk.block.matrix * x);
            worst = std::max(worst, (image - kernelCoordinates(spec.matrix() * lambda, n)).norm());
        }
        kernel[static_cast<std::size_t>(n)] = worst;
        escape[static_cast<std::size_t>(n)] = blk.escape;
        if (n == top) return;
        auto& lit = literal[static_cast<std::size_t>(n)];
        auto& adj = adjoint[static_cast<std::size_t>(n)];
        for (int k = 0; k < d; ++k) lit.push_back(intertwinerResidual(model, Vector::Unit(d, k), n));
        for (int k = 0; k < dt; ++k) adj.push_back(adjointIntertwinerResidual(model, Vector::Unit(dt, k), n));
    });
    Csv ic({"degree", "variable", "literal_residual", "adjoint_residual"});
    double maxLiteral = 0.0, maxAdjoint = 0.0;
    for (int n = 0; n < top; ++n) {
        const auto& lit = literal[static_cast<std::size_t>(n)];
        const auto& adj = adjoint[static_cast<std::size_t>(n)];
        for (int k = 0; k < std::max(d, dt); ++k) {
            const std::string l = k < d ? num(lit[static_cast<std::size_t>(k)]) : "";
            const std::string a = k < dt ? num(adj[static_cast<std::size_t>(k)]) : "";
            if (k < d) maxLiteral = std::max(maxLiteral, lit[static_cast<std::size_t>(k)]);
            if (k < dt) maxAdjoint = std::max(maxAdjoint, adj[static_cast<std::size_t>(k)]);
            ic.row({num(n), num(k), l, a});
        }
    }
    r.files.emplace_back("intertwining.csv", ic.str());

    Csv tc({"degree", "f", "g", "skipped", "sigma_min", "condition", "residual", "relative"});
    double maxTransport = 0.0, maxRelative = 0.0;
    Json skipped = Json::array();
    for (int n = 1; n < top; ++n) {
        bool skip = false;
        for (int f = 0; f < d; ++f)
            for (int g = 0; g < d; ++g) {
                const TransportRow row = conjugationTransportCheck(model, Vector::Unit(d, f), Vector::Unit(d, g), n);
                skip = skip || row.skipped;
                if (!row.skipped) {
                    maxTransport = std::max(maxTransport, row.residual);
                    maxRelative = std::max(maxRelative, row.relative);
                }
                tc.row({num(n), num(f), num(g), flag(row.skipped), num(row.sigmaMin), num(row.condition),
                        row.skipped ? "" : num(row.residual), row.skipped ? "" : num(row.relative)});
            }
        if (skip) skipped.push_back(n);
    }
    r.files.emplace_back("transport.csv", tc.str());

    const double maxKernel = *std::max_element(kernel.begin(), kernel.end());
    const double maxEscape = *std::max_element(escape.begin(), escape.end());
    Json first = polar.firstInvertibleDegree ? Json(*polar.firstInvertibleDegree) : Json(nullptr);
    r.details = {{"c", polar.c},
                 {"k", polar.k},
                 {"fittedM", nullable(polar.fittedM)},
                 {"tailBound", nullable(polar.tailBound)},
                 {"tailFinite", polar.tailFinite},
                 {"partialSum", polar.rows.back().partialSum},
                 {"firstInvertibleDegree", first},
                 {"zeroSingularValues", polar.zeroSingularValues},
                 {"est2Holds", polar.est2Holds},
                 {"est3Holds", polar.est3Holds},
                 {"envelopeHolds", envelope},
                 {"diagnostics",
                  {{"literalIntertwinerResidual", maxLiteral},
                   {"transportResidual", maxTransport},
                   {"transportRelative", maxRelative},
                   {"transportSkippedDegrees", skipped}}},
                 {"residuals",
                  {{"imageEscape", maxEscape}, {"kernelAction", maxKernel}, {"adjointIntertwiner", maxAdjoint}}}};
    const bool ok = maxEscape <= s.tolerance && maxKernel <= s.tolerance && maxAdjoint <= s.tolerance && envelope &&
                    polar.est2Holds && polar.est3Holds;
    r.verdict = ok ? Verdict::Pass : Verdict::Fail;
    return r;
}

TaskResult runTask(const std::string& task, const Scenario& s) {
    if (task == "dims") return runDims(s);
    if (task == "hilbert") return runHilbert(s);
    if (task == "angles") return runAngles(s);
    if (task == "closedness") return runClosedness(s);
    if (task == "essnorm") return runEssnorm(s);
    if (task == "similarity") return runSimilarity(s);
    throw InvalidInput("unknown task \"" + task + "\"");
}

Json taskDescription(const std::string& task, const Scenario& s) {
    Json scenario = s.canonical;
    if (task != "essnorm") {
        scenario.erase("pList");
        scenario.erase("pairs");
    }
    if (task != "hilbert") scenario.erase("companion");
    if (task != "similarity") scenario.erase("similarity");
    return {{"task", task}, {"scenario", scenario}};
}

Json payloadOf(const TaskResult& r) {
    Json files = Json::array();
    for (const auto& [name, body] : r.files) files.push_back({name, body});
    return {{"verdict", verdictName(r.verdict)}, {"details", r.details}, {"files", files}};
}

TaskResult fromPayload(const std::string& task, const Json& payload) {
    TaskResult r;
    r.task = task;
    const std::string v = payload.at("verdict");
    r.verdict = v == "pass" ? Verdict::Pass : v == "fail" ? Verdict::Fail : Verdict::Heuristic;
    r.details = payload.at("details");
    for (const auto& f : payload.at("files")) r.files.emplace_back(f.at(0).get<std::string>(), f.at(1).get<std::string>());
    r.fromCache = true;
    return r;
}

void writeFile(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string verdictName(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Heuristic: return "heuristic";
    }
    return "fail";
}

RunSummary runScenario(const Scenario& s, const RunOptions& options) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    RunSummary out;
    const Cache cache = options.cacheDir ? Cache(*options.cacheDir, options.log) : Cache();
    const std::string scenarioKey = cacheKey(s.canonical);
    std::filesystem::create_directories(options.outDir);

    Json summary{{"version", kVersion},
                 {"schemaVersion", kSchemaVersion},
                 {"scenario", s.name},
                 {"scenarioKey", scenarioKey},
                 {"tasksRequested", s.tasks}};
    try {
        for (const auto& task : s.tasks) {
            const auto t0 = Clock::now();
            const Json description = taskDescription(task, s);
            const std::string key = cacheKey(description);
            TaskResult result;
            if (auto payload = cache.load(key, description)) {
                result = fromPayload(task, *payload);
                ++out.cacheHits;
            } else {
                try {
                    result = runTask(task, s);
                } catch (const InvalidInput& e) {
                    throw InvalidInput("task " + task + ": " + e.what());
                } catch (const ScaleGuard& e) {
                    throw ScaleGuard("task " + task + ": " + e.what());
                } catch (const std::exception& e) {
                    throw NumericalFailure("task " + task + ": " + e.what());
                }
                result.task = task;
                if (cache.enabled()) {
                    cache.store(key, description, payloadOf(result));
                    ++out.cacheMisses;
                }
            }
            result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
            out.tasks.push_back(std::move(result));
        }
    } catch (const std::exception& e) {
        summary["status"] = "incomplete";
        summary["error"] = e.what();
        writeFile(options.outDir / "summary.json", summary.dump(2) + "\n");
        throw;
    }

    Json tasks = Json::object();
    Json residuals = Json::object();
    bool failed = false;
    for (const auto& r : out.tasks) {
        Json entry = r.details;
        entry["verdict"] = verdictName(r.verdict);
        Json files = Json::array();
        for (const auto& f : r.files) files.push_back(f.first);
        entry["files"] = files;
        tasks[r.task] = entry;
        if (r.details.contains("residuals"))
            for (const auto& [name, value] : r.details["residuals"].items()) residuals[r.task + "." + name] = value;
        failed = failed || r.verdict == Verdict::Fail;
    }
    summary["status"] = "complete";
    summary["tasks"] = tasks;
    summary["residualMaxima"] = residuals;
    summary["verdict"] = failed ? "fail" : "pass";
    out.exitCode = failed ? 1 : 0;

    for (const auto& r : out.tasks)
        for (const auto& [name, body] : r.files) writeFile(options.outDir / name, body);
    writeFile(options.outDir / "summary.json", summary.dump(2) + "\n");

    Json timing = Json::array();
    for (const auto& r : out.tasks) timing.push_back({{"task", r.task}, {"seconds", r.seconds}, {"fromCache", r.fromCache}});
    out.runInfo = {{"version", kVersion},
                   {"scenarioKey", scenarioKey},
                   {"threads", s.threads},
                   {"cacheDir", options.cacheDir ? options.cacheDir->string() : ""},
                   {"cacheHits", out.cacheHits},
                   {"cacheMisses", out.cacheMisses},
                   {"tasks", timing},
                   {"totalSeconds", std::chrono::duration<double>(Clock::now() - start).count()}};
    writeFile(options.outDir / "run_info.json", out.runInfo.dump(2) + "\n");
    out.summary = std::move(summary);
    return out;
}

}  // namespace dalab::runner
