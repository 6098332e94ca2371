#include "dalab/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace dalab::runner {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw InvalidInput(path + ": " + message);
}

std::string typeName(const Json& j) { return j.type_name(); }

void requireObject(const Json& j, const std::string& path, std::initializer_list<const char*> allowed,
                   std::initializer_list<const char*> required) {
    if (!j.is_object()) fail(path, "expected an object, got " + typeName(j));
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            fail(path + "." + key, "unknown field");
    }
    for (const char* key : required)
        if (!j.contains(key)) fail(path + "." + key, "missing required field");
}

const Json& arrayAt(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array, got " + typeName(j));
    return j;
}

long long integerAt(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer, got " + typeName(j));
    return j.get<long long>();
}

double numberAt(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number, got " + typeName(j));
    return j.get<double>();
}

std::string stringAt(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string, got " + typeName(j));
    return j.get<std::string>();
}

bool boolAt(const Json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean, got " + typeName(j));
    return j.get<bool>();
}

double positiveAt(const Json& j, const std::string& path) {
    const double x = numberAt(j, path);
    if (!(x > 0.0)) fail(path, "must be positive");
    return x;
}

Complex complexAt(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected a [re, im] pair");
    return {numberAt(j[0], path + "[0]"), numberAt(j[1], path + "[1]")};
}

// Columns of [re, im] pairs, each of length `rows`.
Matrix columnsAt(const Json& j, int rows, const std::string& path) {
    arrayAt(j, path);
    if (j.empty()) fail(path, "needs at least one column");
    Matrix m(rows, static_cast<Eigen::Index>(j.size()));
    for (std::size_t c = 0; c < j.size(); ++c) {
        const std::string cp = path + "[" + std::to_string(c) + "]";
        arrayAt(j[c], cp);
        if (static_cast<int>(j[c].size()) != rows)
            fail(cp, "expected " + std::to_string(rows) + " entries, got " + std::to_string(j[c].size()));
        for (int r = 0; r < rows; ++r)
            m(r, static_cast<Eigen::Index>(c)) = complexAt(j[c][static_cast<std::size_t>(r)], cp + "[" + std::to_string(r) + "]");
    }
    return m;
}

Json complexJson(Complex z) { return Json::array({z.real(), z.imag()}); }

Json columnsJson(const Matrix& m) {
    Json cols = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Json col = Json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(complexJson(m(r, c)));
        cols.push_back(col);
    }
    return cols;
}

struct ParsedSubject {
    Subject subject;
    Json canonical;
};

HomogeneousPolynomial generatorAt(const Json& j, int d, const std::string& path) {
    arrayAt(j, path);
    if (j.empty()) fail(path, "a generator needs at least one term");
    std::optional<HomogeneousPolynomial> poly;
    for (std::size_t t = 0; t < j.size(); ++t) {
        const std::string tp = path + "[" + std::to_string(t) + "]";
        requireObject(j[t], tp, {"exponents", "re", "im"}, {"exponents", "re"});
        const Json& ex = arrayAt(j[t]["exponents"], tp + ".exponents");
        if (static_cast<int>(ex.size()) != d)
            fail(tp + ".exponents", "expected " + std::to_string(d) + " exponents, got " + std::to_string(ex.size()));
        std::vector<int> alpha;
        for (std::size_t k = 0; k < ex.size(); ++k) {
            const long long e = integerAt(ex[k], tp + ".exponents[" + std::to_string(k) + "]");
            if (e < 0 || e > 1000) fail(tp + ".exponents[" + std::to_string(k) + "]", "exponent out of range");
            alpha.push_back(static_cast<int>(e));
        }
        const Complex c(numberAt(j[t]["re"], tp + ".re"), j[t].contains("im") ? numberAt(j[t]["im"], tp + ".im") : 0.0);
        const MultiIndex mi(alpha);
        if (!poly) poly.emplace(d, mi.degree());
        if (mi.degree() != poly->degree())
            fail(tp, "term of degree " + std::to_string(mi.degree()) + " in a generator of degree " +
                         std::to_string(poly->degree()) + " (generators must be homogeneous)");
        poly->add(mi, c);
    }
    if (poly->isZero()) fail(path, "generator is the zero polynomial");
    return *poly;
}

Json generatorJson(const HomogeneousPolynomial& p) {
    Json terms = Json::array();
    for (const auto& [alpha, c] : p.terms())
        terms.push_back({{"exponents", alpha.exponents()}, {"re", c.real()}, {"im", c.imag()}});
    return terms;
}

std::vector<SubspaceComponent> componentsAt(const Json& j, int d, const std::string& path, Json& canonical,
                                            double rankThreshold) {
    arrayAt(j, path);
    if (j.empty()) fail(path, "needs at least one component");
    std::vector<SubspaceComponent> comps;
    canonical = Json::array();
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string cp = path + "[" + std::to_string(k) + "]";
        const Matrix cols = columnsAt(j[k], d, cp);
        try {
            comps.push_back(SubspaceComponent::spannedBy(cols, rankThreshold));
        } catch (const InvalidInput& e) {
            fail(cp, e.what());
        }
        canonical.push_back(columnsJson(cols));
    }
    return comps;
}

ParsedSubject subjectAt(const Json& j, int d, const std::string& path, double rankThreshold) {
    if (!j.is_object()) fail(path, "expected an object, got " + typeName(j));
    if (!j.contains("kind")) fail(path + ".kind", "missing required field");
    const std::string kind = stringAt(j["kind"], path + ".kind");
    if (kind == "ideal") {
        requireObject(j, path, {"kind", "generators", "radical"}, {"generators"});
        const Json& gens = arrayAt(j["generators"], path + ".generators");
        if (gens.empty()) fail(path + ".generators", "needs at least one generator");
        std::vector<HomogeneousPolynomial> polys;
        Json canon = Json::array();
        for (std::size_t g = 0; g < gens.size(); ++g) {
            polys.push_back(generatorAt(gens[g], d, path + ".generators[" + std::to_string(g) + "]"));
            canon.push_back(generatorJson(polys.back()));
        }
        const bool radical = j.contains("radical") ? boolAt(j["radical"], path + ".radical") : false;
        return {IdealSpec(d, std::move(polys), radical),
                Json{{"kind", "ideal"}, {"generators", canon}, {"radical", radical}}};
    }
    if (kind == "variety") {
        requireObject(j, path, {"kind", "components"}, {"components"});
        Json canon;
        auto comps = componentsAt(j["components"], d, path + ".components", canon, rankThreshold);
        try {
            return {VarietySpec::fromComponents(std::move(comps)), Json{{"kind", "variety"}, {"components", canon}}};
        } catch (const InvalidInput& e) {
            fail(path + ".components", e.what());
        }
    }
    fail(path + ".kind", "expected \"ideal\" or \"variety\", got \"" + kind + "\"");
}

bool hasComponents(const Subject& s) {
    return std::holds_alternative<VarietySpec>(s) && std::get<VarietySpec>(s).hasComponents();
}

void guardScale(int d, int n, std::uint64_t cap, const std::string& what) {
    const std::uint64_t dim = degreeDimension(d, n);
    if (dim > cap)
        throw ScaleGuard("scale guard: dim H_" + std::to_string(n) + " in " + std::to_string(d) + " variables (" + what +
                         ") is " + std::to_string(dim) + ", above the cap " + std::to_string(cap));
}

}  // namespace

const std::vector<std::string>& taskOrder() {
    static const std::vector<std::string> order{"dims", "hilbert", "angles", "closedness", "essnorm", "similarity"};
    return order;
}

Scenario parseScenarioJson(const Json& doc, const ScenarioOverrides& overrides) {
    requireObject(doc, "$",
                  {"schemaVersion", "name", "d", "maxDegree", "tolerance", "rankThreshold", "intersectionThreshold",
                   "subspaceTolerance", "dimCap", "subject", "companion", "similarity", "tasks", "pList", "pairs",
                   "outDir", "cacheDir", "threads"},
                  {"schemaVersion", "d", "maxDegree", "subject", "tasks"});
    const long long version = integerAt(doc["schemaVersion"], "$.schemaVersion");
    if (version != kSchemaVersion)
        fail("$.schemaVersion", "unsupported version " + std::to_string(version) + " (expected " +
                                    std::to_string(kSchemaVersion) + ")");
    Scenario s;
    s.name = doc.contains("name") ? stringAt(doc["name"], "$.name") : "scenario";
    const long long d = integerAt(doc["d"], "$.d");
    if (d < 1 || d > 64) fail("$.d", "must lie in 1..64");
    s.d = static_cast<int>(d);
    long long maxDegree = integerAt(doc["maxDegree"], "$.maxDegree");
    if (overrides.maxDegree) maxDegree = *overrides.maxDegree;
    if (maxDegree < 2) fail("$.maxDegree", "must be at least 2");
    if (maxDegree > 100000) fail("$.maxDegree", "unreasonably large");
    s.maxDegree = static_cast<int>(maxDegree);
    if (doc.contains("tolerance")) s.tolerance = positiveAt(doc["tolerance"], "$.tolerance");
    if (doc.contains("rankThreshold")) s.rankThreshold = positiveAt(doc["rankThreshold"], "$.rankThreshold");
    if (doc.contains("intersectionThreshold"))
        s.intersectionThreshold = positiveAt(doc["intersectionThreshold"], "$.intersectionThreshold");
    if (doc.contains("subspaceTolerance"))
        s.subspaceTolerance = positiveAt(doc["subspaceTolerance"], "$.subspaceTolerance");
    if (doc.contains("dimCap")) {
        const long long cap = integerAt(doc["dimCap"], "$.dimCap");
        if (cap < 1) fail("$.dimCap", "must be positive");
        s.dimCap = static_cast<std::uint64_t>(cap);
    }
    guardScale(s.d, s.maxDegree, s.dimCap, "subject");

    ParsedSubject subject = subjectAt(doc["subject"], s.d, "$.subject", s.rankThreshold);
    s.subject = std::move(subject.subject);
    Json canonical{{"schemaVersion", kSchemaVersion},
                   {"d", s.d},
                   {"maxDegree", s.maxDegree},
                   {"tolerance", s.tolerance},
                   {"rankThreshold", s.rankThreshold},
                   {"intersectionThreshold", s.intersectionThreshold},
                   {"subspaceTolerance", s.subspaceTolerance},
                   {"subject", subject.canonical}};

    if (doc.contains("companion")) {
        ParsedSubject comp = subjectAt(doc["companion"], s.d, "$.companion", s.rankThreshold);
        if (comp.subject.index() == s.subject.index())
            fail("$.companion", "must be a variety when the subject is an ideal and vice versa");
        s.companion = std::move(comp.subject);
        canonical["companion"] = comp.canonical;
    }

    if (doc.contains("similarity")) {
        const Json& sim = doc["similarity"];
        requireObject(sim, "$.similarity", {"matrix", "target"}, {"matrix", "target"});
        const Json& rows = arrayAt(sim["matrix"], "$.similarity.matrix");
        if (rows.empty()) fail("$.similarity.matrix", "needs at least one row");
        const int dTarget = static_cast<int>(rows.size());
        if (dTarget > 64) fail("$.similarity.matrix", "too many rows");
        guardScale(dTarget, s.maxDegree, s.dimCap, "similarity target");
        // Rows are read as the columns of the transpose.
        const Matrix a = columnsAt(rows, s.d, "$.similarity.matrix").transpose();
        ParsedSubject target = subjectAt(sim["target"], dTarget, "$.similarity.target", s.rankThreshold);
        if (!hasComponents(target.subject)) fail("$.similarity.target", "must be a variety given by components");
        s.similarity = SimilarityInput{a, std::get<VarietySpec>(target.subject)};
        canonical["similarity"] = {{"matrix", columnsJson(a.transpose())}, {"target", target.canonical}};
    }

    std::vector<std::string> requested;
    if (overrides.tasks) {
        requested = *overrides.tasks;
    } else {
        const Json& tasks = arrayAt(doc["tasks"], "$.tasks");
        for (std::size_t t = 0; t < tasks.size(); ++t)
            requested.push_back(stringAt(tasks[t], "$.tasks[" + std::to_string(t) + "]"));
    }
    if (requested.empty()) fail("$.tasks", "must not be empty");
    std::set<std::string> chosen;
    for (std::size_t t = 0; t < requested.size(); ++t) {
        const std::string& task = requested[t];
        const std::string tp = "$.tasks[" + std::to_string(t) + "]";
        if (task == "full-report") {
            chosen.insert({"dims", "hilbert", "essnorm"});
            if (hasComponents(s.subject)) chosen.insert({"angles", "closedness"});
            if (s.similarity) chosen.insert("similarity");
            continue;
        }
        if (std::find(taskOrder().begin(), taskOrder().end(), task) == taskOrder().end())
            fail(tp, "unknown task \"" + task + "\"");
        if ((task == "angles" || task == "closedness" || task == "similarity") && !hasComponents(s.subject))
            fail(tp, "task \"" + task + "\" needs a subject variety given by components");
        if (task == "similarity" && !s.similarity) fail(tp, "task \"similarity\" needs a \"similarity\" block");
        chosen.insert(task);
    }
    for (const auto& task : taskOrder())
        if (chosen.count(task)) s.tasks.push_back(task);

    if (overrides.pList) {
        s.pList = *overrides.pList;
    } else if (doc.contains("pList")) {
        const Json& ps = arrayAt(doc["pList"], "$.pList");
        for (std::size_t k = 0; k < ps.size(); ++k) s.pList.push_back(numberAt(ps[k], "$.pList[" + std::to_string(k) + "]"));
    } else {
        s.pList = {2.0};
    }
    if (s.pList.empty()) fail("$.pList", "must not be empty");
    for (std::size_t k = 0; k < s.pList.size(); ++k)
        if (!(s.pList[k] >= 1.0) || !std::isfinite(s.pList[k]))
            fail("$.pList[" + std::to_string(k) + "]", "Schatten exponents must be at least 1");

    if (doc.contains("pairs")) {
        const Json& ps = arrayAt(doc["pairs"], "$.pairs");
        for (std::size_t k = 0; k < ps.size(); ++k) {
            const std::string pp = "$.pairs[" + std::to_string(k) + "]";
            if (!ps[k].is_array() || ps[k].size() != 2) fail(pp, "expected an [i, j] pair");
            const long long i = integerAt(ps[k][0], pp + "[0]"), j = integerAt(ps[k][1], pp + "[1]");
            if (i < 0 || i >= s.d || j < 0 || j >= s.d) fail(pp, "variable index out of range 0.." + std::to_string(s.d - 1));
            s.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
        }
        if (s.pairs.empty()) fail("$.pairs", "must not be empty");
    } else {
        for (int i = 0; i < s.d; ++i)
            for (int j = i; j < s.d; ++j) s.pairs.emplace_back(i, j);
    }
    Json pairs = Json::array();
    for (const auto& [i, j] : s.pairs) pairs.push_back({i, j});
    canonical["pList"] = s.pList;
    canonical["pairs"] = pairs;

    if (doc.contains("outDir")) s.outDir = stringAt(doc["outDir"], "$.outDir");
    if (doc.contains("cacheDir")) s.cacheDir = stringAt(doc["cacheDir"], "$.cacheDir");
    long long threads = doc.contains("threads") ? integerAt(doc["threads"], "$.threads") : 1;
    if (overrides.threads) threads = *overrides.threads;
    if (threads < 1 || threads > 1024) fail("$.threads", "must lie in 1..1024");
    s.threads = static_cast<int>(threads);
    s.canonical = std::move(canonical);
    return s;
}

Scenario parseScenario(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw InvalidInput(path.string() + ": cannot open scenario file");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidInput(path.string() + ": not valid JSON (" + e.what() + ")");
    }
    return parseScenarioJson(doc, overrides);
}

std::string sha256Hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw NumericalFailure("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < length; ++k) {
        out.push_back(hex[digest[k] >> 4]);
        out.push_back(hex[digest[k] & 15]);
    }
    return out;
}

std::string cacheKey(const Json& description, const std::string& version) {
    return sha256Hex(description.dump() + "\n" + version);
}

Cache::Cache(std::filesystem::path dir, std::ostream* warnings) : dir_(std::move(dir)), warnings_(warnings) {}

std::filesystem::path Cache::entryPath(const std::string& key) const { return dir_ / key.substr(0, 2) / (key + ".json"); }

std::optional<Json> Cache::load(const std::string& key, const Json& description) const {
    if (!enabled()) return std::nullopt;
    const auto path = entryPath(key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    auto warn = [&](const std::string& why) -> std::optional<Json> {
        if (warnings_) *warnings_ << "warning: cache entry " << path.string() << " " << why << "; recomputing\n";
        return std::nullopt;
    };
    std::ifstream in(path);
    Json entry;
    try {
        entry = Json::parse(in);
    } catch (const Json::parse_error&) {
        return warn("is not valid JSON");
    }
    if (!entry.is_object() || !entry.contains("payload") || !entry.contains("digest") || !entry.contains("description"))
        return warn("is malformed");
    if (entry.value("key", "") != key || entry["description"] != description || entry.value("version", "") != kVersion)
        return warn("does not match the requested computation");
    if (entry["digest"] != sha256Hex(entry["payload"].dump())) return warn("fails its content digest");
    return entry["payload"];
}

void Cache::store(const std::string& key, const Json& description, const Json& payload) const {
    if (!enabled()) return;
    const auto path = entryPath(key);
    std::filesystem::create_directories(path.parent_path());
    const Json entry{{"key", key},
                     {"version", kVersion},
                     {"description", description},
                     {"payload", payload},
                     {"digest", sha256Hex(payload.dump())}};
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << entry.dump();
        if (!out) throw std::runtime_error("cannot write cache entry " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string formatDouble(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int exitCodeFor(const std::exception& e) {
    if (dynamic_cast<const InvalidInput*>(&e)) return 2;
    if (dynamic_cast<const ScaleGuard*>(&e)) return 3;
    return 1;
}

}  // namespace dalab::runner
