#include "refseq/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <type_traits>

#include <fmt/format.h>
#include "json.hpp"

#include "refseq/patterns.hpp"
#include "refseq/random.hpp"

namespace refseq {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split_ws(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool skippable(const std::string& line)
{
    if (!line.empty() && line[0] == '#') return true;
    return line.find_first_not_of(" \t\r\n\f\v") == std::string::npos;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}': {}", path.string(), std::strerror(errno)));
    return in;
}

bool wants_pipeline(std::string_view command)
{
    return command == "select" || command == "transform" || command == "classify" || command == "cv";
}

bool uses_selection(const RunConfig& cfg, std::string_view command)
{
    if (command == "transform") return !cfg.refs;
    return wants_pipeline(command);
}

SimilaritySpec build_similarity(const RunConfig& cfg)
{
    SimilaritySpec spec;
    if (cfg.sim)
        spec = SimilaritySpec::of(parse_similarity_kind(*cfg.sim));
    else if (cfg.select == "pattern")
        spec = pattern_selection(cfg).similarity;
    else
        spec = SimilaritySpec::of(SimilarityKind::JACCARD_LCS);
    if (cfg.gamma) spec.gamma = cfg.gamma;
    if (cfg.lambda) spec.lambda = cfg.lambda;
    if (cfg.n) spec.n = cfg.n;
    spec.validate();
    return spec;
}

SelectionMethod build_method(const RunConfig& cfg)
{
    if (cfg.select == "all") return SelectAll{};
    if (cfg.select == "gahc") {
        if (cfg.pointnum && *cfg.pointnum == 0) throw std::invalid_argument("pointnum must be positive");
        return SelectGahc{cfg.pointnum};
    }
    if (cfg.select == "mht") {
        if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument(fmt::format("alpha must lie in (0,1) (got {})", cfg.alpha));
        return SelectMht{cfg.alpha, cfg.include_self};
    }
    if (cfg.select == "pattern") return SelectPatterns{pattern_selection(cfg)};
    throw std::invalid_argument(fmt::format("unknown selection method '{}' (expected all, gahc, mht or pattern)", cfg.select));
}

template <typename Fn>
void collect(std::vector<std::string>& problems, Fn&& fn)
{
    try {
        fn();
    } catch (const std::exception& e) {
        problems.emplace_back(e.what());
    }
}

// JSON field readers; mismatches are recorded, never thrown.
struct Reader {
    const json& obj;
    std::vector<std::string>& problems;

    template <typename T>
    void get(const char* key, T& dst)
    {
        auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!read(*it, dst)) problems.push_back(fmt::format("config key '{}': unexpected value {}", key, it->dump()));
    }

    template <typename T>
    void get(const char* key, std::optional<T>& dst)
    {
        auto it = obj.find(key);
        if (it == obj.end()) return;
        if (it->is_null()) {
            dst.reset();
            return;
        }
        T v{};
        if (read(*it, v))
            dst = v;
        else
            problems.push_back(fmt::format("config key '{}': unexpected value {}", key, it->dump()));
    }

    static bool read(const json& v, std::string& dst)
    {
        if (!v.is_string()) return false;
        dst = v.get<std::string>();
        return true;
    }
    static bool read(const json& v, double& dst)
    {
        if (!v.is_number()) return false;
        dst = v.get<double>();
        return true;
    }
    static bool read(const json& v, bool& dst)
    {
        if (!v.is_boolean()) return false;
        dst = v.get<bool>();
        return true;
    }
    template <typename T>
        requires std::is_unsigned_v<T>
    static bool read(const json& v, T& dst)
    {
        if (!v.is_number_unsigned()) return false;
        auto x = v.get<std::uint64_t>();
        if (x > std::numeric_limits<T>::max()) return false;
        dst = static_cast<T>(x);
        return true;
    }
};

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string out = "invalid configuration:";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
}

}  // namespace

PatternSelection pattern_selection(const RunConfig& cfg)
{
    auto sel = preset_selection(parse_pattern_preset(cfg.preset));
    if (cfg.minsup) sel.mining.minsup = *cfg.minsup;
    if (cfg.maxsize) sel.mining.maxsize = *cfg.maxsize;
    sel.mining.validate();
    return sel;
}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("{}:{}: {}", source, line, what)), line_(line)
{
}

SequenceDataset parse_dataset(std::istream& in, const std::string& source, const SequenceDataset* vocabulary)
{
    SequenceDataset data;
    if (vocabulary) {
        data.alphabet = vocabulary->alphabet;
        data.class_names = vocabulary->class_names;
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (skippable(line)) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(source, lineno, "missing tab between label and items");
        std::string label = line.substr(0, tab);
        if (label.empty()) throw ParseError(source, lineno, "empty label");

        ClassId cls = 0;
        while (cls < data.class_names.size() && data.class_names[cls] != label) ++cls;
        if (cls == data.class_names.size()) data.class_names.push_back(label);

        Sequence seq;
        for (const auto& tok : split_ws(std::string_view(line).substr(tab + 1))) seq.push_back(data.alphabet.intern(tok));
        data.instances.push_back({std::move(seq), cls});
    }
    if (in.bad()) throw std::runtime_error(fmt::format("{}: read error", source));
    if (data.instances.empty()) throw std::invalid_argument(fmt::format("{}: no instances", source));
    return data;
}

SequenceDataset parse_dataset(const std::filesystem::path& path, const SequenceDataset* vocabulary)
{
    auto in = open_input(path);
    return parse_dataset(in, path.string(), vocabulary);
}

void write_dataset(std::ostream& out, const SequenceDataset& data)
{
    for (const auto& inst : data.instances) {
        if (inst.label >= data.class_names.size())
            throw std::invalid_argument(fmt::format("label {} has no class name", inst.label));
        const auto& name = data.class_names[inst.label];
        if (name.empty() || name[0] == '#' || name.find_first_of("\t\r\n") != std::string::npos)
            throw std::invalid_argument(fmt::format("class name '{}' cannot be written in the dataset format", name));
        out << name << '\t' << render(inst.sequence, data.alphabet) << '\n';
    }
}

ReferenceSet parse_references(std::istream& in, Alphabet& alphabet, const std::string& source)
{
    ReferenceSet refs;
    refs.method = "file:" + source;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (skippable(line)) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(source, lineno, "missing tab between provenance and items");
        Reference r;
        r.provenance = line.substr(0, tab);
        for (const auto& tok : split_ws(std::string_view(line).substr(tab + 1))) r.sequence.push_back(alphabet.intern(tok));
        refs.items.push_back(std::move(r));
    }
    if (refs.empty()) throw std::invalid_argument(fmt::format("{}: no references", source));
    return refs;
}

SequenceDataset synth_gen(std::size_t classes, std::size_t per_class, std::size_t motif_len, std::size_t noise_len, std::uint64_t seed)
{
    if (classes == 0 || per_class == 0 || motif_len == 0)
        throw std::invalid_argument("synth: classes, per-class count and motif length must be positive");

    auto rng = seeded_rng({seed});
    // each class draws its motif from its own items, so motifs always differ
    const std::size_t motif_items = std::max<std::size_t>(motif_len, 4);
    std::vector<std::vector<std::size_t>> motifs(classes, std::vector<std::size_t>(motif_len));
    for (auto& m : motifs)
        for (auto& x : m) x = uniform_below(rng, motif_items);

    SequenceDataset data;
    for (std::size_t c = 0; c < classes; ++c) data.class_names.push_back(fmt::format("class{}", c));
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            // choose which of the motif_len + noise_len slots hold motif items
            std::vector<char> slots(motif_len + noise_len, 0);
            std::fill(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(motif_len), 1);
            fisher_yates(slots, rng);

            Sequence s;
            std::size_t next_motif = 0;
            for (char slot : slots) {
                std::string token = slot ? fmt::format("m{}.{}", c, motifs[c][next_motif++])
                                         : fmt::format("n{}", uniform_below(rng, kSynthNoiseAlphabet));
                s.push_back(data.alphabet.intern(token));
            }
            data.instances.push_back({std::move(s), static_cast<ClassId>(c)});
        }
    }
    return data;
}

ConfigError::ConfigError(const std::vector<std::string>& problems)
    : std::invalid_argument(join_problems(problems)), problems_(problems)
{
}

void apply_config_json(RunConfig& cfg, std::string_view json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({fmt::format("config is not valid JSON: {}", e.what())});
    }
    if (!j.is_object()) throw ConfigError({"config must be a JSON object"});

    static const std::set<std::string> known = {
        "data", "test", "refs", "input", "select", "alpha", "pointnum", "include_self", "preset", "minsup", "maxsize",
        "sim", "gamma", "lambda", "n", "clf", "k", "folds", "repeats", "seed", "skip_failed_folds", "shuffle_labels",
        "classes", "per_class", "motif_len", "noise_len", "threads", "out", "json", "format", "mht_report"};
    std::vector<std::string> problems;
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) problems.push_back(fmt::format("unknown config key '{}'", key));

    Reader r{j, problems};
    r.get("data", cfg.data);
    r.get("test", cfg.test);
    r.get("refs", cfg.refs);
    r.get("input", cfg.input);
    r.get("select", cfg.select);
    r.get("alpha", cfg.alpha);
    r.get("pointnum", cfg.pointnum);
    r.get("include_self", cfg.include_self);
    r.get("preset", cfg.preset);
    r.get("minsup", cfg.minsup);
    r.get("maxsize", cfg.maxsize);
    r.get("sim", cfg.sim);
    r.get("gamma", cfg.gamma);
    r.get("lambda", cfg.lambda);
    r.get("n", cfg.n);
    r.get("clf", cfg.clf);
    r.get("k", cfg.k);
    r.get("folds", cfg.folds);
    r.get("repeats", cfg.repeats);
    r.get("seed", cfg.seed);
    r.get("skip_failed_folds", cfg.skip_failed_folds);
    r.get("shuffle_labels", cfg.shuffle_labels);
    r.get("classes", cfg.classes);
    r.get("per_class", cfg.per_class);
    r.get("motif_len", cfg.motif_len);
    r.get("noise_len", cfg.noise_len);
    r.get("threads", cfg.threads);
    r.get("out", cfg.out);
    r.get("json", cfg.json);
    r.get("format", cfg.format);
    r.get("mht_report", cfg.mht_report);
    if (!problems.empty()) throw ConfigError(problems);
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_json(cfg, buf.str());
}

std::vector<std::string> validate(const RunConfig& cfg, std::string_view command)
{
    static const std::set<std::string_view> commands = {"mine", "select", "transform", "classify", "cv", "synth", "report"};
    std::vector<std::string> problems;
    if (!commands.count(command)) {
        problems.push_back(fmt::format("unknown command '{}'", command));
        return problems;
    }

    if (command != "synth" && command != "report" && !cfg.data) problems.push_back("a dataset (--data) is required");
    if (command == "classify" && !cfg.test) problems.push_back("classify needs a test dataset (--test)");
    if (command == "report" && !cfg.input) problems.push_back("report needs an input report (--input)");
    if (cfg.threads == 0) problems.push_back("threads must be at least 1");

    if (command == "mine") collect(problems, [&] { pattern_selection(cfg); });
    if (uses_selection(cfg, command)) collect(problems, [&] { build_method(cfg); });
    if (wants_pipeline(command)) collect(problems, [&] { build_similarity(cfg); });
    if (command == "classify" || command == "cv") collect(problems, [&] { parse_classifier(cfg.clf, cfg.k); });
    if (command == "cv") {
        CvConfig cv;
        cv.folds = cfg.folds;
        cv.repeats = cfg.repeats;
        collect(problems, [&] { cv.validate(); });
    }
    if (command == "transform" && cfg.format && *cfg.format != "csv" && *cfg.format != "arff")
        problems.push_back(fmt::format("format must be csv or arff (got '{}')", *cfg.format));
    if (command == "synth") {
        if (cfg.classes == 0) problems.push_back("classes must be positive");
        if (cfg.per_class == 0) problems.push_back("per-class must be positive");
        if (cfg.motif_len == 0) problems.push_back("motif-len must be positive");
    }
    return problems;
}

Pipeline resolve(const RunConfig& cfg, std::string_view command)
{
    auto problems = validate(cfg, command);
    if (!problems.empty()) throw ConfigError(problems);
    Pipeline p;
    if (uses_selection(cfg, command)) p.method = build_method(cfg);
    if (wants_pipeline(command)) p.spec = build_similarity(cfg);
    if (command == "classify" || command == "cv") p.clf = parse_classifier(cfg.clf, cfg.k);
    p.cv.folds = cfg.folds;
    p.cv.repeats = cfg.repeats;
    p.cv.seed = cfg.seed;
    p.cv.threads = cfg.threads;
    p.cv.skip_failed_folds = cfg.skip_failed_folds;
    return p;
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg, std::string_view command)
{
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("command", std::string(command));
    if (cfg.data && command != "synth" && command != "report") out.emplace_back("data", *cfg.data);
    if (cfg.test && command == "classify") out.emplace_back("test", *cfg.test);
    if (cfg.refs && command == "transform") out.emplace_back("refs", *cfg.refs);

    if (command == "mine" || (uses_selection(cfg, command) && cfg.select == "pattern")) {
        auto sel = pattern_selection(cfg);
        out.emplace_back("preset", sel.name);
        out.emplace_back("minsup", fmt::format("{}", sel.mining.minsup));
        out.emplace_back("maxsize", std::to_string(sel.mining.maxsize));
        if (sel.mining.gap) out.emplace_back("gap", fmt::format("{}-{}", sel.mining.gap->mingap, sel.mining.gap->maxgap));
    }
    if (uses_selection(cfg, command)) out.emplace_back("method", describe(build_method(cfg)));
    if (wants_pipeline(command)) out.emplace_back("similarity", build_similarity(cfg).describe());
    if (command == "classify" || command == "cv") out.emplace_back("classifier", parse_classifier(cfg.clf, cfg.k).describe());
    if (command == "cv") {
        out.emplace_back("folds", std::to_string(cfg.folds));
        out.emplace_back("repeats", std::to_string(cfg.repeats));
        out.emplace_back("seed", std::to_string(cfg.seed));
        out.emplace_back("skip_failed_folds", cfg.skip_failed_folds ? "true" : "false");
    }
    if (command == "cv" || command == "classify")
        out.emplace_back("shuffle_labels", cfg.shuffle_labels ? std::to_string(*cfg.shuffle_labels) : "none");
    if (command == "synth") {
        out.emplace_back("classes", std::to_string(cfg.classes));
        out.emplace_back("per_class", std::to_string(cfg.per_class));
        out.emplace_back("motif_len", std::to_string(cfg.motif_len));
        out.emplace_back("noise_len", std::to_string(cfg.noise_len));
        out.emplace_back("seed", std::to_string(cfg.seed));
    }
    return out;
}

EvalReport parse_report_json(std::string_view json_text)
{
    auto j = json::parse(json_text);
    EvalReport r;
    for (const auto& [key, value] : j.at("config").items()) r.config.emplace_back(key, value.get<std::string>());
    r.class_names = j.at("classes").get<std::vector<std::string>>();
    for (const auto& jf : j.at("folds")) {
        FoldResult f;
        f.repeat = jf.at("repeat").get<std::size_t>();
        f.fold = jf.at("fold").get<std::size_t>();
        f.train_size = jf.at("train").get<std::size_t>();
        f.test_size = jf.at("test").get<std::size_t>();
        f.references = jf.at("references").get<std::size_t>();
        for (const auto& [name, count] : jf.at("references_per_class").items()) {
            ClassId c = 0;
            while (c < r.class_names.size() && r.class_names[c] != name) ++c;
            f.refs_per_class[c] = count.get<std::size_t>();
        }
        f.correct = jf.at("correct").get<std::size_t>();
        if (jf.contains("error"))
            f.error = jf.at("error").get<std::string>();
        else
            f.accuracy = jf.at("accuracy").get<double>();
        r.folds.push_back(std::move(f));
    }
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.stddev_accuracy = j.at("stddev_accuracy").get<double>();
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

}  // namespace refseq
