// refseq: command-line driver for reference-based sequence classification.

#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <list>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "refseq/classify.hpp"
#include "refseq/cli.hpp"
#include "refseq/features.hpp"
#include "refseq/patterns.hpp"
#include "refseq/refselect.hpp"

using namespace refseq;

namespace {

// Binds flags to a scratch RunConfig and remembers which ones the user
// actually passed, so they can be laid over the JSON config afterwards.
class Binder {
public:
    explicit Binder(CLI::App* app) : app_(app) {}

    template <typename T>
    void option(const std::string& names, T RunConfig::*member, const std::string& help)
    {
        auto* opt = app_->add_option(names, scratch_.*member, help);
        links_.emplace_back(opt, [this, member](RunConfig& c) { c.*member = scratch_.*member; });
    }

    template <typename T>
    void option(const std::string& names, std::optional<T> RunConfig::*member, const std::string& help)
    {
        auto holder = std::make_shared<T>();
        auto* opt = app_->add_option(names, *holder, help);
        links_.emplace_back(opt, [holder, member](RunConfig& c) { c.*member = *holder; });
    }

    void flag(const std::string& names, bool RunConfig::*member, bool value, const std::string& help)
    {
        auto* opt = app_->add_flag(names, help);
        links_.emplace_back(opt, [member, value](RunConfig& c) { c.*member = value; });
    }

    void common()
    {
        app_->add_option("--config", config_path_, "JSON config file; flags override its values")->check(CLI::ExistingFile);
        option("--threads", &RunConfig::threads, "worker threads (results do not depend on it)");
    }

    RunConfig resolve() const
    {
        RunConfig cfg;
        if (!config_path_.empty()) apply_config_file(cfg, config_path_);
        for (const auto& [opt, copy] : links_)
            if (opt->count() > 0) copy(cfg);
        return cfg;
    }

    CLI::App* app() const { return app_; }

private:
    CLI::App* app_;
    RunConfig scratch_;
    std::string config_path_;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> links_;
};

void add_selection(Binder& b)
{
    b.option("--select,--method", &RunConfig::select, "reference selection: all, gahc, mht or pattern");
    b.option("--alpha", &RunConfig::alpha, "FDR level for mht (default 0.05)");
    b.option("--pointnum", &RunConfig::pointnum, "clusters for gahc (default ceil(|train|/10))");
    b.flag("--exclude-self", &RunConfig::include_self, false, "mht: drop a candidate's similarity to itself");
    b.option("--preset", &RunConfig::preset, "pattern preset (fsp, dsp, cdspm, scip, featuremine, pso-ab, occurrence, contrast, gapped)");
    b.option("--minsup", &RunConfig::minsup, "override the preset's minimum support");
    b.option("--maxsize", &RunConfig::maxsize, "override the preset's maximum pattern length");
}

void add_similarity(Binder& b)
{
    b.option("--sim", &RunConfig::sim, "similarity: sf1..sf6, jaccard, ssk, lcs-min (default jaccard)");
    b.option("--gamma", &RunConfig::gamma, "sf2 tolerance");
    b.option("--lambda", &RunConfig::lambda, "ssk decay");
    b.option("--n", &RunConfig::n, "ssk subsequence length");
}

void add_classifier(Binder& b)
{
    b.option("--clf", &RunConfig::clf, "classifier: knn or gnb");
    b.option("--k", &RunConfig::k, "neighbours for knn (default 1)");
}

// Output goes to the named file or, without one, to stdout.
template <typename Fn>
void emit(const std::optional<std::string>& path, Fn&& fn)
{
    if (!path) {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", *path));
    fn(out);
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", *path));
}

void write_echo(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& echo)
{
    for (const auto& [k, v] : echo) out << "# " << k << '\t' << v << '\n';
}

SequenceDataset load_data(const RunConfig& cfg)
{
    auto data = parse_dataset(std::filesystem::path(*cfg.data));
    if (cfg.shuffle_labels) data = permute_labels(data, *cfg.shuffle_labels);
    return data;
}

int run_mine(const RunConfig& cfg)
{
    resolve(cfg, "mine");
    auto data = parse_dataset(std::filesystem::path(*cfg.data));
    auto patterns = select_pattern_references(data.instances, pattern_selection(cfg), data.num_classes(), cfg.threads);
    emit(cfg.out, [&](std::ostream& out) {
        write_echo(out, config_echo(cfg, "mine"));
        write_patterns_tsv(out, patterns, data.alphabet, data.class_names);
    });
    std::cerr << fmt::format("mined {} patterns\n", patterns.size());
    return 0;
}

int run_select(const RunConfig& cfg)
{
    auto p = resolve(cfg, "select");
    auto data = parse_dataset(std::filesystem::path(*cfg.data));
    ReferenceSet refs;
    if (const auto* mht = std::get_if<SelectMht>(&p.method)) {
        auto [selected, report] = select_mht(data.instances, p.spec, mht->alpha, mht->include_self, cfg.threads);
        refs = std::move(selected);
        for (const auto& note : report.notes) std::cerr << "note: " << note << '\n';
        if (cfg.mht_report) emit(cfg.mht_report, [&](std::ostream& out) { write_mht_report_tsv(out, report); });
    } else {
        refs = select_references(data.instances, p.method, p.spec, data.num_classes(), cfg.threads);
    }
    emit(cfg.out, [&](std::ostream& out) {
        write_echo(out, config_echo(cfg, "select"));
        write_references(out, refs, &data.alphabet);
    });
    std::cerr << fmt::format("selected {} references\n", refs.size());
    return 0;
}

int run_transform(const RunConfig& cfg)
{
    auto p = resolve(cfg, "transform");
    auto data = parse_dataset(std::filesystem::path(*cfg.data));
    ReferenceSet refs;
    if (cfg.refs) {
        std::ifstream in(*cfg.refs, std::ios::binary);
        if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", *cfg.refs));
        refs = parse_references(in, data.alphabet, *cfg.refs);
    } else {
        refs = select_references(data.instances, p.method, p.spec, data.num_classes(), cfg.threads);
    }
    auto m = transform(data.instances, refs, p.spec, cfg.threads);
    const bool arff = cfg.format ? *cfg.format == "arff" : (cfg.out && cfg.out->ends_with(".arff"));
    emit(cfg.out, [&](std::ostream& out) {
        if (arff)
            write_arff(out, m, data.class_names);
        else
            write_csv(out, m, data.class_names);
    });
    std::cerr << fmt::format("{} x {} feature matrix\n", m.rows, m.cols);
    return 0;
}

int run_classify(const RunConfig& cfg)
{
    auto p = resolve(cfg, "classify");
    auto train = load_data(cfg);
    auto test = parse_dataset(std::filesystem::path(*cfg.test), &train);
    auto refs = select_references(train.instances, p.method, p.spec, train.num_classes(), cfg.threads);
    auto xtr = transform(train.instances, refs, p.spec, cfg.threads);
    auto xte = transform(test.instances, refs, p.spec, cfg.threads);
    auto pred = fit_predict(xtr, xte, p.clf);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == test.instances[i].label;
    const double accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
    emit(cfg.out, [&](std::ostream& out) {
        write_echo(out, config_echo(cfg, "classify"));
        out << "# references\t" << refs.size() << '\n';
        out << "index\tactual\tpredicted\n";
        for (std::size_t i = 0; i < pred.size(); ++i)
            out << i << '\t' << test.class_names[test.instances[i].label] << '\t' << test.class_names[pred[i]] << '\n';
        out << fmt::format("accuracy\t{:.17g}\n", accuracy);
    });
    std::cerr << fmt::format("accuracy {:.4f} ({} / {})\n", accuracy, correct, pred.size());
    return 0;
}

int run_cv(const RunConfig& cfg)
{
    auto p = resolve(cfg, "cv");
    auto data = load_data(cfg);
    auto report = cross_validate(data, p.method, p.spec, p.clf, p.cv);

    auto echo = config_echo(cfg, "cv");
    for (const auto& entry : report.config)
        if (std::none_of(echo.begin(), echo.end(), [&](const auto& e) { return e.first == entry.first; })) echo.push_back(entry);
    report.config = echo;

    emit(cfg.out, [&](std::ostream& out) { write_report_tsv(out, report); });
    if (cfg.json) emit(cfg.json, [&](std::ostream& out) { write_report_json(out, report); });
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::cerr << fmt::format("mean accuracy {:.4f} over {} folds ({} failed)\n", report.mean_accuracy,
                             report.folds.size() - report.failed_folds(), report.failed_folds());
    return 0;
}

int run_synth(const RunConfig& cfg)
{
    resolve(cfg, "synth");
    auto data = synth_gen(cfg.classes, cfg.per_class, cfg.motif_len, cfg.noise_len, cfg.seed);
    emit(cfg.out, [&](std::ostream& out) {
        write_echo(out, config_echo(cfg, "synth"));
        write_dataset(out, data);
    });
    return 0;
}

int run_report(const RunConfig& cfg)
{
    resolve(cfg, "report");
    std::ifstream in(*cfg.input, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", *cfg.input));
    std::stringstream buf;
    buf << in.rdbuf();
    auto report = parse_report_json(buf.str());
    emit(cfg.out, [&](std::ostream& out) { write_report_tsv(out, report); });
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Reference-based sequence classification"};
    app.require_subcommand(1);

    std::list<Binder> binders;
    struct Command {
        std::string name;
        Binder* binder;
        int (*run)(const RunConfig&);
    };
    std::vector<Command> commands;
    auto add = [&](const std::string& name, const std::string& help, int (*run)(const RunConfig&)) -> Binder& {
        auto& b = binders.emplace_back(app.add_subcommand(name, help));
        b.common();
        commands.push_back({name, &b, run});
        return b;
    };

    {
        auto& b = add("mine", "mine and filter sequential patterns with a preset", run_mine);
        b.option("--data", &RunConfig::data, "training dataset");
        b.option("--preset", &RunConfig::preset, "pattern preset (default fsp)");
        b.option("--minsup", &RunConfig::minsup, "override the preset's minimum support");
        b.option("--maxsize", &RunConfig::maxsize, "override the preset's maximum pattern length");
        b.option("--out", &RunConfig::out, "pattern table (TSV); stdout if omitted");
    }
    {
        auto& b = add("select", "choose reference sequences from a training set", run_select);
        b.option("--data", &RunConfig::data, "training dataset");
        add_selection(b);
        add_similarity(b);
        b.option("--out", &RunConfig::out, "reference file; stdout if omitted");
        b.option("--mht-report", &RunConfig::mht_report, "mht: per-candidate p-value table");
    }
    {
        auto& b = add("transform", "embed a dataset as similarities to references", run_transform);
        b.option("--data", &RunConfig::data, "dataset to transform");
        b.option("--refs", &RunConfig::refs, "reference file from `select`; otherwise references are selected from --data");
        add_selection(b);
        add_similarity(b);
        b.option("--format", &RunConfig::format, "csv or arff (default from --out extension, else csv)");
        b.option("--out", &RunConfig::out, "feature file; stdout if omitted");
    }
    {
        auto& b = add("classify", "train on one dataset and predict another", run_classify);
        b.option("--data,--train", &RunConfig::data, "training dataset");
        b.option("--test", &RunConfig::test, "test dataset");
        add_selection(b);
        add_similarity(b);
        add_classifier(b);
        b.option("--shuffle-labels", &RunConfig::shuffle_labels, "permute training labels with this seed (control run)");
        b.option("--out", &RunConfig::out, "predictions (TSV); stdout if omitted");
    }
    {
        auto& b = add("cv", "repeated stratified cross-validation of the full pipeline", run_cv);
        b.option("--data", &RunConfig::data, "dataset");
        add_selection(b);
        add_similarity(b);
        add_classifier(b);
        b.option("--folds", &RunConfig::folds, "folds per repeat (default 5)");
        b.option("--repeats", &RunConfig::repeats, "repeats (default 5)");
        b.option("--seed", &RunConfig::seed, "fold shuffling seed (default 42)");
        b.flag("--skip-failed-folds", &RunConfig::skip_failed_folds, true, "record failing folds instead of aborting");
        b.option("--shuffle-labels", &RunConfig::shuffle_labels, "permute labels with this seed before evaluating (control run)");
        b.option("--out", &RunConfig::out, "report (TSV); stdout if omitted");
        b.option("--json", &RunConfig::json, "report (JSON)");
    }
    {
        auto& b = add("synth", "generate a synthetic motif dataset", run_synth);
        b.option("--classes", &RunConfig::classes, "number of classes (default 2)");
        b.option("--per-class", &RunConfig::per_class, "instances per class (default 40)");
        b.option("--motif-len", &RunConfig::motif_len, "motif length (default 5)");
        b.option("--noise-len", &RunConfig::noise_len, "noise items per instance (default 10)");
        b.option("--seed", &RunConfig::seed, "generator seed (default 42)");
        b.option("--out", &RunConfig::out, "dataset file; stdout if omitted");
    }
    {
        auto& b = add("report", "render a JSON report as TSV", run_report);
        b.option("--input", &RunConfig::input, "JSON report written by `cv --json`");
        b.option("--out", &RunConfig::out, "TSV output; stdout if omitted");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (const auto& cmd : commands) {
        if (!cmd.binder->app()->parsed()) continue;
        try {
            return cmd.run(cmd.binder->resolve());
        } catch (const ConfigError& e) {
            std::cerr << "refseq " << cmd.name << ": " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "refseq " << cmd.name << ": error: " << e.what() << '\n';
            return 1;
        }
    }
    return 1;
}
