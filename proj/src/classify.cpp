#include "refseq/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <variant>

#include <fmt/format.h>
#include "json.hpp"

#include "refseq/parallel.hpp"
#include "refseq/random.hpp"

namespace refseq {

namespace {

// Not caught per fold: a leaked reference means the harness is broken.
struct LeakageError : std::logic_error {
    using std::logic_error::logic_error;
};

bool sequence_references(const SelectionMethod& method)
{
    return std::holds_alternative<SelectAll>(method) || std::holds_alternative<SelectGahc>(method) ||
           std::holds_alternative<SelectMht>(method);
}

// All pairwise similarities of the dataset, or nothing when any pair fails to
// evaluate (the per-fold path then reproduces the failure where it belongs).
std::optional<SimilarityMatrix> full_similarities(const SequenceDataset& data, const SimilaritySpec& spec, unsigned threads)
{
    const std::size_t n = data.size();
    SimilarityMatrix m;
    m.rows = m.cols = n;
    m.spec = spec;
    m.values.assign(n * n, 0.0);
    std::vector<char> failed(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            try {
                m.values[i * n + j] = evaluate(spec, data.instances[i].sequence, data.instances[j].sequence);
            } catch (const std::exception&) {
                failed[i] = 1;
                return;
            }
        }
    });
    if (std::find(failed.begin(), failed.end(), 1) != failed.end()) return std::nullopt;
    return m;
}

SimilarityMatrix slice(const SimilarityMatrix& full, std::span<const std::size_t> rows, std::span<const std::size_t> cols)
{
    SimilarityMatrix m;
    m.rows = rows.size();
    m.cols = cols.size();
    m.spec = full.spec;
    m.values.reserve(m.rows * m.cols);
    for (auto r : rows)
        for (auto c : cols) m.values.push_back(full(r, c));
    return m;
}

FeatureMatrix sliced_features(const SimilarityMatrix& full, std::span<const std::size_t> rows, std::span<const std::size_t> ref_cols,
                              std::span<const LabeledSequence> data, const ReferenceSet& refs)
{
    if (data.empty()) throw std::invalid_argument("transform: dataset must be non-empty");
    if (refs.empty()) throw std::invalid_argument("transform: reference set must be non-empty");
    auto sim = slice(full, rows, ref_cols);
    for (std::size_t k = 0; k < sim.values.size(); ++k)
        if (!std::isfinite(sim.values[k]))
            throw std::runtime_error(fmt::format("similarity at ({}, {}) is not finite", k / sim.cols, k % sim.cols));
    FeatureMatrix f;
    f.rows = sim.rows;
    f.cols = sim.cols;
    f.values = std::move(sim.values);
    f.spec = full.spec;
    for (const auto& inst : data) f.labels.push_back(inst.label);
    for (const auto& r : refs.items) f.feature_names.push_back(r.provenance);
    return f;
}

void check_query(const FeatureMatrix& train, std::span<const double> query)
{
    if (query.size() != train.cols)
        throw std::invalid_argument(fmt::format("query has {} features, training matrix has {}", query.size(), train.cols));
}

ClassId argmax_smallest(const std::vector<std::pair<ClassId, double>>& scores)
{
    ClassId best = scores.front().first;
    double best_score = scores.front().second;
    for (const auto& [cls, s] : scores)
        if (s > best_score || (s == best_score && cls < best)) {
            best = cls;
            best_score = s;
        }
    return best;
}

std::string class_name(const EvalReport& r, ClassId c)
{
    return c < r.class_names.size() ? r.class_names[c] : std::to_string(c);
}

}  // namespace

ClassId knn_predict(const FeatureMatrix& train, std::span<const double> query, const KnnConfig& cfg)
{
    check_query(train, query);
    if (cfg.k == 0) throw std::invalid_argument("knn: k must be positive");
    if (cfg.k > train.rows)
        throw std::invalid_argument(fmt::format("knn: k = {} exceeds the {} training rows", cfg.k, train.rows));

    std::vector<std::pair<double, std::size_t>> dist(train.rows);
    for (std::size_t i = 0; i < train.rows; ++i) {
        double d = 0.0;
        auto row = train.row(i);
        for (std::size_t j = 0; j < train.cols; ++j) d += (row[j] - query[j]) * (row[j] - query[j]);
        dist[i] = {d, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(cfg.k), dist.end());

    std::map<ClassId, std::size_t> votes;
    for (std::size_t r = 0; r < cfg.k; ++r) ++votes[train.labels[dist[r].second]];
    std::vector<std::pair<ClassId, double>> scores;
    for (auto [cls, n] : votes) scores.emplace_back(cls, static_cast<double>(n));
    return argmax_smallest(scores);
}

GnbModel gnb_fit(const FeatureMatrix& train, std::size_t num_classes)
{
    if (train.rows == 0) throw std::invalid_argument("gnb: empty training matrix");
    std::map<ClassId, std::vector<std::size_t>> rows;
    for (std::size_t i = 0; i < train.rows; ++i) rows[train.labels[i]].push_back(i);
    if (num_classes > 0) {
        for (ClassId c = 0; c < num_classes; ++c)
            if (!rows.count(c)) throw std::invalid_argument(fmt::format("gnb: class {} has no training rows", c));
        if (rows.rbegin()->first >= num_classes)
            throw std::invalid_argument(fmt::format("gnb: label {} outside the {} requested classes", rows.rbegin()->first, num_classes));
    }

    GnbModel m;
    m.features = train.cols;
    for (const auto& [cls, members] : rows) {
        m.classes.push_back(cls);
        m.prior.push_back(static_cast<double>(members.size()) / static_cast<double>(train.rows));
        const double n = static_cast<double>(members.size());
        for (std::size_t j = 0; j < train.cols; ++j) {
            double mu = 0.0;
            for (auto i : members) mu += train(i, j);
            mu /= n;
            double var = 0.0;
            for (auto i : members) var += (train(i, j) - mu) * (train(i, j) - mu);
            m.mean.push_back(mu);
            m.variance.push_back(var / n + kGnbVarianceFloor);
        }
    }
    return m;
}

std::vector<double> gnb_joint_log_likelihood(const GnbModel& model, std::span<const double> query)
{
    if (query.size() != model.features)
        throw std::invalid_argument(fmt::format("query has {} features, model has {}", query.size(), model.features));
    std::vector<double> out;
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        double ll = std::log(model.prior[c]);
        for (std::size_t j = 0; j < model.features; ++j) {
            const double var = model.variance[c * model.features + j];
            const double d = query[j] - model.mean[c * model.features + j];
            ll += -0.5 * std::log(2.0 * std::numbers::pi * var) - d * d / (2.0 * var);
        }
        out.push_back(ll);
    }
    return out;
}

ClassId gnb_predict(const GnbModel& model, std::span<const double> query)
{
    auto ll = gnb_joint_log_likelihood(model, query);
    std::vector<std::pair<ClassId, double>> scores;
    for (std::size_t c = 0; c < ll.size(); ++c) scores.emplace_back(model.classes[c], ll[c]);
    return argmax_smallest(scores);
}

std::string ClassifierSpec::describe() const
{
    return kind == Kind::KNN ? fmt::format("knn(k={})", knn.k) : "gnb";
}

ClassifierSpec parse_classifier(const std::string& name, std::size_t k)
{
    ClassifierSpec c;
    if (name == "knn") {
        c.kind = ClassifierSpec::Kind::KNN;
        if (k == 0) throw std::invalid_argument("knn: k must be positive");
        c.knn.k = k;
    } else if (name == "gnb" || name == "nb") {
        c.kind = ClassifierSpec::Kind::GNB;
    } else {
        throw std::invalid_argument(fmt::format("unknown classifier '{}' (expected knn or gnb)", name));
    }
    return c;
}

void CvConfig::validate() const
{
    if (folds < 2) throw std::invalid_argument(fmt::format("folds must be >= 2, got {}", folds));
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
}

FoldAssignment stratified_folds(std::span<const ClassId> labels, const CvConfig& cfg)
{
    cfg.validate();
    if (cfg.folds > labels.size())
        throw std::invalid_argument(fmt::format("folds = {} exceeds the {} instances", cfg.folds, labels.size()));

    std::map<ClassId, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < labels.size(); ++i) strata[labels[i]].push_back(i);

    FoldAssignment out;
    for (const auto& [cls, members] : strata)
        if (members.size() < cfg.folds)
            out.warnings.push_back(
                fmt::format("class {} has {} instances, fewer than {} folds; some folds get none", cls, members.size(), cfg.folds));

    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        auto rng = seeded_rng({cfg.seed, r});
        std::vector<std::size_t> fold_of(labels.size());
        std::size_t pos = 0;
        for (const auto& [cls, members] : strata) {
            auto order = members;
            fisher_yates(order, rng);
            for (auto idx : order) fold_of[idx] = pos++ % cfg.folds;
        }
        out.fold_of.push_back(std::move(fold_of));
    }
    return out;
}

std::vector<ClassId> fit_predict(const FeatureMatrix& train, const FeatureMatrix& test, const ClassifierSpec& clf)
{
    check_compatible(train, test);
    std::vector<ClassId> out;
    out.reserve(test.rows);
    if (clf.kind == ClassifierSpec::Kind::KNN) {
        for (std::size_t i = 0; i < test.rows; ++i) out.push_back(knn_predict(train, test.row(i), clf.knn));
    } else {
        auto model = gnb_fit(train);
        for (std::size_t i = 0; i < test.rows; ++i) out.push_back(gnb_predict(model, test.row(i)));
    }
    return out;
}

std::size_t EvalReport::failed_folds() const
{
    return static_cast<std::size_t>(std::count_if(folds.begin(), folds.end(), [](const FoldResult& f) { return f.error.has_value(); }));
}

EvalReport cross_validate(const SequenceDataset& data, const SelectionMethod& method, const SimilaritySpec& spec,
                          const ClassifierSpec& clf, const CvConfig& cfg)
{
    cfg.validate();
    spec.validate();
    if (data.size() == 0) throw std::invalid_argument("cross-validation needs a non-empty dataset");

    std::vector<ClassId> labels;
    for (const auto& inst : data.instances) labels.push_back(inst.label);
    auto assignment = stratified_folds(labels, cfg);

    std::size_t num_classes = data.num_classes();
    for (auto l : labels) num_classes = std::max<std::size_t>(num_classes, l + 1);

    EvalReport report;
    report.config = {
        {"method", describe(method)},
        {"similarity", spec.describe()},
        {"classifier", clf.describe()},
        {"folds", std::to_string(cfg.folds)},
        {"repeats", std::to_string(cfg.repeats)},
        {"seed", std::to_string(cfg.seed)},
        {"skip_failed_folds", cfg.skip_failed_folds ? "true" : "false"},
        {"instances", std::to_string(data.size())},
        {"classes", std::to_string(num_classes)},
    };
    for (ClassId c = 0; c < num_classes; ++c)
        report.class_names.push_back(c < data.class_names.size() ? data.class_names[c] : std::to_string(c));
    report.warnings = assignment.warnings;
    report.folds.resize(cfg.repeats * cfg.folds);

    std::optional<SimilarityMatrix> full;
    if (cfg.reuse_similarities && sequence_references(method) && data.size() * data.size() <= cfg.similarity_cache_limit)
        full = full_similarities(data, spec, cfg.threads);

    parallel_for(report.folds.size(), cfg.threads, [&](std::size_t task) {
        FoldResult& res = report.folds[task];
        res.repeat = task / cfg.folds;
        res.fold = task % cfg.folds;
        const auto& fold_of = assignment.fold_of[res.repeat];

        std::vector<std::size_t> train_idx, test_idx;
        std::vector<LabeledSequence> train, test;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold_of[i] == res.fold) {
                test_idx.push_back(i);
                test.push_back(data.instances[i]);
            } else {
                train_idx.push_back(i);
                train.push_back(data.instances[i]);
            }
        }
        res.train_size = train.size();
        res.test_size = test.size();

        try {
            std::optional<SimilarityMatrix> train_sim;
            if (full) train_sim = slice(*full, train_idx, train_idx);
            auto refs = select_references(train, method, spec, num_classes, 1, train_sim ? &*train_sim : nullptr);
            res.references = refs.size();
            for (const auto& ref : refs.items) {
                if (!ref.source) continue;
                if (*ref.source >= train_idx.size()) throw LeakageError("reference source outside the training fold");
                const auto original = train_idx[*ref.source];
                // leakage audit: a reference drawn from the held-out fold is a bug
                if (fold_of[original] == res.fold)
                    throw LeakageError(fmt::format("reference {} comes from the test fold", original));
                res.reference_sources.push_back(original);
                if (ref.source_class) ++res.refs_per_class[*ref.source_class];
            }
            FeatureMatrix xtr, xte;
            if (full && res.reference_sources.size() == refs.size()) {
                xtr = sliced_features(*full, train_idx, res.reference_sources, train, refs);
                xte = sliced_features(*full, test_idx, res.reference_sources, test, refs);
            } else {
                xtr = transform(train, refs, spec, 1);
                xte = transform(test, refs, spec, 1);
            }
            auto pred = fit_predict(xtr, xte, clf);
            for (std::size_t i = 0; i < test.size(); ++i) {
                res.predictions.emplace_back(test[i].label, pred[i]);
                if (pred[i] == test[i].label) ++res.correct;
            }
            res.accuracy = static_cast<double>(res.correct) / static_cast<double>(res.test_size);
        } catch (const LeakageError&) {
            throw;
        } catch (const std::exception& e) {
            res.error = e.what();
        }
    });

    std::vector<double> acc;
    report.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    for (const auto& f : report.folds) {
        if (f.error) {
            if (!cfg.skip_failed_folds)
                throw std::runtime_error(fmt::format("repeat {} fold {}: {}", f.repeat, f.fold, *f.error));
            continue;
        }
        acc.push_back(f.accuracy);
        for (auto [actual, predicted] : f.predictions) ++report.confusion[actual][predicted];
    }
    if (acc.empty()) throw std::runtime_error("every fold failed");
    report.mean_accuracy = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
    if (acc.size() > 1) {
        double ss = 0.0;
        for (double a : acc) ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
        report.stddev_accuracy = std::sqrt(ss / static_cast<double>(acc.size() - 1));
    }
    return report;
}

SequenceDataset permute_labels(const SequenceDataset& data, std::uint64_t seed)
{
    std::vector<ClassId> labels;
    for (const auto& inst : data.instances) labels.push_back(inst.label);
    auto rng = seeded_rng({seed});
    fisher_yates(labels, rng);
    SequenceDataset out = data;
    for (std::size_t i = 0; i < labels.size(); ++i) out.instances[i].label = labels[i];
    return out;
}

void write_report_tsv(std::ostream& out, const EvalReport& r)
{
    for (const auto& [key, value] : r.config) out << "# " << key << '\t' << value << '\n';
    for (const auto& w : r.warnings) out << "# warning\t" << w << '\n';
    out << "repeat\tfold\ttrain\ttest\treferences\tcorrect\taccuracy\tstatus\n";
    for (const auto& f : r.folds) {
        out << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t", f.repeat, f.fold, f.train_size, f.test_size, f.references, f.correct);
        if (f.error)
            out << "NA\tfailed: " << f.error->substr(0, f.error->find('\n')) << '\n';
        else
            out << fmt::format("{:.17g}\tok\n", f.accuracy);
    }
    out << fmt::format("mean_accuracy\t{:.17g}\n", r.mean_accuracy);
    out << fmt::format("stddev_accuracy\t{:.17g}\n", r.stddev_accuracy);
    out << "confusion";
    for (ClassId c = 0; c < r.confusion.size(); ++c) out << '\t' << class_name(r, c);
    out << '\n';
    for (ClassId a = 0; a < r.confusion.size(); ++a) {
        out << class_name(r, a);
        for (auto n : r.confusion[a]) out << '\t' << n;
        out << '\n';
    }
}

void write_report_json(std::ostream& out, const EvalReport& r)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [key, value] : r.config) config[key] = value;
    j["config"] = config;
    j["classes"] = r.class_names;
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const auto& f : r.folds) {
        nlohmann::ordered_json jf;
        jf["repeat"] = f.repeat;
        jf["fold"] = f.fold;
        jf["train"] = f.train_size;
        jf["test"] = f.test_size;
        jf["references"] = f.references;
        nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
        for (auto [cls, n] : f.refs_per_class) per_class[class_name(r, cls)] = n;
        jf["references_per_class"] = per_class;
        jf["correct"] = f.correct;
        if (f.error) {
            jf["accuracy"] = nullptr;
            jf["error"] = *f.error;
        } else {
            jf["accuracy"] = f.accuracy;
        }
        folds.push_back(std::move(jf));
    }
    j["folds"] = std::move(folds);
    j["mean_accuracy"] = r.mean_accuracy;
    j["stddev_accuracy"] = r.stddev_accuracy;
    j["confusion"] = r.confusion;
    j["warnings"] = r.warnings;
    out << j.dump(2) << '\n';
}

}  // namespace refseq
