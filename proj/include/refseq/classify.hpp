#pragma once

// Built-in classifiers over feature matrices and the repeated stratified
// cross-validation harness.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "refseq/features.hpp"
#include "refseq/refselect.hpp"
#include "refseq/seqcore.hpp"
#include "refseq/similarity.hpp"

namespace refseq {

struct KnnConfig {
    std::size_t k = 1;
};

/// Majority label among the k rows nearest to `query` (Euclidean). Equal
/// distances keep the lower row index; equal votes go to the smaller class id.
ClassId knn_predict(const FeatureMatrix& train, std::span<const double> query, const KnnConfig& cfg = {});

inline constexpr double kGnbVarianceFloor = 1e-9;

struct GnbModel {
    std::size_t features = 0;
    std::vector<ClassId> classes;  // ascending, only fitted classes
    std::vector<double> prior;     // parallel to `classes`
    std::vector<double> mean;      // classes.size() x features
    std::vector<double> variance;  // population variance + floor
};

/// With num_classes == 0 the classes present in `train` are fitted;
/// otherwise every id below num_classes must have at least one row.
GnbModel gnb_fit(const FeatureMatrix& train, std::size_t num_classes = 0);

/// log prior + Gaussian log-likelihood per fitted class.
std::vector<double> gnb_joint_log_likelihood(const GnbModel& model, std::span<const double> query);
ClassId gnb_predict(const GnbModel& model, std::span<const double> query);

struct ClassifierSpec {
    enum class Kind { KNN, GNB } kind = Kind::KNN;
    KnnConfig knn;

    std::string describe() const;
};

ClassifierSpec parse_classifier(const std::string& name, std::size_t k = 1);

struct CvConfig {
    std::size_t folds = 5;
    std::size_t repeats = 5;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    bool skip_failed_folds = false;
    // Evaluate every dataset pair once and slice it per fold. Only used by
    // selectors whose references are training sequences, and only while
    // instances^2 stays under the limit.
    bool reuse_similarities = true;
    std::size_t similarity_cache_limit = std::size_t{1} << 26;

    void validate() const;
};

struct FoldAssignment {
    std::vector<std::vector<std::size_t>> fold_of;  // [repeat][instance] -> fold
    std::vector<std::string> warnings;
};

/// Per repeat and per class (ascending id), the class's indices in original
/// order are Fisher-Yates shuffled with a generator seeded by (seed, repeat)
/// and dealt round-robin. The dealing position carries over from one class
/// to the next so fold sizes also stay within one of each other overall.
FoldAssignment stratified_folds(std::span<const ClassId> labels, const CvConfig& cfg);

struct FoldResult {
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::size_t references = 0;
    std::map<ClassId, std::size_t> refs_per_class;  // only for training-sequence references
    std::vector<std::size_t> reference_sources;     // dataset indices of training-sequence references
    std::vector<std::pair<ClassId, ClassId>> predictions;  // (actual, predicted) per test row
    std::optional<std::string> error;
};

struct EvalReport {
    std::vector<std::pair<std::string, std::string>> config;  // resolved settings, in echo order
    std::vector<std::string> class_names;
    std::vector<FoldResult> folds;                             // ordered by (repeat, fold)
    double mean_accuracy = 0.0;
    double stddev_accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;           // [actual][predicted]
    std::vector<std::string> warnings;

    std::size_t failed_folds() const;
};

/// Runs reference selection, transformation and classification on every
/// repeat x fold split. Selection and fitting see only the training part.
/// A failing fold aborts the run unless cfg.skip_failed_folds is set, in
/// which case it is recorded and left out of the mean.
EvalReport cross_validate(const SequenceDataset& data, const SelectionMethod& method, const SimilaritySpec& spec,
                          const ClassifierSpec& clf, const CvConfig& cfg);

/// Trains on `train` and predicts every row of `test`.
std::vector<ClassId> fit_predict(const FeatureMatrix& train, const FeatureMatrix& test, const ClassifierSpec& clf);

/// Copy of `data` with labels permuted by a seeded shuffle.
SequenceDataset permute_labels(const SequenceDataset& data, std::uint64_t seed);

void write_report_tsv(std::ostream& out, const EvalReport& report);
void write_report_json(std::ostream& out, const EvalReport& report);

}  // namespace refseq
