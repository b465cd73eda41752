#pragma once

// Similarity-to-reference embedding and its CSV / ARFF exports.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "refseq/refselect.hpp"
#include "refseq/seqcore.hpp"
#include "refseq/similarity.hpp"

namespace refseq {

/// |D| x |R| row-major matrix of raw similarities plus the row labels.
/// The similarity spec travels with the matrix so that train and test
/// matrices can be checked for compatibility.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<ClassId> labels;
    std::vector<std::string> feature_names;
    SimilaritySpec spec;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

/// values[i][j] = evaluate(spec, data[i].sequence, refs[j]).
FeatureMatrix transform(std::span<const LabeledSequence> data, const ReferenceSet& refs, const SimilaritySpec& spec,
                        unsigned threads = 1);

/// Throws std::invalid_argument unless both matrices share spec and width.
void check_compatible(const FeatureMatrix& train, const FeatureMatrix& test);

/// Header `f0,...,f{n-1},label`, then one row per instance. Reals use 17
/// significant digits so they parse back bit-exactly. Labels are written as
/// class names when `class_names` covers them, else as numeric ids; fields
/// are quoted RFC-4180 style when needed.
void write_csv(std::ostream& out, const FeatureMatrix& m, std::span<const std::string> class_names = {});
void export_csv(const FeatureMatrix& m, const std::filesystem::path& path, std::span<const std::string> class_names = {});

/// Numeric attributes f0..f{n-1} and a nominal `class` attribute listing
/// every entry of `class_names` (not just the labels present in `m`).
void write_arff(std::ostream& out, const FeatureMatrix& m, std::span<const std::string> class_names, const std::string& relation = "refseq");
void export_arff(const FeatureMatrix& m, const std::filesystem::path& path, std::span<const std::string> class_names,
                 const std::string& relation = "refseq");

/// Reads a CSV produced by write_csv. Labels are mapped through
/// `class_names`, which is extended with unseen labels in first-appearance
/// order.
FeatureMatrix read_csv(std::istream& in, std::vector<std::string>& class_names);
FeatureMatrix import_csv(const std::filesystem::path& path, std::vector<std::string>& class_names);

}  // namespace refseq
