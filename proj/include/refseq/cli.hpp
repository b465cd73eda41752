#pragma once

// Everything the command-line driver needs that is worth testing on its
// own: the dataset text format, reference files, the synthetic generator
// and run configuration handling.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "refseq/classify.hpp"
#include "refseq/patterns.hpp"
#include "refseq/refselect.hpp"
#include "refseq/seqcore.hpp"
#include "refseq/similarity.hpp"

namespace refseq {

/// Malformed dataset or reference text; carries the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// One instance per line, `label<TAB>item item ...`. Blank lines and lines
/// starting with `#` are skipped. Tokens and labels are interned in
/// first-appearance order, continuing from `vocabulary` when given so that
/// a test file shares ids with its training file.
SequenceDataset parse_dataset(std::istream& in, const std::string& source = "<input>", const SequenceDataset* vocabulary = nullptr);
SequenceDataset parse_dataset(const std::filesystem::path& path, const SequenceDataset* vocabulary = nullptr);

void write_dataset(std::ostream& out, const SequenceDataset& data);

/// Reads `provenance<TAB>items` lines as written by write_references,
/// interning item tokens into `alphabet`.
ReferenceSet parse_references(std::istream& in, Alphabet& alphabet, const std::string& source = "<input>");

/// `classes` classes of `per_class` instances each. Every class has its own
/// random motif of `motif_len` items drawn from items private to that class;
/// each instance is the motif randomly interleaved with `noise_len` items
/// from a noise alphabet shared by all classes.
SequenceDataset synth_gen(std::size_t classes, std::size_t per_class, std::size_t motif_len, std::size_t noise_len, std::uint64_t seed);

inline constexpr std::size_t kSynthNoiseAlphabet = 10;

/// Settings shared by every subcommand. Unset optionals take the documented
/// defaults during resolution.
struct RunConfig {
    std::optional<std::string> data;
    std::optional<std::string> test;
    std::optional<std::string> refs;
    std::optional<std::string> input;  // report: a JSON report to render

    std::string select = "all";  // all | gahc | mht | pattern
    double alpha = 0.05;
    std::optional<std::size_t> pointnum;
    bool include_self = true;
    std::string preset = "fsp";
    std::optional<double> minsup;
    std::optional<std::size_t> maxsize;

    std::optional<std::string> sim;  // defaults to jaccard, or the preset's own similarity
    std::optional<double> gamma;
    std::optional<double> lambda;
    std::optional<std::size_t> n;

    std::string clf = "knn";
    std::size_t k = 1;

    std::size_t folds = 5;
    std::size_t repeats = 5;
    std::uint64_t seed = 42;
    bool skip_failed_folds = false;
    std::optional<std::uint64_t> shuffle_labels;

    std::size_t classes = 2;
    std::size_t per_class = 40;
    std::size_t motif_len = 5;
    std::size_t noise_len = 10;

    unsigned threads = 1;

    std::optional<std::string> out;
    std::optional<std::string> json;
    std::optional<std::string> format;      // csv | arff for transform
    std::optional<std::string> mht_report;  // select: per-candidate p-value table
};

/// Thrown with every violated constraint, one per line.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::vector<std::string>& problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Overlays the keys of a JSON object onto `cfg`. Keys are the long flag
/// names with dashes replaced by underscores; unknown keys and type
/// mismatches are all reported together.
void apply_config_json(RunConfig& cfg, std::string_view json_text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Module objects built from a RunConfig.
struct Pipeline {
    SelectionMethod method;
    SimilaritySpec spec;
    ClassifierSpec clf;
    CvConfig cv;
};

/// Lists every violated precondition for `command` (empty when valid).
std::vector<std::string> validate(const RunConfig& cfg, std::string_view command);

/// The preset named by cfg.preset with minsup / maxsize overrides applied.
PatternSelection pattern_selection(const RunConfig& cfg);

/// Validates, then builds the pipeline; throws ConfigError.
Pipeline resolve(const RunConfig& cfg, std::string_view command);

/// Key/value echo of the settings that influence results. Thread count and
/// output paths are left out so reports compare byte-for-byte.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg, std::string_view command);

/// Reads a report written by write_report_json back into memory.
EvalReport parse_report_json(std::string_view json_text);

}  // namespace refseq
