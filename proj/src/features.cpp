#include "refseq/features.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace refseq {

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string arff_name(const std::string& s)
{
    if (!s.empty() && s.find_first_of(" \t,{}'\"%") == std::string::npos) return s;
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    return out + '\'';
}

std::string label_text(ClassId label, std::span<const std::string> class_names)
{
    return label < class_names.size() ? class_names[label] : std::to_string(label);
}

// Splits one CSV record; quoted fields may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields)
{
    fields.clear();
    std::string field;
    bool quoted = false, any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing: {}", path.string(), std::strerror(errno)));
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("failed writing '{}': {}", path.string(), std::strerror(errno)));
}

}  // namespace

FeatureMatrix transform(std::span<const LabeledSequence> data, const ReferenceSet& refs, const SimilaritySpec& spec, unsigned threads)
{
    if (data.empty()) throw std::invalid_argument("transform: dataset must be non-empty");
    if (refs.empty()) throw std::invalid_argument("transform: reference set must be non-empty");

    std::vector<Sequence> rows;
    rows.reserve(data.size());
    for (const auto& inst : data) rows.push_back(inst.sequence);
    const auto cols = refs.sequences();
    auto sim = similarity_matrix(rows, cols, spec, threads);
    for (std::size_t k = 0; k < sim.values.size(); ++k)
        if (!std::isfinite(sim.values[k]))
            throw std::runtime_error(fmt::format("similarity at ({}, {}) is not finite", k / sim.cols, k % sim.cols));

    FeatureMatrix m;
    m.rows = sim.rows;
    m.cols = sim.cols;
    m.values = std::move(sim.values);
    m.spec = spec;
    for (const auto& inst : data) m.labels.push_back(inst.label);
    for (const auto& r : refs.items) m.feature_names.push_back(r.provenance);
    return m;
}

void check_compatible(const FeatureMatrix& train, const FeatureMatrix& test)
{
    if (!(train.spec == test.spec))
        throw std::invalid_argument(fmt::format("feature matrices use different similarities ({} vs {})", train.spec.describe(), test.spec.describe()));
    if (train.cols != test.cols)
        throw std::invalid_argument(fmt::format("feature matrices differ in width ({} vs {})", train.cols, test.cols));
}

void write_csv(std::ostream& out, const FeatureMatrix& m, std::span<const std::string> class_names)
{
    for (std::size_t j = 0; j < m.cols; ++j) out << 'f' << j << ',';
    out << "label\n";
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) out << fmt::format("{:.17g},", m(i, j));
        out << csv_field(label_text(m.labels[i], class_names)) << '\n';
    }
}

void export_csv(const FeatureMatrix& m, const std::filesystem::path& path, std::span<const std::string> class_names)
{
    write_file(path, [&](std::ostream& out) { write_csv(out, m, class_names); });
}

void write_arff(std::ostream& out, const FeatureMatrix& m, std::span<const std::string> class_names, const std::string& relation)
{
    std::vector<std::string> names(class_names.begin(), class_names.end());
    for (auto label : m.labels)
        while (names.size() <= label) names.push_back(std::to_string(names.size()));

    out << "% similarity: " << m.spec.describe() << '\n';
    for (std::size_t j = 0; j < m.cols && j < m.feature_names.size(); ++j) out << "% f" << j << " = " << m.feature_names[j] << '\n';
    out << "@RELATION " << arff_name(relation) << "\n\n";
    for (std::size_t j = 0; j < m.cols; ++j) out << "@ATTRIBUTE f" << j << " NUMERIC\n";
    out << "@ATTRIBUTE class {";
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << arff_name(names[c]);
    out << "}\n\n@DATA\n";
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) out << fmt::format("{:.17g},", m(i, j));
        out << arff_name(names[m.labels[i]]) << '\n';
    }
}

void export_arff(const FeatureMatrix& m, const std::filesystem::path& path, std::span<const std::string> class_names,
                 const std::string& relation)
{
    write_file(path, [&](std::ostream& out) { write_arff(out, m, class_names, relation); });
}

FeatureMatrix read_csv(std::istream& in, std::vector<std::string>& class_names)
{
    std::vector<std::string> fields;
    if (!read_record(in, fields) || fields.empty() || fields.back() != "label")
        throw std::runtime_error("feature CSV: missing header ending in 'label'");

    FeatureMatrix m;
    m.cols = fields.size() - 1;
    for (std::size_t j = 0; j < m.cols; ++j) m.feature_names.push_back(fields[j]);

    std::size_t line = 1;
    while (read_record(in, fields)) {
        ++line;
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != m.cols + 1)
            throw std::runtime_error(fmt::format("feature CSV line {}: expected {} fields, got {}", line, m.cols + 1, fields.size()));
        for (std::size_t j = 0; j < m.cols; ++j) {
            double v = 0.0;
            const auto& f = fields[j];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw std::runtime_error(fmt::format("feature CSV line {}: '{}' is not a number", line, f));
            m.values.push_back(v);
        }
        const auto& label = fields.back();
        ClassId id = 0;
        while (id < class_names.size() && class_names[id] != label) ++id;
        if (id == class_names.size()) class_names.push_back(label);
        m.labels.push_back(id);
        ++m.rows;
    }
    return m;
}

FeatureMatrix import_csv(const std::filesystem::path& path, std::vector<std::string>& class_names)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}' for reading: {}", path.string(), std::strerror(errno)));
    return read_csv(in, class_names);
}

}  // namespace refseq
