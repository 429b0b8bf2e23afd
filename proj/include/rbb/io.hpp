#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbb/composition.hpp"

namespace rbb::io {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double x);

/// Strict decimal parse; rejects trailing garbage, NaN and infinities.
std::optional<double> parse_double(std::string_view text);

/// Matrix text: first row is the feature ids (first cell is a corner label),
/// first column the sample ids. Comma or tab delimited, detected from the
/// header line. Errors carry 1-based line and column positions.
CompositionMatrix read_matrix(std::istream& in, const std::string& source = "<stream>", bool features_in_rows = false);
CompositionMatrix read_matrix_file(const std::filesystem::path& path, bool features_in_rows = false);

enum class OutcomeHint { Auto, Binary, Continuous };

/// Two columns: sample id, value. A first line whose value cell is not numeric
/// is taken as a header. With `Auto`, all-0/1 values are treated as binary.
/// The result is ordered to match `sample_order`.
Outcome read_outcome(std::istream& in, const Labels& sample_order, OutcomeHint hint = OutcomeHint::Auto,
                     const std::string& source = "<stream>");
Outcome read_outcome_file(const std::filesystem::path& path, const Labels& sample_order,
                          OutcomeHint hint = OutcomeHint::Auto);

/// Plain tab separated table with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const;
};

Table matrix_table(const Eigen::MatrixXd& values, const Labels& sample_ids, const Labels& column_ids,
                   const std::string& corner = "sample");

/// Ordered `key = value` document. Keys may be dotted to express nesting.
/// Blank lines and lines starting with '#' are ignored when parsing.
class KeyValueDoc {
public:
    void set(const std::string& key, std::string value);
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, long long value) { set(key, std::to_string(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }

    void set_list(const std::string& key, const std::vector<std::string>& values);
    std::vector<std::string> get_list(const std::string& key) const;

    bool contains(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::optional<std::string> find(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
    std::string to_string() const;

    static KeyValueDoc parse(std::istream& in, const std::string& source = "<stream>");
    static KeyValueDoc parse_file(const std::filesystem::path& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

/// Writes through a sibling temporary file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

} // namespace rbb::io
