#include "rbb/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "rbb/error.hpp"

namespace rbb::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string where(const std::string& source, std::size_t line, std::size_t column) {
    return source + ": line " + std::to_string(line) + ", column " + std::to_string(column);
}

bool blank(std::string_view line) { return trim(line).empty(); }

std::ifstream open_input(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(ErrorKind::Path, "file not found: " + path.string());
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Path, "cannot open: " + path.string());
    return in;
}

} // namespace

std::string format_double(double x) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

CompositionMatrix read_matrix(std::istream& in, const std::string& source, bool features_in_rows) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<char> delim;
    std::vector<std::string> header;
    Labels row_ids;
    std::vector<std::vector<double>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        if (!delim) {
            delim = line.find('\t') != std::string::npos ? '\t' : ',';
            header = split(line, *delim);
            if (header.size() < 2) fail(ErrorKind::Parse, where(source, line_no, 1) + ": header has no column ids");
            for (std::size_t c = 1; c < header.size(); ++c) {
                if (header[c].empty()) fail(ErrorKind::Parse, where(source, line_no, c + 1) + ": empty column id");
            }
            continue;
        }
        auto cells = split(line, *delim);
        if (cells.size() != header.size()) {
            fail(ErrorKind::Parse, where(source, line_no, std::min(cells.size(), header.size()) + 1) + ": expected " +
                                       std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
        }
        if (cells[0].empty()) fail(ErrorKind::Parse, where(source, line_no, 1) + ": empty row id");
        std::vector<double> values;
        values.reserve(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            auto v = parse_double(cells[c]);
            if (!v) fail(ErrorKind::Parse, where(source, line_no, c + 1) + ": '" + cells[c] + "' is not a finite number");
            if (*v < 0.0) fail(ErrorKind::Parse, where(source, line_no, c + 1) + ": negative value " + cells[c]);
            values.push_back(*v);
        }
        row_ids.push_back(cells[0]);
        rows.push_back(std::move(values));
    }
    if (!delim) fail(ErrorKind::Parse, source + ": empty matrix file");
    if (rows.empty()) fail(ErrorKind::Parse, source + ": no data rows");

    Labels col_ids(header.begin() + 1, header.end());
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(col_ids.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < col_ids.size(); ++c) values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];

    try {
        if (features_in_rows) return {values.transpose(), std::move(col_ids), std::move(row_ids)};
        return {std::move(values), std::move(row_ids), std::move(col_ids)};
    } catch (const Error& e) {
        fail(ErrorKind::Parse, source + ": " + e.what());
    }
}

CompositionMatrix read_matrix_file(const std::filesystem::path& path, bool features_in_rows) {
    auto in = open_input(path);
    return read_matrix(in, path.string(), features_in_rows);
}

Outcome read_outcome(std::istream& in, const Labels& sample_order, OutcomeHint hint, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::unordered_map<std::string, double> by_id;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
        auto cells = split(line, delim);
        if (cells.size() != 2) {
            fail(ErrorKind::Parse, where(source, line_no, std::min<std::size_t>(cells.size(), 2) + 1) +
                                       ": expected 2 cells, found " + std::to_string(cells.size()));
        }
        auto v = parse_double(cells[1]);
        if (!v) {
            if (first) {
                first = false;
                continue;
            }
            fail(ErrorKind::Parse, where(source, line_no, 2) + ": '" + cells[1] + "' is not a finite number");
        }
        first = false;
        if (cells[0].empty()) fail(ErrorKind::Parse, where(source, line_no, 1) + ": empty sample id");
        if (!by_id.emplace(cells[0], *v).second) {
            fail(ErrorKind::Parse, where(source, line_no, 1) + ": duplicate sample id '" + cells[0] + "'");
        }
    }

    Eigen::VectorXd values(static_cast<Eigen::Index>(sample_order.size()));
    for (std::size_t i = 0; i < sample_order.size(); ++i) {
        auto it = by_id.find(sample_order[i]);
        if (it == by_id.end()) fail(ErrorKind::DimensionMismatch, source + ": no outcome for sample '" + sample_order[i] + "'");
        values[static_cast<Eigen::Index>(i)] = it->second;
    }
    if (by_id.size() != sample_order.size()) {
        fail(ErrorKind::DimensionMismatch, source + ": outcome has " + std::to_string(by_id.size()) +
                                               " samples, matrix has " + std::to_string(sample_order.size()));
    }

    const bool zero_one = ((values.array() == 0.0) || (values.array() == 1.0)).all();
    switch (hint) {
    case OutcomeHint::Binary: return Outcome::binary(std::move(values));
    case OutcomeHint::Continuous: return Outcome::continuous(std::move(values));
    case OutcomeHint::Auto: break;
    }
    return zero_one ? Outcome::binary(std::move(values)) : Outcome::continuous(std::move(values));
}

Outcome read_outcome_file(const std::filesystem::path& path, const Labels& sample_order, OutcomeHint hint) {
    auto in = open_input(path);
    return read_outcome(in, sample_order, hint, path.string());
}

std::string Table::to_string() const {
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "\t" : "") << cells[c];
        out << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return out.str();
}

Table matrix_table(const Eigen::MatrixXd& values, const Labels& sample_ids, const Labels& column_ids,
                   const std::string& corner) {
    Table t;
    t.header.push_back(corner);
    t.header.insert(t.header.end(), column_ids.begin(), column_ids.end());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        std::vector<std::string> row{sample_ids[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < values.cols(); ++j) row.push_back(format_double(values(i, j)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void KeyValueDoc::set(const std::string& key, std::string value) {
    if (auto it = index_.find(key); it != index_.end()) {
        entries_[it->second].second = std::move(value);
        return;
    }
    index_.emplace(key, entries_.size());
    entries_.emplace_back(key, std::move(value));
}

void KeyValueDoc::set_list(const std::string& key, const std::vector<std::string>& values) {
    set(key + ".count", values.size());
    for (std::size_t i = 0; i < values.size(); ++i) set(key + "." + std::to_string(i), values[i]);
}

std::vector<std::string> KeyValueDoc::get_list(const std::string& key) const {
    const auto n = get_int(key + ".count");
    if (n < 0) fail(ErrorKind::Parse, "negative count for list '" + key + "'");
    std::vector<std::string> out;
    for (long long i = 0; i < n; ++i) out.push_back(get(key + "." + std::to_string(i)));
    return out;
}

bool KeyValueDoc::contains(const std::string& key) const { return index_.count(key) != 0; }

const std::string& KeyValueDoc::get(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) fail(ErrorKind::Parse, "missing key '" + key + "'");
    return entries_[it->second].second;
}

std::optional<std::string> KeyValueDoc::find(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].second;
}

double KeyValueDoc::get_double(const std::string& key) const {
    const auto& text = get(key);
    auto v = parse_double(text);
    if (!v) fail(ErrorKind::Parse, "key '" + key + "': '" + text + "' is not a number");
    return *v;
}

long long KeyValueDoc::get_int(const std::string& key) const {
    const auto& text = get(key);
    long long v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        fail(ErrorKind::Parse, "key '" + key + "': '" + text + "' is not an integer");
    }
    return v;
}

std::string KeyValueDoc::to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

KeyValueDoc KeyValueDoc::parse(std::istream& in, const std::string& source) {
    KeyValueDoc doc;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) fail(ErrorKind::Parse, where(source, line_no, 1) + ": expected 'key = value'");
        auto key = trim(t.substr(0, eq));
        if (key.empty()) fail(ErrorKind::Parse, where(source, line_no, 1) + ": empty key");
        doc.set(std::string(key), std::string(trim(t.substr(eq + 1))));
    }
    return doc;
}

KeyValueDoc KeyValueDoc::parse_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse(in, path.string());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Path, "cannot write: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) fail(ErrorKind::Path, "write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace rbb::io
