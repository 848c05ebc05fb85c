#ifndef GSVD_IO_HPP
#define GSVD_IO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "json.hpp"

#include "errors.hpp"
#include "groups.hpp"
#include "solver.hpp"

/**
 * @file io.hpp
 * @brief Readers and writers for labeled matrices, pathway and edge-list groups, truth vectors and decomposition records.
 *
 * Every reader reports failures as `ParseError` carrying the file and the 1-based line number.
 */

namespace gsvd {

enum class MatrixFormat { TSV, CSV };

/**
 * `FEATURES_BY_SAMPLES`: one row per feature. `SAMPLES_BY_FEATURES`: one row per sample, transposed on read.
 */
enum class Orientation { FEATURES_BY_SAMPLES, SAMPLES_BY_FEATURES };

/**
 * @brief Features-by-samples matrix with unique row and column names.
 */
struct LabeledMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> row_names;
    std::vector<std::string> col_names;
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path, 0, "cannot open file for reading");
    }
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InvalidArgument("cannot open '" + path + "' for writing");
    }
    return out;
}

inline void chomp(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

inline bool blank(std::string_view s) {
    return s.find_first_not_of(" \t") == std::string_view::npos;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
            ++i;
        }
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') {
            ++j;
        }
        if (j > i) {
            out.push_back(line.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    auto a = s.find_first_not_of(" ");
    if (a == std::string_view::npos) {
        return {};
    }
    auto b = s.find_last_not_of(" ");
    return s.substr(a, b - a + 1);
}

/**
 * Strips one pair of surrounding double quotes, as written by spreadsheet exports.
 */
inline std::string_view unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

/**
 * Shortest decimal representation that parses back to the same double.
 */
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline void check_unique(const std::vector<std::string>& names, const std::string& path, std::size_t line, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw ParseError(path, line, "duplicate " + std::string(what) + " name '" + n + "'");
        }
    }
}

inline std::unordered_map<std::string, std::size_t> name_index(const std::vector<std::string>& names) {
    std::unordered_map<std::string, std::size_t> idx;
    idx.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        idx.emplace(names[i], i);
    }
    return idx;
}

}

/**
 * Reads a delimited table whose first row holds sample names and whose first column holds feature names.
 * The header may include or omit the corner cell. Missing or non-finite values are rejected.
 */
inline LabeledMatrix read_matrix(const std::string& path, MatrixFormat format = MatrixFormat::TSV,
                                 Orientation orientation = Orientation::FEATURES_BY_SAMPLES) {
    auto in = detail::open_input(path);
    const char sep = format == MatrixFormat::TSV ? '\t' : ',';

    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    std::size_t header_line = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (detail::blank(line)) {
            continue;
        }
        for (auto cell : detail::split(line, sep)) {
            header.emplace_back(detail::unquote(cell));
        }
        header_line = lineno;
        break;
    }
    if (header.empty()) {
        throw ParseError(path, lineno, "file has no header row");
    }

    std::vector<std::string> rows;
    std::vector<std::size_t> row_lines;
    std::vector<double> values;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (detail::blank(line)) {
            continue;
        }
        auto cells = detail::split(line, sep);
        if (width == 0) {
            if (cells.size() == header.size()) {
                header.erase(header.begin());
            } else if (cells.size() != header.size() + 1) {
                throw ParseError(path, lineno, "row has " + std::to_string(cells.size()) + " fields but the header has " +
                                 std::to_string(header.size()));
            }
            width = header.size();
            if (width == 0) {
                throw ParseError(path, header_line, "header names no columns");
            }
        }
        if (cells.size() != width + 1) {
            throw ParseError(path, lineno, "ragged row: expected " + std::to_string(width + 1) + " fields, found " +
                             std::to_string(cells.size()));
        }
        rows.emplace_back(detail::unquote(cells[0]));
        row_lines.push_back(lineno);
        if (rows.back().empty()) {
            throw ParseError(path, lineno, "empty row name");
        }
        for (std::size_t j = 1; j < cells.size(); ++j) {
            auto v = detail::parse_double(cells[j]);
            if (!v) {
                throw ParseError(path, lineno, "column " + std::to_string(j + 1) + ": cannot parse '" + std::string(detail::trim(cells[j])) +
                                 "' as a number");
            }
            if (!std::isfinite(*v)) {
                throw ParseError(path, lineno, "column " + std::to_string(j + 1) + ": missing or non-finite value '" +
                                 std::string(detail::trim(cells[j])) + "'");
            }
            values.push_back(*v);
        }
    }
    if (rows.empty()) {
        throw ParseError(path, lineno, "table has no data rows");
    }

    detail::check_unique(header, path, header_line, "column");
    {
        std::unordered_map<std::string, std::size_t> seen;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto [it, fresh] = seen.emplace(rows[i], row_lines[i]);
            if (!fresh) {
                throw ParseError(path, row_lines[i], "duplicate row name '" + rows[i] + "' (first seen on line " + std::to_string(it->second) + ")");
            }
        }
    }

    LabeledMatrix m;
    const auto nr = static_cast<Eigen::Index>(rows.size()), nc = static_cast<Eigen::Index>(width);
    Eigen::MatrixXd table = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> >(values.data(), nr, nc);
    if (orientation == Orientation::FEATURES_BY_SAMPLES) {
        m.X = std::move(table);
        m.row_names = std::move(rows);
        m.col_names = std::move(header);
    } else {
        m.X = table.transpose();
        m.row_names = std::move(header);
        m.col_names = std::move(rows);
    }
    return m;
}

/**
 * Writes features as rows with a `feature` corner cell. Values are printed in shortest round-trip form.
 */
inline void write_matrix(const std::string& path, const LabeledMatrix& m, MatrixFormat format = MatrixFormat::TSV) {
    if (m.row_names.size() != static_cast<std::size_t>(m.X.rows()) || m.col_names.size() != static_cast<std::size_t>(m.X.cols())) {
        throw InvalidArgument("write_matrix: name lists do not match the matrix shape");
    }
    const char sep = format == MatrixFormat::TSV ? '\t' : ',';
    auto out = detail::open_output(path);
    out << "feature";
    for (const auto& c : m.col_names) {
        out << sep << c;
    }
    out << '\n';
    for (Eigen::Index i = 0; i < m.X.rows(); ++i) {
        out << m.row_names[i];
        for (Eigen::Index j = 0; j < m.X.cols(); ++j) {
            out << sep << detail::format_double(m.X(i, j));
        }
        out << '\n';
    }
    if (!out) {
        throw InvalidArgument("write_matrix: failed writing '" + path + "'");
    }
}

/**
 * Centers each column and scales it to unit sample standard deviation (divisor `n - 1`).
 */
inline LabeledMatrix normalize_columns(LabeledMatrix m) {
    const auto n = m.X.rows();
    if (n < 2) {
        throw InvalidArgument("normalize_columns: need at least two rows");
    }
    for (Eigen::Index j = 0; j < m.X.cols(); ++j) {
        auto col = m.X.col(j);
        double mean = col.mean();
        col.array() -= mean;
        double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n - 1));
        const std::string& name = static_cast<std::size_t>(j) < m.col_names.size() ? m.col_names[j] : std::to_string(j);
        if (!(sd > 0) || col.cwiseAbs().maxCoeff() == 0) {
            throw InvalidArgument("normalize_columns: column '" + name + "' is constant");
        }
        col /= sd;
    }
    return m;
}

/**
 * @brief Named groups read from a file, with tallies of what was discarded.
 */
struct NamedGroups {
    GroupStructure groups;
    std::vector<std::string> names;

    /**
     * GMT: groups left empty after intersecting with the row names. Edge lists: edges with an unknown endpoint.
     */
    std::size_t dropped = 0;

    /**
     * GMT: groups over `max_group_size`. Edge lists: self-loops.
     */
    std::size_t filtered = 0;

    /**
     * GMT: member names missing from the row names. Edge lists: repeated undirected edges.
     */
    std::size_t unmatched = 0;
};

/**
 * Reads a GMT file (name, description, members; tab-separated) against `row_names`.
 *
 * @param max_group_size Drop sets listing more than this many members; 0 keeps all. The size is taken before intersecting with `row_names`.
 */
inline NamedGroups read_gmt(const std::string& path, const std::vector<std::string>& row_names, std::size_t max_group_size = 0) {
    if (row_names.empty()) {
        throw InvalidArgument("read_gmt: no row names to resolve against");
    }
    auto in = detail::open_input(path);
    auto index = detail::name_index(row_names);

    NamedGroups out;
    std::vector<std::vector<std::size_t> > groups;
    std::unordered_set<std::string> set_names;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (detail::blank(line)) {
            continue;
        }
        auto cells = detail::split(line, '\t');
        if (cells.size() < 2) {
            throw ParseError(path, lineno, "expected a set name and a description separated by tabs");
        }
        std::string name(detail::trim(cells[0]));
        if (name.empty()) {
            throw ParseError(path, lineno, "empty set name");
        }
        if (!set_names.insert(name).second) {
            throw ParseError(path, lineno, "duplicate set name '" + name + "'");
        }

        std::vector<std::size_t> members;
        std::unordered_set<std::string_view> listed;
        for (std::size_t c = 2; c < cells.size(); ++c) {
            auto gene = detail::trim(cells[c]);
            if (gene.empty() || !listed.insert(gene).second) {
                continue;
            }
            auto it = index.find(std::string(gene));
            if (it == index.end()) {
                ++out.unmatched;
            } else {
                members.push_back(it->second);
            }
        }
        if (max_group_size > 0 && listed.size() > max_group_size) {
            ++out.filtered;
            continue;
        }
        if (members.empty()) {
            ++out.dropped;
            continue;
        }
        groups.push_back(std::move(members));
        out.names.push_back(std::move(name));
    }
    out.groups = GroupStructure(row_names.size(), groups);
    return out;
}

/**
 * Writes groups as GMT lines, with members named by `row_names` and `na` in the description column.
 */
inline void write_gmt(const std::string& path, const GroupStructure& gs, const std::vector<std::string>& names,
                      const std::vector<std::string>& row_names) {
    if (names.size() != gs.size() || row_names.size() != gs.dimension()) {
        throw InvalidArgument("write_gmt: name lists do not match the group structure");
    }
    auto out = detail::open_output(path);
    for (std::size_t l = 0; l < gs.size(); ++l) {
        out << names[l] << "\tna";
        for (auto i : gs.group(l)) {
            out << '\t' << row_names[i];
        }
        out << '\n';
    }
}

/**
 * Reads an edge list with two name columns per line (whitespace-separated; further columns and `#` comments ignored).
 * Each distinct undirected edge between known names becomes a group named `A--B`, in order of first appearance.
 */
inline NamedGroups read_edge_list(const std::string& path, const std::vector<std::string>& row_names) {
    if (row_names.empty()) {
        throw InvalidArgument("read_edge_list: no row names to resolve against");
    }
    auto in = detail::open_input(path);
    auto index = detail::name_index(row_names);

    NamedGroups out;
    std::vector<std::pair<std::size_t, std::size_t> > edges;
    std::unordered_set<std::uint64_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        std::string_view view(line);
        if (auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        auto cells = detail::split_ws(view);
        if (cells.empty()) {
            continue;
        }
        if (cells.size() < 2) {
            throw ParseError(path, lineno, "expected two node names, found one");
        }
        auto a = index.find(std::string(cells[0]));
        auto b = index.find(std::string(cells[1]));
        if (a == index.end() || b == index.end()) {
            ++out.dropped;
            continue;
        }
        if (a->second == b->second) {
            ++out.filtered;
            continue;
        }
        auto [lo, hi] = std::minmax(a->second, b->second);
        if (!seen.insert((static_cast<std::uint64_t>(lo) << 32) | hi).second) {
            ++out.unmatched;
            continue;
        }
        edges.emplace_back(lo, hi);
        out.names.push_back(std::string(cells[0]) + "--" + std::string(cells[1]));
    }
    out.groups = make_edge_groups(row_names.size(), edges);
    return out;
}

/**
 * Reads a truth vector: `name<TAB>value` lines with an optional `feature<TAB>value` header. Unlisted features are 0.
 */
inline Eigen::VectorXd read_truth(const std::string& path, const std::vector<std::string>& row_names) {
    auto in = detail::open_input(path);
    auto index = detail::name_index(row_names);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(row_names.size());
    std::vector<char> set(row_names.size(), 0);

    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        detail::chomp(line);
        if (detail::blank(line)) {
            continue;
        }
        auto cells = detail::split(line, '\t');
        if (cells.size() != 2) {
            throw ParseError(path, lineno, "expected two tab-separated fields, found " + std::to_string(cells.size()));
        }
        auto v = detail::parse_double(cells[1]);
        if (first && !v && detail::trim(cells[0]) == "feature") {
            first = false;
            continue;
        }
        first = false;
        if (!v || !std::isfinite(*v)) {
            throw ParseError(path, lineno, "cannot parse '" + std::string(detail::trim(cells[1])) + "' as a finite number");
        }
        auto it = index.find(std::string(detail::trim(cells[0])));
        if (it == index.end()) {
            throw ParseError(path, lineno, "unknown feature '" + std::string(detail::trim(cells[0])) + "'");
        }
        if (set[it->second]) {
            throw ParseError(path, lineno, "feature '" + it->first + "' listed twice");
        }
        set[it->second] = 1;
        truth[it->second] = *v;
    }
    return truth;
}

inline void write_truth(const std::string& path, const Eigen::VectorXd& values, const std::vector<std::string>& row_names) {
    if (static_cast<std::size_t>(values.size()) != row_names.size()) {
        throw InvalidArgument("write_truth: value and name counts differ");
    }
    auto out = detail::open_output(path);
    out << "feature\tvalue\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        out << row_names[i] << '\t' << detail::format_double(values[i]) << '\n';
    }
}

/**
 * @brief One stored factor. `u` and `v` keep only their nonzero entries, keyed by name.
 */
struct RecordFactor {
    double d = 0;
    std::vector<std::pair<std::string, double> > u, v;
    std::vector<std::string> groups_u, groups_v;

    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
    double variance_explained = 0;
    double cumulative_variance_explained = 0;

    /**
     * Absent when the run asked for reproducible output.
     */
    std::optional<double> wall_time;

    friend bool operator==(const RecordFactor&, const RecordFactor&) = default;
};

/**
 * @brief Serializable result of a decomposition run.
 */
struct DecompositionRecord {
    std::vector<std::string> row_names, col_names;
    std::vector<RecordFactor> factors;

    /**
     * Penalties, hyperparameters, seed, tool version and the run manifest.
     */
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

    friend bool operator==(const DecompositionRecord&, const DecompositionRecord&) = default;
};

/**
 * Builds a record from a decomposition, naming selected groups by `u_group_names` and `v_group_names` when given.
 */
inline DecompositionRecord make_record(const Decomposition& dec, const std::vector<std::string>& row_names, const std::vector<std::string>& col_names,
                                       const std::vector<std::string>& u_group_names = {}, const std::vector<std::string>& v_group_names = {},
                                       bool with_timing = true) {
    DecompositionRecord rec;
    rec.row_names = row_names;
    rec.col_names = col_names;
    auto group_labels = [](const std::vector<std::size_t>& ids, const std::vector<std::string>& names) {
        std::vector<std::string> out;
        for (auto g : ids) {
            out.push_back(g < names.size() ? names[g] : std::to_string(g));
        }
        return out;
    };
    for (std::size_t i = 0; i < dec.factors.size(); ++i) {
        const auto& f = dec.factors[i];
        RecordFactor r;
        r.d = f.d;
        for (Eigen::Index k = 0; k < f.u.size(); ++k) {
            if (f.u[k] != 0) {
                r.u.emplace_back(row_names.at(k), f.u[k]);
            }
        }
        for (Eigen::Index k = 0; k < f.v.size(); ++k) {
            if (f.v[k] != 0) {
                r.v.emplace_back(col_names.at(k), f.v[k]);
            }
        }
        r.groups_u = group_labels(f.groups_u, u_group_names);
        r.groups_v = group_labels(f.groups_v, v_group_names);
        r.iterations = dec.reports[i].iterations;
        r.converged = dec.reports[i].converged;
        r.degenerate = f.degenerate;
        r.variance_explained = dec.variance_explained[i];
        r.cumulative_variance_explained = dec.cumulative_variance_explained[i];
        if (with_timing) {
            r.wall_time = dec.reports[i].wall_time;
        }
        rec.factors.push_back(std::move(r));
    }
    return rec;
}

/**
 * Dense `u` (or `v` when `left` is false) of factor `i`, in row (column) order.
 */
inline Eigen::VectorXd dense_vector(const DecompositionRecord& rec, std::size_t i, bool left = true) {
    if (i >= rec.factors.size()) {
        throw InvalidArgument("record has " + std::to_string(rec.factors.size()) + " factors, no factor " + std::to_string(i + 1));
    }
    const auto& names = left ? rec.row_names : rec.col_names;
    const auto& entries = left ? rec.factors[i].u : rec.factors[i].v;
    auto index = detail::name_index(names);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(names.size());
    for (const auto& [name, value] : entries) {
        auto it = index.find(name);
        if (it == index.end()) {
            throw InvalidArgument("record entry '" + name + "' is not among the record's names");
        }
        x[it->second] = value;
    }
    return x;
}

inline nlohmann::ordered_json to_json(const DecompositionRecord& rec) {
    using nlohmann::ordered_json;
    auto entries = [](const std::vector<std::pair<std::string, double> >& xs) {
        ordered_json a = ordered_json::array();
        for (const auto& [n, v] : xs) {
            a.push_back(ordered_json::array({ n, v }));
        }
        return a;
    };
    ordered_json j;
    j["format"] = "gsvd-decomposition";
    j["format_version"] = 1;
    j["metadata"] = rec.metadata;
    j["row_names"] = rec.row_names;
    j["col_names"] = rec.col_names;
    ordered_json fs = ordered_json::array();
    for (const auto& f : rec.factors) {
        ordered_json o;
        o["d"] = f.d;
        o["iterations"] = f.iterations;
        o["converged"] = f.converged;
        o["degenerate"] = f.degenerate;
        o["variance_explained"] = f.variance_explained;
        o["cumulative_variance_explained"] = f.cumulative_variance_explained;
        if (f.wall_time) {
            o["wall_time"] = *f.wall_time;
        }
        o["u"] = entries(f.u);
        o["v"] = entries(f.v);
        o["groups_u"] = f.groups_u;
        o["groups_v"] = f.groups_v;
        fs.push_back(std::move(o));
    }
    j["factors"] = std::move(fs);
    return j;
}

inline DecompositionRecord record_from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object() || j.value("format", "") != "gsvd-decomposition") {
        throw InvalidArgument("not a decomposition record");
    }
    DecompositionRecord rec;
    rec.metadata = j.at("metadata");
    rec.row_names = j.at("row_names").get<std::vector<std::string> >();
    rec.col_names = j.at("col_names").get<std::vector<std::string> >();
    auto entries = [](const nlohmann::ordered_json& a) {
        std::vector<std::pair<std::string, double> > out;
        for (const auto& e : a) {
            out.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
        }
        return out;
    };
    for (const auto& o : j.at("factors")) {
        RecordFactor f;
        f.d = o.at("d").get<double>();
        f.iterations = o.at("iterations").get<int>();
        f.converged = o.at("converged").get<bool>();
        f.degenerate = o.value("degenerate", false);
        f.variance_explained = o.at("variance_explained").get<double>();
        f.cumulative_variance_explained = o.at("cumulative_variance_explained").get<double>();
        if (o.contains("wall_time")) {
            f.wall_time = o.at("wall_time").get<double>();
        }
        f.u = entries(o.at("u"));
        f.v = entries(o.at("v"));
        f.groups_u = o.at("groups_u").get<std::vector<std::string> >();
        f.groups_v = o.at("groups_v").get<std::vector<std::string> >();
        rec.factors.push_back(std::move(f));
    }
    return rec;
}

inline void write_record(const std::string& path, const DecompositionRecord& rec) {
    auto out = detail::open_output(path);
    out << to_json(rec).dump(2) << '\n';
    if (!out) {
        throw InvalidArgument("write_record: failed writing '" + path + "'");
    }
}

inline DecompositionRecord read_record(const std::string& path) {
    auto in = detail::open_input(path);
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path, 0, std::string("malformed JSON: ") + e.what());
    }
    try {
        return record_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, std::string("malformed decomposition record: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ParseError(path, 0, e.what());
    }
}

}

#endif
