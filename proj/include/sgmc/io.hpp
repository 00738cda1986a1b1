#pragma once
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <json.hpp>
#include <sgmc/elars.hpp>
#include <sgmc/optimality.hpp>

namespace sgmc {
namespace io {

using json = nlohmann::ordered_json;

/// Version tag written as the first key of every JSON artifact.
inline constexpr const char* format_version = "sgmc-1";

/// Finite doubles stay numbers; infinities become the strings "inf" / "-inf"; NaN becomes null.
inline json number(double v)
{
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double read_number(const json& j)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw input_error("expected a number, got " + j.dump());
}

inline json vector_json(const vector_t& v)
{
    json out = json::array();
    for (index_t i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

inline vector_t read_vector(const json& j, const std::string& what)
{
    if (!j.is_array()) throw input_error(what + " must be an array of numbers");
    vector_t out(static_cast<index_t>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) out[static_cast<index_t>(i)] = read_number(j[i]);
    return out;
}

/// 0-based indices in memory, 1-based in files.
inline json index_set_json(const index_set_t& I)
{
    json out = json::array();
    for (const auto i : I) out.push_back(i + 1);
    return out;
}

inline index_set_t read_index_set(const json& j)
{
    index_set_t out;
    for (const auto& v : j) out.push_back(v.get<index_t>() - 1);
    return out;
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(origin + ": JSON parse error: " + e.what());
    }
}

/// {"A": [[...], ...], "rho": x, "y": [...], "r": [...] (optional, default 0), "lambda": x}
inline ProblemInstance instance_from_json(const json& j)
{
    if (!j.is_object()) throw input_error("instance must be a JSON object");
    for (const char* key : {"A", "y", "lambda"}) {
        if (!j.contains(key)) throw input_error(std::string("instance is missing \"") + key + "\"");
    }
    const auto& jA = j.at("A");
    if (!jA.is_array() || jA.empty()) throw input_error("A must be a non-empty array of rows");
    const size_t rows = jA.size();
    const size_t cols = jA[0].is_array() ? jA[0].size() : 0;
    matrix_t A(static_cast<index_t>(rows), static_cast<index_t>(cols));
    for (size_t i = 0; i < rows; ++i) {
        if (!jA[i].is_array() || jA[i].size() != cols) throw input_error("A rows must all have the same length");
        for (size_t k = 0; k < cols; ++k) A(static_cast<index_t>(i), static_cast<index_t>(k)) = read_number(jA[i][k]);
    }
    const double rho = j.contains("rho") ? read_number(j.at("rho")) : 0.0;
    vector_t y = read_vector(j.at("y"), "y");
    vector_t r = j.contains("r") ? read_vector(j.at("r"), "r") : vector_t::Zero(y.size());
    return ProblemInstance(std::move(A), rho, std::move(y), std::move(r), read_number(j.at("lambda")));
}

inline json instance_json(const ProblemInstance& inst)
{
    json A = json::array();
    for (index_t i = 0; i < inst.A.rows(); ++i) A.push_back(vector_json(inst.A.row(i).transpose()));
    return json{{"A", A}, {"rho", inst.rho}, {"y", vector_json(inst.y)}, {"r", vector_json(inst.r)}, {"lambda", inst.lambda}};
}

/// Comma or whitespace separated numbers; blank lines and lines starting with '#' are skipped.
inline matrix_t matrix_from_csv(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        for (auto& ch : line) if (ch == ',' || ch == ';') ch = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            try {
                size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw input_error("CSV: cannot parse number '" + tok + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) throw input_error("CSV: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) throw input_error("CSV: no data");
    matrix_t A(static_cast<index_t>(rows.size()), static_cast<index_t>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t k = 0; k < rows[i].size(); ++k) A(static_cast<index_t>(i), static_cast<index_t>(k)) = rows[i][k];
    return A;
}

/// "1, 2.5, -3" -> vector.
inline vector_t parse_number_list(const std::string& text)
{
    const matrix_t M = matrix_from_csv(text);
    if (M.rows() != 1) throw input_error("expected a single comma separated list");
    return M.row(0).transpose();
}

inline json report_json(const OptReport& report)
{
    json violations = json::array();
    for (const auto& v : report.violations) violations.push_back({{"index", v.index + 1}, {"excess", number(v.excess)}});
    return json{{"satisfied", report.satisfied}, {"worst_violation", number(report.worst_violation)}, {"violations", violations}};
}

inline json line_json(const ParameterLine& line)
{
    return json{{"b0", vector_json(line.b0)}, {"lambda0", number(line.lambda0)},
                {"delta_b", vector_json(line.delta_b)}, {"delta_lambda", number(line.delta_lambda)}};
}

inline ParameterLine line_from_json(const json& j)
{
    return ParameterLine(read_vector(j.at("b0"), "b0"), read_number(j.at("lambda0")),
                         read_vector(j.at("delta_b"), "delta_b"), read_number(j.at("delta_lambda")));
}

inline json segment_json(const PathSegment& seg)
{
    return json{{"s", seg.s.to_string()},
                {"t_range", json::array({number(seg.t_start), number(seg.t_end)})},
                {"p", vector_json(seg.p)},
                {"q", vector_json(seg.q)},
                {"deleted", index_set_json(seg.deleted)},
                {"inserted", index_set_json(seg.inserted)}};
}

inline PathSegment segment_from_json(const json& j)
{
    PathSegment seg;
    seg.s = Indicator::from_string(j.at("s").get<std::string>());
    const auto& tr = j.at("t_range");
    if (!tr.is_array() || tr.size() != 2) throw input_error("segment t_range must have two entries");
    seg.t_start = read_number(tr[0]);
    seg.t_end = read_number(tr[1]);
    seg.p = read_vector(j.at("p"), "p");
    seg.q = read_vector(j.at("q"), "q");
    if (j.contains("deleted")) seg.deleted = read_index_set(j.at("deleted"));
    if (j.contains("inserted")) seg.inserted = read_index_set(j.at("inserted"));
    seg.one_at_a_time = seg.deleted.size() + seg.inserted.size() == 1;
    if (seg.p.size() != seg.s.size() || seg.q.size() != seg.s.size()) {
        throw input_error("segment p and q must have length 2n");
    }
    return seg;
}

inline json path_json(const PathResult& path)
{
    json segs = json::array();
    for (const auto& seg : path.segments) segs.push_back(segment_json(seg));
    json out{{"format", format_version},
             {"line", line_json(path.line)},
             {"segments", segs},
             {"truncated", path.truncated()},
             {"stop_reason", to_string(path.stop_reason)},
             {"stop_time", number(path.stop_time)}};
    if (path.rejected_successor) out["rejected_successor"] = path.rejected_successor->to_string();
    return out;
}

/// Reads the line and segments of a path file; stop metadata is not restored.
inline PathResult path_from_json(const json& j)
{
    PathResult path;
    path.line = line_from_json(j.at("line"));
    for (const auto& js : j.at("segments")) path.segments.push_back(segment_from_json(js));
    if (j.value("truncated", false)) path.stop_reason = StopReason::truncated;
    return path;
}

inline json point_json(const ParameterPoint& pt)
{
    return json{{"witness_b", vector_json(pt.b)}, {"witness_lambda", number(pt.lambda)}};
}

inline json graph_json(const ZoneGraph& graph)
{
    json nodes = json::array();
    json anchors = json::array();
    for (const auto& nd : graph.nodes) {
        nodes.push_back(nd.s.to_string());
        anchors.push_back({{"s", nd.s.to_string()}, {"b", vector_json(nd.anchor.b)}, {"lambda", number(nd.anchor.lambda)}});
    }
    json edges = json::array();
    for (const auto& e : graph.edges) edges.push_back(json::array({e.from.to_string(), e.to.to_string(), point_json(e.witness)}));
    json frontier = json::array();
    for (const auto& s : graph.frontier) frontier.push_back(s.to_string());
    return json{{"format", format_version},
                {"nodes", nodes},
                {"edges", edges},
                {"coverage", {{"required", graph.coverage.required}, {"covered", graph.coverage.covered}}},
                {"incomplete", graph.incomplete},
                {"frontier", frontier},
                {"anchors", anchors}};
}

/**
 * Plot-ready samples of a path: header "t,lambda,w1,...,w2n", then
 * `per_segment` evenly spaced rows per segment (endpoints included).
 * An unbounded last segment is drawn over a span equal to its start
 * offset from the first breakpoint, or one unit.
 */
inline std::string path_csv(const PathResult& path, int per_segment = 20)
{
    std::ostringstream out;
    out.precision(17);
    const index_t n2 = path.segments.empty() ? 0 : path.segments.front().s.size();
    out << "t,lambda";
    for (index_t i = 0; i < n2; ++i) out << ",w" << (i + 1);
    out << '\n';
    for (const auto& seg : path.segments) {
        double t0 = seg.t_start;
        double t1 = seg.t_end;
        if (!std::isfinite(t1)) t1 = t0 + std::max(1.0, std::abs(t0 - path.segments.front().t_start));
        for (int k = 0; k <= per_segment; ++k) {
            const double t = t0 + (t1 - t0) * k / per_segment;
            out << t << ',' << path.line.lambda_at(t);
            const vector_t w = seg.w_at(t);
            for (index_t i = 0; i < n2; ++i) out << ',' << w[i];
            out << '\n';
        }
    }
    return out.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write " + path);
    out << text;
    if (!out) throw input_error("write failed for " + path);
}

} // namespace io
} // namespace sgmc
