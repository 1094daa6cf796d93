#pragma once

#include <cctype>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pairrank/btl.hpp"
#include "pairrank/errors.hpp"
#include "pairrank/graph.hpp"

namespace pairrank {

/// Edge-list text format: header line `n=<N>`, then one `i j` pair per line.
inline void write_edge_list(std::ostream& out, const ComparisonGraph& g) {
    out << "n=" << g.node_count() << "\n";
    for (auto [i, j] : g.edges()) out << i << " " << j << "\n";
}

inline ComparisonGraph read_edge_list(std::istream& in) {
    std::string line;
    int lineno = 0;
    int n = -1;
    std::vector<std::pair<int, int>> edges;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (n < 0) {
            if (line.rfind("n=", 0) != 0)
                throw parse_error("edge list line " + std::to_string(lineno) + ": expected header n=<N>");
            try {
                n = std::stoi(line.substr(2));
            } catch (...) {
                throw parse_error("edge list line " + std::to_string(lineno) + ": bad node count");
            }
            continue;
        }
        std::istringstream ls(line);
        int a, b;
        if (!(ls >> a >> b))
            throw parse_error("edge list line " + std::to_string(lineno) + ": expected `i j`");
        edges.emplace_back(a, b);
    }
    if (n < 0) throw parse_error("edge list: missing n=<N> header");
    try {
        return ComparisonGraph::from_edges(n, std::move(edges));
    } catch (const parameter_error& e) {
        throw parse_error(std::string("edge list: ") + e.what());
    }
}

inline ComparisonGraph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open graph file: " + path);
    return read_edge_list(in);
}

inline void write_edge_list_file(const std::string& path, const ComparisonGraph& g) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write graph file: " + path);
    write_edge_list(out, g);
}

/// One head-to-head record of a match file.
struct MatchRecord {
    std::string name_a, name_b;
    long long wins_a = 0, wins_b = 0;
};

namespace detail {

inline bool parse_count(const std::string& s, long long& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace detail

/// Comma-separated match records, one per line: `name_a,name_b,wins_a,wins_b`.
/// An optional header line is recognized by non-numeric count fields.
inline std::vector<MatchRecord> parse_match_records(std::istream& in) {
    std::vector<MatchRecord> records;
    std::string line;
    int lineno = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(detail::trim(f));
        if (!line.empty() && line.back() == ',') fields.push_back("");
        if (fields.size() != 4)
            throw parse_error("match file line " + std::to_string(lineno) + ": expected 4 fields, got " +
                              std::to_string(fields.size()));
        MatchRecord r;
        r.name_a = fields[0];
        r.name_b = fields[1];
        const bool numeric =
            detail::parse_count(fields[2], r.wins_a) && detail::parse_count(fields[3], r.wins_b);
        if (!numeric) {
            if (first_data_line) { // header
                first_data_line = false;
                continue;
            }
            throw parse_error("match file line " + std::to_string(lineno) + ": counts must be integers");
        }
        first_data_line = false;
        if (r.name_a.empty() || r.name_b.empty())
            throw parse_error("match file line " + std::to_string(lineno) + ": empty name");
        if (r.name_a == r.name_b)
            throw parse_error("match file line " + std::to_string(lineno) + ": self-match `" +
                              r.name_a + "`");
        if (r.wins_a < 0 || r.wins_b < 0)
            throw parse_error("match file line " + std::to_string(lineno) + ": negative count");
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<MatchRecord> parse_match_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open match file: " + path);
    return parse_match_records(in);
}

/// Match records resolved to a graph plus tallies. Names are interned in
/// first-seen order.
struct MatchData {
    ComparisonGraph graph;
    EdgeObservations observations;
    std::vector<std::string> names;
    int merged_duplicates = 0;
};

inline MatchData build_match_data(const std::vector<MatchRecord>& records,
                                  const std::function<void(const std::string&)>& warn = {}) {
    if (records.empty()) throw parse_error("match data: no records");
    std::unordered_map<std::string, int> ids;
    std::vector<std::string> names;
    auto intern = [&](const std::string& s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        const int id = static_cast<int>(names.size());
        ids.emplace(s, id);
        names.push_back(s);
        return id;
    };

    struct Tally {
        long long lo = 0, hi = 0;
    };
    std::unordered_map<std::uint64_t, Tally> tallies;
    std::vector<std::pair<int, int>> edge_order;
    int merged = 0;
    for (const auto& r : records) {
        const int a = intern(r.name_a), b = intern(r.name_b);
        const int lo = std::min(a, b), hi = std::max(a, b);
        const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
        auto [it, fresh] = tallies.try_emplace(key);
        if (fresh) {
            edge_order.emplace_back(lo, hi);
        } else {
            ++merged;
            if (warn)
                warn("duplicate pair " + r.name_a + " / " + r.name_b + ": tallies merged");
        }
        it->second.lo += (a == lo) ? r.wins_a : r.wins_b;
        it->second.hi += (a == lo) ? r.wins_b : r.wins_a;
    }

    MatchData out;
    out.names = std::move(names);
    out.merged_duplicates = merged;
    out.graph = ComparisonGraph::from_edges(static_cast<int>(out.names.size()), edge_order);
    out.observations = EdgeObservations(out.graph);
    for (auto [lo, hi] : edge_order) {
        const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
        const Tally& t = tallies[key];
        const int e = out.observations.find_edge(lo, hi);
        out.observations.add_outcome(e, true, t.lo);
        out.observations.add_outcome(e, false, t.hi);
    }
    return out;
}

} // namespace pairrank
