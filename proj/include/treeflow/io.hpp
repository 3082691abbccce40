#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "treeflow/network.hpp"
#include "treeflow/tree.hpp"

namespace treeflow {

// Filesystem-level failure (missing file, unparseable JSON, unwritable path).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline nlohmann::json network_to_json(const Network& net) {
    nlohmann::json j;
    j["vertex_count"] = net.vertex_count;
    j["edges"] = nlohmann::json::array();
    for (auto [i, k] : net.edges) j["edges"].push_back({i, k});
    j["lengths"] = net.lengths;
    j["sources"] = net.sources;
    if (net.has_coordinates()) {
        j["coordinates"] = nlohmann::json::array();
        for (const auto& c : net.coordinates) j["coordinates"].push_back({c[0], c[1]});
    } else {
        j["coordinates"] = nullptr;
    }
    return j;
}

inline Network network_from_json(const nlohmann::json& j) {
    try {
        Network net;
        net.vertex_count = j.at("vertex_count").get<int>();
        for (const auto& e : j.at("edges")) {
            net.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        }
        net.lengths = j.at("lengths").get<std::vector<double>>();
        net.sources = j.at("sources").get<std::vector<double>>();
        if (j.contains("coordinates") && !j.at("coordinates").is_null()) {
            for (const auto& c : j.at("coordinates")) {
                net.coordinates.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
            }
        }
        return net;
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument(std::string("network_from_json: malformed schema: ") +
                                    ex.what());
    }
}

// Canonical serialization used for every file this project writes: sorted
// keys, two-space indent, trailing newline. Reloading and re-dumping a file
// reproduces it byte for byte.
inline std::string dump_json(const nlohmann::json& j) {
    return j.dump(2) + "\n";
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline nlohmann::json parse_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw IoError("invalid JSON in " + path);
    return j;
}

inline Network load_network(const std::string& path) {
    return network_from_json(parse_json_file(path));
}

inline void save_network(const std::string& path, const Network& net) {
    write_text_file(path, dump_json(network_to_json(net)));
}

// Shortest round-trip decimal form, shared with the JSON writer so CSV and
// filenames agree with the serialized values.
inline std::string format_double(double x) {
    return nlohmann::json(x).dump();
}

// Flux-oriented DOT rendering: one directed edge per nonzero flux, line
// width proportional to sqrt(|Q|).
inline std::string render_dot(const Network& net, const FluxAssignment& q, double zero_tol) {
    double max_abs = 0.0;
    for (double f : q.per_edge_flux) max_abs = std::max(max_abs, std::fabs(f));
    const double width_scale = max_abs > 0.0 ? 4.0 / std::sqrt(max_abs) : 1.0;

    std::ostringstream os;
    os << "digraph flux {\n";
    os << "  node [shape=point];\n";
    for (int e = 0; e < net.edge_count(); ++e) {
        const double f = q.per_edge_flux[e];
        if (std::fabs(f) <= zero_tol) continue;
        auto [i, j] = net.edges[e];
        if (f < 0.0) std::swap(i, j);
        os << "  v" << i << " -> v" << j << " [penwidth="
           << format_double(0.25 + width_scale * std::sqrt(std::fabs(f))) << "];\n";
    }
    os << "}\n";
    return os.str();
}

// Direct coordinate plot of the flux-carrying edges; requires coordinates.
inline std::string render_svg(const Network& net, const FluxAssignment& q, double zero_tol) {
    if (!net.has_coordinates()) {
        throw std::invalid_argument("render_svg: network has no coordinates");
    }
    double xmin = net.coordinates[0][0], xmax = xmin;
    double ymin = net.coordinates[0][1], ymax = ymin;
    for (const auto& c : net.coordinates) {
        xmin = std::min(xmin, c[0]);
        xmax = std::max(xmax, c[0]);
        ymin = std::min(ymin, c[1]);
        ymax = std::max(ymax, c[1]);
    }
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
    const double margin = 0.05 * span;
    const double scale = 800.0 / (span + 2.0 * margin);
    auto px = [&](double x) { return (x - xmin + margin) * scale; };
    // SVG y grows downward; flip so the rendering matches the coordinates
    auto py = [&](double y) { return (ymax - y + margin) * scale; };

    double max_abs = 0.0;
    for (double f : q.per_edge_flux) max_abs = std::max(max_abs, std::fabs(f));
    const double width_scale = max_abs > 0.0 ? 6.0 / std::sqrt(max_abs) : 1.0;

    std::ostringstream os;
    const double w = (xmax - xmin + 2.0 * margin) * scale;
    const double h = (ymax - ymin + 2.0 * margin) * scale;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(w)
       << "\" height=\"" << format_double(h) << "\" viewBox=\"0 0 " << format_double(w) << " "
       << format_double(h) << "\">\n";
    for (int e = 0; e < net.edge_count(); ++e) {
        const double f = q.per_edge_flux[e];
        if (std::fabs(f) <= zero_tol) continue;
        auto [i, j] = net.edges[e];
        os << "  <line x1=\"" << format_double(px(net.coordinates[i][0])) << "\" y1=\""
           << format_double(py(net.coordinates[i][1])) << "\" x2=\""
           << format_double(px(net.coordinates[j][0])) << "\" y2=\""
           << format_double(py(net.coordinates[j][1])) << "\" stroke=\"black\" stroke-width=\""
           << format_double(0.5 + width_scale * std::sqrt(std::fabs(f)))
           << "\" stroke-linecap=\"round\"/>\n";
    }
    for (int v = 0; v < net.vertex_count; ++v) {
        if (net.sources[v] > 0.0) {
            os << "  <circle cx=\"" << format_double(px(net.coordinates[v][0])) << "\" cy=\""
               << format_double(py(net.coordinates[v][1]))
               << "\" r=\"5\" fill=\"firebrick\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace treeflow
