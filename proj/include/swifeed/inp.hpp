#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace swifeed {

struct InpRow {
    std::vector<std::string> tokens;
    std::size_t line = 0;
};

struct InpSection {
    std::string name;  // upper case, without brackets
    std::vector<InpRow> rows;
};

/// Sectioned view of an EPANET input file. Sections keep the order of their
/// first header; a repeated header appends to the existing section.
struct InpDocument {
    std::vector<InpSection> sections;

    const InpSection* find(std::string_view name) const;
};

/// Splits INP text into sections and whitespace-separated tokens.
/// ";" comments and blank lines are dropped, double quotes group a token.
/// Throws Error{UndecodableText} on invalid UTF-8 and
/// Error{RowOutsideSection} for tokens before the first header.
InpDocument tokenize_inp(std::string_view text);

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double diagonal() const;
    bool contains(const Point& p, double slack = 0.0) const;

    static BoundingBox around(const std::vector<Point>& points);
};

enum class NodeKind { junction, reservoir, tank };
enum class LinkKind { pipe, pump, valve };

std::string_view to_string(NodeKind kind);
std::string_view to_string(LinkKind kind);

struct NodeRecord {
    std::string id;
    NodeKind kind = NodeKind::junction;
    double elevation = 0.0;  // head for reservoirs
    double base_demand = 0.0;
    Point position;
};

struct LinkRecord {
    std::string id;
    LinkKind kind = LinkKind::pipe;
    std::string from_node;
    std::string to_node;
    std::size_t from_index = 0;
    std::size_t to_index = 0;
    double length = 0.0;    // pipes only
    double diameter = 0.0;  // pipes and valves
};

struct NetworkCounts {
    std::size_t junctions = 0;
    std::size_t reservoirs = 0;
    std::size_t tanks = 0;
    std::size_t pipes = 0;
    std::size_t pumps = 0;
    std::size_t valves = 0;
};

struct WaterNetwork {
    std::string title;
    std::vector<NodeRecord> nodes;  // file order
    std::vector<LinkRecord> links;  // file order
    NetworkCounts counts;
    BoundingBox bbox;
    std::vector<std::string> warnings;

    std::size_t node_count() const { return nodes.size(); }
    std::optional<std::size_t> find_node(std::string_view id) const;
    std::optional<std::size_t> find_link(std::string_view id) const;
    std::vector<Point> positions() const;

    // Rebuilds the id lookup tables; called by build_network.
    void reindex();

private:
    std::unordered_map<std::string, std::size_t> node_index_;
    std::unordered_map<std::string, std::size_t> link_index_;
};

/// Materializes nodes and links from a tokenized document and validates
/// every node and link invariant. Unsupported sections land in `warnings`.
WaterNetwork build_network(const InpDocument& doc);

WaterNetwork load_network(const std::string& path);

/// Multiplies every coordinate (and the bounding box) by `factor`.
void scale_coordinates(WaterNetwork& net, double factor);

/// Network summary as a JSON document (counts, bbox, warnings).
std::string network_summary_json(const WaterNetwork& net);

}  // namespace swifeed
