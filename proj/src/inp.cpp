#include "swifeed/inp.hpp"

#include "swifeed/csv.hpp"
#include "swifeed/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace swifeed {

namespace {

bool valid_utf8(std::string_view text, std::size_t& bad_offset) {
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            extra = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            extra = 3;
            cp = c & 0x07;
        } else {
            bad_offset = i;
            return false;
        }
        if (i + extra >= n) {
            bad_offset = i;
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80) {
                bad_offset = i;
                return false;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        // Reject overlong forms, surrogates and out-of-range code points.
        const bool overlong = (extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
                              (extra == 3 && cp < 0x10000);
        if (overlong || (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
            bad_offset = i;
            return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\v' || c == '\f'; }

std::vector<std::string> split_tokens(std::string_view line) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) {
            ++i;
        }
        if (i >= line.size()) {
            break;
        }
        std::string token;
        if (line[i] == '"') {
            ++i;
            while (i < line.size() && line[i] != '"') {
                token += line[i++];
            }
            ++i;  // closing quote (or end of line)
        } else {
            while (i < line.size() && !is_space(line[i])) {
                token += line[i++];
            }
        }
        tokens.push_back(std::move(token));
    }
    return tokens;
}

const std::unordered_set<std::string>& supported_sections() {
    static const std::unordered_set<std::string> names = {
        "TITLE", "JUNCTIONS", "RESERVOIRS", "TANKS",   "PIPES", "PUMPS",
        "VALVES", "DEMANDS",  "COORDINATES", "OPTIONS", "TIMES", "END"};
    return names;
}

[[noreturn]] void malformed(const InpSection& section, const InpRow& row, const std::string& why) {
    throw Error(ErrorCode::MalformedRow, "[" + section.name + "] line " + std::to_string(row.line) +
                                             ": " + why);
}

double number_at(const InpSection& section, const InpRow& row, std::size_t index,
                 std::string_view what) {
    auto v = csv::parse_number(row.tokens.at(index));
    if (!v) {
        malformed(section, row, "expected a number for " + std::string(what) + ", got '" +
                                    row.tokens[index] + "'");
    }
    return *v;
}

void require_tokens(const InpSection& section, const InpRow& row, std::size_t count) {
    if (row.tokens.size() < count) {
        malformed(section, row,
                  "expected at least " + std::to_string(count) + " fields, found " +
                      std::to_string(row.tokens.size()));
    }
}

}  // namespace

const InpSection* InpDocument::find(std::string_view name) const {
    for (const auto& s : sections) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

InpDocument tokenize_inp(std::string_view text) {
    std::size_t bad = 0;
    if (!valid_utf8(text, bad)) {
        throw Error(ErrorCode::UndecodableText,
                    "invalid UTF-8 sequence at byte offset " + std::to_string(bad));
    }
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }

    InpDocument doc;
    InpSection* current = nullptr;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (auto semi = line.find(';'); semi != std::string_view::npos) {
            line = line.substr(0, semi);
        }
        while (!line.empty() && (is_space(line.back()) || line.back() == '\r')) {
            line.remove_suffix(1);
        }
        while (!line.empty() && is_space(line.front())) {
            line.remove_prefix(1);
        }
        if (line.empty()) {
            if (eol == text.size()) {
                break;
            }
            continue;
        }

        if (line.front() == '[') {
            auto close = line.find(']');
            std::string name = upper(line.substr(1, close == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : close - 1));
            auto it = std::find_if(doc.sections.begin(), doc.sections.end(),
                                   [&](const InpSection& s) { return s.name == name; });
            if (it == doc.sections.end()) {
                doc.sections.push_back(InpSection{name, {}});
                current = &doc.sections.back();
            } else {
                current = &*it;
            }
        } else {
            if (current == nullptr) {
                throw Error(ErrorCode::RowOutsideSection,
                            "line " + std::to_string(line_no) + ": data before any [SECTION] header");
            }
            current->rows.push_back(InpRow{split_tokens(line), line_no});
        }
        if (eol == text.size()) {
            break;
        }
    }
    return doc;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double BoundingBox::diagonal() const { return std::hypot(width(), height()); }

bool BoundingBox::contains(const Point& p, double slack) const {
    return p.x >= x_min - slack && p.x <= x_max + slack && p.y >= y_min - slack &&
           p.y <= y_max + slack;
}

BoundingBox BoundingBox::around(const std::vector<Point>& points) {
    if (points.empty()) {
        return {};
    }
    BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
    for (const auto& p : points) {
        box.x_min = std::min(box.x_min, p.x);
        box.y_min = std::min(box.y_min, p.y);
        box.x_max = std::max(box.x_max, p.x);
        box.y_max = std::max(box.y_max, p.y);
    }
    return box;
}

std::string_view to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::junction: return "junction";
    case NodeKind::reservoir: return "reservoir";
    case NodeKind::tank: return "tank";
    }
    return "?";
}

std::string_view to_string(LinkKind kind) {
    switch (kind) {
    case LinkKind::pipe: return "pipe";
    case LinkKind::pump: return "pump";
    case LinkKind::valve: return "valve";
    }
    return "?";
}

std::optional<std::size_t> WaterNetwork::find_node(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    if (it == node_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::size_t> WaterNetwork::find_link(std::string_view id) const {
    auto it = link_index_.find(std::string(id));
    if (it == link_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<Point> WaterNetwork::positions() const {
    std::vector<Point> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) {
        out.push_back(n.position);
    }
    return out;
}

void WaterNetwork::reindex() {
    node_index_.clear();
    link_index_.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        node_index_.emplace(nodes[i].id, i);
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
        link_index_.emplace(links[i].id, i);
    }
}

WaterNetwork build_network(const InpDocument& doc) {
    if (doc.find("JUNCTIONS") == nullptr && doc.find("RESERVOIRS") == nullptr) {
        throw Error(ErrorCode::MissingSection, "no [JUNCTIONS] or [RESERVOIRS] section");
    }
    if (doc.find("PIPES") == nullptr && doc.find("PUMPS") == nullptr &&
        doc.find("VALVES") == nullptr) {
        throw Error(ErrorCode::MissingSection, "no [PIPES], [PUMPS] or [VALVES] section");
    }
    if (doc.find("COORDINATES") == nullptr) {
        throw Error(ErrorCode::MissingSection, "no [COORDINATES] section");
    }

    WaterNetwork net;
    std::unordered_map<std::string, std::size_t> node_index;
    std::unordered_map<std::string, std::size_t> link_index;

    auto add_node = [&](const InpSection& s, const InpRow& row, NodeRecord node) {
        if (!node_index.emplace(node.id, net.nodes.size()).second) {
            throw Error(ErrorCode::DuplicateId, "[" + s.name + "] line " + std::to_string(row.line) +
                                                    ": duplicate node id '" + node.id + "'");
        }
        net.nodes.push_back(std::move(node));
    };
    auto add_link = [&](const InpSection& s, const InpRow& row, LinkRecord link) {
        if (!link_index.emplace(link.id, net.links.size()).second) {
            throw Error(ErrorCode::DuplicateId, "[" + s.name + "] line " + std::to_string(row.line) +
                                                    ": duplicate link id '" + link.id + "'");
        }
        net.links.push_back(std::move(link));
    };

    // Pass 1: nodes, links and the title, in document order.
    for (const auto& s : doc.sections) {
        if (s.name == "TITLE") {
            for (const auto& row : s.rows) {
                for (const auto& t : row.tokens) {
                    if (!net.title.empty()) {
                        net.title += ' ';
                    }
                    net.title += t;
                }
            }
        } else if (s.name == "JUNCTIONS") {
            for (const auto& row : s.rows) {
                require_tokens(s, row, 2);
                NodeRecord n;
                n.id = row.tokens[0];
                n.kind = NodeKind::junction;
                n.elevation = number_at(s, row, 1, "elevation");
                if (row.tokens.size() >= 3) {
                    n.base_demand = number_at(s, row, 2, "demand");
                    if (n.base_demand < 0.0) {
                        malformed(s, row, "negative base demand");
                    }
                }
                add_node(s, row, std::move(n));
            }
        } else if (s.name == "RESERVOIRS" || s.name == "TANKS") {
            for (const auto& row : s.rows) {
                require_tokens(s, row, 2);
                NodeRecord n;
                n.id = row.tokens[0];
                n.kind = s.name == "TANKS" ? NodeKind::tank : NodeKind::reservoir;
                n.elevation = number_at(s, row, 1, "elevation");
                add_node(s, row, std::move(n));
            }
        } else if (s.name == "PIPES" || s.name == "PUMPS" || s.name == "VALVES") {
            const LinkKind kind = s.name == "PIPES"   ? LinkKind::pipe
                                  : s.name == "PUMPS" ? LinkKind::pump
                                                      : LinkKind::valve;
            for (const auto& row : s.rows) {
                require_tokens(s, row, kind == LinkKind::pipe ? 6 : 3);
                LinkRecord l;
                l.id = row.tokens[0];
                l.kind = kind;
                l.from_node = row.tokens[1];
                l.to_node = row.tokens[2];
                if (kind == LinkKind::pipe) {
                    l.length = number_at(s, row, 3, "length");
                    l.diameter = number_at(s, row, 4, "diameter");
                    number_at(s, row, 5, "roughness");
                    if (!(l.length > 0.0) || !(l.diameter > 0.0)) {
                        malformed(s, row, "pipe length and diameter must be positive");
                    }
                } else if (kind == LinkKind::valve && row.tokens.size() >= 4) {
                    l.diameter = number_at(s, row, 3, "diameter");
                }
                add_link(s, row, std::move(l));
            }
        }
    }

    // Pass 2: demands and coordinates need the node table.
    std::vector<bool> has_coords(net.nodes.size(), false);
    for (const auto& s : doc.sections) {
        if (s.name == "DEMANDS") {
            for (const auto& row : s.rows) {
                require_tokens(s, row, 2);
                auto it = node_index.find(row.tokens[0]);
                if (it == node_index.end() || net.nodes[it->second].kind != NodeKind::junction) {
                    malformed(s, row, "demand for unknown junction '" + row.tokens[0] + "'");
                }
                const double d = number_at(s, row, 1, "demand");
                if (d < 0.0) {
                    malformed(s, row, "negative demand");
                }
                net.nodes[it->second].base_demand += d;
            }
        } else if (s.name == "COORDINATES") {
            for (const auto& row : s.rows) {
                require_tokens(s, row, 3);
                auto it = node_index.find(row.tokens[0]);
                if (it == node_index.end()) {
                    net.warnings.push_back("[COORDINATES] line " + std::to_string(row.line) +
                                           ": coordinates for unknown node '" + row.tokens[0] +
                                           "' ignored");
                    continue;
                }
                if (has_coords[it->second]) {
                    malformed(s, row, "duplicate coordinates for node '" + row.tokens[0] + "'");
                }
                net.nodes[it->second].position = {number_at(s, row, 1, "x"),
                                                  number_at(s, row, 2, "y")};
                has_coords[it->second] = true;
            }
        } else if (!supported_sections().contains(s.name)) {
            net.warnings.push_back("section [" + s.name + "] (" + std::to_string(s.rows.size()) +
                                   " rows) ignored");
        }
    }

    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        if (!has_coords[i]) {
            throw Error(ErrorCode::MissingCoordinates,
                        "node '" + net.nodes[i].id + "' has no [COORDINATES] entry");
        }
    }

    for (auto& l : net.links) {
        auto from = node_index.find(l.from_node);
        if (from == node_index.end()) {
            throw Error(ErrorCode::DanglingEndpoint,
                        "link '" + l.id + "' references missing node '" + l.from_node + "'");
        }
        auto to = node_index.find(l.to_node);
        if (to == node_index.end()) {
            throw Error(ErrorCode::DanglingEndpoint,
                        "link '" + l.id + "' references missing node '" + l.to_node + "'");
        }
        if (from->second == to->second) {
            throw Error(ErrorCode::SelfLoop, "link '" + l.id + "' connects node '" + l.from_node +
                                                 "' to itself");
        }
        l.from_index = from->second;
        l.to_index = to->second;
    }

    for (const auto& n : net.nodes) {
        switch (n.kind) {
        case NodeKind::junction: ++net.counts.junctions; break;
        case NodeKind::reservoir: ++net.counts.reservoirs; break;
        case NodeKind::tank: ++net.counts.tanks; break;
        }
    }
    for (const auto& l : net.links) {
        switch (l.kind) {
        case LinkKind::pipe: ++net.counts.pipes; break;
        case LinkKind::pump: ++net.counts.pumps; break;
        case LinkKind::valve: ++net.counts.valves; break;
        }
    }
    net.bbox = BoundingBox::around(net.positions());
    net.reindex();
    return net;
}

WaterNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return build_network(tokenize_inp(buf.str()));
}

void scale_coordinates(WaterNetwork& net, double factor) {
    if (!(factor > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "coordinate scale must be positive");
    }
    for (auto& n : net.nodes) {
        n.position.x *= factor;
        n.position.y *= factor;
    }
    net.bbox = BoundingBox::around(net.positions());
}

std::string network_summary_json(const WaterNetwork& net) {
    nlohmann::ordered_json j;
    j["title"] = net.title;
    j["nodes"] = net.node_count();
    j["links"] = net.links.size();
    j["junctions"] = net.counts.junctions;
    j["reservoirs"] = net.counts.reservoirs;
    j["tanks"] = net.counts.tanks;
    j["pipes"] = net.counts.pipes;
    j["pumps"] = net.counts.pumps;
    j["valves"] = net.counts.valves;
    j["bbox"] = {{"x_min", net.bbox.x_min},
                 {"y_min", net.bbox.y_min},
                 {"x_max", net.bbox.x_max},
                 {"y_max", net.bbox.y_max}};
    j["warnings"] = net.warnings;
    return j.dump(2);
}

}  // namespace swifeed
