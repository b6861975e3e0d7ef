#include "gridlay/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gridlay {

namespace {

// Fixed formatting so output does not depend on stream state or locale.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string emit_svg(const Graph& g, const LayoutState& s, const ConstraintList& constraints,
                     const SvgOptions& options) {
    if (!s.finite()) throw Error("cannot draw a layout with non-finite coordinates");
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    if (g.size() > 0) {
        min_x = min_y = std::numeric_limits<double>::infinity();
        max_x = max_y = -std::numeric_limits<double>::infinity();
    }
    for (NodeIndex i = 0; i < g.size(); ++i) {
        min_x = std::min(min_x, s.x[i] - g.node(i).w / 2);
        max_x = std::max(max_x, s.x[i] + g.node(i).w / 2);
        min_y = std::min(min_y, s.y[i] - g.node(i).h / 2);
        max_y = std::max(max_y, s.y[i] + g.node(i).h / 2);
    }
    const double m = options.margin;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(min_x - m) << ' ' << num(min_y - m) << ' '
        << num(max_x - min_x + 2 * m) << ' ' << num(max_y - min_y + 2 * m) << "\">\n";

    if (options.grid) {
        const double tau = options.grid->tau;
        const double gx0 = std::floor(min_x / tau) * tau, gx1 = std::ceil(max_x / tau) * tau;
        const double gy0 = std::floor(min_y / tau) * tau, gy1 = std::ceil(max_y / tau) * tau;
        out << "<g class=\"grid\" stroke=\"#ddd\" stroke-width=\"0.5\">\n";
        for (long k = std::lround(gx0 / tau); k <= std::lround(gx1 / tau); ++k)
            out << "<line x1=\"" << num(k * tau) << "\" y1=\"" << num(gy0) << "\" x2=\"" << num(k * tau)
                << "\" y2=\"" << num(gy1) << "\"/>\n";
        for (long k = std::lround(gy0 / tau); k <= std::lround(gy1 / tau); ++k)
            out << "<line x1=\"" << num(gx0) << "\" y1=\"" << num(k * tau) << "\" x2=\"" << num(gx1)
                << "\" y2=\"" << num(k * tau) << "\"/>\n";
        out << "</g>\n";
    }

    std::vector<bool> held(g.edge_count(), false);
    if (options.highlight_alignments) {
        EqualityClasses cx(g.size(), constraints, Dim::X), cy(g.size(), constraints, Dim::Y);
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            auto [u, v] = g.edges()[e];
            held[e] = cx.same(u, v) || cy.same(u, v);
        }
    }
    out << "<g class=\"edges\" stroke=\"#333\" stroke-width=\"1.5\">\n";
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        auto [u, v] = g.edges()[e];
        out << "<line x1=\"" << num(s.x[u]) << "\" y1=\"" << num(s.y[u]) << "\" x2=\"" << num(s.x[v]) << "\" y2=\""
            << num(s.y[v]) << '"';
        if (held[e]) out << " stroke=\"#c33\"";
        out << "/>\n";
    }
    out << "</g>\n<g class=\"nodes\" fill=\"#fff\" stroke=\"#000\">\n";
    for (NodeIndex i = 0; i < g.size(); ++i) {
        const Node& n = g.node(i);
        out << "<rect x=\"" << num(s.x[i] - n.w / 2) << "\" y=\"" << num(s.y[i] - n.h / 2) << "\" width=\""
            << num(n.w) << "\" height=\"" << num(n.h) << "\"><title>" << escape(n.id) << "</title></rect>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace gridlay
