#include "rmk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "rmk/errors.hpp"

namespace rmk::geom {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(Point o, Point a, Point b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

// Intersection of segment p->q with the infinite line through a->b.
Point intersect(Point p, Point q, Point a, Point b) {
    const double d1 = cross(a, b, p);
    const double d2 = cross(a, b, q);
    if (d1 == d2) return p;
    const double t = d1 / (d1 - d2);
    return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

}  // namespace

double ConvexPolygon::area() const {
    const std::size_t n = vertices.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = vertices[i];
        const Point& b = vertices[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) * 0.5;
}

Point ConvexPolygon::centroid() const {
    const std::size_t n = vertices.size();
    if (n == 0) return {};
    const double a = area();
    if (n < 3 || a == 0.0) {
        Point c;
        for (const auto& v : vertices) {
            c.x += v.x / static_cast<double>(n);
            c.y += v.y / static_cast<double>(n);
        }
        return c;
    }
    double cx = 0.0, cy = 0.0, twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = vertices[i];
        const Point& q = vertices[(i + 1) % n];
        const double c = p.x * q.y - q.x * p.y;
        twice += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    return {cx / (3.0 * twice), cy / (3.0 * twice)};
}

bool ConvexPolygon::contains(Point p) const {
    const std::size_t n = vertices.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (cross(vertices[i], vertices[(i + 1) % n], p) < 0.0) return false;
    }
    return true;
}

OrientedBox::OrientedBox(double cx, double cy, double w, double h, double theta, int class_id,
                         double score)
    : cx_(cx), cy_(cy), w_(w), h_(h), theta_(theta), class_id_(class_id), score_(score) {
    if (!(std::isfinite(cx) && std::isfinite(cy) && std::isfinite(theta))) {
        throw ContractError("OrientedBox: non-finite centre or angle");
    }
    if (!(w > 0.0 && h > 0.0 && std::isfinite(w) && std::isfinite(h))) {
        throw ContractError("OrientedBox: width and height must be positive, got " +
                            std::to_string(w) + " x " + std::to_string(h));
    }
    if (!(score >= 0.0 && score <= 1.0)) {
        throw ContractError("OrientedBox: score " + std::to_string(score) + " outside [0, 1]");
    }
    if (w_ < h_) {
        std::swap(w_, h_);
        theta_ += std::numbers::pi / 2.0;
    }
    theta_ = wrap_angle(theta_);
}

OrientedBox OrientedBox::with_score(double score) const {
    OrientedBox b = *this;
    if (!(score >= 0.0 && score <= 1.0)) {
        throw ContractError("OrientedBox: score " + std::to_string(score) + " outside [0, 1]");
    }
    b.score_ = score;
    return b;
}

OrientedBox OrientedBox::with_class(int class_id) const {
    OrientedBox b = *this;
    b.class_id_ = class_id;
    return b;
}

ConvexPolygon box_to_polygon(const OrientedBox& b) {
    const double c = std::cos(b.theta());
    const double s = std::sin(b.theta());
    const double hw = b.w() / 2.0, hh = b.h() / 2.0;
    const Point local[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    ConvexPolygon poly;
    poly.vertices.reserve(4);
    for (const auto& p : local) {
        poly.vertices.push_back({b.cx() + p.x * c - p.y * s, b.cy() + p.x * s + p.y * c});
    }
    return poly;
}

ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& clipper) {
    std::vector<Point> output = subject.vertices;
    const std::size_t m = clipper.vertices.size();
    for (std::size_t e = 0; e < m && !output.empty(); ++e) {
        const Point a = clipper.vertices[e];
        const Point b = clipper.vertices[(e + 1) % m];
        std::vector<Point> input;
        input.swap(output);
        for (std::size_t i = 0; i < input.size(); ++i) {
            const Point cur = input[i];
            const Point prev = input[(i + input.size() - 1) % input.size()];
            // Points on the clip line count as inside; touching yields zero area.
            const bool cur_in = cross(a, b, cur) >= 0.0;
            const bool prev_in = cross(a, b, prev) >= 0.0;
            if (cur_in) {
                if (!prev_in) output.push_back(intersect(prev, cur, a, b));
                output.push_back(cur);
            } else if (prev_in) {
                output.push_back(intersect(prev, cur, a, b));
            }
        }
    }
    return {std::move(output)};
}

double polygon_iou(const ConvexPolygon& a, const ConvexPolygon& b) {
    const double area_a = a.area();
    const double area_b = b.area();
    const double inter = clip(a, b).area();
    const double uni = area_a + area_b - inter;
    if (!(uni > 0.0) || !std::isfinite(inter)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double rotated_iou(const OrientedBox& a, const OrientedBox& b) {
    return polygon_iou(box_to_polygon(a), box_to_polygon(b));
}

double raster_iou(const OrientedBox& a, const OrientedBox& b, int grid) {
    if (grid < 1) throw ContractError("raster_iou: grid must be positive");
    const ConvexPolygon pa = box_to_polygon(a);
    const ConvexPolygon pb = box_to_polygon(b);
    double xmin = pa.vertices[0].x, xmax = xmin, ymin = pa.vertices[0].y, ymax = ymin;
    for (const auto* poly : {&pa, &pb}) {
        for (const auto& v : poly->vertices) {
            xmin = std::min(xmin, v.x);
            xmax = std::max(xmax, v.x);
            ymin = std::min(ymin, v.y);
            ymax = std::max(ymax, v.y);
        }
    }
    const double dx = (xmax - xmin) / grid;
    const double dy = (ymax - ymin) / grid;
    std::int64_t in_a = 0, in_b = 0, in_both = 0;
    for (int i = 0; i < grid; ++i) {
        const double y = ymin + (i + 0.5) * dy;
        for (int j = 0; j < grid; ++j) {
            const Point p{xmin + (j + 0.5) * dx, y};
            const bool ia = pa.contains(p);
            const bool ib = pb.contains(p);
            in_a += ia;
            in_b += ib;
            in_both += ia && ib;
        }
    }
    const std::int64_t uni = in_a + in_b - in_both;
    return uni == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(uni);
}

std::vector<OrientedBox> rotated_nms(std::span<const OrientedBox> boxes, double iou_threshold,
                                     bool per_class) {
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = boxes[i];
        const auto& b = boxes[j];
        if (a.score() != b.score()) return a.score() > b.score();
        if (a.class_id() != b.class_id()) return a.class_id() < b.class_id();
        if (a.cx() != b.cx()) return a.cx() < b.cx();
        return a.cy() < b.cy();
    });
    std::vector<OrientedBox> kept;
    std::vector<ConvexPolygon> kept_polys;
    for (std::size_t idx : order) {
        const auto& cand = boxes[idx];
        const ConvexPolygon poly = box_to_polygon(cand);
        bool suppressed = false;
        for (std::size_t k = 0; k < kept.size() && !suppressed; ++k) {
            if (per_class && kept[k].class_id() != cand.class_id()) continue;
            suppressed = polygon_iou(poly, kept_polys[k]) > iou_threshold;
        }
        if (!suppressed) {
            kept.push_back(cand);
            kept_polys.push_back(poly);
        }
    }
    return kept;
}

OrientedBox rotate_about(const OrientedBox& b, Point pivot, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = b.cx() - pivot.x, dy = b.cy() - pivot.y;
    return OrientedBox(pivot.x + dx * c - dy * s, pivot.y + dx * s + dy * c, b.w(), b.h(),
                       b.theta() + angle, b.class_id(), b.score());
}

}  // namespace rmk::geom
