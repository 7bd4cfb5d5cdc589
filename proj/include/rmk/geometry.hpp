#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Oriented boxes, convex polygon clipping and rotated NMS.
namespace rmk::geom {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct ConvexPolygon {
    std::vector<Point> vertices;  // counter-clockwise

    double area() const;
    Point centroid() const;
    bool contains(Point p) const;
};

/// Rotated rectangle (cx, cy, w, h, theta). Construction canonicalizes so
/// that w >= h (swapping and turning by pi/2 when needed) and theta lies in
/// [0, 2*pi). Both spellings of a box yield the same polygon.
class OrientedBox {
   public:
    OrientedBox(double cx, double cy, double w, double h, double theta, int class_id = 0,
                double score = 1.0);

    double cx() const { return cx_; }
    double cy() const { return cy_; }
    double w() const { return w_; }
    double h() const { return h_; }
    double theta() const { return theta_; }
    int class_id() const { return class_id_; }
    double score() const { return score_; }

    OrientedBox with_score(double score) const;
    OrientedBox with_class(int class_id) const;
    double area() const { return w_ * h_; }

    friend bool operator==(const OrientedBox&, const OrientedBox&) = default;

   private:
    double cx_, cy_, w_, h_, theta_;
    int class_id_;
    double score_;
};

/// Four CCW corners, starting at the (-w/2, -h/2) local corner.
ConvexPolygon box_to_polygon(const OrientedBox& b);

/// Sutherland-Hodgman clip of `subject` against convex `clip`.
ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& clip);

double polygon_iou(const ConvexPolygon& a, const ConvexPolygon& b);

/// Exact intersection-over-union of two rotated rectangles.
double rotated_iou(const OrientedBox& a, const OrientedBox& b);

/// Brute-force IoU by point-in-box tests at the centres of a grid x grid
/// lattice spanning both boxes' bounding extent.
double raster_iou(const OrientedBox& a, const OrientedBox& b, int grid = 1024);

/// Greedy suppression in (score desc, class asc, cx asc, cy asc) order. A
/// box is dropped when its IoU with an already kept box exceeds the
/// threshold. With per_class set, only same-class boxes suppress each other.
std::vector<OrientedBox> rotated_nms(std::span<const OrientedBox> boxes, double iou_threshold,
                                     bool per_class = false);

/// Rigid rotation of the box centre about `pivot`, with theta advanced by `angle`.
OrientedBox rotate_about(const OrientedBox& b, Point pivot, double angle);

}  // namespace rmk::geom
