#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace vascutherm {

using Index = Eigen::Index;

enum class BoundaryTag { flux, temperature };

/// Sides of the rectangular domain, in counter-clockwise loop order.
enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

struct BoundaryEdge {
    std::array<Index, 2> nodes;  // oriented counter-clockwise around the domain
    BoundaryTag tag = BoundaryTag::flux;
    Side side = Side::bottom;

    bool operator==(const BoundaryEdge&) const = default;
};

/// Conforming P1 triangulation of a rectangle [0, length] x [0, height].
struct Mesh {
    Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;
    Eigen::Matrix<Index, Eigen::Dynamic, 3> triangles;  // counter-clockwise
    std::vector<BoundaryEdge> boundary_edges;
    double length = 0.0;
    double height = 0.0;

    Index num_nodes() const { return nodes.rows(); }
    Index num_triangles() const { return triangles.rows(); }

    Eigen::Vector2d node(Index i) const { return nodes.row(i).transpose(); }

    /// Columns are the three vertex coordinates of triangle t.
    Eigen::Matrix<double, 2, 3> triangle_coords(Index t) const;

    double signed_area(Index t) const;

    double diagonal() const;

    bool operator==(const Mesh& other) const;
};

/// Structured grid, each cell split by its lower-left to upper-right diagonal.
/// All boundary edges start out tagged as flux edges.
Mesh generate_rect_mesh(double length, double height, Index nx, Index ny);

/// Retags every boundary edge on a side.
void set_side_tag(Mesh& mesh, Side side, BoundaryTag tag);

/// Mesh invariant violations as human-readable strings; empty when valid.
std::vector<std::string> mesh_defects(const Mesh& mesh);

/// Per-node flag: true when the node lies on a boundary edge.
std::vector<bool> boundary_node_mask(const Mesh& mesh);

/// Sorted adjacency lists built from triangle edges.
std::vector<std::vector<Index>> node_neighbors(const Mesh& mesh);

/// Embedded vasculature: a node path along mesh edges, inlet first.
struct VasculaturePath {
    std::vector<Index> node_sequence;
    std::vector<double> segment_lengths;
    std::vector<double> cumulative_arclength;  // one per node, zero at the inlet
    std::vector<Eigen::Vector2d> unit_tangents;  // one per segment

    Index inlet() const { return node_sequence.front(); }
    Index outlet() const { return node_sequence.back(); }
    Index num_segments() const { return static_cast<Index>(segment_lengths.size()); }
    double total_length() const { return cumulative_arclength.back(); }

    bool operator==(const VasculaturePath&) const = default;
};

/// Builds a path from an explicit node sequence and checks every invariant.
VasculaturePath make_path(const Mesh& mesh, std::vector<Index> node_sequence);

/// Snaps waypoints to mesh nodes and joins consecutive nodes by axis-aligned
/// staircase routes along mesh edges.
VasculaturePath embed_vasculature(const Mesh& mesh,
                                  std::span<const Eigen::Vector2d> waypoints);

/// Unit tangent of a segment, pointing toward increasing arclength.
Eigen::Vector2d path_tangent_at(const VasculaturePath& path, Index segment);

/// Legacy VTK unstructured grid, ASCII.
std::string mesh_to_vtk(const Mesh& mesh, std::span<const double> point_scalars = {},
                        const std::string& scalar_name = "temperature");

} // namespace vascutherm
