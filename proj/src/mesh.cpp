#include "vascutherm/mesh.hpp"

#include "vascutherm/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace vascutherm {

Eigen::Matrix<double, 2, 3> Mesh::triangle_coords(Index t) const
{
    Eigen::Matrix<double, 2, 3> xy;
    for (int a = 0; a < 3; ++a)
        xy.col(a) = nodes.row(triangles(t, a)).transpose();
    return xy;
}

double Mesh::signed_area(Index t) const
{
    const auto xy = triangle_coords(t);
    const Eigen::Vector2d e1 = xy.col(1) - xy.col(0);
    const Eigen::Vector2d e2 = xy.col(2) - xy.col(0);
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double Mesh::diagonal() const { return std::hypot(length, height); }

bool Mesh::operator==(const Mesh& other) const
{
    return length == other.length && height == other.height &&
           nodes.rows() == other.nodes.rows() && nodes == other.nodes &&
           triangles.rows() == other.triangles.rows() && triangles == other.triangles &&
           boundary_edges == other.boundary_edges;
}

Mesh generate_rect_mesh(double length, double height, Index nx, Index ny)
{
    if (!(length > 0.0) || !(height > 0.0))
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("domain dimensions must be positive (got {} x {})", length, height));
    if (nx < 1 || ny < 1)
        throw Error(ErrorCode::invalid_argument,
                    fmt::format("cell counts must be at least 1 (got {} x {})", nx, ny));

    Mesh mesh;
    mesh.length = length;
    mesh.height = height;
    const Index cols = nx + 1;
    auto id = [cols](Index i, Index j) { return j * cols + i; };

    mesh.nodes.resize(cols * (ny + 1), 2);
    for (Index j = 0; j <= ny; ++j)
        for (Index i = 0; i <= nx; ++i) {
            mesh.nodes(id(i, j), 0) = length * static_cast<double>(i) / static_cast<double>(nx);
            mesh.nodes(id(i, j), 1) = height * static_cast<double>(j) / static_cast<double>(ny);
        }

    mesh.triangles.resize(2 * nx * ny, 3);
    Index t = 0;
    for (Index j = 0; j < ny; ++j)
        for (Index i = 0; i < nx; ++i) {
            const Index ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
            mesh.triangles.row(t++) << ll, lr, ur;
            mesh.triangles.row(t++) << ll, ur, ul;
        }

    auto& edges = mesh.boundary_edges;
    edges.reserve(2 * (nx + ny));
    for (Index i = 0; i < nx; ++i)
        edges.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::flux, Side::bottom});
    for (Index j = 0; j < ny; ++j)
        edges.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::flux, Side::right});
    for (Index i = nx; i > 0; --i)
        edges.push_back({{id(i, ny), id(i - 1, ny)}, BoundaryTag::flux, Side::top});
    for (Index j = ny; j > 0; --j)
        edges.push_back({{id(0, j), id(0, j - 1)}, BoundaryTag::flux, Side::left});
    return mesh;
}

void set_side_tag(Mesh& mesh, Side side, BoundaryTag tag)
{
    for (auto& e : mesh.boundary_edges)
        if (e.side == side)
            e.tag = tag;
}

std::vector<std::string> mesh_defects(const Mesh& mesh)
{
    std::vector<std::string> defects;
    const Index n = mesh.num_nodes();
    auto in_range = [n](Index i) { return i >= 0 && i < n; };

    std::map<std::pair<Index, Index>, int> edge_count;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        bool ok = true;
        for (int a = 0; a < 3; ++a)
            ok = ok && in_range(mesh.triangles(t, a));
        if (!ok) {
            defects.push_back(fmt::format("triangle {} has a node index out of range", t));
            continue;
        }
        if (!(mesh.signed_area(t) > 0.0))
            defects.push_back(fmt::format("triangle {} has non-positive signed area", t));
        for (int a = 0; a < 3; ++a) {
            Index p = mesh.triangles(t, a), q = mesh.triangles(t, (a + 1) % 3);
            ++edge_count[{std::min(p, q), std::max(p, q)}];
        }
    }

    std::map<Index, int> degree;
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const auto [p, q] = mesh.boundary_edges[k].nodes;
        if (!in_range(p) || !in_range(q)) {
            defects.push_back(fmt::format("boundary edge {} has a node index out of range", k));
            continue;
        }
        auto it = edge_count.find({std::min(p, q), std::max(p, q)});
        if (it == edge_count.end() || it->second != 1)
            defects.push_back(fmt::format("boundary edge {} does not belong to exactly one triangle", k));
        ++degree[p];
        ++degree[q];
    }

    // Closed loop: every boundary node has degree two and the edges chain back to the start.
    bool closed = !mesh.boundary_edges.empty();
    for (const auto& [node, deg] : degree)
        closed = closed && deg == 2;
    if (closed) {
        std::map<Index, Index> next;
        for (const auto& e : mesh.boundary_edges)
            next[e.nodes[0]] = e.nodes[1];
        const Index start = mesh.boundary_edges.front().nodes[0];
        Index cur = start;
        std::size_t steps = 0;
        do {
            auto it = next.find(cur);
            if (it == next.end()) {
                closed = false;
                break;
            }
            cur = it->second;
            ++steps;
        } while (cur != start && steps <= mesh.boundary_edges.size());
        closed = closed && cur == start && steps == mesh.boundary_edges.size();
    }
    if (!closed)
        defects.emplace_back("boundary edges do not form a single closed loop");
    return defects;
}

std::vector<bool> boundary_node_mask(const Mesh& mesh)
{
    std::vector<bool> mask(static_cast<std::size_t>(mesh.num_nodes()), false);
    for (const auto& e : mesh.boundary_edges) {
        mask[static_cast<std::size_t>(e.nodes[0])] = true;
        mask[static_cast<std::size_t>(e.nodes[1])] = true;
    }
    return mask;
}

std::vector<std::vector<Index>> node_neighbors(const Mesh& mesh)
{
    std::vector<std::set<Index>> sets(static_cast<std::size_t>(mesh.num_nodes()));
    for (Index t = 0; t < mesh.num_triangles(); ++t)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b)
                    sets[static_cast<std::size_t>(mesh.triangles(t, a))].insert(mesh.triangles(t, b));
    std::vector<std::vector<Index>> out(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i)
        out[i].assign(sets[i].begin(), sets[i].end());
    return out;
}

VasculaturePath make_path(const Mesh& mesh, std::vector<Index> node_sequence)
{
    if (node_sequence.size() < 2)
        throw Error(ErrorCode::invalid_argument, "vasculature path needs at least two distinct nodes");
    const auto neighbors = node_neighbors(mesh);
    std::set<Index> seen;
    for (std::size_t k = 0; k < node_sequence.size(); ++k) {
        const Index v = node_sequence[k];
        if (v < 0 || v >= mesh.num_nodes())
            throw Error(ErrorCode::index_out_of_range, fmt::format("path node {} out of range", v));
        if (k > 0 && node_sequence[k - 1] == v)
            throw Error(ErrorCode::invalid_argument,
                        fmt::format("path repeats node {} consecutively (zero-length segment)", v));
        if (!seen.insert(v).second)
            throw Error(ErrorCode::invalid_argument, fmt::format("path revisits node {}", v));
        if (k > 0) {
            const auto& nb = neighbors[static_cast<std::size_t>(node_sequence[k - 1])];
            if (!std::binary_search(nb.begin(), nb.end(), v))
                throw Error(ErrorCode::invalid_argument,
                            fmt::format("path nodes {} and {} are not joined by a mesh edge",
                                        node_sequence[k - 1], v));
        }
    }
    const auto on_boundary = boundary_node_mask(mesh);
    if (!on_boundary[static_cast<std::size_t>(node_sequence.front())])
        throw Error(ErrorCode::inlet_not_on_boundary,
                    fmt::format("inlet node {} is interior to the domain", node_sequence.front()));
    if (!on_boundary[static_cast<std::size_t>(node_sequence.back())])
        throw Error(ErrorCode::inlet_not_on_boundary,
                    fmt::format("outlet node {} is interior to the domain", node_sequence.back()));

    VasculaturePath path;
    path.node_sequence = std::move(node_sequence);
    path.cumulative_arclength.push_back(0.0);
    for (std::size_t k = 0; k + 1 < path.node_sequence.size(); ++k) {
        const Eigen::Vector2d delta = mesh.node(path.node_sequence[k + 1]) - mesh.node(path.node_sequence[k]);
        const double len = delta.norm();
        path.segment_lengths.push_back(len);
        path.cumulative_arclength.push_back(path.cumulative_arclength.back() + len);
        path.unit_tangents.push_back(delta / len);
    }
    return path;
}

namespace {

Index nearest_node(const Mesh& mesh, const Eigen::Vector2d& p, double& distance)
{
    Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < mesh.num_nodes(); ++i) {
        const double d2 = (mesh.node(i) - p).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    distance = std::sqrt(best_d2);
    return best;
}

// Walks from `from` toward `to`, first along x then along y, using only
// axis-aligned mesh edges. Returns the nodes after `from`, ending at `to`.
std::vector<Index> staircase(const Mesh& mesh, const std::vector<std::vector<Index>>& neighbors,
                             Index from, Index to, double tol)
{
    std::vector<Index> route;
    Index cur = from;
    const Eigen::Vector2d target = mesh.node(to);
    for (int axis = 0; axis < 2; ++axis) {
        const int other = 1 - axis;
        while (std::abs(mesh.node(cur)[axis] - target[axis]) > tol) {
            const Eigen::Vector2d here = mesh.node(cur);
            const double dir = target[axis] > here[axis] ? 1.0 : -1.0;
            Index step = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Index nb : neighbors[static_cast<std::size_t>(cur)]) {
                const Eigen::Vector2d q = mesh.node(nb);
                const double along = (q[axis] - here[axis]) * dir;
                if (std::abs(q[other] - here[other]) <= tol && along > tol && along < best) {
                    best = along;
                    step = nb;
                }
            }
            if (step < 0)
                throw Error(ErrorCode::snap_failure,
                            fmt::format("no axis-aligned mesh edge leads from node {} toward node {}", cur, to));
            route.push_back(step);
            cur = step;
        }
    }
    if (cur != to)
        throw Error(ErrorCode::snap_failure,
                    fmt::format("staircase route from node {} ended at node {} instead of {}", from, cur, to));
    return route;
}

} // namespace

VasculaturePath embed_vasculature(const Mesh& mesh, std::span<const Eigen::Vector2d> waypoints)
{
    if (waypoints.size() < 2)
        throw Error(ErrorCode::invalid_argument, "vasculature needs at least two waypoints");
    const double tol = 1e-9 * mesh.diagonal();

    std::vector<Index> snapped;
    for (std::size_t k = 0; k < waypoints.size(); ++k) {
        double dist = 0.0;
        const Index node = nearest_node(mesh, waypoints[k], dist);
        if (dist > tol)
            throw Error(ErrorCode::snap_failure,
                        fmt::format("waypoint {} at ({}, {}) is {} m from the nearest mesh node", k,
                                    waypoints[k].x(), waypoints[k].y(), dist));
        if (!snapped.empty() && snapped.back() == node)
            throw Error(ErrorCode::invalid_argument,
                        fmt::format("waypoints {} and {} snap to the same node {}", k - 1, k, node));
        snapped.push_back(node);
    }

    const auto on_boundary = boundary_node_mask(mesh);
    if (!on_boundary[static_cast<std::size_t>(snapped.front())])
        throw Error(ErrorCode::inlet_not_on_boundary, "first waypoint (inlet) is interior to the domain");
    if (!on_boundary[static_cast<std::size_t>(snapped.back())])
        throw Error(ErrorCode::inlet_not_on_boundary, "last waypoint (outlet) is interior to the domain");

    const auto neighbors = node_neighbors(mesh);
    std::vector<Index> sequence{snapped.front()};
    for (std::size_t k = 0; k + 1 < snapped.size(); ++k) {
        // Route from the lower-numbered endpoint so that reversing the
        // waypoint list reproduces the same nodes in reverse order.
        const Index a = snapped[k], b = snapped[k + 1];
        std::vector<Index> leg;
        if (a < b) {
            leg = staircase(mesh, neighbors, a, b, tol);
        } else {
            auto back = staircase(mesh, neighbors, b, a, tol);
            back.pop_back();
            leg.assign(back.rbegin(), back.rend());
            leg.push_back(b);
        }
        sequence.insert(sequence.end(), leg.begin(), leg.end());
    }
    return make_path(mesh, std::move(sequence));
}

Eigen::Vector2d path_tangent_at(const VasculaturePath& path, Index segment)
{
    if (segment < 0 || segment >= path.num_segments())
        throw Error(ErrorCode::index_out_of_range,
                    fmt::format("segment {} out of range [0, {})", segment, path.num_segments()));
    return path.unit_tangents[static_cast<std::size_t>(segment)];
}

std::string mesh_to_vtk(const Mesh& mesh, std::span<const double> point_scalars,
                        const std::string& scalar_name)
{
    std::string out;
    out += "# vtk DataFile Version 3.0\nvascutherm\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += fmt::format("POINTS {} double\n", mesh.num_nodes());
    for (Index i = 0; i < mesh.num_nodes(); ++i)
        out += fmt::format("{} {} 0\n", mesh.nodes(i, 0), mesh.nodes(i, 1));
    const Index nt = mesh.num_triangles();
    out += fmt::format("CELLS {} {}\n", nt, 4 * nt);
    for (Index t = 0; t < nt; ++t)
        out += fmt::format("3 {} {} {}\n", mesh.triangles(t, 0), mesh.triangles(t, 1), mesh.triangles(t, 2));
    out += fmt::format("CELL_TYPES {}\n", nt);
    for (Index t = 0; t < nt; ++t)
        out += "5\n";
    if (!point_scalars.empty()) {
        out += fmt::format("POINT_DATA {}\nSCALARS {} double 1\nLOOKUP_TABLE default\n", mesh.num_nodes(),
                           scalar_name);
        for (double v : point_scalars)
            out += fmt::format("{}\n", v);
    }
    return out;
}

} // namespace vascutherm
