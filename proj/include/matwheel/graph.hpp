#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>
#include <vector>

#include "matwheel/errors.hpp"
#include "matwheel/structure.hpp"

namespace matwheel {

/// Neighbor-search and edge-featurization parameters.
struct NeighborParams {
    double cutoff = 6.0;   // Angstrom
    int max_neighbors = 12;
    int n_centers = 31;    // Gaussian expansion centers on [0, cutoff]
    double gauss_width = 0.5; // Angstrom
};

struct GraphEdge {
    int src = 0;
    int dst = 0;
    double distance = 0.0;
    std::vector<double> feature; // length n_centers
};

/// Periodic neighbor graph. Node order matches the structure's atom order.
struct CrystalGraph {
    int n_nodes = 0;
    std::vector<int> node_species;
    std::vector<GraphEdge> edges; // grouped by src, ascending distance
    int n_centers = 0;
};

namespace detail {

/// Perpendicular widths of the cell along each lattice direction:
/// w_i = V / |r_j x r_k|. Bounds how many periodic images can fall
/// inside the cutoff sphere.
inline std::array<double, 3> perpendicular_widths(const Mat3& lattice) {
    const double volume = std::abs(det3(lattice));
    std::array<double, 3> widths{};
    for (int i = 0; i < 3; ++i) {
        const Vec3 area_vec = cross(lattice[(i + 1) % 3], lattice[(i + 2) % 3]);
        const double area = norm(area_vec);
        widths[i] = area > 0.0 ? volume / area : 0.0;
    }
    return widths;
}

struct Candidate {
    double distance;
    std::array<int, 3> offset;
    int dst;
};

inline bool candidate_less(const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.dst < b.dst;
}

} // namespace detail

/// For each atom i, the up-to max_neighbors nearest periodic images of any
/// atom j within the cutoff (self-images included, the zero-distance self
/// excluded). Ties at the max_neighbors boundary break by
/// (distance, image offset lexicographic, dst index); output is grouped by
/// src with ascending distances.
inline std::vector<std::tuple<int, int, double>> periodic_neighbors(const CrystalStructure& s,
                                                                    const NeighborParams& p) {
    const auto widths = detail::perpendicular_widths(s.lattice);
    std::array<int, 3> reach{};
    for (int axis = 0; axis < 3; ++axis) {
        if (widths[axis] <= 1e-12) throw DegenerateCell("perpendicular cell width is zero");
        reach[axis] = static_cast<int>(std::ceil(p.cutoff / widths[axis]));
    }

    const int n = s.n_atoms();
    std::vector<std::tuple<int, int, double>> out;
    std::vector<detail::Candidate> candidates;
    for (int i = 0; i < n; ++i) {
        candidates.clear();
        for (int j = 0; j < n; ++j) {
            for (int na = -reach[0]; na <= reach[0]; ++na)
                for (int nb = -reach[1]; nb <= reach[1]; ++nb)
                    for (int nc = -reach[2]; nc <= reach[2]; ++nc) {
                        if (i == j && na == 0 && nb == 0 && nc == 0) continue;
                        const Vec3 delta_frac{s.frac_coords[j][0] - s.frac_coords[i][0] + na,
                                              s.frac_coords[j][1] - s.frac_coords[i][1] + nb,
                                              s.frac_coords[j][2] - s.frac_coords[i][2] + nc};
                        const double d = norm(frac_to_cart(s.lattice, delta_frac));
                        if (d <= 1e-12 || d > p.cutoff) continue;
                        candidates.push_back({d, {na, nb, nc}, j});
                    }
        }
        std::sort(candidates.begin(), candidates.end(), detail::candidate_less);
        const auto keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(p.max_neighbors));
        for (std::size_t k = 0; k < keep; ++k)
            out.emplace_back(i, candidates[k].dst, candidates[k].distance);
    }
    return out;
}

/// Gaussian expansion of a distance: component k = exp(-(d - mu_k)^2 / w^2)
/// with centers evenly spaced on [0, cutoff].
inline std::vector<double> gaussian_expand(double d, const NeighborParams& p) {
    std::vector<double> feature(static_cast<std::size_t>(p.n_centers));
    const double step = p.cutoff / static_cast<double>(p.n_centers - 1);
    const double inv_w2 = 1.0 / (p.gauss_width * p.gauss_width);
    for (int k = 0; k < p.n_centers; ++k) {
        const double delta = d - step * static_cast<double>(k);
        feature[static_cast<std::size_t>(k)] = std::exp(-delta * delta * inv_w2);
    }
    return feature;
}

inline CrystalGraph build_graph(const CrystalStructure& s, const NeighborParams& p) {
    CrystalGraph g;
    g.n_nodes = s.n_atoms();
    g.node_species = s.species;
    g.n_centers = p.n_centers;
    for (const auto& [src, dst, distance] : periodic_neighbors(s, p))
        g.edges.push_back({src, dst, distance, gaussian_expand(distance, p)});
    return g;
}

} // namespace matwheel
