#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "matwheel/errors.hpp"

namespace matwheel {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>; // rows are lattice vectors, Angstrom

inline double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Provenance of a property label.
enum class LabelKind { Real, Pseudo, Synthetic };

inline const char* to_string(LabelKind k) {
    switch (k) {
        case LabelKind::Real: return "real";
        case LabelKind::Pseudo: return "pseudo";
        case LabelKind::Synthetic: return "synthetic";
    }
    return "real";
}

inline LabelKind label_kind_from_string(const std::string& s) {
    if (s == "real") return LabelKind::Real;
    if (s == "pseudo") return LabelKind::Pseudo;
    if (s == "synthetic") return LabelKind::Synthetic;
    throw MalformedRecord("unknown label_kind \"" + s + "\"");
}

/// A periodic crystal: row-vector lattice, atomic numbers, fractional coords.
struct CrystalStructure {
    Mat3 lattice{};
    std::vector<int> species;      // atomic numbers, 1..118
    std::vector<Vec3> frac_coords; // each component in [0,1) after wrapping
    std::string id;

    int n_atoms() const { return static_cast<int>(species.size()); }
};

/// Structure plus its scalar property and where the label came from.
struct PropertyRecord {
    CrystalStructure structure;
    double property = 0.0;
    LabelKind label_kind = LabelKind::Real;
};

/// Static dataset facts used for validation and reporting.
struct DatasetMeta {
    std::string name;
    int max_atoms = 1;
    double property_low = 0.0;
    double property_high = 1.0;
};

/// Maps every fractional coordinate into [0,1). Idempotent.
inline CrystalStructure wrap_coords(CrystalStructure s) {
    for (auto& coord : s.frac_coords) {
        for (auto& x : coord) {
            x -= std::floor(x);
            if (x >= 1.0) x -= 1.0; // floor rounding can land exactly on 1.0
        }
    }
    return s;
}

/// Cartesian displacement for a fractional delta (row vector times lattice).
inline Vec3 frac_to_cart(const Mat3& lattice, const Vec3& frac) {
    Vec3 cart{};
    for (int k = 0; k < 3; ++k)
        cart[k] = frac[0] * lattice[0][k] + frac[1] * lattice[1][k] + frac[2] * lattice[2][k];
    return cart;
}

/// Checks the structure invariants plus the dataset's atom-count bound.
/// Throws InvalidLattice, EmptyStructure or TooManyAtoms.
inline void validate_structure(const CrystalStructure& s, const DatasetMeta& meta) {
    for (const auto& row : s.lattice)
        for (double v : row)
            if (!std::isfinite(v)) throw InvalidLattice("lattice entry is not finite");
    const double det = det3(s.lattice);
    if (!(det > 0.0)) throw InvalidLattice("lattice determinant must be > 0, got " + std::to_string(det));
    if (s.species.empty()) throw EmptyStructure("structure has no atoms");
    if (s.species.size() != s.frac_coords.size())
        throw MalformedRecord("species/frac_coords length mismatch");
    if (s.n_atoms() > meta.max_atoms)
        throw TooManyAtoms("structure " + s.id + " has " + std::to_string(s.n_atoms()) + " atoms, max is " +
                           std::to_string(meta.max_atoms));
    for (int z : s.species)
        if (z < 1 || z > 118) throw MalformedRecord("atomic number out of range: " + std::to_string(z));
    for (const auto& coord : s.frac_coords)
        for (double x : coord)
            if (!(x >= 0.0 && x < 1.0)) throw MalformedRecord("fractional coordinate outside [0,1)");
}

/// Cell parameters (a, b, c, alpha, beta, gamma) in Angstrom / degrees.
inline std::array<double, 6> lattice_to_cell_params(const Mat3& m) {
    const double a = norm(m[0]);
    const double b = norm(m[1]);
    const double c = norm(m[2]);
    constexpr double rad2deg = 57.295779513082320877;
    const double alpha = std::acos(dot(m[1], m[2]) / (b * c)) * rad2deg;
    const double beta = std::acos(dot(m[0], m[2]) / (a * c)) * rad2deg;
    const double gamma = std::acos(dot(m[0], m[1]) / (a * b)) * rad2deg;
    return {a, b, c, alpha, beta, gamma};
}

/// Canonical-orientation lattice from cell parameters: first vector along x,
/// second in the xy plane. Right-handed (det > 0) whenever the parameters
/// describe a geometrically realizable cell.
inline Mat3 cell_params_to_lattice(const std::array<double, 6>& p) {
    constexpr double deg2rad = 0.017453292519943295769;
    const double a = p[0], b = p[1], c = p[2];
    const double ca = std::cos(p[3] * deg2rad);
    const double cb = std::cos(p[4] * deg2rad);
    const double cg = std::cos(p[5] * deg2rad);
    const double sg = std::sin(p[5] * deg2rad);
    const double cx = c * cb;
    const double cy = c * (ca - cb * cg) / sg;
    const double cz2 = c * c - cx * cx - cy * cy;
    const double cz = std::sqrt(cz2 > 0.0 ? cz2 : 0.0);
    return Mat3{Vec3{a, 0.0, 0.0}, Vec3{b * cg, b * sg, 0.0}, Vec3{cx, cy, cz}};
}

} // namespace matwheel
