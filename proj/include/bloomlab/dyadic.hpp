#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <vector>

#include "bloomlab/error.hpp"

namespace bloom {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using Coord = std::array<std::int64_t, kMaxDim>;

// A cube of a dyadic tree: its level and its row-major index within the level
// (axis 0 varies fastest, each axis takes `level` bits).
struct Cube {
    int level = 0;
    std::uint64_t index = 0;

    friend bool operator==(const Cube&, const Cube&) = default;
    friend auto operator<=>(const Cube&, const Cube&) = default;
};

// Axis-parallel half-open box [lo, hi) in root coordinates.
struct Box {
    int dim = 1;
    Point lo{};
    Point hi{};

    double side(int axis = 0) const { return hi[axis] - lo[axis]; }
    double volume() const;
    bool contains(const Box& other) const;
    bool contains(const Point& x) const;
};

// Complete dyadic tree of depth N over a root cube, with 2^{dN} finest cells.
class DyadicTree {
public:
    // Root [-H, H)^d.
    DyadicTree(int dim, int depth, double half_width);
    // Root [corner, corner + side)^d.
    DyadicTree(int dim, int depth, const Point& corner, double side);

    int dim() const { return dim_; }
    int depth() const { return depth_; }
    const Point& corner() const { return corner_; }
    double root_side() const { return side_; }

    std::uint64_t cell_count() const { return cubes_at(depth_); }
    std::uint64_t cubes_at(int level) const { return std::uint64_t{1} << (dim_ * level); }
    std::uint64_t cube_count() const;
    double side(int level) const;
    double volume(int level) const;
    double cell_volume() const { return volume(depth_); }

    bool valid(const Cube& q) const;
    void require(const Cube& q) const;  // throws DomainError when q is not a tree cube
    bool is_finest(const Cube& q) const { return q.level == depth_; }

    Coord coords(const Cube& q) const;
    Cube cube(int level, const Coord& x) const;
    Cube root() const { return {0, 0}; }
    Cube cell(std::uint64_t i) const { return {depth_, i}; }

    Cube parent(const Cube& q) const;
    Cube child(const Cube& q, unsigned which) const;
    std::vector<Cube> children(const Cube& q) const;
    Cube ancestor(const Cube& q, int level) const;
    std::uint64_t ancestor_index(std::uint64_t cell, int level) const;
    bool contains(const Cube& outer, const Cube& inner) const;

    Box box(const Cube& q) const;
    Point midpoint(std::uint64_t cell) const;
    std::uint64_t locate(const Point& x) const;

    std::vector<std::uint64_t> cells_of(const Cube& q) const;
    template <class F>
    void for_each_cell(const Cube& q, F&& fn) const;

    std::vector<Cube> all_cubes() const;

    bool operator==(const DyadicTree& other) const;

private:
    int dim_;
    int depth_;
    Point corner_{};
    double side_;
};

using TreePtr = std::shared_ptr<const DyadicTree>;

TreePtr make_tree(int dim, int depth, double half_width);
TreePtr make_tree(int dim, int depth, const Point& corner, double side);

// Subtree of `tree` rooted at q0, as a tree of its own.
TreePtr restrict_tree(const DyadicTree& tree, const Cube& q0);

// One value per finest cell.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(TreePtr tree, double fill = 0.0);
    GridFunction(TreePtr tree, std::vector<double> values);

    const DyadicTree& tree() const { return *tree_; }
    const TreePtr& tree_ptr() const { return tree_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double integral() const;
    double integral(const Cube& q) const;

    GridFunction abs() const;
    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double s);

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(GridFunction a, double s) { return a *= s; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
    // Pointwise product.
    friend GridFunction operator*(const GridFunction& a, const GridFunction& b);

private:
    void check_same_tree(const GridFunction& o) const;

    TreePtr tree_;
    std::vector<double> values_;
};

GridFunction indicator(TreePtr tree, const Cube& q);
// Indicator of the cells whose midpoint lies in `box`.
GridFunction indicator(TreePtr tree, const Box& box);
// 1_{Q+} - 1_{Q-}: +1 on the upper half of q along axis 0, -1 on the lower half.
GridFunction half_split(TreePtr tree, const Cube& q);

// Restriction of f to the subtree rooted at q0 (see restrict_tree).
GridFunction restrict_function(const GridFunction& f, const Cube& q0);

// Per-level, per-cube values.
using LevelArray = std::vector<std::vector<double>>;

LevelArray zero_levels(const DyadicTree& tree);
// Sums of per-cell values over every tree cube (pairwise bottom-up).
LevelArray level_sums(const DyadicTree& tree, const std::vector<double>& cell_values);
// Lebesgue averages <f>_Q.
LevelArray level_averages(const GridFunction& f);
// Oscillation integrals \int_Q |b - <b>_Q| dx.
LevelArray level_oscillations(const GridFunction& b);

double average(const GridFunction& f, const Cube& q);
GridFunction haar_difference(const GridFunction& b, const Cube& q);

// Set of tree cubes with O(1) membership.
class CubeSet {
public:
    CubeSet() = default;
    explicit CubeSet(const DyadicTree& tree);
    CubeSet(const DyadicTree& tree, const std::vector<Cube>& cubes);

    void insert(const Cube& q);
    void erase(const Cube& q);
    bool contains(const Cube& q) const;
    std::size_t size() const { return count_; }
    std::vector<Cube> list() const;
    const std::vector<std::vector<std::uint8_t>>& mask() const { return mask_; }

private:
    std::vector<std::vector<std::uint8_t>> mask_;
    std::size_t count_ = 0;
};

// Cube of the shifted lattice D^alpha in integer units u = cell side / 3.
struct LatticeCube {
    int level = 0;
    Coord lo{};                // lower corner, in units u from the root corner
    std::int64_t width = 0;    // side in units u
};

// The shifted lattice D^alpha, alpha in {0, 1/3, 2/3}^d, restricted to cubes
// inside the root of a base tree. Shifted cubes are integration domains over
// the base cells; overlaps are exact in units of a third of a cell.
class ShiftedLattice {
public:
    ShiftedLattice(TreePtr tree, const std::array<int, kMaxDim>& thirds);

    static std::vector<ShiftedLattice> all(const TreePtr& tree);

    const DyadicTree& tree() const { return *tree_; }
    const std::array<int, kMaxDim>& thirds() const { return thirds_; }
    const std::vector<LatticeCube>& cubes() const { return cubes_; }
    Box box(const LatticeCube& q) const;

    // fn(cell, fraction of the cell inside q, part of the cell inside q).
    template <class F>
    void for_each_overlap(const LatticeCube& q, F&& fn) const;
    // fn(cell) for every base cell whose midpoint lies in q.
    template <class F>
    void for_each_member_cell(const LatticeCube& q, F&& fn) const;

private:
    struct AxisRange {
        std::int64_t first, last;  // inclusive cell range
        std::int64_t lo, hi;       // q's extent in units
    };
    std::array<AxisRange, kMaxDim> ranges(const LatticeCube& q) const;

    TreePtr tree_;
    std::array<int, kMaxDim> thirds_{};
    std::vector<LatticeCube> cubes_;
};

struct Cover {
    std::array<int, kMaxDim> thirds{};
    LatticeCube cube;
    Box box;
};

// R in some D^alpha with q inside R and side(R) <= 3 side(q).
Cover one_third_cover(const TreePtr& tree, const Box& q);

// ---- inline templates ----

template <class F>
void DyadicTree::for_each_cell(const Cube& q, F&& fn) const {
    const int shift = depth_ - q.level;
    const std::uint64_t span = std::uint64_t{1} << shift;
    const Coord x = coords(q);
    std::array<std::uint64_t, kMaxDim> lo{}, cur{};
    for (int j = 0; j < dim_; ++j) lo[j] = cur[j] = static_cast<std::uint64_t>(x[j]) << shift;
    if (dim_ == 1) {
        for (std::uint64_t i = lo[0]; i < lo[0] + span; ++i) fn(i);
        return;
    }
    while (true) {
        std::uint64_t idx = 0;
        for (int j = 0; j < dim_; ++j) idx |= cur[j] << (depth_ * j);
        fn(idx);
        int j = 0;
        while (j < dim_) {
            if (++cur[j] < lo[j] + span) break;
            cur[j] = lo[j];
            ++j;
        }
        if (j == dim_) return;
    }
}

template <class F>
void ShiftedLattice::for_each_overlap(const LatticeCube& q, F&& fn) const {
    const auto& t = *tree_;
    const int d = t.dim();
    const auto r = ranges(q);
    const double u = t.side(t.depth()) / 3.0;
    std::array<std::int64_t, kMaxDim> cur{};
    for (int j = 0; j < d; ++j) cur[j] = r[j].first;
    while (true) {
        std::uint64_t idx = 0;
        double frac = 1.0;
        Box part;
        part.dim = d;
        for (int j = 0; j < d; ++j) {
            const std::int64_t a = std::max(3 * cur[j], r[j].lo);
            const std::int64_t b = std::min(3 * cur[j] + 3, r[j].hi);
            frac *= static_cast<double>(b - a) / 3.0;
            part.lo[j] = t.corner()[j] + static_cast<double>(a) * u;
            part.hi[j] = t.corner()[j] + static_cast<double>(b) * u;
            idx |= static_cast<std::uint64_t>(cur[j]) << (t.depth() * j);
        }
        fn(idx, frac, part);
        int j = 0;
        while (j < d) {
            if (++cur[j] <= r[j].last) break;
            cur[j] = r[j].first;
            ++j;
        }
        if (j == d) return;
    }
}

template <class F>
void ShiftedLattice::for_each_member_cell(const LatticeCube& q, F&& fn) const {
    const auto& t = *tree_;
    const int d = t.dim();
    auto r = ranges(q);
    // Midpoint of cell i sits at 3i + 1.5 units.
    for (int j = 0; j < d; ++j) {
        if (3 * r[j].first + 1 < r[j].lo) ++r[j].first;
        if (3 * r[j].last + 2 > r[j].hi) --r[j].last;
        if (r[j].first > r[j].last) return;
    }
    std::array<std::int64_t, kMaxDim> cur{};
    for (int j = 0; j < d; ++j) cur[j] = r[j].first;
    while (true) {
        std::uint64_t idx = 0;
        for (int j = 0; j < d; ++j) idx |= static_cast<std::uint64_t>(cur[j]) << (t.depth() * j);
        fn(idx);
        int j = 0;
        while (j < d) {
            if (++cur[j] <= r[j].last) break;
            cur[j] = r[j].first;
            ++j;
        }
        if (j == d) return;
    }
}

}  // namespace bloom
