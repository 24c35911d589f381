#include "bloomlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bloom {

namespace {

void check_geometry(int dim, int depth, double side) {
    if (dim < 1 || dim > kMaxDim) throw DomainError("dimension must be 1, 2 or 3");
    if (depth < 0 || dim * depth > 60) throw DomainError("depth out of range");
    if (!(side > 0.0) || !std::isfinite(side)) throw DomainError("root side must be positive");
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

double Box::volume() const {
    double v = 1.0;
    for (int j = 0; j < dim; ++j) v *= hi[j] - lo[j];
    return v;
}

bool Box::contains(const Box& o) const {
    for (int j = 0; j < dim; ++j)
        if (o.lo[j] < lo[j] || o.hi[j] > hi[j]) return false;
    return true;
}

bool Box::contains(const Point& x) const {
    for (int j = 0; j < dim; ++j)
        if (x[j] < lo[j] || x[j] >= hi[j]) return false;
    return true;
}

DyadicTree::DyadicTree(int dim, int depth, double half_width)
    : dim_(dim), depth_(depth), side_(2.0 * half_width) {
    check_geometry(dim, depth, side_);
    for (int j = 0; j < dim; ++j) corner_[j] = -half_width;
}

DyadicTree::DyadicTree(int dim, int depth, const Point& corner, double side)
    : dim_(dim), depth_(depth), corner_(corner), side_(side) {
    check_geometry(dim, depth, side);
    for (int j = dim; j < kMaxDim; ++j) corner_[j] = 0.0;
}

std::uint64_t DyadicTree::cube_count() const {
    std::uint64_t n = 0;
    for (int k = 0; k <= depth_; ++k) n += cubes_at(k);
    return n;
}

double DyadicTree::side(int level) const { return std::ldexp(side_, -level); }

double DyadicTree::volume(int level) const { return std::pow(side(level), dim_); }

bool DyadicTree::valid(const Cube& q) const {
    return q.level >= 0 && q.level <= depth_ && q.index < cubes_at(q.level);
}

void DyadicTree::require(const Cube& q) const {
    if (!valid(q))
        throw DomainError("cube (level " + std::to_string(q.level) + ", index " +
                          std::to_string(q.index) + ") is not in the tree");
}

Coord DyadicTree::coords(const Cube& q) const {
    Coord x{};
    const std::uint64_t mask = (std::uint64_t{1} << q.level) - 1;
    for (int j = 0; j < dim_; ++j)
        x[j] = static_cast<std::int64_t>((q.index >> (q.level * j)) & mask);
    return x;
}

Cube DyadicTree::cube(int level, const Coord& x) const {
    Cube q{level, 0};
    for (int j = 0; j < dim_; ++j) {
        if (x[j] < 0 || x[j] >= (std::int64_t{1} << level))
            throw DomainError("cube coordinates out of range");
        q.index |= static_cast<std::uint64_t>(x[j]) << (level * j);
    }
    return q;
}

Cube DyadicTree::parent(const Cube& q) const {
    require(q);
    if (q.level == 0) throw DomainError("the root has no parent");
    Coord x = coords(q);
    for (int j = 0; j < dim_; ++j) x[j] >>= 1;
    return cube(q.level - 1, x);
}

Cube DyadicTree::child(const Cube& q, unsigned which) const {
    require(q);
    if (q.level == depth_) throw DomainError("finest-level cube has no children");
    Coord x = coords(q);
    for (int j = 0; j < dim_; ++j) x[j] = 2 * x[j] + ((which >> j) & 1u);
    return cube(q.level + 1, x);
}

std::vector<Cube> DyadicTree::children(const Cube& q) const {
    std::vector<Cube> out;
    out.reserve(std::size_t{1} << dim_);
    for (unsigned c = 0; c < (1u << dim_); ++c) out.push_back(child(q, c));
    return out;
}

Cube DyadicTree::ancestor(const Cube& q, int level) const {
    require(q);
    if (level > q.level || level < 0) throw DomainError("ancestor level out of range");
    Coord x = coords(q);
    for (int j = 0; j < dim_; ++j) x[j] >>= (q.level - level);
    return cube(level, x);
}

std::uint64_t DyadicTree::ancestor_index(std::uint64_t cell, int level) const {
    const int shift = depth_ - level;
    const std::uint64_t in_mask = (std::uint64_t{1} << depth_) - 1;
    std::uint64_t idx = 0;
    for (int j = 0; j < dim_; ++j) {
        const std::uint64_t x = (cell >> (depth_ * j)) & in_mask;
        idx |= (x >> shift) << (level * j);
    }
    return idx;
}

bool DyadicTree::contains(const Cube& outer, const Cube& inner) const {
    if (inner.level < outer.level) return false;
    return ancestor(inner, outer.level) == outer;
}

Box DyadicTree::box(const Cube& q) const {
    require(q);
    Box b;
    b.dim = dim_;
    const double s = side(q.level);
    const Coord x = coords(q);
    for (int j = 0; j < dim_; ++j) {
        b.lo[j] = corner_[j] + static_cast<double>(x[j]) * s;
        b.hi[j] = b.lo[j] + s;
    }
    return b;
}

Point DyadicTree::midpoint(std::uint64_t cell) const {
    Point m{};
    const double h = side(depth_);
    const Coord x = coords(Cube{depth_, cell});
    for (int j = 0; j < dim_; ++j) m[j] = corner_[j] + (static_cast<double>(x[j]) + 0.5) * h;
    return m;
}

std::uint64_t DyadicTree::locate(const Point& x) const {
    Coord c{};
    const double h = side(depth_);
    const std::int64_t n = std::int64_t{1} << depth_;
    for (int j = 0; j < dim_; ++j) {
        const double t = std::floor((x[j] - corner_[j]) / h);
        if (!(t >= 0.0) || t >= static_cast<double>(n)) throw DomainError("point outside the root cube");
        c[j] = static_cast<std::int64_t>(t);
    }
    return cube(depth_, c).index;
}

std::vector<std::uint64_t> DyadicTree::cells_of(const Cube& q) const {
    require(q);
    std::vector<std::uint64_t> out;
    out.reserve(cubes_at(depth_ - q.level));
    for_each_cell(q, [&](std::uint64_t i) { out.push_back(i); });
    return out;
}

std::vector<Cube> DyadicTree::all_cubes() const {
    std::vector<Cube> out;
    out.reserve(cube_count());
    for (int k = 0; k <= depth_; ++k)
        for (std::uint64_t i = 0; i < cubes_at(k); ++i) out.push_back({k, i});
    return out;
}

bool DyadicTree::operator==(const DyadicTree& o) const {
    return dim_ == o.dim_ && depth_ == o.depth_ && side_ == o.side_ && corner_ == o.corner_;
}

TreePtr make_tree(int dim, int depth, double half_width) {
    return std::make_shared<const DyadicTree>(dim, depth, half_width);
}

TreePtr make_tree(int dim, int depth, const Point& corner, double side) {
    return std::make_shared<const DyadicTree>(dim, depth, corner, side);
}

TreePtr restrict_tree(const DyadicTree& tree, const Cube& q0) {
    const Box b = tree.box(q0);
    return make_tree(tree.dim(), tree.depth() - q0.level, b.lo, tree.side(q0.level));
}

// ---- GridFunction ----

GridFunction::GridFunction(TreePtr tree, double fill)
    : tree_(std::move(tree)), values_(tree_->cell_count(), fill) {}

GridFunction::GridFunction(TreePtr tree, std::vector<double> values)
    : tree_(std::move(tree)), values_(std::move(values)) {
    if (values_.size() != tree_->cell_count())
        throw DomainError("value array length " + std::to_string(values_.size()) +
                          " does not match the cell count " + std::to_string(tree_->cell_count()));
}

double GridFunction::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * tree_->cell_volume();
}

double GridFunction::integral(const Cube& q) const {
    tree_->require(q);
    double s = 0.0;
    tree_->for_each_cell(q, [&](std::uint64_t i) { s += values_[i]; });
    return s * tree_->cell_volume();
}

GridFunction GridFunction::abs() const {
    GridFunction out(*this);
    for (double& v : out.values_) v = std::fabs(v);
    return out;
}

void GridFunction::check_same_tree(const GridFunction& o) const {
    if (tree_ != o.tree_ && !(*tree_ == *o.tree_)) throw DomainError("grid functions live on different trees");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    check_same_tree(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    check_same_tree(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    a.check_same_tree(b);
    GridFunction out(a);
    for (std::size_t i = 0; i < out.values_.size(); ++i) out.values_[i] *= b.values_[i];
    return out;
}

GridFunction indicator(TreePtr tree, const Cube& q) {
    GridFunction f(tree);
    tree->for_each_cell(q, [&](std::uint64_t i) { f[i] = 1.0; });
    return f;
}

GridFunction indicator(TreePtr tree, const Box& box) {
    GridFunction f(tree);
    for (std::uint64_t i = 0; i < tree->cell_count(); ++i)
        if (box.contains(tree->midpoint(i))) f[i] = 1.0;
    return f;
}

GridFunction half_split(TreePtr tree, const Cube& q) {
    if (tree->is_finest(q)) throw DomainError("cannot split a finest-level cube");
    GridFunction f(tree);
    const Box b = tree->box(q);
    const double mid = 0.5 * (b.lo[0] + b.hi[0]);
    tree->for_each_cell(q, [&](std::uint64_t i) { f[i] = tree->midpoint(i)[0] >= mid ? 1.0 : -1.0; });
    return f;
}

GridFunction restrict_function(const GridFunction& f, const Cube& q0) {
    const auto& t = f.tree();
    auto sub = restrict_tree(t, q0);
    GridFunction out(sub);
    const Coord base = t.coords(q0);
    const int shift = t.depth() - q0.level;
    for (std::uint64_t i = 0; i < sub->cell_count(); ++i) {
        Coord x = sub->coords(sub->cell(i));
        for (int j = 0; j < t.dim(); ++j) x[j] += base[j] << shift;
        out[i] = f[t.cube(t.depth(), x).index];
    }
    return out;
}

// ---- per-level aggregates ----

LevelArray zero_levels(const DyadicTree& tree) {
    LevelArray a(tree.depth() + 1);
    for (int k = 0; k <= tree.depth(); ++k) a[k].assign(tree.cubes_at(k), 0.0);
    return a;
}

LevelArray level_sums(const DyadicTree& tree, const std::vector<double>& cell_values) {
    const int n = tree.depth();
    const int d = tree.dim();
    LevelArray s(n + 1);
    s[n] = cell_values;
    std::vector<double> kids(std::size_t{1} << d);
    for (int k = n - 1; k >= 0; --k) {
        s[k].assign(tree.cubes_at(k), 0.0);
        const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
        for (std::uint64_t i = 0; i < tree.cubes_at(k); ++i) {
            for (unsigned c = 0; c < (1u << d); ++c) {
                std::uint64_t idx = 0;
                for (int j = 0; j < d; ++j) {
                    const std::uint64_t x = (i >> (k * j)) & mask;
                    idx |= (2 * x + ((c >> j) & 1u)) << ((k + 1) * j);
                }
                kids[c] = s[k + 1][idx];
            }
            // Pairwise, so equal children add up exactly.
            for (std::size_t w = kids.size(); w > 1; w /= 2)
                for (std::size_t c = 0; c < w / 2; ++c) kids[c] = kids[2 * c] + kids[2 * c + 1];
            s[k][i] = kids[0];
        }
    }
    return s;
}

LevelArray level_averages(const GridFunction& f) {
    const auto& t = f.tree();
    LevelArray a = level_sums(t, f.values());
    for (int k = 0; k <= t.depth(); ++k) {
        const double count = static_cast<double>(t.cubes_at(t.depth() - k));
        for (double& v : a[k]) v /= count;
    }
    return a;
}

LevelArray level_oscillations(const GridFunction& b) {
    const auto& t = b.tree();
    const LevelArray avg = level_averages(b);
    LevelArray osc = zero_levels(t);
    const double h = t.cell_volume();
    for (int k = 0; k <= t.depth(); ++k)
        for (std::uint64_t i = 0; i < t.cell_count(); ++i)
            osc[k][t.ancestor_index(i, k)] += std::fabs(b[i] - avg[k][t.ancestor_index(i, k)]) * h;
    return osc;
}

double average(const GridFunction& f, const Cube& q) {
    f.tree().require(q);
    double s = 0.0;
    std::uint64_t n = 0;
    f.tree().for_each_cell(q, [&](std::uint64_t i) {
        s += f[i];
        ++n;
    });
    return s / static_cast<double>(n);
}

GridFunction haar_difference(const GridFunction& b, const Cube& q) {
    const auto& t = b.tree();
    t.require(q);
    if (t.is_finest(q)) throw DomainError("haar_difference needs a cube with children");
    GridFunction out(b.tree_ptr());
    const double aq = average(b, q);
    for (const Cube& r : t.children(q)) {
        const double ar = average(b, r);
        t.for_each_cell(r, [&](std::uint64_t i) { out[i] = ar - aq; });
    }
    return out;
}

// ---- CubeSet ----

CubeSet::CubeSet(const DyadicTree& tree) : mask_(tree.depth() + 1) {
    for (int k = 0; k <= tree.depth(); ++k) mask_[k].assign(tree.cubes_at(k), 0);
}

CubeSet::CubeSet(const DyadicTree& tree, const std::vector<Cube>& cubes) : CubeSet(tree) {
    for (const Cube& q : cubes) {
        tree.require(q);
        insert(q);
    }
}

void CubeSet::insert(const Cube& q) {
    auto& m = mask_.at(q.level).at(q.index);
    if (!m) {
        m = 1;
        ++count_;
    }
}

void CubeSet::erase(const Cube& q) {
    auto& m = mask_.at(q.level).at(q.index);
    if (m) {
        m = 0;
        --count_;
    }
}

bool CubeSet::contains(const Cube& q) const {
    if (q.level < 0 || static_cast<std::size_t>(q.level) >= mask_.size()) return false;
    return q.index < mask_[q.level].size() && mask_[q.level][q.index];
}

std::vector<Cube> CubeSet::list() const {
    std::vector<Cube> out;
    out.reserve(count_);
    for (std::size_t k = 0; k < mask_.size(); ++k)
        for (std::size_t i = 0; i < mask_[k].size(); ++i)
            if (mask_[k][i]) out.push_back({static_cast<int>(k), i});
    return out;
}

// ---- shifted lattices ----

ShiftedLattice::ShiftedLattice(TreePtr tree, const std::array<int, kMaxDim>& thirds)
    : tree_(std::move(tree)), thirds_(thirds) {
    const auto& t = *tree_;
    const int d = t.dim();
    const int n = t.depth();
    for (int j = 0; j < d; ++j)
        if (thirds_[j] < 0 || thirds_[j] > 2) throw DomainError("shift must be 0, 1/3 or 2/3");
    for (int j = d; j < kMaxDim; ++j) thirds_[j] = 0;
    const std::int64_t total = 3 * (std::int64_t{1} << n);
    for (int k = 0; k <= n; ++k) {
        const std::int64_t scale = std::int64_t{1} << (n - k);
        const std::int64_t width = 3 * scale;
        std::array<std::vector<std::int64_t>, kMaxDim> axis;
        for (int j = 0; j < d; ++j) {
            const std::int64_t s = (k % 2 == 0) ? thirds_[j] : -thirds_[j];
            // lo = scale * (3 i + s) with 0 <= lo and lo + width <= total.
            for (std::int64_t i = floor_div(-s + 2, 3); scale * (3 * i + s) + width <= total; ++i)
                if (scale * (3 * i + s) >= 0) axis[j].push_back(scale * (3 * i + s));
        }
        std::array<std::size_t, kMaxDim> cur{};
        bool empty = false;
        for (int j = 0; j < d; ++j) empty |= axis[j].empty();
        if (empty) continue;
        while (true) {
            LatticeCube q;
            q.level = k;
            q.width = width;
            for (int j = 0; j < d; ++j) q.lo[j] = axis[j][cur[j]];
            cubes_.push_back(q);
            int j = 0;
            while (j < d) {
                if (++cur[j] < axis[j].size()) break;
                cur[j] = 0;
                ++j;
            }
            if (j == d) break;
        }
    }
}

std::vector<ShiftedLattice> ShiftedLattice::all(const TreePtr& tree) {
    std::vector<ShiftedLattice> out;
    const int d = tree->dim();
    int total = 1;
    for (int j = 0; j < d; ++j) total *= 3;
    for (int m = 0; m < total; ++m) {
        std::array<int, kMaxDim> th{};
        int r = m;
        for (int j = 0; j < d; ++j) {
            th[j] = r % 3;
            r /= 3;
        }
        out.emplace_back(tree, th);
    }
    return out;
}

Box ShiftedLattice::box(const LatticeCube& q) const {
    const auto& t = *tree_;
    const double u = t.side(t.depth()) / 3.0;
    Box b;
    b.dim = t.dim();
    for (int j = 0; j < t.dim(); ++j) {
        b.lo[j] = t.corner()[j] + static_cast<double>(q.lo[j]) * u;
        b.hi[j] = t.corner()[j] + static_cast<double>(q.lo[j] + q.width) * u;
    }
    return b;
}

std::array<ShiftedLattice::AxisRange, kMaxDim> ShiftedLattice::ranges(const LatticeCube& q) const {
    std::array<AxisRange, kMaxDim> r{};
    for (int j = 0; j < tree_->dim(); ++j) {
        r[j].lo = q.lo[j];
        r[j].hi = q.lo[j] + q.width;
        r[j].first = floor_div(r[j].lo, 3);
        r[j].last = floor_div(r[j].hi - 1, 3);
    }
    return r;
}

Cover one_third_cover(const TreePtr& tree, const Box& q) {
    const auto& t = *tree;
    const int d = t.dim();
    const int n = t.depth();
    double side = q.side(0);
    for (int j = 1; j < d; ++j)
        if (std::fabs(q.side(j) - side) > 1e-12 * side) throw DomainError("one_third_cover expects a cube");
    if (side < t.side(n) * (1.0 - 1e-12))
        throw DomainError("no cover within depth: cube is smaller than the finest cell");
    Box root = t.box(t.root());
    if (!root.contains(q)) throw DomainError("no cover within depth: cube is not inside the root");

    const double u = t.side(n) / 3.0;
    bool found = false;
    Cover best;
    int total = 1;
    for (int j = 0; j < d; ++j) total *= 3;
    for (int k = n; k >= 0 && !found; --k) {
        if (t.side(k) > 3.0 * side * (1.0 + 1e-12)) continue;
        const std::int64_t scale = std::int64_t{1} << (n - k);
        const std::int64_t width = 3 * scale;
        for (int m = 0; m < total && !found; ++m) {
            std::array<int, kMaxDim> th{};
            int rem = m;
            for (int j = 0; j < d; ++j) {
                th[j] = rem % 3;
                rem /= 3;
            }
            LatticeCube r;
            r.level = k;
            r.width = width;
            bool ok = true;
            for (int j = 0; j < d && ok; ++j) {
                const std::int64_t s = (k % 2 == 0) ? th[j] : -th[j];
                const double lo_units = (q.lo[j] - t.corner()[j]) / u;
                const std::int64_t i = static_cast<std::int64_t>(std::floor((lo_units / scale - s) / 3.0));
                r.lo[j] = scale * (3 * i + s);
                const double a = t.corner()[j] + static_cast<double>(r.lo[j]) * u;
                const double b = t.corner()[j] + static_cast<double>(r.lo[j] + width) * u;
                ok = a <= q.lo[j] && q.hi[j] <= b && r.lo[j] >= 0 &&
                     r.lo[j] + width <= 3 * (std::int64_t{1} << n);
            }
            if (ok) {
                best.thirds = th;
                best.cube = r;
                found = true;
            }
        }
    }
    if (!found) throw DomainError("no cover within depth: cube too close to the root boundary");
    best.box = ShiftedLattice(tree, best.thirds).box(best.cube);
    return best;
}

}  // namespace bloom
