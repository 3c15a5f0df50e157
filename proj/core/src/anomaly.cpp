#include "ambrosia/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ambrosia/error.hpp"
#include "ambrosia/timeseries.hpp"

namespace ambrosia {

RcTree::RcTree(std::size_t dimension, std::uint64_t seed) : dim_(dimension), rng_(seed) {
    if (dimension == 0) {
        throw ValidationError("point dimension must be >= 1");
    }
}

int RcTree::allocate(Node node) {
    if (!free_.empty()) {
        const int id = free_.back();
        free_.pop_back();
        nodes_[id] = std::move(node);
        return id;
    }
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size() - 1);
}

void RcTree::release(int id) {
    nodes_[id] = Node{};
    free_.push_back(id);
}

void RcTree::check_dimension(const Point& point) const {
    if (point.size() != dim_) {
        throw Error("point dimension " + std::to_string(point.size()) + " does not match tree dimension " +
                    std::to_string(dim_));
    }
}

int RcTree::descend(const Point& point) const {
    int id = root_;
    while (id >= 0 && !nodes_[id].is_leaf()) {
        const Node& n = nodes_[id];
        id = point[n.cut_dim] <= n.cut ? n.left : n.right;
    }
    return id;
}

int RcTree::find_leaf(const Point& point) const {
    const int id = descend(point);
    if (id < 0 || nodes_[id].lo != point) {
        return -1;
    }
    return id;
}

bool RcTree::contains(const Point& point) const {
    check_dimension(point);
    return find_leaf(point) >= 0;
}

std::size_t RcTree::size() const noexcept {
    return root_ < 0 ? 0 : nodes_[root_].count;
}

std::size_t RcTree::multiplicity(const Point& point) const {
    check_dimension(point);
    const int id = find_leaf(point);
    return id < 0 ? 0 : nodes_[id].count;
}

void RcTree::replace_child(int parent, int old_child, int new_child) {
    if (parent < 0) {
        root_ = new_child;
        return;
    }
    Node& p = nodes_[parent];
    if (p.left == old_child) {
        p.left = new_child;
    } else {
        p.right = new_child;
    }
}

void RcTree::insert(const Point& point) {
    check_dimension(point);
    for (double v : point) {
        if (!std::isfinite(v)) {
            throw Error("cannot insert a non-finite point");
        }
    }
    if (root_ < 0) {
        root_ = allocate(Node{-1, -1, -1, 0, 0.0, 1, point, point});
        leaves_ = 1;
        return;
    }
    if (const int dup = find_leaf(point); dup >= 0) {
        for (int id = dup; id >= 0; id = nodes_[id].parent) {
            ++nodes_[id].count;
        }
        return;
    }

    std::vector<double> span(dim_);
    int node = root_;
    while (true) {
        double total = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            span[d] = std::max(nodes_[node].hi[d], point[d]) - std::min(nodes_[node].lo[d], point[d]);
            total += span[d];
        }
        const double r = total * rng_.uniform_open();
        std::size_t cut_dim = 0;
        double cumulative = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            cumulative += span[d];
            cut_dim = d;
            if (cumulative >= r && span[d] > 0.0) {
                break;
            }
        }
        const double low = std::min(nodes_[node].lo[cut_dim], point[cut_dim]);
        const double cut = low + (cumulative - r);

        const bool separates_below = point[cut_dim] <= cut && cut < nodes_[node].lo[cut_dim];
        const bool separates_above = point[cut_dim] > cut && cut >= nodes_[node].hi[cut_dim];
        if (separates_below || separates_above) {
            const int parent = nodes_[node].parent;
            const int leaf = allocate(Node{-1, -1, -1, 0, 0.0, 1, point, point});
            Node branch;
            branch.parent = parent;
            branch.cut_dim = cut_dim;
            branch.cut = cut;
            branch.count = nodes_[node].count + 1;
            branch.lo = nodes_[node].lo;
            branch.hi = nodes_[node].hi;
            for (std::size_t d = 0; d < dim_; ++d) {
                branch.lo[d] = std::min(branch.lo[d], point[d]);
                branch.hi[d] = std::max(branch.hi[d], point[d]);
            }
            branch.left = separates_below ? leaf : node;
            branch.right = separates_below ? node : leaf;
            const int b = allocate(std::move(branch));
            replace_child(parent, node, b);
            nodes_[node].parent = b;
            nodes_[leaf].parent = b;
            for (int id = parent; id >= 0; id = nodes_[id].parent) {
                Node& n = nodes_[id];
                ++n.count;
                for (std::size_t d = 0; d < dim_; ++d) {
                    n.lo[d] = std::min(n.lo[d], point[d]);
                    n.hi[d] = std::max(n.hi[d], point[d]);
                }
            }
            ++leaves_;
            return;
        }
        // A cut landing exactly on a leaf's own coordinate cannot separate;
        // draw again at the same node.
        if (nodes_[node].is_leaf()) {
            continue;
        }
        const Node& n = nodes_[node];
        node = point[n.cut_dim] <= n.cut ? n.left : n.right;
    }
}

void RcTree::forget(const Point& point) {
    check_dimension(point);
    const int leaf = find_leaf(point);
    if (leaf < 0) {
        throw Error("point absent from tree");
    }
    if (nodes_[leaf].count > 1) {
        for (int id = leaf; id >= 0; id = nodes_[id].parent) {
            --nodes_[id].count;
        }
        return;
    }
    const int parent = nodes_[leaf].parent;
    --leaves_;
    if (parent < 0) {
        release(leaf);
        root_ = -1;
        return;
    }
    const int sibling = nodes_[parent].left == leaf ? nodes_[parent].right : nodes_[parent].left;
    const int grand = nodes_[parent].parent;
    nodes_[sibling].parent = grand;
    replace_child(grand, parent, sibling);
    release(leaf);
    release(parent);
    for (int id = grand; id >= 0; id = nodes_[id].parent) {
        Node& n = nodes_[id];
        --n.count;
        const Node& l = nodes_[n.left];
        const Node& r = nodes_[n.right];
        for (std::size_t d = 0; d < dim_; ++d) {
            n.lo[d] = std::min(l.lo[d], r.lo[d]);
            n.hi[d] = std::max(l.hi[d], r.hi[d]);
        }
    }
}

double RcTree::codisp(const Point& point) const {
    check_dimension(point);
    int node = find_leaf(point);
    if (node < 0) {
        throw Error("point absent from tree");
    }
    double best = 0.0;
    for (int parent = nodes_[node].parent; parent >= 0; node = parent, parent = nodes_[parent].parent) {
        const Node& p = nodes_[parent];
        const int sibling = p.left == node ? p.right : p.left;
        const double ratio = static_cast<double>(nodes_[sibling].count) / static_cast<double>(nodes_[node].count);
        best = std::max(best, ratio);
    }
    return best;
}

std::string RcTree::check_node(int id, std::size_t& leaves) const {
    const Node& n = nodes_[id];
    if (n.lo.size() != dim_ || n.hi.size() != dim_) {
        return "node " + std::to_string(id) + " has a box of the wrong dimension";
    }
    if (n.is_leaf()) {
        if (n.right >= 0) {
            return "leaf " + std::to_string(id) + " has a right child";
        }
        if (n.lo != n.hi) {
            return "leaf " + std::to_string(id) + " box is not degenerate";
        }
        if (n.count == 0) {
            return "leaf " + std::to_string(id) + " has zero multiplicity";
        }
        ++leaves;
        return {};
    }
    if (n.right < 0) {
        return "branch " + std::to_string(id) + " is missing a child";
    }
    const Node& l = nodes_[n.left];
    const Node& r = nodes_[n.right];
    if (l.parent != id || r.parent != id) {
        return "branch " + std::to_string(id) + " has a child with a wrong parent link";
    }
    if (n.count != l.count + r.count) {
        return "branch " + std::to_string(id) + " count differs from its children's total";
    }
    for (std::size_t d = 0; d < dim_; ++d) {
        if (n.lo[d] != std::min(l.lo[d], r.lo[d]) || n.hi[d] != std::max(l.hi[d], r.hi[d])) {
            return "branch " + std::to_string(id) + " box is not tight";
        }
    }
    if (!(l.hi[n.cut_dim] <= n.cut && r.lo[n.cut_dim] > n.cut)) {
        return "branch " + std::to_string(id) + " has points on the wrong side of its cut";
    }
    if (auto e = check_node(n.left, leaves); !e.empty()) {
        return e;
    }
    return check_node(n.right, leaves);
}

std::string RcTree::check_invariants() const {
    if (root_ < 0) {
        return leaves_ == 0 ? std::string{} : "empty tree reports leaves";
    }
    if (nodes_[root_].parent != -1) {
        return "root has a parent";
    }
    std::size_t leaves = 0;
    if (auto e = check_node(root_, leaves); !e.empty()) {
        return e;
    }
    if (leaves != leaves_) {
        return "leaf count " + std::to_string(leaves) + " differs from tracked " + std::to_string(leaves_);
    }
    if (nodes_.size() - free_.size() != 2 * leaves - 1) {
        return "node arena holds unreachable nodes";
    }
    return {};
}

void RcTree::render(int id, std::string& out) const {
    const Node& n = nodes_[id];
    if (n.is_leaf()) {
        for (std::size_t d = 0; d < dim_; ++d) {
            if (d > 0) {
                out += ' ';
            }
            out += format_double(n.lo[d]);
        }
        return;
    }
    out += '(';
    render(n.left, out);
    out += ',';
    render(n.right, out);
    out += ')';
}

std::string RcTree::shape() const {
    std::string out;
    if (root_ >= 0) {
        render(root_, out);
    }
    return out;
}

void validate(const ForestConfig& config) {
    if (config.num_trees < 1) {
        throw ValidationError("number of trees must be >= 1");
    }
    if (config.tree_capacity < 1) {
        throw ValidationError("tree size must be >= 1");
    }
    if (config.shingle < 1) {
        throw ValidationError("shingle must be >= 1");
    }
}

Forest::Forest(const ForestConfig& config, std::size_t dimension) : config_(config) {
    validate(config_);
    trees_.reserve(config_.num_trees);
    for (std::size_t t = 0; t < config_.num_trees; ++t) {
        trees_.emplace_back(dimension, mix_seed(config_.seed + t));
    }
}

double Forest::update(const Point& point) {
    if (window_.size() >= config_.tree_capacity) {
        for (auto& tree : trees_) {
            tree.forget(window_.front());
        }
        window_.pop_front();
    }
    for (auto& tree : trees_) {
        tree.insert(point);
    }
    window_.push_back(point);
    return codisp(point);
}

double Forest::codisp(const Point& point) const {
    double sum = 0.0;
    for (const auto& tree : trees_) {
        sum += tree.codisp(point);
    }
    return sum / static_cast<double>(trees_.size());
}

std::vector<double> score_stream(std::span<const double> values, const ForestConfig& config) {
    validate(config);
    if (values.size() < config.shingle) {
        throw ValidationError("stream of length " + std::to_string(values.size()) + " is shorter than the shingle " +
                              std::to_string(config.shingle));
    }
    Forest forest(config, config.shingle);
    std::vector<double> scores(values.size(), 0.0);
    Point shingle(config.shingle);
    for (std::size_t end = config.shingle - 1; end < values.size(); ++end) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(end + 1 - config.shingle), config.shingle,
                    shingle.begin());
        scores[end] = forest.update(shingle);
    }
    return scores;
}

std::vector<PeakEvent> find_peaks(std::span<const double> scores, double threshold) {
    std::vector<PeakEvent> peaks;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(scores[i] > threshold)) {
            continue;
        }
        if (!peaks.empty() && peaks.back().last + 1 == i) {
            auto& p = peaks.back();
            p.last = i;
            if (scores[i] > scores[p.argmax]) {
                p.argmax = i;
            }
        } else {
            peaks.push_back(PeakEvent{i, i, i});
        }
    }
    return peaks;
}

namespace {

bool overlaps(const PeakEvent& a, const PeakEvent& b, std::size_t tolerance) {
    const std::size_t a_lo = a.first > tolerance ? a.first - tolerance : 0;
    const std::size_t b_lo = b.first > tolerance ? b.first - tolerance : 0;
    return a_lo <= b.last + tolerance && b_lo <= a.last + tolerance;
}

}  // namespace

PeakComparison compare_peaks(std::span<const double> true_scores, std::span<const double> processed_scores,
                             double threshold, std::size_t tolerance) {
    if (true_scores.size() != processed_scores.size()) {
        throw Error("score sequences differ in length");
    }
    PeakComparison out;
    out.true_peaks = find_peaks(true_scores, threshold);
    out.processed_peaks = find_peaks(processed_scores, threshold);
    for (const auto& t : out.true_peaks) {
        const bool found = std::any_of(out.processed_peaks.begin(), out.processed_peaks.end(),
                                       [&](const PeakEvent& p) { return overlaps(t, p, tolerance); });
        if (!found) {
            out.misses.push_back(t);
        }
    }
    for (const auto& p : out.processed_peaks) {
        const bool found = std::any_of(out.true_peaks.begin(), out.true_peaks.end(),
                                       [&](const PeakEvent& t) { return overlaps(t, p, tolerance); });
        if (!found) {
            out.false_positives.push_back(p);
        }
    }
    return out;
}

}  // namespace ambrosia
