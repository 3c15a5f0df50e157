#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "ambrosia/random.hpp"

namespace ambrosia {

using Point = std::vector<double>;

/// Robust random cut tree supporting streaming insert and forget.
///
/// Internal nodes hold a cut (dimension, value); a point goes left when
/// point[dim] <= value. Every node keeps its tight bounding box and the number
/// of points below it. Identical points share a leaf with a multiplicity.
/// Insertion keeps the tree distributed as a random cut tree over its point
/// set: at each node a cut is drawn over the box extended by the new point
/// (dimension chosen proportionally to side length); if it separates the
/// point from the node's box a new branch is created there, otherwise the
/// point follows the existing cut downwards.
class RcTree {
public:
    RcTree(std::size_t dimension, std::uint64_t seed);

    void insert(const Point& point);

    /// Removes one copy of `point`. Throws Error if it is absent.
    void forget(const Point& point);

    /// Collusive displacement: the maximum over the leaf's ancestors of
    /// (points in the sibling subtree) / (points in the subtree on the path).
    /// A tree holding a single leaf scores 0. Throws Error if absent.
    [[nodiscard]] double codisp(const Point& point) const;

    [[nodiscard]] bool contains(const Point& point) const;
    [[nodiscard]] std::size_t size() const noexcept;  // points, counting multiplicity
    [[nodiscard]] std::size_t leaf_count() const noexcept { return leaves_; }
    [[nodiscard]] bool empty() const noexcept { return root_ < 0; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }

    /// Multiplicity of the leaf holding `point` (0 when absent).
    [[nodiscard]] std::size_t multiplicity(const Point& point) const;

    /// Structural check: parent links, counts, tight boxes and cut sides.
    /// Returns an empty string when the tree is consistent.
    [[nodiscard]] std::string check_invariants() const;

    /// Nested-parentheses rendering of the tree, e.g. "((0,1),10)".
    /// Children appear left then right, so 1-D trees render in sorted order.
    [[nodiscard]] std::string shape() const;

private:
    struct Node {
        int parent = -1;
        int left = -1;
        int right = -1;
        std::size_t cut_dim = 0;
        double cut = 0.0;
        std::size_t count = 0;
        std::vector<double> lo;
        std::vector<double> hi;

        [[nodiscard]] bool is_leaf() const noexcept { return left < 0; }
    };

    int allocate(Node node);
    void release(int id);
    [[nodiscard]] int descend(const Point& point) const;
    [[nodiscard]] int find_leaf(const Point& point) const;  // -1 when absent
    void check_dimension(const Point& point) const;
    void replace_child(int parent, int old_child, int new_child);
    std::string check_node(int id, std::size_t& leaves) const;
    void render(int id, std::string& out) const;

    std::size_t dim_;
    Rng rng_;
    std::vector<Node> nodes_;
    std::vector<int> free_;
    int root_ = -1;
    std::size_t leaves_ = 0;
};

struct ForestConfig {
    std::size_t num_trees = 40;
    std::size_t tree_capacity = 256;  // points kept per tree, oldest evicted first
    std::size_t shingle = 4;
    std::uint64_t seed = 0;

    friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

void validate(const ForestConfig& config);

/// Ensemble of trees over a sliding FIFO window of points.
class Forest {
public:
    Forest(const ForestConfig& config, std::size_t dimension);

    /// Evicts the oldest point if at capacity, inserts `point` into every
    /// tree and returns its mean CoDisp.
    double update(const Point& point);

    [[nodiscard]] double codisp(const Point& point) const;
    [[nodiscard]] std::size_t size() const noexcept { return window_.size(); }
    [[nodiscard]] const std::vector<RcTree>& trees() const noexcept { return trees_; }

private:
    ForestConfig config_;
    std::vector<RcTree> trees_;
    std::deque<Point> window_;
};

/// Shingles the stream and returns one score per input index. The score of a
/// shingle is attached to its newest sample; the first shingle-1 indices,
/// which complete no shingle, score 0.
std::vector<double> score_stream(std::span<const double> values, const ForestConfig& config);

struct PeakEvent {
    std::size_t first = 0;   // first index above threshold
    std::size_t last = 0;    // last index above threshold
    std::size_t argmax = 0;  // index of the highest score in the run

    friend bool operator==(const PeakEvent&, const PeakEvent&) = default;
};

/// Maximal runs of consecutive indices whose score exceeds `threshold`.
std::vector<PeakEvent> find_peaks(std::span<const double> scores, double threshold);

struct PeakComparison {
    std::vector<PeakEvent> true_peaks;
    std::vector<PeakEvent> processed_peaks;
    std::vector<PeakEvent> false_positives;  // processed peaks with no true counterpart
    std::vector<PeakEvent> misses;           // true peaks with no processed counterpart

    [[nodiscard]] bool preserved() const noexcept { return false_positives.empty() && misses.empty(); }
};

/// Two peaks correspond when their index ranges, each widened by
/// `tolerance`, overlap.
PeakComparison compare_peaks(std::span<const double> true_scores, std::span<const double> processed_scores,
                             double threshold, std::size_t tolerance);

}  // namespace ambrosia
