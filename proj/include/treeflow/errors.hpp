#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace treeflow {

// Kirchhoff system not solvable (isolated or unbalanced source component),
// or the post-solve residual check failed.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg, std::vector<int> component = {})
        : std::runtime_error(msg), component_(std::move(component)) {}

    // Vertices of the offending active component, when known.
    const std::vector<int>& component() const noexcept { return component_; }

private:
    std::vector<int> component_;
};

// An iterative routine exhausted its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Spanning-tree enumeration refused: the instance has more trees than the cap.
class CapExceeded : public std::runtime_error {
public:
    CapExceeded(const std::string& msg, double tree_count)
        : std::runtime_error(msg), tree_count_(tree_count) {}

    double tree_count() const noexcept { return tree_count_; }

private:
    double tree_count_;
};

}  // namespace treeflow
