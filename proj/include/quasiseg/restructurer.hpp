#ifndef QUASISEG_RESTRUCTURER_HPP
#define QUASISEG_RESTRUCTURER_HPP

#include "quasiseg/forest.hpp"
#include "quasiseg/hierarchy.hpp"

namespace quasiseg {

/// Unites two hierarchies over disjoint leaf sets and restructures the result
/// into a convex one.
///
/// The loop: join the roots; crush every node whose merge cost exceeds its
/// parent's (and everything above it), keeping the maximal untouched subtrees
/// as the frontier; Ward-merge the frontier roots as atomic items; crush any
/// frontier root that now costs more than its new parent; repeat. Subtrees
/// that already fit are carried over intact. The tolerance is
/// `relative_epsilon` times the error of the joint single-cluster
/// approximation.
///
/// Leaves of `a` come first in the result, then those of `b`; labels are
/// carried over and must not overlap.
Hierarchy combined_merge(const Hierarchy& a, const Hierarchy& b, double relative_epsilon = 1e-9,
                         CrushTrace* trace = nullptr);

/// Converts any hierarchy into a convex one over the same leaves by applying
/// combined_merge bottom-up to every internal node. The root statistics, and
/// hence E_1, are unchanged. Convex input keeps its topology.
Hierarchy restructure(const Hierarchy& h, double relative_epsilon = 1e-9,
                      CrushTrace* trace = nullptr);

}  // namespace quasiseg

#endif  // QUASISEG_RESTRUCTURER_HPP
