#ifndef QUASISEG_SERIALIZE_HPP
#define QUASISEG_SERIALIZE_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "quasiseg/hierarchy.hpp"

namespace quasiseg {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Error curve CSV: header line `g,E,sigma`, then one row per g ascending with
// E and sigma printed to 9 significant digits.
void write_curve(const ErrorCurve& curve, std::ostream& out);
ErrorCurve read_curve(std::istream& in);
void export_curve(const ErrorCurve& curve, const std::filesystem::path& path);
ErrorCurve import_curve(const std::filesystem::path& path);

// Hierarchy dump, one node per line:
//
//   # quasiseg hierarchy
//   # leaves <N> channels <c> root <id>
//   # id parent left right n mean... merge_cost merge_rank
//   <id> <parent> <left> <right> <n> <mean_1> [<mean_2> <mean_3>] <cost> <rank>
//
// Missing links are written as -1, means with 6 decimals, merge costs with 17
// significant digits. Leaves whose label differs from their id add a line
// `label <id> <label>` after the node records.
//
// Reading rebuilds leaf sums from n * mean and recomputes every internal node
// from its leaves. That is exact for single-pixel leaves; the scatter inside
// multi-pixel leaves is not stored, so their sum of squares is rebuilt as the
// smallest value the integer sums allow.
void write_dump(const Hierarchy& h, std::ostream& out);
Hierarchy read_dump(std::istream& in);
void save_dump(const Hierarchy& h, const std::filesystem::path& path);
Hierarchy load_dump(const std::filesystem::path& path);

}  // namespace quasiseg

#endif  // QUASISEG_SERIALIZE_HPP
