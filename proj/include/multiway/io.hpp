#pragma once

// Tensor text format:
//   shape: I1,I2,...,IN
//   i1,i2,...,iN,value        (0-based indices, value rendered with %.17g)
// Sparse tensors list their nonzeros; dense tensors list every entry.

#include "multiway/dense_tensor.hpp"
#include "multiway/ops.hpp"
#include "multiway/sparse_tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace multiway {

/// %.17g rendering used by every text output.
std::string format_scalar(double v);

void write_tensor(std::ostream& os, const Sparse& t);
void write_tensor(std::ostream& os, const Tensor& t);

Sparse read_sparse(std::istream& is, const std::string& source = {});
Tensor read_dense(std::istream& is, const std::string& source = {}, WideSize budget_bytes = kDefaultMemoryBudget);

Sparse read_sparse_file(const std::filesystem::path& path);
Tensor read_dense_file(const std::filesystem::path& path, WideSize budget_bytes = kDefaultMemoryBudget);

/// Line-oriented cursor used by the tensor and model readers.
class LineCursor {
public:
    LineCursor(std::istream& is, std::string source);

    bool done() const noexcept { return pos_ >= lines_.size(); }
    /// Current line with surrounding whitespace removed.
    std::string_view peek() const;
    std::string_view take();
    /// Skips blank lines and '#' comments.
    void skip_blank();
    std::size_t line_number() const noexcept { return pos_ + 1; }
    const std::string& source() const noexcept { return source_; }

    [[noreturn]] void fail(const std::string& what) const;

private:
    std::vector<std::string> lines_;
    std::size_t pos_ = 0;
    std::string source_;
};

/// Parses one tensor (header + entries) from the cursor, stopping at the
/// first line that does not look like an entry (e.g. "block: ...").
Sparse read_sparse(LineCursor& cursor);

// helpers shared with the other text readers
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<Index> parse_index_list(std::string_view s);
std::string join_indices(const std::vector<Index>& v);
double parse_double(std::string_view s);
long long parse_integer(std::string_view s);

/// Writes content to path via a temporary sibling and rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace multiway
