#include "multiway/io.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace multiway {

std::string format_scalar(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto p = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, p == std::string_view::npos ? s.npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

double parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) throw DataError("empty numeric field");
    std::string tmp(s);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || errno == ERANGE)
        throw DataError("cannot parse '" + tmp + "' as a number");
    return v;
}

long long parse_integer(std::string_view s) {
    s = trim(s);
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw DataError("cannot parse '" + std::string(s) + "' as an integer");
    return v;
}

std::vector<Index> parse_index_list(std::string_view s) {
    std::vector<Index> out;
    for (const auto& f : split(s, ',')) {
        const long long v = parse_integer(f);
        if (v < 0) throw DataError("negative value '" + f + "' in index list");
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

std::string join_indices(const std::vector<Index>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

namespace {

void write_entry(std::ostream& os, const std::vector<Index>& idx, double v) {
    for (Index i : idx) os << i << ',';
    os << format_scalar(v) << '\n';
}

bool is_entry_line(std::string_view line) {
    return !line.empty() && (std::isdigit(static_cast<unsigned char>(line.front())) != 0);
}

}  // namespace

void write_tensor(std::ostream& os, const Sparse& t) {
    os << "shape: " << join_indices(t.shape().dims()) << '\n';
    for (const auto& [off, v] : t) write_entry(os, t.index_of(off), v);
}

void write_tensor(std::ostream& os, const Tensor& t) {
    os << "shape: " << join_indices(t.shape().dims()) << '\n';
    std::vector<Index> idx(t.order(), 0);
    for (Index lin = 0; lin < t.size(); ++lin) {
        write_entry(os, idx, t[lin]);
        t.shape().next(idx);
    }
}

LineCursor::LineCursor(std::istream& is, std::string source) : source_(std::move(source)) {
    std::string line;
    while (std::getline(is, line)) lines_.push_back(std::move(line));
}

std::string_view LineCursor::peek() const { return done() ? std::string_view{} : trim(lines_[pos_]); }

std::string_view LineCursor::take() {
    auto s = peek();
    ++pos_;
    return s;
}

void LineCursor::skip_blank() {
    while (!done()) {
        const auto s = peek();
        if (!s.empty() && s.front() != '#') break;
        ++pos_;
    }
}

void LineCursor::fail(const std::string& what) const { throw DataError(what, source_, pos_ + 1); }

Sparse read_sparse(LineCursor& cur) {
    cur.skip_blank();
    if (cur.done()) cur.fail("missing 'shape:' header");
    const auto header = cur.peek();
    if (header.substr(0, 6) != "shape:") cur.fail("expected 'shape:' header, got '" + std::string(header) + "'");
    Shape shape;
    try {
        shape = Shape(parse_index_list(header.substr(6)));
    } catch (const Error& e) {
        cur.fail(e.what());
    }
    cur.take();
    Sparse t(shape);
    std::vector<Index> idx(shape.order());
    for (cur.skip_blank(); !cur.done() && is_entry_line(cur.peek()); cur.skip_blank()) {
        const auto fields = split(cur.peek(), ',');
        if (fields.size() != shape.order() + 1)
            cur.fail("expected " + std::to_string(shape.order() + 1) + " fields, got " +
                     std::to_string(fields.size()));
        try {
            for (std::size_t n = 0; n < shape.order(); ++n) {
                const long long v = parse_integer(fields[n]);
                if (v < 0) throw DataError("negative index");
                idx[n] = static_cast<Index>(v);
            }
            t.set(idx, parse_double(fields.back()));
        } catch (const Error& e) {
            cur.fail(e.what());
        }
        cur.take();
    }
    return t;
}

Sparse read_sparse(std::istream& is, const std::string& source) {
    LineCursor cur(is, source);
    Sparse t = read_sparse(cur);
    cur.skip_blank();
    if (!cur.done()) cur.fail("unexpected content '" + std::string(cur.peek()) + "'");
    return t;
}

Tensor read_dense(std::istream& is, const std::string& source, WideSize budget_bytes) {
    return sparse_to_dense(read_sparse(is, source), budget_bytes);
}

Sparse read_sparse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file", path.string());
    return read_sparse(in, path.string());
}

Tensor read_dense_file(const std::filesystem::path& path, WideSize budget_bytes) {
    return sparse_to_dense(read_sparse_file(path), budget_bytes);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file", tmp.string());
        out << content;
        if (!out) throw DataError("write failed", tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace multiway
