#include "multiway/model_io.hpp"

#include "multiway/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace multiway {

const std::string& ModelContainer::header(const std::string& key) const {
    for (const auto& [k, v] : headers)
        if (k == key) return v;
    throw DataError("model container has no '" + key + "' header");
}

const Tensor& ModelContainer::block(const std::string& name) const {
    for (const auto& [k, v] : blocks)
        if (k == name) return v;
    throw DataError("model container has no block '" + name + "'");
}

void write_container(std::ostream& os, const ModelContainer& c) {
    os << "kind: " << c.kind << '\n';
    for (const auto& [k, v] : c.headers) os << k << ": " << v << '\n';
    for (const auto& [name, t] : c.blocks) {
        os << "block: " << name << '\n';
        write_tensor(os, t);
    }
}

ModelContainer read_container(std::istream& is, const std::string& source) {
    LineCursor cur(is, source);
    ModelContainer c;
    cur.skip_blank();
    for (; !cur.done(); cur.skip_blank()) {
        const auto line = cur.peek();
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) cur.fail("expected 'key: value'");
        const std::string key(trim(line.substr(0, colon)));
        const std::string value(trim(line.substr(colon + 1)));
        if (key == "block") {
            cur.take();
            Sparse s = read_sparse(cur);
            c.blocks.emplace_back(value, sparse_to_dense(s));
            continue;
        }
        if (!c.blocks.empty()) cur.fail("header '" + key + "' after the first block");
        if (key == "kind")
            c.kind = value;
        else
            c.headers.emplace_back(key, value);
        cur.take();
    }
    if (c.kind.empty()) throw DataError("model container is missing 'kind:'", source, 1);
    return c;
}

ModelContainer read_container_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file", path.string());
    return read_container(in, path.string());
}

ModelContainer to_container(const CpModel& m) {
    ModelContainer c;
    c.kind = "cp";
    c.headers = {{"shape", join_indices(m.shape().dims())}, {"ranks", std::to_string(m.rank())}};
    c.blocks.emplace_back("weights", from_vector(m.weights));
    for (std::size_t n = 0; n < m.factors.size(); ++n)
        c.blocks.emplace_back("factor " + std::to_string(n + 1), from_matrix(m.factors[n]));
    return c;
}

ModelContainer to_container(const TuckerModel& m) {
    ModelContainer c;
    c.kind = "tucker";
    c.headers = {{"shape", join_indices(m.shape().dims())}, {"ranks", join_indices(m.ranks())}};
    c.blocks.emplace_back("core", m.core);
    for (std::size_t n = 0; n < m.factors.size(); ++n)
        c.blocks.emplace_back("factor " + std::to_string(n + 1), from_matrix(m.factors[n]));
    return c;
}

ModelContainer to_container(const TtModel& m) {
    ModelContainer c;
    c.kind = "tt";
    c.headers = {{"shape", join_indices(m.shape().dims())}, {"ranks", join_indices(m.ranks())}};
    for (std::size_t k = 0; k < m.cores.size(); ++k) c.blocks.emplace_back("core " + std::to_string(k + 1), m.cores[k]);
    return c;
}

namespace {

void expect_kind(const ModelContainer& c, const std::string& kind) {
    if (c.kind != kind) throw DataError("expected model kind '" + kind + "', got '" + c.kind + "'");
}

}  // namespace

CpModel cp_from_container(const ModelContainer& c) {
    expect_kind(c, "cp");
    const auto dims = parse_index_list(c.header("shape"));
    CpModel m;
    m.weights = c.block("weights").vec();
    for (std::size_t n = 0; n < dims.size(); ++n) m.factors.push_back(to_matrix(c.block("factor " + std::to_string(n + 1))));
    m.validate();
    return m;
}

TuckerModel tucker_from_container(const ModelContainer& c) {
    expect_kind(c, "tucker");
    const auto dims = parse_index_list(c.header("shape"));
    TuckerModel m;
    m.core = c.block("core");
    for (std::size_t n = 0; n < dims.size(); ++n) m.factors.push_back(to_matrix(c.block("factor " + std::to_string(n + 1))));
    m.validate();
    return m;
}

TtModel tt_from_container(const ModelContainer& c) {
    expect_kind(c, "tt");
    const auto dims = parse_index_list(c.header("shape"));
    TtModel m;
    for (std::size_t k = 0; k < dims.size(); ++k) m.cores.push_back(c.block("core " + std::to_string(k + 1)));
    m.validate();
    return m;
}

}  // namespace multiway
