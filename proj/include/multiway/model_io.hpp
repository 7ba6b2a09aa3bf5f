#pragma once

// Model container:
//   kind: cp|tucker|tt|tt-layer
//   <key>: <value>            any number of header lines (shape, ranks, ...)
//   block: <name>
//   <tensor in the tensor text format>
//   block: <name>
//   ...

#include "multiway/decomp.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace multiway {

struct ModelContainer {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> headers;
    std::vector<std::pair<std::string, Tensor>> blocks;

    const std::string& header(const std::string& key) const;
    const Tensor& block(const std::string& name) const;
};

void write_container(std::ostream& os, const ModelContainer& c);
ModelContainer read_container(std::istream& is, const std::string& source = {});
ModelContainer read_container_file(const std::filesystem::path& path);

ModelContainer to_container(const CpModel& m);
ModelContainer to_container(const TuckerModel& m);
ModelContainer to_container(const TtModel& m);

CpModel cp_from_container(const ModelContainer& c);
TuckerModel tucker_from_container(const ModelContainer& c);
TtModel tt_from_container(const ModelContainer& c);

}  // namespace multiway
