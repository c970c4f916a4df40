#pragma once

// JSON serialization of graded spaces, maps and complexes.  Doubles survive
// the round trip bit-exactly (shortest round-trip formatting on output).
//
// ComplexDocument schema:
// {
//   "degrees": {"p": int, "q": int},
//   "dims": [int, ...],
//   "maps": { name: {"shift": int, "blocks": { "<degree>": [[[re,im],...] row, ...] }}}
// }

#include "graded.hpp"

#include <json.hpp>

namespace torzeta {

using Json = nlohmann::json;

inline Json block_to_json(const Mat& m) {
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c)
            row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Mat block_from_json(const Json& j, int rows, int cols) {
    Mat m = Mat::Zero(rows, cols);
    if (static_cast<int>(j.size()) != rows)
        throw StructuralError("ComplexDocument: block row count mismatch");
    for (int r = 0; r < rows; ++r) {
        const Json& row = j.at(static_cast<size_t>(r));
        if (static_cast<int>(row.size()) != cols)
            throw StructuralError("ComplexDocument: block column count mismatch");
        for (int c = 0; c < cols; ++c) {
            const Json& e = row.at(static_cast<size_t>(c));
            m(r, c) = Cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return m;
}

inline Json map_to_json(const GradedMap& f) {
    Json blocks = Json::object();
    for (const auto& [i, m] : f.blocks) blocks[std::to_string(i)] = block_to_json(m);
    return Json{{"shift", f.shift}, {"blocks", std::move(blocks)}};
}

inline GradedMap map_from_json(const Json& j, const GradedSpace& E) {
    GradedMap f(E, E, j.at("shift").get<int>());
    for (const auto& [key, val] : j.at("blocks").items()) {
        int i = std::stoi(key);
        f.set_block(i, block_from_json(val, E.dim(i + f.shift), E.dim(i)));
    }
    return f;
}

inline Json complex_to_document(const Complex& c) {
    Json doc;
    doc["degrees"] = Json{{"p", c.space.p}, {"q", c.space.q}};
    doc["dims"] = c.space.dims;
    Json maps = Json::object();
    if (c.d) maps["d"] = map_to_json(*c.d);
    if (c.delta) maps["delta"] = map_to_json(*c.delta);
    doc["maps"] = std::move(maps);
    return doc;
}

inline Complex complex_from_document(const Json& doc) {
    int p = doc.at("degrees").at("p").get<int>();
    int q = doc.at("degrees").at("q").get<int>();
    std::vector<int> dims = doc.at("dims").get<std::vector<int>>();
    if (q - p + 1 != static_cast<int>(dims.size()))
        throw StructuralError("ComplexDocument: dims length does not match degree range");
    Complex c;
    c.space = GradedSpace(p, dims);
    const Json& maps = doc.at("maps");
    if (maps.contains("d")) c.d = map_from_json(maps.at("d"), c.space);
    if (maps.contains("delta")) c.delta = map_from_json(maps.at("delta"), c.space);
    c.validate();
    return c;
}

}  // namespace torzeta
