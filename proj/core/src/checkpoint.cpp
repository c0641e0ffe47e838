#include "negpr/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "negpr/tudataset.hpp"  // DataError

namespace negpr {
namespace {

using nlohmann::json;

json branch_to_json(const BranchParams& p) {
    json blocks = json::array();
    for (const Mat& m : p.blocks)
        blocks.push_back({{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}});
    return {{"kind", to_string(p.cfg.kind)},
            {"feature_dim", p.cfg.feature_dim},
            {"hidden", p.cfg.hidden},
            {"layers", p.cfg.layers},
            {"classes", p.cfg.classes},
            {"path_length", p.cfg.path_length},
            {"blocks", blocks}};
}

BranchParams branch_from_json(const json& j) {
    BranchParams p;
    p.cfg.kind = branch_kind_from_string(j.at("kind").get<std::string>());
    p.cfg.feature_dim = j.at("feature_dim").get<int>();
    p.cfg.hidden = j.at("hidden").get<int>();
    p.cfg.layers = j.at("layers").get<int>();
    p.cfg.classes = j.at("classes").get<int>();
    p.cfg.path_length = j.at("path_length").get<int>();
    for (const json& b : j.at("blocks")) {
        Mat m(b.at("rows").get<int>(), b.at("cols").get<int>());
        const Vec data = b.at("data").get<Vec>();
        if (data.size() != m.size()) throw DataError("checkpoint: block shape mismatch");
        m.a = data;
        p.blocks.push_back(std::move(m));
    }
    return p;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    json j = {{"format_version", ck.format_version},
              {"ib", branch_to_json(ck.ib)},
              {"eb", branch_to_json(ck.eb)}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    json j;
    try {
        in >> j;
        Checkpoint ck;
        ck.format_version = j.at("format_version").get<int>();
        if (ck.format_version != 1)
            throw DataError("checkpoint: unsupported format version " +
                            std::to_string(ck.format_version));
        ck.ib = branch_from_json(j.at("ib"));
        ck.eb = branch_from_json(j.at("eb"));
        return ck;
    } catch (const json::exception& e) {
        throw DataError("checkpoint: " + std::string(e.what()));
    }
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

}  // namespace negpr
