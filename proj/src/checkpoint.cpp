#include "earface/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace earface {

namespace {

constexpr char kMagic[8] = {'E', 'F', 'T', 'A', '0', '0', '0', '1'};

bool host_is_little_endian() {
    const uint32_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}

}  // namespace

bool TensorArchive::has(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return true;
    return false;
}

const Tensor& TensorArchive::get(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw Error("TensorArchive: no tensor named '" + name + "'");
}

const Tensor& TensorArchive::get_like(const std::string& name, const Tensor& expected) const {
    const Tensor& t = get(name);
    if (!t.same_shape(expected))
        throw Error("TensorArchive: tensor '" + name + "' has shape " + t.shape_str() +
                    ", config requires " + expected.shape_str());
    return t;
}

void TensorArchive::save(const std::filesystem::path& path) const {
    if (!host_is_little_endian()) throw Error("TensorArchive: big-endian hosts unsupported");
    nlohmann::ordered_json header;
    header["version"] = kVersion;
    header["kind"] = kind;
    header["byte_order"] = "le";
    header["config"] = config;
    header["extra"] = extra;
    auto dir = nlohmann::ordered_json::array();
    uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        dir.push_back({{"name", name},
                       {"shape", {t.n(), t.c(), t.h(), t.w()}},
                       {"offset", offset},
                       {"count", t.size()}});
        offset += t.size();
    }
    header["tensors"] = dir;
    const std::string hs = header.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("TensorArchive: cannot open '" + path.string() + "' for writing");
    os.write(kMagic, sizeof(kMagic));
    const uint64_t hlen = hs.size();
    os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : tensors)
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!os) throw Error("TensorArchive: write failed for '" + path.string() + "'");
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
    if (!host_is_little_endian()) throw Error("TensorArchive: big-endian hosts unsupported");
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("TensorArchive: cannot open '" + path.string() + "'");
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error("TensorArchive: '" + path.string() + "' is not a tensor archive");
    uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw Error("TensorArchive: truncated header in '" + path.string() + "'");

    nlohmann::ordered_json header;
    try {
        header = nlohmann::ordered_json::parse(hs);
    } catch (const std::exception& e) {
        throw Error("TensorArchive: corrupt header in '" + path.string() + "': " + e.what());
    }
    if (header.value("version", -1) != kVersion)
        throw Error("TensorArchive: unsupported version in '" + path.string() + "'");

    TensorArchive out;
    out.kind = header.value("kind", "");
    out.config = header.value("config", nlohmann::ordered_json::object());
    out.extra = header.value("extra", nlohmann::ordered_json::object());
    for (const auto& entry : header["tensors"]) {
        const auto shape = entry["shape"];
        Tensor t(shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>(),
                 shape[3].get<int>());
        if (t.size() != entry["count"].get<uint64_t>())
            throw Error("TensorArchive: inconsistent tensor directory in '" + path.string() + "'");
        is.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!is) throw Error("TensorArchive: truncated payload in '" + path.string() + "'");
        out.tensors.emplace_back(entry["name"].get<std::string>(), std::move(t));
    }
    return out;
}

}  // namespace earface
