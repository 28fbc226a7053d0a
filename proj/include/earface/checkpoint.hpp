#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "earface/tensor.hpp"

namespace earface {

/// Single-file container of named parameter tensors plus a JSON config echo.
/// Used for network checkpoints, full training state and external embedder
/// weights alike. Layout: magic, version header (JSON, length-prefixed), then
/// raw little-endian doubles.
struct TensorArchive {
    std::string kind;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, Tensor>> tensors;

    static constexpr int kVersion = 1;

    void add(const std::string& name, const Tensor& t) { tensors.emplace_back(name, t); }

    bool has(const std::string& name) const;
    const Tensor& get(const std::string& name) const;

    /// get() plus shape validation against the expected tensor.
    const Tensor& get_like(const std::string& name, const Tensor& expected) const;

    void save(const std::filesystem::path& path) const;
    static TensorArchive load(const std::filesystem::path& path);
};

}  // namespace earface
