#include "rbb/cli.hpp"

#include <array>
#include <cstdio>
#include <memory>

#include <openssl/evp.h>

namespace rbb::cli {

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    std::string hex;
    hex.reserve(2 * length);
    char buf[3];
    for (unsigned int i = 0; i < length; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string manifest_text(const RunConfig& config, const std::vector<std::pair<std::string, std::string>>& inputs,
                          double wall_seconds, const std::vector<std::string>& outputs) {
    io::KeyValueDoc doc;
    doc.set("tool.name", "rbb");
    doc.set("tool.version", std::string(tool_version));
    doc.set("subcommand", config.subcommand);
    doc.set("seed", config.get("seed"));
    for (const auto& [key, value] : config.entries()) doc.set("config." + key, value);
    doc.set("input.count", inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const std::string p = "input." + std::to_string(i);
        doc.set(p + ".role", inputs[i].first);
        doc.set(p + ".path", inputs[i].second);
        doc.set(p + ".sha256", sha256_hex(io::read_file(inputs[i].second)));
    }
    doc.set("wall_clock_seconds", wall_seconds);
    doc.set_list("output", outputs);
    return doc.to_string();
}

void write_outputs(const RunConfig& config, const RunOutputs& outputs,
                   const std::vector<std::pair<std::string, std::string>>& inputs, double wall_seconds) {
    const std::filesystem::path dir = config.get("out_dir");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Path, "cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<std::string> names;
    for (const auto& [name, content] : outputs.files) {
        io::write_file_atomic(dir / name, content);
        names.push_back(name);
    }
    io::write_file_atomic(dir / "run_manifest.txt", manifest_text(config, inputs, wall_seconds, names));
}

} // namespace rbb::cli
