#include "engage/manifest.hpp"

#include "engage/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#ifndef ENGAGE_VERSION
#define ENGAGE_VERSION "0.0.0"
#endif

namespace engage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free)
    {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("SHA-256 initialisation failed");
        }
    }
    void update(const void* data, std::size_t len) { EVP_DigestUpdate(ctx_.get(), data, len); }
    std::string hex()
    {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 0xf]);
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes)
{
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string config_hash(const json& config)
{
    return sha256_hex(config.dump());
}

std::string tool_version()
{
    return ENGAGE_VERSION;
}

void RunManifest::add_input(const fs::path& path)
{
    auto key = path.string();
    auto digest = sha256_file(path);
    for (auto& [p, d] : inputs) {
        if (p == key) {
            d = digest;
            return;
        }
    }
    inputs.emplace_back(key, digest);
}

void RunManifest::add_output(const std::string& name)
{
    if (std::find(outputs.begin(), outputs.end(), name) == outputs.end()) outputs.push_back(name);
}

void RunManifest::add_timing(std::string stage, double seconds)
{
    for (auto& t : timings) {
        if (t.stage == stage) {
            t.seconds = seconds;
            return;
        }
    }
    timings.push_back({std::move(stage), seconds});
}

json RunManifest::to_json(const fs::path& out_dir) const
{
    json j;
    j["version"] = version;
    j["config_hash"] = config_hash;
    j["config"] = config;
    json in = json::array();
    for (const auto& [p, d] : inputs) in.push_back({{"path", p}, {"sha256", d}});
    j["inputs"] = in;
    json t = json::array();
    for (const auto& s : timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    j["timings"] = t;
    auto names = outputs;
    std::sort(names.begin(), names.end());
    json out = json::array();
    for (const auto& n : names) out.push_back({{"file", n}, {"sha256", sha256_file(out_dir / n)}});
    j["outputs"] = out;
    return j;
}

RunManifest RunManifest::from_json(const json& j)
{
    RunManifest m;
    try {
        m.version = j.at("version").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.config = j.at("config");
        for (const auto& e : j.at("inputs")) m.inputs.emplace_back(e.at("path").get<std::string>(), e.at("sha256").get<std::string>());
        for (const auto& e : j.at("timings")) m.timings.push_back({e.at("stage").get<std::string>(), e.at("seconds").get<double>()});
        for (const auto& e : j.at("outputs")) m.outputs.push_back(e.at("file").get<std::string>());
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

RunManifest open_manifest(const fs::path& out_dir, const json& config)
{
    const auto hash = config_hash(config);
    std::ifstream in(out_dir / kManifestName);
    if (in) {
        try {
            auto m = RunManifest::from_json(json::parse(in));
            if (m.config_hash == hash) {
                m.version = tool_version();
                return m;
            }
        } catch (const std::exception&) {
            // unreadable manifest: start over
        }
    }
    RunManifest m;
    m.version = tool_version();
    m.config_hash = hash;
    m.config = config;
    return m;
}

void write_manifest(const fs::path& out_dir, const RunManifest& m)
{
    auto j = m.to_json(out_dir);
    std::ofstream out(out_dir / kManifestName, std::ios::binary);
    if (!out) throw DataError("cannot write " + (out_dir / kManifestName).string());
    out << j.dump(2) << '\n';
}

}  // namespace engage
