#include "hsprobe/model/weights_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <set>
#include <sstream>

#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"
#include "hsprobe/version.hpp"

namespace hsprobe {

namespace {

constexpr const char* kFormatName = "hsprobe-scorer-weights";

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    require(ec == std::errc() && ptr == end, ErrorCode::kCorrupt,
            "weight manifest: bad value for '" + key + "': '" + text + "'");
    return value;
}

double parse_double(const std::string& key, const std::string& text) {
    // from_chars for double is missing from libstdc++ 11.
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    double v = 0.0;
    in >> v;
    require(!in.fail() && in.eof(), ErrorCode::kCorrupt,
            "weight manifest: bad value for '" + key + "': '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true") {
        return true;
    }
    if (text == "false") {
        return false;
    }
    fail(ErrorCode::kCorrupt, "weight manifest: bad boolean for '" + key + "': '" + text + "'");
}

std::string shape_text(const Tensor& t) {
    std::string s;
    for (std::size_t i = 0; i < t.shape().size(); ++i) {
        s += (i ? "x" : "") + std::to_string(t.shape()[i]);
    }
    return s;
}

}  // namespace

std::string encode_manifest(const ScorerWeights& w, const WeightMetadata& meta,
                            const std::string& blob_name) {
    const ScorerConfig& c = w.config;
    std::string out;
    out += fmt::format("format = {}\n", kFormatName);
    out += fmt::format("version = {}\n", kWeightFormatVersion);
    out += fmt::format("blob = {}\n", blob_name);
    out += "dtype = float32-le\n";
    out += fmt::format("input_dim = {}\n", c.input_dim);
    out += fmt::format("latent_dim = {}\n", c.latent_dim);
    out += fmt::format("num_heads = {}\n", c.num_heads);
    out += fmt::format("head_dim = {}\n", c.head_dim);
    out += fmt::format("dropout_p = {}\n", c.dropout_p);
    out += fmt::format("layer_index = {}\n", c.layer_index);
    out += fmt::format("variant = {}\n", variant_name(c.variant));
    out += fmt::format("positional_encoding = {}\n", c.positional_encoding);
    out += fmt::format("seed = {}\n", meta.seed);
    out += fmt::format("created_by = hsprobe {}\n", kVersionString);
    for (const auto& [k, v] : meta.extra) {
        require(k.find_first_of("=\n ") == std::string::npos && v.find('\n') == std::string::npos,
                ErrorCode::kInvalidArgument, "weight metadata key/value not representable: " + k);
        out += fmt::format("meta.{} = {}\n", k, v);
    }
    std::size_t offset = 0;
    const auto params = w.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        out += fmt::format("param.{} = offset={} shape={}\n", ScorerWeights::param_names()[i], offset,
                           shape_text(*params[i]));
        offset += params[i]->size() * 4;
    }
    out += fmt::format("blob_bytes = {}\n", offset);
    return out;
}

std::vector<std::uint8_t> encode_blob(const ScorerWeights& w) {
    io::ByteWriter bw;
    for (const Tensor* t : w.params()) {
        for (double v : t->values()) {
            bw.f32(static_cast<float>(v));
        }
    }
    return bw.bytes();
}

void save_weights(const std::filesystem::path& manifest, const ScorerWeights& w,
                  const WeightMetadata& meta) {
    w.config.validate();
    std::filesystem::path blob = manifest;
    blob.replace_extension(".bin");
    io::write_file_bytes(blob, encode_blob(w));
    io::write_text_file(manifest, encode_manifest(w, meta, blob.filename().string()));
}

LoadedWeights load_weights(const std::filesystem::path& manifest) {
    const std::string text = io::read_text_file(manifest);
    boost::property_tree::ptree tree;
    try {
        std::istringstream in(text);
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        fail(ErrorCode::kCorrupt, std::string("weight manifest: ") + e.what());
    }

    std::map<std::string, std::string> kv;
    for (const auto& [key, node] : tree) {
        require(node.empty(), ErrorCode::kCorrupt, "weight manifest: unexpected section '" + key + "'");
        kv[key] = node.data();
    }
    auto take = [&](const std::string& key) {
        const auto it = kv.find(key);
        require(it != kv.end(), ErrorCode::kCorrupt, "weight manifest: missing key '" + key + "'");
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    require(kv.count("format") && kv["format"] == kFormatName, ErrorCode::kBadMagic,
            "'" + manifest.string() + "' is not a weight manifest");
    take("format");
    const int version = parse_number<int>("version", take("version"));
    require(version == kWeightFormatVersion, ErrorCode::kBadVersion,
            "weight manifest: unsupported version " + std::to_string(version));
    const std::string blob_name = take("blob");
    require(take("dtype") == "float32-le", ErrorCode::kCorrupt, "weight manifest: unsupported dtype");

    ScorerConfig cfg;
    cfg.input_dim = parse_number<std::size_t>("input_dim", take("input_dim"));
    cfg.latent_dim = parse_number<std::size_t>("latent_dim", take("latent_dim"));
    cfg.num_heads = parse_number<std::size_t>("num_heads", take("num_heads"));
    cfg.head_dim = parse_number<std::size_t>("head_dim", take("head_dim"));
    cfg.dropout_p = parse_double("dropout_p", take("dropout_p"));
    cfg.layer_index = parse_number<std::size_t>("layer_index", take("layer_index"));
    cfg.variant = parse_variant(take("variant"));
    cfg.positional_encoding = parse_bool("positional_encoding", take("positional_encoding"));
    cfg.validate();

    LoadedWeights out;
    out.metadata.seed = parse_number<std::uint64_t>("seed", take("seed"));
    take("created_by");
    const std::size_t blob_bytes = parse_number<std::size_t>("blob_bytes", take("blob_bytes"));

    out.weights = zero_weights(cfg);
    const auto params = out.weights.params();
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string key = "param." + std::string(ScorerWeights::param_names()[i]);
        const std::string spec = take(key);
        const std::string expect_shape = " shape=" + shape_text(*params[i]);
        const auto pos = spec.find(expect_shape);
        require(spec.rfind("offset=", 0) == 0 && pos != std::string::npos &&
                    pos + expect_shape.size() == spec.size(),
                ErrorCode::kCorrupt, "weight manifest: '" + key + "' does not match config shape");
        offsets.push_back(parse_number<std::size_t>(key, spec.substr(7, pos - 7)));
    }
    for (auto it = kv.begin(); it != kv.end();) {
        require(it->first.rfind("meta.", 0) == 0, ErrorCode::kCorrupt,
                "weight manifest: unknown key '" + it->first + "'");
        out.metadata.extra[it->first.substr(5)] = it->second;
        it = kv.erase(it);
    }

    const auto blob = io::read_file_bytes(manifest.parent_path() / blob_name);
    require(blob.size() >= blob_bytes, ErrorCode::kTruncated,
            "weight blob has " + std::to_string(blob.size()) + " bytes, manifest expects " +
                std::to_string(blob_bytes));
    require(blob.size() == blob_bytes, ErrorCode::kCorrupt, "weight blob has trailing bytes");

    std::size_t expected_offset = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(offsets[i] == expected_offset, ErrorCode::kCorrupt,
                "weight manifest: offsets are not contiguous in parameter order");
        expected_offset += params[i]->size() * 4;
    }
    require(expected_offset == blob_bytes, ErrorCode::kCorrupt,
            "weight manifest: blob_bytes does not match parameter shapes");

    io::ByteReader r(blob);
    for (Tensor* t : params) {
        for (double& v : t->values()) {
            const float f = r.f32();
            require(std::isfinite(f), ErrorCode::kNonFinite, "weight blob has non-finite values");
            v = static_cast<double>(f);
        }
    }
    return out;
}

}  // namespace hsprobe
