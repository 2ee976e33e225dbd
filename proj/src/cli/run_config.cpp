#include "hsprobe/cli/run_config.hpp"

#include <locale>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "hsprobe/error.hpp"
#include "hsprobe/io/binary.hpp"

namespace hsprobe {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"data", {"hidden", "findings"}},
        {"model",
         {"input_dim", "latent_dim", "num_heads", "head_dim", "dropout", "layer_index", "variant",
          "positional_encoding"}},
        {"train", {"epochs", "batch_size", "folds", "seed", "threads"}},
        {"optim", {"base_lr", "beta1", "beta2", "weight_decay", "eps"}},
        {"eval", {"bootstrap_resamples", "ci_level"}},
    };
    return keys;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    template <class T>
    void get(const std::string& key, T& out) const {
        const auto value = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!value) {
            return;
        }
        std::istringstream in(*value);
        in.imbue(std::locale::classic());
        T parsed{};
        if constexpr (std::is_unsigned_v<T>) {
            require(value->find('-') == std::string::npos, ErrorCode::kConfig,
                    "'" + key + "' must be a nonnegative integer");
        }
        in >> parsed;
        require(!in.fail() && (in >> std::ws).eof(), ErrorCode::kConfig,
                "cannot parse '" + key + "' value '" + *value + "'");
        out = parsed;
    }

    void get_bool(const std::string& key, bool& out) const {
        const auto value = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!value) {
            return;
        }
        if (*value == "true" || *value == "1") {
            out = true;
        } else if (*value == "false" || *value == "0") {
            out = false;
        } else {
            fail(ErrorCode::kConfig, "'" + key + "' must be true or false");
        }
    }

    std::optional<std::string> get_string(const std::string& key) const {
        const auto value = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        return value ? std::optional<std::string>(*value) : std::nullopt;
    }

private:
    const pt::ptree& tree_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        require(it != known_keys().end(), ErrorCode::kConfig, "unknown config section [" + section + "]");
        require(body.data().empty(), ErrorCode::kConfig,
                "config entry '" + section + "' is outside any section");
        for (const auto& [key, _] : body) {
            require(it->second.count(key) == 1, ErrorCode::kConfig,
                    "unknown config key '" + key + "' in [" + section + "]");
        }
    }

    RunConfig cfg;
    const Reader r(tree);
    if (const auto v = r.get_string("data.hidden")) {
        cfg.hidden = resolve(base_dir, *v);
    }
    if (const auto v = r.get_string("data.findings")) {
        cfg.findings = resolve(base_dir, *v);
    }
    r.get("model.input_dim", cfg.model.input_dim);
    r.get("model.latent_dim", cfg.model.latent_dim);
    r.get("model.num_heads", cfg.model.num_heads);
    r.get("model.head_dim", cfg.model.head_dim);
    r.get("model.dropout", cfg.model.dropout_p);
    r.get("model.layer_index", cfg.model.layer_index);
    if (const auto v = r.get_string("model.variant")) {
        try {
            cfg.model.variant = parse_variant(*v);
        } catch (const Error& e) {
            fail(ErrorCode::kConfig, e.what());
        }
    }
    r.get_bool("model.positional_encoding", cfg.model.positional_encoding);
    r.get("train.epochs", cfg.train.epochs);
    r.get("train.batch_size", cfg.train.batch_size);
    r.get("train.folds", cfg.train.folds);
    r.get("train.seed", cfg.train.seed);
    r.get("train.threads", cfg.train.threads);
    r.get("optim.base_lr", cfg.train.optim.base_lr);
    r.get("optim.beta1", cfg.train.optim.beta1);
    r.get("optim.beta2", cfg.train.optim.beta2);
    r.get("optim.weight_decay", cfg.train.optim.weight_decay);
    r.get("optim.eps", cfg.train.optim.eps);
    r.get("eval.bootstrap_resamples", cfg.bootstrap_resamples);
    r.get("eval.ci_level", cfg.ci_level);
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    return parse(io::read_text_file(path), std::filesystem::absolute(path).parent_path());
}

void RunConfig::validate() const {
    try {
        model.validate();
        train.validate();
    } catch (const Error& e) {
        fail(ErrorCode::kConfig, e.what());
    }
    require(bootstrap_resamples >= 1, ErrorCode::kConfig, "bootstrap_resamples must be at least 1");
    require(ci_level > 0.0 && ci_level < 1.0, ErrorCode::kConfig, "ci_level must lie in (0,1)");
}

std::string RunConfig::to_ini() const {
    std::string out;
    out += "[data]\n";
    out += fmt::format("hidden = {}\n", hidden.string());
    out += fmt::format("findings = {}\n", findings.string());
    out += "\n[model]\n";
    out += fmt::format("input_dim = {}\n", model.input_dim);
    out += fmt::format("latent_dim = {}\n", model.latent_dim);
    out += fmt::format("num_heads = {}\n", model.num_heads);
    out += fmt::format("head_dim = {}\n", model.head_dim);
    out += fmt::format("dropout = {}\n", model.dropout_p);
    out += fmt::format("layer_index = {}\n", model.layer_index);
    out += fmt::format("variant = {}\n", variant_name(model.variant));
    out += fmt::format("positional_encoding = {}\n", model.positional_encoding);
    out += "\n[train]\n";
    out += fmt::format("epochs = {}\n", train.epochs);
    out += fmt::format("batch_size = {}\n", train.batch_size);
    out += fmt::format("folds = {}\n", train.folds);
    out += fmt::format("seed = {}\n", train.seed);
    out += fmt::format("threads = {}\n", train.threads);
    out += "\n[optim]\n";
    out += fmt::format("base_lr = {}\n", train.optim.base_lr);
    out += fmt::format("beta1 = {}\n", train.optim.beta1);
    out += fmt::format("beta2 = {}\n", train.optim.beta2);
    out += fmt::format("weight_decay = {}\n", train.optim.weight_decay);
    out += fmt::format("eps = {}\n", train.optim.eps);
    out += "\n[eval]\n";
    out += fmt::format("bootstrap_resamples = {}\n", bootstrap_resamples);
    out += fmt::format("ci_level = {}\n", ci_level);
    return out;
}

}  // namespace hsprobe
