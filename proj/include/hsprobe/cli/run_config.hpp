#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "hsprobe/model/scorer.hpp"
#include "hsprobe/training/trainer.hpp"

namespace hsprobe {

// Declarative training run, read from an INI file with sections [data],
// [model], [train], [optim] and [eval]. Unknown sections or keys and
// unparsable values throw kConfig. Relative data paths resolve against the
// config file's directory.
struct RunConfig {
    std::filesystem::path hidden;    // [data] hidden
    std::filesystem::path findings;  // [data] findings
    ScorerConfig model;
    TrainConfig train;
    std::size_t bootstrap_resamples = 1000;  // [eval] bootstrap_resamples
    double ci_level = 0.95;                  // [eval] ci_level

    static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir);
    static RunConfig load(const std::filesystem::path& path);

    // Every field with its resolved value; parse(to_ini()) reproduces the
    // config exactly.
    std::string to_ini() const;

    void validate() const;
};

}  // namespace hsprobe
