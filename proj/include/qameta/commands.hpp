#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qameta/evaluation.hpp"
#include "qameta/features.hpp"
#include "qameta/multilabel.hpp"

namespace qameta {

/// Settings shared by every subcommand. Defaults point at the bundled fixture.
struct RunConfig {
    std::filesystem::path questions = std::filesystem::path(QAMETA_DATA_DIR) / "qald6_questions.json";
    std::filesystem::path matrix = std::filesystem::path(QAMETA_DATA_DIR) / "qald6_performance.csv";
    std::filesystem::path gazetteer = std::filesystem::path(QAMETA_DATA_DIR) / "gazetteer.json";
    std::filesystem::path model;
    std::filesystem::path out = ".";
    Method method = Method::PSt;
    MethodParams params;
    std::vector<FeatureGroup> groups = all_groups();
    Protocol protocol = Protocol::CV10;
    std::size_t folds = 10;
    std::uint64_t seed = 42;
    std::string question;
    bool listed = false;
    unsigned threads = 0;
};

/// Applies flat config keys (the long flag names, with '-' or '_') on top of `base`.
RunConfig apply_config_json(const nlohmann::json& j, RunConfig base);
nlohmann::json config_to_json(const RunConfig& config);

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kInternalError = 3 };

void cmd_extract(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_route(const RunConfig& config, std::ostream& out);
void cmd_evaluate(const RunConfig& config, std::ostream& out);
void cmd_associate(const RunConfig& config, std::ostream& out);
void cmd_feature_search(const RunConfig& config, std::ostream& out);
void cmd_oracle(const RunConfig& config, std::ostream& out);

/// Dispatches by subcommand name and maps exceptions to exit codes.
int run_command(const std::string& name, const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace qameta
