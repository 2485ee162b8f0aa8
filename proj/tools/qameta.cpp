#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qameta/commands.hpp"
#include "qameta/error.hpp"

namespace {

struct Flags {
    std::optional<std::string> config, questions, matrix, gazetteer, method, features, protocol, out, model, question;
    std::optional<std::size_t> folds;
    std::optional<std::uint64_t> seed;
    std::optional<int> prune, k, ensemble;
    std::optional<double> threshold;
    std::optional<unsigned> threads;
    bool listed = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file; flags override its values");
    sub->add_option("--questions", f.questions, "questions file (.json or .tsv)");
    sub->add_option("--matrix", f.matrix, "performance matrix CSV");
    sub->add_option("--gazetteer", f.gazetteer, "gazetteer JSON");
    sub->add_option("--method", f.method, "BR, LC, CC, MCC, RT, PS, PSt, RAkELd, RAkELo, CDN");
    sub->add_option("--features", f.features, "comma-separated feature groups or 'all'");
    sub->add_option("--protocol", f.protocol, "cv10, loo or full");
    sub->add_option("--folds", f.folds, "number of cross-validation folds");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--model", f.model, "model file");
    sub->add_option("--prune", f.prune, "pruned sets: drop label combinations seen at most this often");
    sub->add_option("--threshold", f.threshold, "pruned sets: confidence threshold");
    sub->add_option("--k", f.k, "RAkEL subset size");
    sub->add_option("--ensemble", f.ensemble, "ensemble size for MCC and RAkELo");
    sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

qameta::RunConfig resolve(const Flags& f) {
    using qameta::ParamError;
    nlohmann::json merged = nlohmann::json::object();
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) throw ParamError("cannot read config file " + *f.config);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParamError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!j.is_object()) throw ParamError("config file must contain a JSON object");
        merged = std::move(j);
    }
    auto put = [&](const char* key, const auto& opt) {
        if (opt) merged[key] = *opt;
    };
    put("questions", f.questions);
    put("matrix", f.matrix);
    put("gazetteer", f.gazetteer);
    put("method", f.method);
    put("features", f.features);
    put("protocol", f.protocol);
    put("folds", f.folds);
    put("seed", f.seed);
    put("out", f.out);
    put("model", f.model);
    put("prune", f.prune);
    put("threshold", f.threshold);
    put("k", f.k);
    put("ensemble", f.ensemble);
    put("threads", f.threads);
    put("question", f.question);
    if (f.listed) merged["listed"] = true;
    return qameta::apply_config_json(merged, qameta::RunConfig{});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Routes questions to the question answering system most likely to answer them."};
    app.require_subcommand(1);
    Flags flags;

    auto* extract = app.add_subcommand("extract", "write the feature vector of every question");
    auto* train = app.add_subcommand("train", "train a router on all questions and save it");
    auto* route = app.add_subcommand("route", "pick a system for one question");
    auto* evaluate = app.add_subcommand("evaluate", "score a router under cv10, loo or full");
    auto* associate = app.add_subcommand("associate", "Cramer's V between features and systems");
    auto* search = app.add_subcommand("feature-search", "rank feature subsets by full-train F1");
    auto* oracle = app.add_subcommand("oracle", "single-system means and the oracle");
    for (auto* sub : {extract, train, route, evaluate, associate, search, oracle}) add_common(sub, flags);
    route->add_option("--question", flags.question, "question text");
    search->add_flag("--listed", flags.listed, "only the reference combinations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qameta::kUsageError;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    qameta::RunConfig config;
    try {
        config = resolve(flags);
    } catch (const std::exception& e) {
        std::cerr << name << ": " << e.what() << "\n";
        return qameta::kUsageError;
    }
    return qameta::run_command(name, config, std::cout, std::cerr);
}
