#include "qameta/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "qameta/dataset.hpp"
#include "qameta/error.hpp"
#include "qameta/model_file.hpp"
#include "qameta/selection.hpp"
#include "qameta/stats.hpp"
#include "text_util.hpp"

namespace qameta {

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << content;
}

Dataset load_dataset(const RunConfig& c) {
    auto questions = load_questions(c.questions, question_format_for(c.questions));
    auto matrix = load_performance(c.matrix);
    return join_dataset(std::move(questions), std::move(matrix));
}

std::string canonical_training_config(const RunConfig& c) {
    nlohmann::json j{{"method", std::string(to_string(c.method))},
                     {"params", c.params.to_json()},
                     {"features", format_group_list(c.groups)},
                     {"seed", c.seed}};
    return j.dump();
}

EvalConfig eval_config(const RunConfig& c) {
    EvalConfig e;
    e.method = c.method;
    e.params = c.params;
    e.groups = c.groups;
    e.seed = c.seed;
    e.folds = c.folds;
    e.threads = c.threads;
    return e;
}

std::string show(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

template <class T>
T get_as(const nlohmann::json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParamError("config key '" + key + "' has the wrong type");
    }
}

}  // namespace

RunConfig apply_config_json(const nlohmann::json& j, RunConfig c) {
    if (!j.is_object()) throw ParamError("config file must contain a JSON object");
    for (const auto& [raw_key, v] : j.items()) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "questions") c.questions = get_as<std::string>(v, key);
        else if (key == "matrix") c.matrix = get_as<std::string>(v, key);
        else if (key == "gazetteer") c.gazetteer = get_as<std::string>(v, key);
        else if (key == "model") c.model = get_as<std::string>(v, key);
        else if (key == "out") c.out = get_as<std::string>(v, key);
        else if (key == "method") {
            const auto m = parse_method(get_as<std::string>(v, key));
            if (!m) throw ParamError("unknown method '" + v.get<std::string>() + "'");
            c.method = *m;
        } else if (key == "features") c.groups = parse_group_list(get_as<std::string>(v, key));
        else if (key == "protocol") {
            const auto p = parse_protocol(get_as<std::string>(v, key));
            if (!p) throw ParamError("unknown protocol '" + v.get<std::string>() + "'");
            c.protocol = *p;
        } else if (key == "folds") c.folds = get_as<std::size_t>(v, key);
        else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
        else if (key == "prune") c.params.prune = get_as<int>(v, key);
        else if (key == "threshold") c.params.threshold = get_as<double>(v, key);
        else if (key == "k") c.params.k = get_as<int>(v, key);
        else if (key == "ensemble") c.params.ensemble = get_as<int>(v, key);
        else if (key == "gibbs-iterations") c.params.gibbs_iterations = get_as<int>(v, key);
        else if (key == "burn-in") c.params.burn_in = get_as<int>(v, key);
        else if (key == "max-depth") {
            if (v.is_null()) c.params.tree.max_depth.reset();
            else c.params.tree.max_depth = get_as<int>(v, key);
        } else if (key == "min-samples-split") c.params.tree.min_samples_split = get_as<int>(v, key);
        else if (key == "l2-lambda") c.params.logistic.l2_lambda = get_as<double>(v, key);
        else if (key == "epochs") c.params.logistic.epochs = get_as<int>(v, key);
        else if (key == "learning-rate") c.params.logistic.learning_rate = get_as<double>(v, key);
        else if (key == "listed") c.listed = get_as<bool>(v, key);
        else if (key == "threads") c.threads = get_as<unsigned>(v, key);
        else if (key == "question") c.question = get_as<std::string>(v, key);
        else throw ParamError("unknown config key '" + raw_key + "'");
    }
    return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j{{"questions", c.questions.string()},
                     {"matrix", c.matrix.string()},
                     {"gazetteer", c.gazetteer.string()},
                     {"model", c.model.string()},
                     {"out", c.out.string()},
                     {"method", std::string(to_string(c.method))},
                     {"features", format_group_list(c.groups)},
                     {"protocol", std::string(to_string(c.protocol))},
                     {"folds", c.folds},
                     {"seed", c.seed},
                     {"prune", c.params.prune},
                     {"threshold", c.params.threshold},
                     {"k", c.params.k},
                     {"ensemble", c.params.ensemble},
                     {"gibbs_iterations", c.params.gibbs_iterations},
                     {"burn_in", c.params.burn_in},
                     {"min_samples_split", c.params.tree.min_samples_split},
                     {"l2_lambda", c.params.logistic.l2_lambda},
                     {"epochs", c.params.logistic.epochs},
                     {"learning_rate", c.params.logistic.learning_rate},
                     {"listed", c.listed}};
    j["max_depth"] = c.params.tree.max_depth ? nlohmann::json(*c.params.tree.max_depth) : nlohmann::json(nullptr);
    return j;
}

void cmd_extract(const RunConfig& c, std::ostream& out) {
    const auto gazetteer = load_gazetteer(c.gazetteer);
    const auto questions = load_questions(c.questions, question_format_for(c.questions));
    std::string csv = "question_id";
    for (const auto& name : slot_names(c.groups)) csv += "," + name;
    csv += "\n";
    for (const auto& q : questions) {
        csv += std::to_string(q.id);
        for (double v : question_vector(q, gazetteer, c.groups)) csv += "," + detail::format_double(v);
        csv += "\n";
    }
    const auto path = c.out / "features.csv";
    write_text(path, csv);
    out << "wrote " << questions.size() << " feature rows to " << path.string() << "\n";
}

void cmd_train(const RunConfig& c, std::ostream& out) {
    const auto gazetteer = load_gazetteer(c.gazetteer);
    const auto dataset = load_dataset(c);
    if (dataset.questions.empty()) throw DataError("no training questions");
    ModelFile file;
    file.gazetteer = gazetteer;
    file.meta = train_metamodel(c.method, c.params, c.groups, dataset, dataset.matrix.ids(), gazetteer, c.seed);
    file.fingerprint =
        fingerprint_of({read_file(c.questions), read_file(c.matrix), canonical_training_config(c)});

    double total = 0.0;
    for (const auto& q : dataset.questions) total += selection_f1(dataset.matrix, q.id, select(file.meta, q, gazetteer));
    const double aggregate = total / static_cast<double>(dataset.questions.size());

    const auto path = c.model.empty() ? c.out / "model.json" : c.model;
    save_model(path, file);
    out << "method: " << to_string(c.method) << "\n"
        << "features: " << format_group_list(c.groups) << "\n"
        << "questions: " << dataset.questions.size() << "\n"
        << "training aggregate F1: " << show(aggregate) << "\n"
        << "model: " << path.string() << "\n";
}

void cmd_route(const RunConfig& c, std::ostream& out) {
    if (c.model.empty()) throw ParamError("route needs --model");
    if (detail::trim(c.question).empty()) throw ParamError("route needs a non-empty --question");
    const auto file = load_model(c.model);
    QuestionRecord q{0, c.question, {}};
    const auto x = question_vector(q, file.gazetteer, file.meta.groups);
    const auto conf = file.meta.model.predict(x);
    const std::size_t chosen = select_from_scores(file.meta, conf);

    std::vector<std::size_t> order(conf.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return conf[a] > conf[b]; });
    nlohmann::json ranking = nlohmann::json::array();
    for (auto s : order) ranking.push_back({{"system", file.meta.systems[s]}, {"score", conf[s]}});
    nlohmann::json result{{"question", c.question},
                          {"chosen_system", file.meta.systems[chosen]},
                          {"confidences", std::move(ranking)}};
    out << result.dump(2) << "\n";
}

void cmd_evaluate(const RunConfig& c, std::ostream& out) {
    const auto gazetteer = load_gazetteer(c.gazetteer);
    const auto dataset = load_dataset(c);
    const auto data = prepare(dataset, gazetteer);
    const auto report = evaluate(c.protocol, data, eval_config(c));
    const std::vector<EvaluationReport> reports{report};
    const auto table = compare_report(dataset.matrix, reports);
    write_text(c.out / "report.csv", report_csv(reports, dataset.matrix.systems()));
    write_text(c.out / "boxplot.csv", boxplot_csv(reports));
    write_text(c.out / "summary.md", summary_markdown(table, reports));
    out << report_label(report) << " aggregate F1: " << show(report.aggregate) << "\n";
    for (std::size_t f = 0; f < report.fold_scores.size() && report.protocol == Protocol::CV10; ++f) {
        out << "  fold " << f << ": " << show(report.fold_scores[f]) << "\n";
    }
}

void cmd_associate(const RunConfig& c, std::ostream& out) {
    const auto gazetteer = load_gazetteer(c.gazetteer);
    const auto dataset = load_dataset(c);
    const auto profile = association_profile(dataset, gazetteer);
    const auto path = c.out / "association.csv";
    write_text(path, association_csv(profile));
    out << "mean Cramer's V per feature:\n";
    for (std::size_t f = 0; f < profile.features.size(); ++f) {
        const auto v = profile.mean_v(f);
        out << "  " << group_name(profile.features[f]) << ": " << (v ? show(*v) : "n/a") << "\n";
    }
    out << "wrote " << path.string() << "\n";
}

void cmd_feature_search(const RunConfig& c, std::ostream& out) {
    const auto gazetteer = load_gazetteer(c.gazetteer);
    const auto dataset = load_dataset(c);
    const auto data = prepare(dataset, gazetteer);
    const auto report = subset_search(data, eval_config(c), c.listed ? SearchMode::Listed : SearchMode::Exhaustive);
    write_text(c.out / "feature_search.csv", subset_search_csv(report));
    write_text(c.out / "feature_search.md", subset_search_markdown(report, c.listed ? report.ranked.size() : 20));
    out << "evaluated " << report.ranked.size() << " feature combinations\n";
    if (!c.listed) {
        out << "best: " << format_group_list(report.best().groups) << " -> "
            << show(report.best().score) << "\n";
    } else {
        for (const auto& r : report.ranked) {
            out << "  " << format_group_list(r.groups) << " -> " << show(r.score) << "\n";
        }
    }
}

void cmd_oracle(const RunConfig& c, std::ostream& out) {
    const auto matrix = load_performance(c.matrix);
    const auto means = matrix.column_means();
    std::string csv = "system,mean_f1\n";
    for (std::size_t s = 0; s < means.size(); ++s) {
        out << matrix.systems()[s] << ": " << show(means[s]) << "\n";
        csv += matrix.systems()[s] + "," + detail::format_double(means[s]) + "\n";
    }
    const double oracle = oracle_mean(matrix);
    csv += "oracle," + detail::format_double(oracle) + "\n";
    out << "oracle: " << show(oracle) << "\n";
    write_text(c.out / "oracle.csv", csv);
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        if (name == "extract") cmd_extract(config, out);
        else if (name == "train") cmd_train(config, out);
        else if (name == "route") cmd_route(config, out);
        else if (name == "evaluate") cmd_evaluate(config, out);
        else if (name == "associate") cmd_associate(config, out);
        else if (name == "feature-search") cmd_feature_search(config, out);
        else if (name == "oracle") cmd_oracle(config, out);
        else {
            err << "unknown command '" << name << "'\n";
            return kUsageError;
        }
        return kOk;
    } catch (const ParamError& e) {
        err << name << ": " << e.what() << "\n";
        return kUsageError;
    } catch (const DataError& e) {
        err << name << ": " << e.what() << "\n";
        return kDataError;
    } catch (const DegenerateTableError& e) {
        err << name << ": " << e.what() << "\n";
        return kDataError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << name << ": " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << name << ": internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace qameta
