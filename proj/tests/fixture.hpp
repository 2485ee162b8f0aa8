#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "qameta/dataset.hpp"
#include "qameta/evaluation.hpp"
#include "qameta/features.hpp"

namespace fixture {

inline std::filesystem::path data_dir() { return QAMETA_DATA_DIR; }
inline std::filesystem::path questions_path() { return data_dir() / "qald6_questions.json"; }
inline std::filesystem::path matrix_path() { return data_dir() / "qald6_performance.csv"; }
inline std::filesystem::path gazetteer_path() { return data_dir() / "gazetteer.json"; }
inline std::filesystem::path metasystem_path() { return std::filesystem::path(QAMETA_TEST_DATA_DIR) / "qald6_metasystem.csv"; }

inline const qameta::Dataset& dataset() {
    static const qameta::Dataset d = qameta::join_dataset(
        qameta::load_questions(questions_path(), qameta::QuestionFormat::Json), qameta::load_performance(matrix_path()));
    return d;
}

inline const qameta::Gazetteer& gazetteer() {
    static const qameta::Gazetteer g = qameta::load_gazetteer(gazetteer_path());
    return g;
}

inline const qameta::PreparedDataset& prepared() {
    static const qameta::PreparedDataset p = qameta::prepare(dataset(), gazetteer());
    return p;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("qameta_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace fixture
