#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "rejectlab/model.hpp"

namespace rejectlab {

/// Everything needed to classify raw rows later: the model itself, the
/// z-score record of its training data and the label bookkeeping.
struct ModelArtifact {
    LvqModel model;
    Standardizer scaler;
    std::vector<std::string> class_names;
    int positive_class = 1;
};

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols())
        throw std::invalid_argument("model file: matrix size mismatch");
    m.data() = std::move(data);
    return m;
}

}  // namespace detail

inline nlohmann::json model_to_json(const ModelArtifact& artifact) {
    const LvqModel& m = artifact.model;
    nlohmann::json j;
    j["format"] = "rejectlab-model";
    j["version"] = 1;
    j["variant"] = variant_name(m.variant);
    j["num_classes"] = m.num_classes;
    j["sigma"] = m.sigma;
    j["prototypes"] = nlohmann::json::array();
    for (const auto& p : m.prototypes)
        j["prototypes"].push_back({{"label", p.label}, {"w", p.w}});
    j["metrics"] = nlohmann::json::array();
    for (const auto& metric : m.metrics)
        j["metrics"].push_back(detail::matrix_to_json(metric.omega()));
    j["training_log"] = m.training_log;
    j["standardizer"] = {{"mean", artifact.scaler.mean}, {"stddev", artifact.scaler.stddev}};
    j["class_names"] = artifact.class_names;
    j["positive_class"] = artifact.positive_class;
    return j;
}

inline ModelArtifact model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "rejectlab-model")
        throw std::invalid_argument("model file: unrecognized format tag");
    if (j.value("version", 0) != 1)
        throw std::invalid_argument("model file: unsupported version");
    ModelArtifact artifact;
    LvqModel& m = artifact.model;
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.num_classes = j.at("num_classes").get<int>();
    m.sigma = j.at("sigma").get<double>();
    for (const auto& pj : j.at("prototypes")) {
        Prototype p;
        p.label = pj.at("label").get<int>();
        p.w = pj.at("w").get<FeatureVector>();
        m.prototypes.push_back(std::move(p));
    }
    for (const auto& mj : j.at("metrics"))
        m.metrics.emplace_back(detail::matrix_from_json(mj));
    m.training_log = j.at("training_log").get<std::vector<double>>();
    artifact.scaler.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    artifact.scaler.stddev = j.at("standardizer").at("stddev").get<std::vector<double>>();
    artifact.class_names = j.at("class_names").get<std::vector<std::string>>();
    artifact.positive_class = j.at("positive_class").get<int>();
    m.validate();
    return artifact;
}

inline void save_model(const std::string& path, const ModelArtifact& artifact) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_model: cannot write '" + path + "'");
    os << model_to_json(artifact).dump(2) << '\n';
}

inline ModelArtifact load_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("load_model: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("load_model: '" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

}  // namespace rejectlab
