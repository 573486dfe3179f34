#pragma once

// Experiment manifests. A manifest is one JSON object; every field is
// optional and falls back to the defaults below.
//
//   scenarios      ["CC-S", "CC-NS", "FC-S", "FC-NS"]
//   rho_db         SNR grid in dB
//   antennas       list of M
//   gains          CC amplitudes g (length must equal every M); default all ones
//   phase_noise    {"family": "von_mises" | "wrapped_gaussian" | "uniform",
//                   "parameter": kappa or sigma^2, "order": L} or a list of these
//   constellation  {"psk": N} or {"points": [[re, im], ...]}, or a list of these
//   slots          data slots T (T-slot comparisons only)
//   detector       "ml" | "von_mises" | "high_snr" | "min_distance"
//   noiseless      drop AWGN, i.e. the rho -> infinity limit (bounds runs)
//   trials         trials per grid point
//   target_errors  stop a point once this many errors are seen (0 disables)
//   block_size     trials per scheduling block; early stopping is checked per block
//   seed           master seed
//   truncation     {"accuracy": 1e-12, "min_terms": 2, "max_terms": 64}
//   output         CSV path
//   validation     {"instances": 100, "kappa": 4, "max_antennas": 3,
//                   "max_rho": 10, "tolerance": 1e-6}

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnd/channel_sim.hpp"
#include "pnd/constellation.hpp"
#include "pnd/phase_noise.hpp"
#include "pnd/series.hpp"

namespace pnd {

struct ModelSpec {
    std::string family = "von_mises";
    double parameter = 4.0;
    int order = kDefaultFourierOrder;

    PhaseNoiseModel build() const {
        if (family == "von_mises") return fourier_von_mises(parameter, order);
        if (family == "wrapped_gaussian") return fourier_wrapped_gaussian(parameter, order);
        if (family == "uniform") return uniform_phase_noise(order);
        throw std::invalid_argument("config: unknown phase noise family '" + family + "'");
    }
};

struct ConstellationSpec {
    int psk = 4;                   // used when points is empty
    std::vector<Complex> points;

    Constellation build() const { return points.empty() ? Constellation::psk(psk) : Constellation::from_points(points); }
};

struct ScenarioKind {
    ChannelKind channel = ChannelKind::Constant;
    Oscillators oscillators = Oscillators::Synchronous;
};

inline ScenarioKind parse_scenario_kind(const std::string& name) {
    if (name == "CC-S") return {ChannelKind::Constant, Oscillators::Synchronous};
    if (name == "CC-NS") return {ChannelKind::Constant, Oscillators::NonSynchronous};
    if (name == "FC-S") return {ChannelKind::Fading, Oscillators::Synchronous};
    if (name == "FC-NS") return {ChannelKind::Fading, Oscillators::NonSynchronous};
    throw std::invalid_argument("config: unknown scenario '" + name + "' (expected CC-S, CC-NS, FC-S or FC-NS)");
}

enum class DetectorKind { MaximumLikelihood, VonMisesClosedForm, HighSnrNs, MinDistanceFcNs };

inline DetectorKind parse_detector(const std::string& name) {
    if (name == "ml") return DetectorKind::MaximumLikelihood;
    if (name == "von_mises") return DetectorKind::VonMisesClosedForm;
    if (name == "high_snr") return DetectorKind::HighSnrNs;
    if (name == "min_distance") return DetectorKind::MinDistanceFcNs;
    throw std::invalid_argument("config: unknown detector '" + name + "'");
}

struct ValidationConfig {
    int instances = 100;
    double kappa = 4.0;
    int max_antennas = 3;
    double max_rho = 10.0;  // linear
    double tolerance = 1e-6;
};

struct SweepConfig {
    std::vector<ScenarioKind> scenarios{{ChannelKind::Constant, Oscillators::Synchronous}};
    std::vector<double> rho_db{40.0};
    std::vector<int> antennas{1};
    std::vector<double> gains;
    std::vector<ModelSpec> models{ModelSpec{}};
    std::vector<ConstellationSpec> constellations{ConstellationSpec{}};
    int slots = 1;
    DetectorKind detector = DetectorKind::MaximumLikelihood;
    bool noiseless = false;
    std::uint64_t trials = 100000;
    std::uint64_t target_errors = 200;
    std::uint64_t block_size = 1000;
    std::uint64_t seed = 1;
    TruncationPolicy truncation{};
    std::string output;
    ValidationConfig validation{};

    void validate() const {
        if (scenarios.empty()) throw std::invalid_argument("config: no scenarios");
        if (rho_db.empty()) throw std::invalid_argument("config: empty rho grid");
        for (double r : rho_db) {
            if (!std::isfinite(r)) throw std::invalid_argument("config: rho grid must be finite");
        }
        if (antennas.empty()) throw std::invalid_argument("config: empty antenna list");
        for (int m : antennas) {
            if (m < 1) throw std::invalid_argument("config: antenna counts must be >= 1");
            if (!gains.empty() && gains.size() != static_cast<std::size_t>(m)) {
                throw std::invalid_argument("config: gains length must equal every M in the antenna list");
            }
        }
        if (models.empty() || constellations.empty()) throw std::invalid_argument("config: model and constellation required");
        if (slots < 1) throw std::invalid_argument("config: slots must be >= 1");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (target_errors > trials) throw std::invalid_argument("config: target_errors must not exceed trials");
        if (block_size < 1) throw std::invalid_argument("config: block_size must be >= 1");
        truncation.validate();
    }
};

namespace detail {

inline ModelSpec parse_model(const nlohmann::json& j) {
    ModelSpec m;
    m.family = j.value("family", m.family);
    m.parameter = j.value("parameter", m.family == "uniform" ? 0.0 : m.parameter);
    m.order = j.value("order", m.order);
    return m;
}

inline ConstellationSpec parse_constellation(const nlohmann::json& j) {
    ConstellationSpec c;
    if (j.contains("points")) {
        for (const auto& p : j.at("points")) c.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    } else {
        c.psk = j.value("psk", c.psk);
    }
    return c;
}

template <class T, class F>
std::vector<T> one_or_many(const nlohmann::json& j, F parse) {
    std::vector<T> out;
    if (j.is_array()) {
        for (const auto& e : j) out.push_back(parse(e));
    } else {
        out.push_back(parse(j));
    }
    return out;
}

}  // namespace detail

inline SweepConfig parse_config(const nlohmann::json& j) {
    SweepConfig c;
    if (j.contains("scenarios")) {
        c.scenarios.clear();
        for (const auto& s : j.at("scenarios")) c.scenarios.push_back(parse_scenario_kind(s.get<std::string>()));
    }
    if (j.contains("rho_db")) c.rho_db = j.at("rho_db").get<std::vector<double>>();
    if (j.contains("antennas")) c.antennas = j.at("antennas").get<std::vector<int>>();
    if (j.contains("gains")) c.gains = j.at("gains").get<std::vector<double>>();
    if (j.contains("phase_noise")) c.models = detail::one_or_many<ModelSpec>(j.at("phase_noise"), detail::parse_model);
    if (j.contains("constellation")) {
        c.constellations = detail::one_or_many<ConstellationSpec>(j.at("constellation"), detail::parse_constellation);
    }
    c.slots = j.value("slots", c.slots);
    if (j.contains("detector")) c.detector = parse_detector(j.at("detector").get<std::string>());
    c.noiseless = j.value("noiseless", c.noiseless);
    c.trials = j.value("trials", c.trials);
    c.target_errors = j.value("target_errors", c.target_errors);
    c.block_size = j.value("block_size", c.block_size);
    c.seed = j.value("seed", c.seed);
    if (j.contains("truncation")) {
        const auto& t = j.at("truncation");
        c.truncation.accuracy = t.value("accuracy", c.truncation.accuracy);
        c.truncation.min_terms = t.value("min_terms", c.truncation.min_terms);
        c.truncation.max_terms = t.value("max_terms", c.truncation.max_terms);
    }
    c.output = j.value("output", c.output);
    if (j.contains("validation")) {
        const auto& v = j.at("validation");
        c.validation.instances = v.value("instances", c.validation.instances);
        c.validation.kappa = v.value("kappa", c.validation.kappa);
        c.validation.max_antennas = v.value("max_antennas", c.validation.max_antennas);
        c.validation.max_rho = v.value("max_rho", c.validation.max_rho);
        c.validation.tolerance = v.value("tolerance", c.validation.tolerance);
    }
    c.validate();
    return c;
}

inline SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config '" + path + "': " + e.what());
    }
    return parse_config(j);
}

}  // namespace pnd
