#include "bond/config.hpp"

#include "bond/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace bond {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.contains(key)) {
            throw config_error("config: unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error("config: bad value for \"" + key + "\": " + e.what());
    }
}

std::string get_enum(const json& obj, const std::string& key, const std::string& fallback) {
    return get_or<std::string>(obj, key, fallback);
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw config_error("config: unknown activation \"" + name + "\"");
}

const char* to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "identity";
}

NetSpec parse_net(const json& obj, const std::string& where, NetSpec defaults) {
    reject_unknown_keys(obj, where,
                        {"input", "hidden", "output", "activation", "output_activation"});
    NetSpec spec = defaults;
    spec.input_dim = get_or<std::size_t>(obj, "input", defaults.input_dim);
    spec.hidden = get_or<std::vector<std::size_t>>(obj, "hidden", defaults.hidden);
    spec.output_dim = get_or<std::size_t>(obj, "output", defaults.output_dim);
    spec.hidden_activation =
        activation_from_string(get_enum(obj, "activation", to_string(defaults.hidden_activation)));
    spec.output_activation = activation_from_string(
        get_enum(obj, "output_activation", to_string(defaults.output_activation)));
    return spec;
}

json net_to_json(const NetSpec& spec) {
    return json{{"input", spec.input_dim},
                {"hidden", spec.hidden},
                {"output", spec.output_dim},
                {"activation", to_string(spec.hidden_activation)},
                {"output_activation", to_string(spec.output_activation)}};
}

ArchKind arch_kind_from_string(const std::string& name) {
    if (name == "lfn") return ArchKind::LFN;
    if (name == "len") return ArchKind::LEN;
    if (name == "nfn") return ArchKind::NFN;
    if (name == "nen") return ArchKind::NEN;
    if (name == "no_reservoir") return ArchKind::NoReservoir;
    throw config_error("config: unknown architecture kind \"" + name + "\"");
}

const char* to_string(ArchKind k) {
    switch (k) {
        case ArchKind::LFN: return "lfn";
        case ArchKind::LEN: return "len";
        case ArchKind::NFN: return "nfn";
        case ArchKind::NEN: return "nen";
        case ArchKind::NoReservoir: return "no_reservoir";
    }
    return "nfn";
}

ReservoirKind reservoir_kind_from_string(const std::string& name) {
    if (name == "fixed") return ReservoirKind::Fixed;
    if (name == "parallel") return ReservoirKind::Parallel;
    if (name == "esn") return ReservoirKind::EchoState;
    throw config_error("config: unknown reservoir kind \"" + name + "\"");
}

const char* to_string(ReservoirKind k) {
    switch (k) {
        case ReservoirKind::Fixed: return "fixed";
        case ReservoirKind::Parallel: return "parallel";
        case ReservoirKind::EchoState: return "esn";
    }
    return "fixed";
}

ReservoirSpec parse_reservoir(const json& obj) {
    reject_unknown_keys(obj, "reservoir", {"kind", "input", "output", "hidden", "n_subs", "esn"});
    ReservoirSpec spec;
    spec.kind = reservoir_kind_from_string(get_enum(obj, "kind", "fixed"));
    spec.input_dim = get_or<std::size_t>(obj, "input", spec.input_dim);
    spec.output_dim = get_or<std::size_t>(obj, "output", spec.output_dim);
    spec.hidden = get_or<std::vector<std::size_t>>(obj, "hidden", spec.hidden);
    spec.n_subs = get_or<std::size_t>(obj, "n_subs", spec.n_subs);
    if (obj.contains("esn")) {
        const json& esn = obj.at("esn");
        reject_unknown_keys(esn, "reservoir.esn",
                            {"state_size", "spectral_radius", "leak", "input_scale", "readout",
                             "state_reset"});
        spec.esn.state_size = get_or<std::size_t>(esn, "state_size", spec.esn.state_size);
        spec.esn.spectral_radius = get_or<double>(esn, "spectral_radius",
                                                  spec.esn.spectral_radius);
        spec.esn.leak = get_or<double>(esn, "leak", spec.esn.leak);
        spec.esn.input_scale = get_or<double>(esn, "input_scale", spec.esn.input_scale);
        const std::string readout = get_enum(esn, "readout", "tanh");
        if (readout != "tanh" && readout != "linear") {
            throw config_error("config: reservoir.esn.readout must be tanh or linear");
        }
        spec.esn.tanh_readout = readout == "tanh";
        const std::string reset = get_enum(esn, "state_reset", "epoch");
        if (reset != "epoch" && reset != "never") {
            throw config_error("config: reservoir.esn.state_reset must be epoch or never");
        }
        spec.esn.reset_state_per_epoch = reset == "epoch";
    }
    return spec;
}

json reservoir_to_json(const ReservoirSpec& spec) {
    return json{{"kind", to_string(spec.kind)},
                {"input", spec.input_dim},
                {"output", spec.output_dim},
                {"hidden", spec.hidden},
                {"n_subs", spec.n_subs},
                {"esn",
                 {{"state_size", spec.esn.state_size},
                  {"spectral_radius", spec.esn.spectral_radius},
                  {"leak", spec.esn.leak},
                  {"input_scale", spec.esn.input_scale},
                  {"readout", spec.esn.tanh_readout ? "tanh" : "linear"},
                  {"state_reset", spec.esn.reset_state_per_epoch ? "epoch" : "never"}}}};
}

RowNormMode row_norm_from_string(const std::string& name) {
    if (name == "auto") return RowNormMode::Auto;
    if (name == "on") return RowNormMode::On;
    if (name == "off") return RowNormMode::Off;
    throw config_error("config: estimator.row_norm must be auto, on or off");
}

PerturbDistribution distribution_from_string(const std::string& name) {
    if (name == "rademacher") return PerturbDistribution::Rademacher;
    if (name == "uniform") return PerturbDistribution::Uniform;
    if (name == "normal") return PerturbDistribution::Normal;
    throw config_error("config: unknown perturbation distribution \"" + name + "\"");
}

const char* to_string(PerturbDistribution d) {
    switch (d) {
        case PerturbDistribution::Rademacher: return "rademacher";
        case PerturbDistribution::Uniform: return "uniform";
        case PerturbDistribution::Normal: return "normal";
    }
    return "rademacher";
}

EstimatorConfig parse_estimator(const json& obj) {
    reject_unknown_keys(obj, "estimator",
                        {"kind", "beta1", "beta2", "delta_min", "mu0", "mu_decay", "n_pert",
                         "row_norm", "distribution", "t0_sigma"});
    EstimatorConfig cfg;
    cfg.kind = estimator_from_string(get_enum(obj, "kind", "bond"));
    cfg.beta1 = get_or<double>(obj, "beta1", cfg.beta1);
    cfg.beta2 = get_or<double>(obj, "beta2", cfg.beta2);
    cfg.delta_min = get_or<double>(obj, "delta_min", cfg.delta_min);
    cfg.mu0 = get_or<double>(obj, "mu0", cfg.mu0);
    cfg.mu_decay = get_or<double>(obj, "mu_decay", cfg.mu_decay);
    cfg.n_pert = get_or<std::size_t>(obj, "n_pert", cfg.n_pert);
    cfg.row_norm = row_norm_from_string(get_enum(obj, "row_norm", "auto"));
    cfg.distribution = distribution_from_string(get_enum(obj, "distribution", "rademacher"));
    const std::string sigma = get_enum(obj, "t0_sigma", "sqrt_eta");
    if (sigma != "sqrt_eta" && sigma != "eta") {
        throw config_error("config: estimator.t0_sigma must be sqrt_eta or eta");
    }
    cfg.first_step_sigma = sigma == "sqrt_eta" ? FirstStepSigma::SqrtEta : FirstStepSigma::Eta;
    return cfg;
}

json estimator_to_json(const EstimatorConfig& cfg) {
    return json{{"kind", to_string(cfg.kind)},
                {"beta1", cfg.beta1},
                {"beta2", cfg.beta2},
                {"delta_min", cfg.delta_min},
                {"mu0", cfg.mu0},
                {"mu_decay", cfg.mu_decay},
                {"n_pert", cfg.n_pert},
                {"row_norm", cfg.row_norm == RowNormMode::Auto
                                 ? "auto"
                                 : (cfg.row_norm == RowNormMode::On ? "on" : "off")},
                {"distribution", to_string(cfg.distribution)},
                {"t0_sigma",
                 cfg.first_step_sigma == FirstStepSigma::SqrtEta ? "sqrt_eta" : "eta"}};
}

DatasetConfig parse_dataset(const json& obj) {
    reject_unknown_keys(obj, "dataset",
                        {"kind", "path", "target_scale", "split_ratio", "n", "d_in", "noise",
                         "classes"});
    DatasetConfig cfg;
    const std::string kind = get_enum(obj, "kind", "housing_csv");
    if (kind == "housing_csv") {
        cfg.kind = DatasetConfig::Kind::HousingCsv;
    } else if (kind == "synthetic_regression") {
        cfg.kind = DatasetConfig::Kind::SyntheticRegression;
    } else if (kind == "synthetic_classification") {
        cfg.kind = DatasetConfig::Kind::SyntheticClassification;
    } else {
        throw config_error("config: unknown dataset kind \"" + kind + "\"");
    }
    cfg.path = get_or<std::string>(obj, "path", "");
    cfg.target_scale = get_or<double>(obj, "target_scale", cfg.target_scale);
    cfg.split_ratio = get_or<double>(obj, "split_ratio", cfg.split_ratio);
    cfg.n = get_or<std::size_t>(obj, "n", cfg.n);
    cfg.d_in = get_or<std::size_t>(obj, "d_in", cfg.d_in);
    cfg.noise = get_or<double>(obj, "noise", cfg.noise);
    cfg.classes = get_or<std::size_t>(obj, "classes", cfg.classes);
    if (cfg.kind == DatasetConfig::Kind::HousingCsv) {
        if (cfg.path.empty()) throw config_error("config: dataset.path required for housing_csv");
        if (!std::filesystem::exists(cfg.path)) {
            throw config_error("config: dataset file does not exist: " + cfg.path);
        }
    }
    return cfg;
}

json dataset_to_json(const DatasetConfig& cfg) {
    const char* kind = cfg.kind == DatasetConfig::Kind::HousingCsv
                           ? "housing_csv"
                           : (cfg.kind == DatasetConfig::Kind::SyntheticRegression
                                  ? "synthetic_regression"
                                  : "synthetic_classification");
    return json{{"kind", kind},           {"path", cfg.path},   {"target_scale", cfg.target_scale},
                {"split_ratio", cfg.split_ratio}, {"n", cfg.n}, {"d_in", cfg.d_in},
                {"noise", cfg.noise},     {"classes", cfg.classes}};
}

void apply_override(json& doc, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw config_error("override must look like path.to.key=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string raw_value = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw_value);
    } catch (const json::exception&) {
        value = raw_value;  // bare strings need no quotes
    }

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw config_error("override has an empty path segment: " + assignment);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        if (!node->is_object() && !node->is_null()) {
            throw config_error("override path crosses a non-object: " + assignment);
        }
        start = dot + 1;
    }
}

RunConfig from_json(const json& doc) {
    reject_unknown_keys(doc, "config root",
                        {"dataset", "architecture", "reservoir", "estimator",
                         "compare_estimators", "optimizer", "loss", "epochs", "batch_size",
                         "seed", "seeds", "compare_ad", "snapshot", "out", "threads",
                         "warmup_iterations", "divergence_factor"});
    RunConfig cfg;
    if (doc.contains("dataset")) cfg.dataset = parse_dataset(doc.at("dataset"));

    if (doc.contains("architecture")) {
        const json& arch = doc.at("architecture");
        reject_unknown_keys(arch, "architecture", {"kind", "f_a", "f_b", "parity_target"});
        cfg.architecture.kind = arch_kind_from_string(get_enum(arch, "kind", "nfn"));
        NetSpec f_a_default;
        f_a_default.input_dim = 8;
        f_a_default.hidden = {100, 100};
        f_a_default.output_dim = 5;
        NetSpec f_b_default;
        f_b_default.input_dim = 5;
        f_b_default.hidden = {100, 100};
        f_b_default.output_dim = 1;
        cfg.architecture.f_a = arch.contains("f_a")
                                   ? parse_net(arch.at("f_a"), "architecture.f_a", f_a_default)
                                   : f_a_default;
        cfg.architecture.f_b = arch.contains("f_b")
                                   ? parse_net(arch.at("f_b"), "architecture.f_b", f_b_default)
                                   : f_b_default;
        if (arch.contains("parity_target")) {
            cfg.architecture.parity_target = arch.at("parity_target").get<std::size_t>();
        }
    } else {
        cfg.architecture.f_a.input_dim = 8;
        cfg.architecture.f_a.hidden = {100, 100};
        cfg.architecture.f_a.output_dim = 5;
        cfg.architecture.f_b.input_dim = 5;
        cfg.architecture.f_b.hidden = {100, 100};
        cfg.architecture.f_b.output_dim = 1;
    }
    if (doc.contains("reservoir")) cfg.architecture.reservoir = parse_reservoir(doc.at("reservoir"));

    if (doc.contains("estimator")) cfg.estimator = parse_estimator(doc.at("estimator"));
    if (doc.contains("compare_estimators")) {
        for (const auto& name : doc.at("compare_estimators")) {
            cfg.compare_estimators.push_back(estimator_from_string(name.get<std::string>()));
        }
    }

    if (doc.contains("optimizer")) {
        const json& opt = doc.at("optimizer");
        reject_unknown_keys(opt, "optimizer", {"kind", "eta", "schedule"});
        const std::string kind = get_enum(opt, "kind", "adam");
        if (kind == "adam") {
            cfg.optimizer.kind = OptimizerKind::Adam;
        } else if (kind == "sgd") {
            cfg.optimizer.kind = OptimizerKind::Sgd;
        } else {
            throw config_error("config: optimizer.kind must be adam or sgd");
        }
        cfg.optimizer.eta = get_or<double>(opt, "eta", cfg.optimizer.eta);
        if (opt.contains("schedule")) {
            std::vector<std::pair<double, double>> breakpoints;
            for (const auto& entry : opt.at("schedule")) {
                if (!entry.is_array() || entry.size() != 2) {
                    throw config_error("config: schedule entries must be [fraction, multiplier]");
                }
                breakpoints.emplace_back(entry[0].get<double>(), entry[1].get<double>());
            }
            cfg.optimizer.schedule = LambdaSchedule(std::move(breakpoints));
        }
    }

    if (doc.contains("loss")) {
        const json& loss = doc.at("loss");
        reject_unknown_keys(loss, "loss", {"kind", "delta"});
        const std::string kind = get_enum(loss, "kind", "huber");
        if (kind == "huber") {
            cfg.loss.kind = LossKind::Huber;
        } else if (kind == "cross_entropy") {
            cfg.loss.kind = LossKind::CrossEntropy;
        } else {
            throw config_error("config: loss.kind must be huber or cross_entropy");
        }
        cfg.loss.huber_delta = get_or<double>(loss, "delta", cfg.loss.huber_delta);
    }

    cfg.epochs = get_or<std::size_t>(doc, "epochs", cfg.epochs);
    cfg.batch_size = get_or<std::size_t>(doc, "batch_size", cfg.batch_size);
    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
    cfg.seeds = get_or<std::vector<std::uint64_t>>(doc, "seeds", cfg.seeds);
    cfg.compare_ad = get_or<bool>(doc, "compare_ad", cfg.compare_ad);
    cfg.snapshot = get_or<bool>(doc, "snapshot", cfg.snapshot);
    cfg.out_dir = get_or<std::string>(doc, "out", cfg.out_dir);
    cfg.threads = get_or<std::size_t>(doc, "threads", cfg.threads);
    cfg.warmup_iterations = get_or<std::size_t>(doc, "warmup_iterations", cfg.warmup_iterations);
    cfg.divergence_factor = get_or<double>(doc, "divergence_factor", cfg.divergence_factor);

    if (cfg.epochs == 0 || cfg.batch_size == 0) {
        throw config_error("config: epochs and batch_size must be positive");
    }
    if (cfg.architecture.kind == ArchKind::NoReservoir &&
        cfg.estimator.kind != EstimatorKind::Ad) {
        throw config_error("config: no_reservoir architectures train with estimator \"ad\"");
    }
    return cfg;
}

} // namespace

const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Bond: return "bond";
        case EstimatorKind::Bonds: return "bonds";
        case EstimatorKind::Spsa: return "spsa";
        case EstimatorKind::Fdsa: return "fdsa";
        case EstimatorKind::Ad: return "ad";
    }
    return "bond";
}

EstimatorKind estimator_from_string(const std::string& name) {
    if (name == "bond") return EstimatorKind::Bond;
    if (name == "bonds") return EstimatorKind::Bonds;
    if (name == "spsa") return EstimatorKind::Spsa;
    if (name == "fdsa") return EstimatorKind::Fdsa;
    if (name == "ad") return EstimatorKind::Ad;
    throw config_error("config: unknown estimator \"" + name + "\"");
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    return from_json(doc);
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: invalid JSON in ") + path + ": " + e.what());
    }
    for (const auto& assignment : overrides) apply_override(doc, assignment);
    return from_json(doc);
}

std::string run_config_to_json(const RunConfig& cfg) {
    json doc;
    doc["dataset"] = dataset_to_json(cfg.dataset);
    doc["architecture"] = json{{"kind", to_string(cfg.architecture.kind)},
                               {"f_a", net_to_json(cfg.architecture.f_a)},
                               {"f_b", net_to_json(cfg.architecture.f_b)}};
    if (cfg.architecture.parity_target) {
        doc["architecture"]["parity_target"] = *cfg.architecture.parity_target;
    }
    doc["reservoir"] = reservoir_to_json(cfg.architecture.reservoir);
    doc["estimator"] = estimator_to_json(cfg.estimator);
    if (!cfg.compare_estimators.empty()) {
        json list = json::array();
        for (EstimatorKind kind : cfg.compare_estimators) list.push_back(to_string(kind));
        doc["compare_estimators"] = list;
    }
    json schedule = json::array();
    for (const auto& [fraction, multiplier] : cfg.optimizer.schedule.breakpoints()) {
        schedule.push_back(json::array({fraction, multiplier}));
    }
    doc["optimizer"] = json{{"kind", cfg.optimizer.kind == OptimizerKind::Adam ? "adam" : "sgd"},
                            {"eta", cfg.optimizer.eta},
                            {"schedule", schedule}};
    doc["loss"] = json{{"kind", cfg.loss.kind == LossKind::Huber ? "huber" : "cross_entropy"},
                       {"delta", cfg.loss.huber_delta}};
    doc["epochs"] = cfg.epochs;
    doc["batch_size"] = cfg.batch_size;
    doc["seed"] = cfg.seed;
    doc["seeds"] = cfg.seeds;
    doc["compare_ad"] = cfg.compare_ad;
    doc["snapshot"] = cfg.snapshot;
    doc["out"] = cfg.out_dir;
    doc["threads"] = cfg.threads;
    doc["warmup_iterations"] = cfg.warmup_iterations;
    doc["divergence_factor"] = cfg.divergence_factor;
    return doc.dump(2);
}

Dataset load_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
    switch (cfg.kind) {
        case DatasetConfig::Kind::HousingCsv:
            return load_housing(cfg.path, cfg.target_scale, cfg.split_ratio, seed);
        case DatasetConfig::Kind::SyntheticRegression: {
            SyntheticSpec spec;
            spec.task = SyntheticTask::Regression;
            spec.n = cfg.n;
            spec.d_in = cfg.d_in;
            spec.noise = cfg.noise;
            spec.split_ratio = cfg.split_ratio;
            return make_synthetic(spec, seed);
        }
        case DatasetConfig::Kind::SyntheticClassification: {
            SyntheticSpec spec;
            spec.task = SyntheticTask::Classification;
            spec.n = cfg.n;
            spec.d_in = cfg.d_in;
            spec.classes = cfg.classes;
            spec.split_ratio = cfg.split_ratio;
            return make_synthetic(spec, seed);
        }
    }
    throw config_error("load_dataset: unknown dataset kind");
}

} // namespace bond
