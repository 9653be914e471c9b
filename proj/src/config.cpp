#include "genboost/config.hpp"

#include "genboost/error.hpp"

#include <fstream>
#include <set>

namespace genboost {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ValidationError("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw ValidationError("config: unknown key '" + where + "." + key + "'");
    }
}

double get_real(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ValidationError("config: " + where + "." + key + " must be a number");
    return v.get<double>();
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ValidationError("config: " + where + "." + key + " must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_string()) throw ValidationError("config: " + where + "." + key + " must be a string");
    return v.get<std::string>();
}

ParamTrainConfig parse_param(const json& doc, const std::string& where, const std::string& expected_name) {
    reject_unknown_keys(doc, where,
                        {"name", "eta", "rounds", "interval", "offset", "clip_m", "a", "gamma_reg", "lambda_reg",
                         "max_depth", "min_leaf_samples", "domain", "init"});
    ParamTrainConfig p;
    if (doc.contains("name") && get_string(doc, "name", where) != expected_name) {
        throw ValidationError("config: " + where + ".name is '" + doc["name"].get<std::string>() +
                              "' but the loss expects '" + expected_name + "' here");
    }
    if (doc.contains("eta")) p.eta = get_real(doc, "eta", where);
    if (doc.contains("rounds")) p.rounds = get_count(doc, "rounds", where);
    if (doc.contains("interval")) p.interval = get_count(doc, "interval", where);
    if (doc.contains("offset")) p.offset = get_count(doc, "offset", where);
    if (doc.contains("clip_m")) p.clip_m = get_real(doc, "clip_m", where);
    if (doc.contains("a")) p.tree.a = get_real(doc, "a", where);
    if (doc.contains("gamma_reg")) p.tree.gamma_reg = get_real(doc, "gamma_reg", where);
    if (doc.contains("lambda_reg")) p.tree.lambda_reg = get_real(doc, "lambda_reg", where);
    if (doc.contains("max_depth")) p.tree.max_depth = static_cast<int>(get_count(doc, "max_depth", where));
    if (doc.contains("min_leaf_samples")) p.tree.min_leaf_samples = get_count(doc, "min_leaf_samples", where);
    if (doc.contains("domain")) {
        const json& d = doc["domain"];
        reject_unknown_keys(d, where + ".domain", {"lo", "hi"});
        p.domain = ParameterDomain{get_real(d, "lo", where + ".domain"), get_real(d, "hi", where + ".domain")};
    }
    if (doc.contains("init")) p.init = get_real(doc, "init", where);
    try {
        p.validate();
    } catch (const ValidationError& e) {
        throw ValidationError("config: " + where + ": " + e.what());
    }
    return p;
}

} // namespace

RunConfig parse_run_config(const json& doc) {
    reject_unknown_keys(doc, "config",
                        {"description", "loss", "columns", "total_rounds", "seed", "holdout_fraction",
                         "record_trace", "trace", "execution", "parameters"});
    RunConfig cfg;
    try {
        if (!doc.contains("loss")) throw ValidationError("config: missing 'loss'");
        const json& loss = doc["loss"];
        reject_unknown_keys(loss, "loss", {"name", "nuisance"});
        cfg.loss_name = get_string(loss, "name", "loss");
        if (loss.contains("nuisance")) {
            // Key names are checked by make_loss against the chosen loss.
            if (!loss["nuisance"].is_object()) throw ValidationError("config: loss.nuisance must be an object");
            for (const auto& [k, v] : loss["nuisance"].items()) {
                if (!v.is_number()) throw ValidationError("config: loss.nuisance." + k + " must be a number");
                cfg.nuisance[k] = v.get<double>();
            }
        }
        cfg.loss = make_loss(cfg.loss_name, cfg.nuisance);

        if (doc.contains("columns")) {
            const json& c = doc["columns"];
            reject_unknown_keys(c, "columns", {"response", "exposure", "adjustment"});
            if (c.contains("response")) cfg.columns.response = get_string(c, "response", "columns");
            if (c.contains("exposure") && !c["exposure"].is_null()) {
                cfg.columns.exposure = get_string(c, "exposure", "columns");
            }
            if (c.contains("adjustment") && !c["adjustment"].is_null()) {
                cfg.columns.adjustment = get_string(c, "adjustment", "columns");
            }
        }
        if (doc.contains("total_rounds")) cfg.train.total_rounds = get_count(doc, "total_rounds", "config");
        if (doc.contains("seed")) cfg.seed = get_count(doc, "seed", "config");
        if (doc.contains("holdout_fraction")) {
            const double f = get_real(doc, "holdout_fraction", "config");
            if (!(f > 0.0 && f < 1.0)) throw ValidationError("config: holdout_fraction must lie in (0, 1)");
            cfg.holdout_fraction = f;
        }
        if (doc.contains("record_trace")) {
            if (!doc["record_trace"].is_boolean()) throw ValidationError("config: record_trace must be a boolean");
            cfg.train.record_trace = doc["record_trace"].get<bool>();
        }
        if (doc.contains("trace")) cfg.trace_path = get_string(doc, "trace", "config");
        if (doc.contains("execution")) {
            const std::string e = get_string(doc, "execution", "config");
            if (e == "serial") {
                cfg.train.execution = Execution::Serial;
            } else if (e == "parallel") {
                cfg.train.execution = Execution::Parallel;
            } else {
                throw ValidationError("config: execution must be \"serial\" or \"parallel\"");
            }
        }
        if (doc.contains("description") && !doc["description"].is_string()) {
            throw ValidationError("config: description must be a string");
        }

        const auto names = cfg.loss->param_names();
        if (!doc.contains("parameters") || !doc["parameters"].is_array()) {
            throw ValidationError("config: 'parameters' must be an array with one block per loss parameter");
        }
        const json& params = doc["parameters"];
        if (params.size() != names.size()) {
            throw ValidationError("config: loss '" + cfg.loss_name + "' has " + std::to_string(names.size()) +
                                  " parameters but " + std::to_string(params.size()) + " blocks were given");
        }
        for (std::size_t j = 0; j < params.size(); ++j) {
            cfg.train.params.push_back(parse_param(params[j], "parameters[" + std::to_string(j) + "]", names[j]));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

} // namespace genboost
