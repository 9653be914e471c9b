#include "genboost/cli.hpp"

#include "genboost/admissibility.hpp"
#include "genboost/booster.hpp"
#include "genboost/config.hpp"
#include "genboost/dataset.hpp"
#include "genboost/error.hpp"
#include "genboost/eval.hpp"
#include "genboost/model_io.hpp"
#include "genboost/text.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <ostream>

namespace genboost::cli {

namespace {

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    for (const auto& item : split(text, ',')) {
        const auto v = parse_real(item);
        if (!v || !std::isfinite(*v)) throw ValidationError(what + ": '" + item + "' is not a number");
        values.push_back(*v);
    }
    return values;
}

std::map<std::string, double> parse_assignments(const std::string& text) {
    std::map<std::string, double> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        const auto v = eq == std::string::npos ? std::nullopt : parse_real(std::string_view(item).substr(eq + 1));
        if (!v) throw ValidationError("expected name=value, got '" + item + "'");
        out[std::string(trim(std::string_view(item).substr(0, eq)))] = *v;
    }
    return out;
}

// Builds a dataset whose features are the model's, selected by name.
Dataset dataset_for_model(const BoostedModel& model, const std::string& path, const CsvColumns* columns) {
    const CsvTable table = read_csv_table(path);
    const auto& names = model.feature_names();
    for (const auto& name : names) {
        if (!table.has_column(name)) {
            std::string expected;
            for (const auto& n : names) expected += (expected.empty() ? "" : ",") + n;
            throw ValidationError("'" + path + "' is missing feature column '" + name + "'; model expects " +
                                  std::to_string(names.size()) + " features: " + expected);
        }
    }
    if (table.columns.empty() || table.columns.front().empty()) throw ValidationError("'" + path + "': no data rows");
    const std::size_t n = table.columns.front().size();
    std::vector<double> features;
    for (const auto& name : names) {
        const auto& col = table.columns[table.column_index(name)];
        features.insert(features.end(), col.begin(), col.end());
    }
    std::vector<double> response(n, 0.0);
    std::vector<double> exposure;
    std::vector<double> adjustment;
    if (columns) {
        response = table.columns[table.column_index(columns->response)];
        if (columns->exposure) exposure = table.columns[table.column_index(*columns->exposure)];
        if (columns->adjustment) adjustment = table.columns[table.column_index(*columns->adjustment)];
    }
    return Dataset(names, std::move(features), std::move(response), std::move(exposure), std::move(adjustment), path);
}

void write_trace(const std::string& path, const BoostedModel& model, const std::vector<TraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "round";
    for (const auto& p : model.params()) out << ",active_" << p.name;
    out << ",train_nll\n";
    for (const auto& row : trace) {
        out << row.round;
        for (bool a : row.active) out << ',' << (a ? 1 : 0);
        out << ',' << format_real(row.train_nll) << '\n';
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

int cmd_train(const std::string& data, const std::string& config_path, const std::string& out_path,
              const std::string& trace_flag, std::ostream& out) {
    RunConfig cfg = load_run_config(config_path);
    if (!trace_flag.empty()) cfg.trace_path = trace_flag;
    if (cfg.trace_path) cfg.train.record_trace = true;

    const Dataset all = load_csv(data, cfg.columns);
    std::optional<Dataset> holdout;
    Dataset train_set = all;
    if (cfg.holdout_fraction) {
        auto [tr, ho] = split_holdout(all, *cfg.holdout_fraction, cfg.seed);
        train_set = std::move(tr);
        holdout = std::move(ho);
    }
    const TrainResult result = train(train_set, cfg.loss, cfg.train);
    save_model(result.model, out_path);
    if (cfg.trace_path) write_trace(*cfg.trace_path, result.model, result.trace);

    const double train_nll = result.trace.empty() ? nll_score(result.model, *cfg.loss, train_set).total_nll
                                                  : result.trace.back().train_nll;
    out << "rows: " << train_set.rows() << '\n';
    out << "train_nll: " << format_real(train_nll) << '\n';
    if (holdout) {
        const auto report = nll_score(result.model, *cfg.loss, *holdout, out_path);
        out << "holdout_rows: " << report.n << '\n';
        out << "holdout_nll: " << format_real(report.total_nll) << '\n';
    }
    return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out_path) {
    const BoostedModel model = load_model(model_path);
    const Dataset ds = dataset_for_model(model, data, nullptr);
    const auto theta = model.predict(ds);
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open '" + out_path + "' for writing");
    for (std::size_t j = 0; j < model.n_params(); ++j) out << (j ? "," : "") << model.params()[j].name;
    out << '\n';
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < theta.size(); ++j) out << (j ? "," : "") << format_real(theta[j][i]);
        out << '\n';
    }
    if (!out) throw IoError("write failure on '" + out_path + "'");
    return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& data, const CsvColumns& columns,
             const std::string& json_path, std::ostream& out) {
    const BoostedModel model = load_model(model_path);
    const Dataset ds = dataset_for_model(model, data, &columns);
    const EvalReport report = nll_score(model, ds, model_path);
    out << format_report(report);
    if (!json_path.empty()) {
        std::ofstream js(json_path);
        if (!js) throw IoError("cannot open '" + json_path + "' for writing");
        js << report_json(report, model);
        if (!js) throw IoError("write failure on '" + json_path + "'");
    }
    return kOk;
}

int cmd_check_loss(const std::string& loss_name, const std::string& nuisance, const std::string& y_samples,
                   std::size_t grid, std::ostream& out) {
    const auto loss = make_loss(loss_name, parse_assignments(nuisance));
    const auto ys = parse_real_list(y_samples, "--y-samples");
    const auto report = check_admissibility(*loss, ys, grid);
    for (const auto& slice : report.slices) {
        out << "y=" << format_real(slice.y) << " param=" << slice.param_name << ": " << to_string(slice.shape);
        if (!slice.minima.empty()) {
            out << (slice.shape == SliceShape::Fail ? " local minima at " : " minimum at ");
            for (std::size_t k = 0; k < slice.minima.size(); ++k) out << (k ? ", " : "") << format_real(slice.minima[k]);
        }
        if (!slice.grad_consistent) out << " (derivative changes sign " << slice.grad_sign_changes << " times)";
        out << '\n';
    }
    out << (report.pass ? "PASS" : "FAIL") << '\n';
    return report.pass ? kOk : kCheckFailed;
}

int cmd_gen(const std::string& dist_name, std::size_t n, std::uint64_t seed, const std::string& params,
            const std::string& exposure_levels, const std::string& out_path) {
    const Distribution dist = parse_distribution(dist_name);
    SyntheticOptions options;
    if (!exposure_levels.empty()) options.exposure_levels = parse_real_list(exposure_levels, "--exposure-levels");
    const Dataset ds = generate_synthetic(dist, n, seed, ParamMap::parse(params), options);
    CsvWriteOptions write;
    if (!options.exposure_levels.empty()) write.exposure = "exposure";
    write_csv(ds, out_path, write);
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Generalized gradient tree boosting for distributional regression", "genboost"};
    app.require_subcommand(1);

    std::string data, config, model_out, trace;
    auto* train_cmd = app.add_subcommand("train", "Fit a model from a CSV file and a JSON config");
    train_cmd->add_option("--data", data, "Training CSV")->required();
    train_cmd->add_option("--config", config, "Run config (JSON)")->required();
    train_cmd->add_option("--out", model_out, "Model file to write")->required();
    train_cmd->add_option("--trace", trace, "Per-round loss trace CSV");

    std::string model_path, predict_out;
    auto* predict_cmd = app.add_subcommand("predict", "Write per-row parameter predictions");
    predict_cmd->add_option("--model", model_path, "Model file")->required();
    predict_cmd->add_option("--data", data, "Input CSV with the model's feature columns")->required();
    predict_cmd->add_option("--out", predict_out, "Output CSV")->required();

    CsvColumns columns;
    std::string exposure_col, adjustment_col, json_out;
    auto* eval_cmd = app.add_subcommand("eval", "Score a model by total negative log-likelihood");
    eval_cmd->add_option("--model", model_path, "Model file")->required();
    eval_cmd->add_option("--data", data, "Evaluation CSV")->required();
    eval_cmd->add_option("--response", columns.response, "Response column")->capture_default_str();
    eval_cmd->add_option("--exposure", exposure_col, "Exposure column");
    eval_cmd->add_option("--adjustment", adjustment_col, "Adjustment column");
    eval_cmd->add_option("--json", json_out, "Also write the report as JSON");

    std::string loss_name, nuisance, y_samples;
    std::size_t grid = 400;
    auto* check_cmd = app.add_subcommand("check-loss", "Scan loss slices for the single-minimum condition");
    check_cmd->add_option("--loss", loss_name, "Loss name")->required();
    check_cmd->add_option("--nuisance", nuisance, "Nuisance constants, e.g. alpha=5");
    check_cmd->add_option("--y-samples", y_samples, "Comma-separated responses")->required();
    check_cmd->add_option("--grid", grid, "Grid points per slice (>= 100)")->capture_default_str();

    std::string dist, params, exposure_levels, gen_out;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
    gen_cmd->add_option("--dist", dist, "gamma | zip | negbin")->required();
    gen_cmd->add_option("--n", n, "Rows")->required();
    gen_cmd->add_option("--seed", seed, "Seed")->required();
    gen_cmd->add_option("--params", params, "e.g. mu=4,alpha=5 or beta=1:1:2:2,gamma=1:3:1:3")->required();
    gen_cmd->add_option("--exposure-levels", exposure_levels, "Comma-separated exposure values drawn per row");
    gen_cmd->add_option("--out", gen_out, "Output CSV")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*train_cmd) return cmd_train(data, config, model_out, trace, out);
        if (*predict_cmd) return cmd_predict(model_path, data, predict_out);
        if (*eval_cmd) {
            if (!exposure_col.empty()) columns.exposure = exposure_col;
            if (!adjustment_col.empty()) columns.adjustment = adjustment_col;
            return cmd_eval(model_path, data, columns, json_out, out);
        }
        if (*check_cmd) return cmd_check_loss(loss_name, nuisance, y_samples, grid, out);
        if (*gen_cmd) return cmd_gen(dist, n, seed, params, exposure_levels, gen_out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kValidation;
}

} // namespace genboost::cli
