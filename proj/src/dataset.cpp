#include "genboost/dataset.hpp"

#include "genboost/error.hpp"
#include "genboost/rng.hpp"
#include "genboost/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace genboost {

namespace {

void require_positive_column(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
            throw ValidationError(std::string(what) + " must be positive and finite (row " +
                                  std::to_string(i + 1) + ", value " + format_real(values[i]) + ")");
        }
    }
}

std::vector<double> ones_if_empty(std::vector<double> v, std::size_t n, const char* what) {
    if (v.empty()) return std::vector<double>(n, 1.0);
    if (v.size() != n) {
        throw ValidationError(std::string(what) + " length " + std::to_string(v.size()) +
                              " does not match row count " + std::to_string(n));
    }
    return v;
}

} // namespace

Dataset::Dataset(std::vector<std::string> feature_names, std::vector<double> features,
                 std::vector<double> response, std::vector<double> exposure,
                 std::vector<double> adjustment, std::string source)
    : feature_names_(std::move(feature_names)),
      features_(std::move(features)),
      response_(std::move(response)),
      source_(std::move(source)) {
    const std::size_t n = response_.size();
    if (n == 0) throw ValidationError("dataset must have at least one row");
    if (feature_names_.empty()) throw ValidationError("dataset must have at least one feature");
    if (features_.size() != n * feature_names_.size()) {
        throw ValidationError("feature matrix size does not match rows x features");
    }
    for (std::size_t c = 0; c < feature_names_.size(); ++c) {
        for (std::size_t r = 0; r < n; ++r) {
            if (!std::isfinite(features_[c * n + r])) {
                throw ValidationError("non-finite feature value at row " + std::to_string(r + 1) +
                                      ", column '" + feature_names_[c] + "'");
            }
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        if (!std::isfinite(response_[r])) {
            throw ValidationError("non-finite response at row " + std::to_string(r + 1));
        }
    }
    exposure_ = ones_if_empty(std::move(exposure), n, "exposure");
    adjustment_ = ones_if_empty(std::move(adjustment), n, "adjustment");
    require_positive_column(exposure_, "exposure");
    require_positive_column(adjustment_, "adjustment");
}

std::vector<double> Dataset::row(std::size_t i) const {
    std::vector<double> x(cols());
    for (std::size_t c = 0; c < cols(); ++c) x[c] = feature(i, c);
    return x;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    const std::size_t m = cols();
    std::vector<double> features(rows.size() * m);
    std::vector<double> response(rows.size());
    std::vector<double> exposure(rows.size());
    std::vector<double> adjustment(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t r = rows[k];
        if (r >= this->rows()) throw ValidationError("subset row index out of range");
        for (std::size_t c = 0; c < m; ++c) features[c * rows.size() + k] = feature(r, c);
        response[k] = response_[r];
        exposure[k] = exposure_[r];
        adjustment[k] = adjustment_[r];
    }
    return Dataset(feature_names_, std::move(features), std::move(response), std::move(exposure),
                   std::move(adjustment), source_);
}

std::uint64_t Dataset::content_hash() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::span<const double> values) {
        for (double v : values) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof v);
            for (unsigned char b : bytes) {
                h ^= b;
                h *= 0x100000001b3ULL;
            }
        }
    };
    mix(features_);
    mix(response_);
    mix(exposure_);
    mix(adjustment_);
    return h;
}

std::string Dataset::identity() const {
    std::ostringstream os;
    os << source_ << '#' << rows() << '#' << std::hex << content_hash();
    return os.str();
}

// --- CSV -------------------------------------------------------------------

std::size_t CsvTable::column_index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("'" + path + "': missing header row");
    for (const auto& cell : split(line, ',')) table.header.emplace_back(trim(cell));
    std::set<std::string> seen;
    for (const auto& name : table.header) {
        if (name.empty()) throw ValidationError("'" + path + "': empty column name in header");
        if (!seen.insert(name).second) {
            throw ValidationError("'" + path + "': duplicate column '" + name + "'");
        }
    }
    table.columns.resize(table.header.size());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split(line, ',');
        if (cells.size() != table.header.size()) {
            throw ValidationError("'" + path + "': row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(table.header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto value = parse_real(cells[c]);
            if (!value || !std::isfinite(*value)) {
                throw ValidationError("'" + path + "': row " + std::to_string(row) + ", column '" +
                                      table.header[c] + "': invalid number '" +
                                      std::string(trim(cells[c])) + "'");
            }
            table.columns[c].push_back(*value);
        }
    }
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return table;
}

Dataset load_csv(const std::string& path, const CsvColumns& columns) {
    CsvTable table = read_csv_table(path);
    if (table.columns.empty() || table.columns.front().empty()) {
        throw ValidationError("'" + path + "': no data rows");
    }
    std::vector<bool> bound(table.header.size(), false);
    auto take = [&](const std::string& name) {
        const std::size_t idx = table.column_index(name);
        if (bound[idx]) throw ValidationError("column '" + name + "' bound twice");
        bound[idx] = true;
        return table.columns[idx];
    };
    std::vector<double> response = take(columns.response);
    std::vector<double> exposure = columns.exposure ? take(*columns.exposure) : std::vector<double>{};
    std::vector<double> adjustment =
        columns.adjustment ? take(*columns.adjustment) : std::vector<double>{};

    std::vector<std::string> names;
    std::vector<double> features;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (bound[c]) continue;
        names.push_back(table.header[c]);
        features.insert(features.end(), table.columns[c].begin(), table.columns[c].end());
    }
    if (names.empty()) throw ValidationError("'" + path + "': no feature columns");
    return Dataset(std::move(names), std::move(features), std::move(response), std::move(exposure),
                   std::move(adjustment), path);
}

void write_csv(const Dataset& ds, const std::string& path, const CsvWriteOptions& options) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& name : ds.feature_names()) out << name << ',';
    out << options.response;
    if (options.exposure) out << ',' << *options.exposure;
    if (options.adjustment) out << ',' << *options.adjustment;
    out << '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < ds.cols(); ++c) out << format_real(ds.feature(r, c)) << ',';
        out << format_real(ds.response()[r]);
        if (options.exposure) out << ',' << format_real(ds.exposure()[r]);
        if (options.adjustment) out << ',' << format_real(ds.adjustment()[r]);
        out << '\n';
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

// --- Synthetic data --------------------------------------------------------

Distribution parse_distribution(const std::string& name) {
    if (name == "gamma") return Distribution::Gamma;
    if (name == "zip") return Distribution::Zip;
    if (name == "negbin") return Distribution::NegBin;
    throw ValidationError("unknown distribution '" + name + "' (expected gamma, zip or negbin)");
}

std::string to_string(Distribution dist) {
    switch (dist) {
    case Distribution::Gamma: return "gamma";
    case Distribution::Zip: return "zip";
    case Distribution::NegBin: return "negbin";
    }
    return "?";
}

std::vector<std::string> distribution_params(Distribution dist) {
    switch (dist) {
    case Distribution::Gamma:
    case Distribution::Zip: return {"mu", "alpha"};
    case Distribution::NegBin: return {"beta", "gamma"};
    }
    return {};
}

ParamMap ParamMap::constant(const std::map<std::string, double>& values) {
    ParamMap map;
    for (const auto& [name, v] : values) map.values[name] = {v, v, v, v};
    return map;
}

ParamMap ParamMap::parse(const std::string& text) {
    ParamMap map;
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("parameter spec '" + item + "' is not of the form name=value");
        }
        const std::string name(trim(std::string_view(item).substr(0, eq)));
        const auto parts = split(std::string_view(item).substr(eq + 1), ':');
        if (parts.size() != 1 && parts.size() != 4) {
            throw ValidationError("parameter '" + name + "' needs 1 or 4 values");
        }
        std::array<double, 4> cells{};
        for (std::size_t k = 0; k < 4; ++k) {
            const auto v = parse_real(parts[parts.size() == 1 ? 0 : k]);
            if (!v || !std::isfinite(*v)) {
                throw ValidationError("parameter '" + name + "' has a non-numeric value");
            }
            cells[k] = *v;
        }
        map.values[name] = cells;
    }
    return map;
}

double ParamMap::at(const std::string& name, double x1, double x2) const {
    const auto it = values.find(name);
    if (it == values.end()) throw ValidationError("parameter '" + name + "' not specified");
    return it->second[cell(x1, x2, x1_split, x2_split)];
}

namespace {

void validate_param_map(Distribution dist, const ParamMap& params) {
    const auto expected = distribution_params(dist);
    for (const auto& [name, cells] : params.values) {
        if (std::find(expected.begin(), expected.end(), name) == expected.end()) {
            throw ValidationError("parameter '" + name + "' is not used by " + to_string(dist));
        }
    }
    for (const auto& name : expected) {
        const auto it = params.values.find(name);
        if (it == params.values.end()) {
            throw ValidationError(to_string(dist) + " requires parameter '" + name + "'");
        }
        for (double v : it->second) {
            bool ok = v > 0.0 && std::isfinite(v);
            if (dist == Distribution::Zip && name == "alpha") ok = ok && v <= 1.0;
            if (!ok) {
                throw ValidationError("invalid value " + format_real(v) + " for " + to_string(dist) +
                                      " parameter '" + name + "'");
            }
        }
    }
}

} // namespace

Dataset generate_synthetic(Distribution dist, std::size_t n, std::uint64_t seed,
                           const ParamMap& params, const SyntheticOptions& options) {
    if (n == 0) throw ValidationError("synthetic dataset needs n >= 1");
    validate_param_map(dist, params);
    for (double e : options.exposure_levels) {
        if (!(e > 0.0) || !std::isfinite(e)) throw ValidationError("exposure levels must be positive");
    }
    const auto names = distribution_params(dist);
    const auto& first = params.values.at(names[0]);
    const auto& second = params.values.at(names[1]);

    std::vector<double> features(2 * n);
    std::vector<double> response(n);
    std::vector<double> exposure(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(seed, i);
        const double x1 = rng.uniform();
        const double x2 = rng.uniform();
        features[i] = x1;
        features[n + i] = x2;
        if (!options.exposure_levels.empty()) {
            const auto k = static_cast<std::size_t>(rng.uniform() * options.exposure_levels.size());
            exposure[i] = options.exposure_levels[std::min(k, options.exposure_levels.size() - 1)];
        }
        const std::size_t cell = ParamMap::cell(x1, x2, params.x1_split, params.x2_split);
        const double p1 = first[cell];
        const double p2 = second[cell];
        switch (dist) {
        case Distribution::Gamma:
            response[i] = rng.gamma(p2, p1 / p2);
            break;
        case Distribution::Zip:
            response[i] = rng.uniform() < p2 ? static_cast<double>(rng.poisson(p1 / p2)) : 0.0;
            break;
        case Distribution::NegBin:
            response[i] = static_cast<double>(rng.poisson(rng.gamma(exposure[i] * p2, p1)));
            break;
        }
    }
    return Dataset({"x1", "x2"}, std::move(features), std::move(response), std::move(exposure), {},
                   "synthetic:" + to_string(dist) + ":" + std::to_string(seed));
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ValidationError("holdout fraction must lie strictly between 0 and 1");
    }
    const std::size_t n = ds.rows();
    if (n < 2) throw ValidationError("holdout split needs at least 2 rows");
    auto holdout_size = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
    holdout_size = std::clamp<std::size_t>(holdout_size, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(seed, 0x686f6c646f7574ULL);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> holdout(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout_size));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(holdout_size), order.end());
    std::sort(holdout.begin(), holdout.end());
    std::sort(train.begin(), train.end());
    return {ds.subset(train), ds.subset(holdout)};
}

} // namespace genboost
