#include "adacos/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "adacos/error.hpp"

namespace adacos {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

double parse_number(const std::string& cell, int line_no) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != cell.size() || !std::isfinite(v))
        throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + cell + "' as a number");
    return v;
}

} // namespace

int Dataset::positives() const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), 1));
}

bool Dataset::has_missing() const {
    return samples.hasNaN();
}

double CostModel::acquisition_cost(std::span<const int> covariates) const {
    double total = 0.0;
    for (int i : covariates) total += covariate_costs.at(static_cast<std::size_t>(i));
    return total;
}

double CostModel::total_acquisition_cost() const {
    return std::accumulate(covariate_costs.begin(), covariate_costs.end(), 0.0);
}

double CostModel::misclassification(int truth, int predicted) const {
    if (truth == predicted) return correct_cost;
    if (truth == 0) return fp_cost;
    if (!fn_cost) throw InputError("false-negative cost is not set");
    return *fn_cost;
}

double CostModel::shifted_fp() const {
    double c = fp_cost - correct_cost;
    if (c < 0.0) throw InputError("fp_cost must not be smaller than correct_cost");
    return c;
}

double CostModel::shifted_fn() const {
    if (!fn_cost) throw InputError("false-negative cost is not set");
    double c = *fn_cost - correct_cost;
    if (c < 0.0) throw InputError("fn_cost must not be smaller than correct_cost");
    return c;
}

void CostModel::validate(int p) const {
    if (size() != p)
        throw InputError("cost model has " + std::to_string(size()) + " covariate costs, dataset has " +
                         std::to_string(p));
    for (double c : covariate_costs)
        if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("covariate costs must be finite and nonnegative");
    if (!(fp_cost >= 0.0)) throw InputError("fp_cost must be nonnegative");
    if (fn_cost && !(*fn_cost >= 0.0)) throw InputError("fn_cost must be nonnegative");
    shifted_fp();
    if (fn_cost) shifted_fn();
}

std::vector<int> FoldAssignment::test_indices(int fold) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(fold_of_sample.size()); ++i)
        if (fold_of_sample[static_cast<std::size_t>(i)] == fold) out.push_back(i);
    return out;
}

std::vector<int> FoldAssignment::train_indices(int fold) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(fold_of_sample.size()); ++i)
        if (fold_of_sample[static_cast<std::size_t>(i)] != fold) out.push_back(i);
    return out;
}

std::vector<int> FoldAssignment::sizes() const {
    std::vector<int> out(static_cast<std::size_t>(k), 0);
    for (int f : fold_of_sample) ++out[static_cast<std::size_t>(f)];
    return out;
}

Dataset parse_csv(std::istream& in, std::string_view label_column) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw InputError("CSV is empty");

    auto header = split_line(line);
    auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) throw InputError("unknown label column '" + std::string(label_column) + "'");
    const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

    Dataset d;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_pos) d.covariate_names.push_back(header[c]);
    if (d.covariate_names.empty()) throw InputError("CSV has no covariate columns");
    std::set<std::string> unique(d.covariate_names.begin(), d.covariate_names.end());
    if (unique.size() != d.covariate_names.size()) throw InputError("covariate names must be unique");

    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " cells, got " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_pos) {
                if (is_missing(cells[c])) throw InputError("line " + std::to_string(line_no) + ": missing label");
                double y = parse_number(cells[c], line_no);
                if (y != 0.0 && y != 1.0)
                    throw InputError("line " + std::to_string(line_no) + ": non-binary label '" + cells[c] + "'");
                d.labels.push_back(static_cast<int>(y));
            } else {
                values.push_back(is_missing(cells[c]) ? std::numeric_limits<double>::quiet_NaN()
                                                      : parse_number(cells[c], line_no));
            }
        }
    }
    if (d.labels.empty()) throw InputError("CSV has no data rows");

    const auto n = static_cast<Eigen::Index>(d.labels.size());
    const auto p = static_cast<Eigen::Index>(d.covariate_names.size());
    d.samples = Eigen::Map<const SampleMatrix>(values.data(), n, p);
    return d;
}

Dataset load_dataset(const std::filesystem::path& path, std::string_view label_column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return parse_csv(in, label_column);
}

std::vector<double> observed_column_means(const Dataset& d) {
    std::vector<double> means(static_cast<std::size_t>(d.cols()));
    for (int j = 0; j < d.cols(); ++j) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < d.rows(); ++i) {
            double v = d.samples(i, j);
            if (!std::isnan(v)) {
                sum += v;
                ++count;
            }
        }
        if (count == 0) throw InputError("column '" + d.covariate_names[static_cast<std::size_t>(j)] + "' is fully missing");
        means[static_cast<std::size_t>(j)] = sum / count;
    }
    return means;
}

Dataset impute_with(const Dataset& d, std::span<const double> column_means) {
    if (static_cast<int>(column_means.size()) != d.cols()) throw InputError("imputation means do not match columns");
    Dataset out = d;
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j)
            if (std::isnan(out.samples(i, j))) out.samples(i, j) = column_means[static_cast<std::size_t>(j)];
    return out;
}

Dataset impute_missing(const Dataset& d) {
    if (!d.has_missing()) return d;
    return impute_with(d, observed_column_means(d));
}

Dataset select_rows(const Dataset& d, std::span<const int> rows) {
    Dataset out;
    out.covariate_names = d.covariate_names;
    out.samples.resize(static_cast<Eigen::Index>(rows.size()), d.samples.cols());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.samples.row(static_cast<Eigen::Index>(r)) = d.samples.row(rows[r]);
        out.labels.push_back(d.labels.at(static_cast<std::size_t>(rows[r])));
    }
    return out;
}

FoldAssignment make_folds(int n, int k, std::uint64_t seed) {
    if (k < 2) throw InputError("fold count must be at least 2");
    if (k > n) throw InputError("fold count " + std::to_string(k) + " exceeds sample count " + std::to_string(n));

    // Fisher-Yates with raw engine output keeps the permutation identical
    // across standard library implementations.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (int i = n - 1; i > 0; --i) {
        auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    FoldAssignment folds;
    folds.k = k;
    folds.seed = seed;
    folds.fold_of_sample.resize(static_cast<std::size_t>(n));
    for (int pos = 0; pos < n; ++pos) folds.fold_of_sample[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos % k;
    return folds;
}

CostModel parse_costs(std::string_view json_text, const std::vector<std::string>& names) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("cost file: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("cost file must be a JSON object");

    auto number = [&](const std::string& key) {
        const auto& v = doc.at(key);
        if (!v.is_number()) throw InputError("cost file: '" + key + "' must be a number");
        return v.get<double>();
    };

    CostModel costs;
    for (const auto& name : names) {
        if (!doc.contains(name)) throw InputError("cost file: no cost for covariate '" + name + "'");
        costs.covariate_costs.push_back(number(name));
    }
    if (!doc.contains("fp_cost")) throw InputError("cost file: missing 'fp_cost'");
    costs.fp_cost = number("fp_cost");
    if (doc.contains("fn_cost") && !doc.at("fn_cost").is_null()) costs.fn_cost = number("fn_cost");
    if (doc.contains("correct_cost")) costs.correct_cost = number("correct_cost");

    for (const auto& [key, value] : doc.items()) {
        if (key == "fp_cost" || key == "fn_cost" || key == "correct_cost") continue;
        if (std::find(names.begin(), names.end(), key) == names.end())
            throw InputError("cost file: unknown covariate '" + key + "'");
    }
    costs.validate(static_cast<int>(names.size()));
    return costs;
}

CostModel load_costs(const std::filesystem::path& path, const std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_costs(buffer.str(), names);
}

} // namespace adacos
