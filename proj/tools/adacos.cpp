// Command-line front end: training, evaluation, thresholds and the discrete oracle.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "adacos/dataset.hpp"
#include "adacos/error.hpp"
#include "adacos/experiment.hpp"
#include "adacos/oracle.hpp"
#include "adacos/recall.hpp"
#include "adacos/serialize.hpp"

using namespace adacos;

namespace {

struct DataArgs {
    std::string data;
    std::string label;
    std::string costs;
};

struct CostArgs {
    std::vector<double> fp;
    std::optional<double> fn;
    std::optional<double> fn_ratio;
    std::optional<double> target_recall;
    std::optional<double> correct;
};

struct ModelArgs {
    std::string mode = "adacos";
    std::string selection = "lasso";
    int xi = kDefaultXi;
    int splines = kDefaultSplineCount;
    int folds = 5;
    int inner_folds = 10;
    std::uint64_t seed = 1;
};

void add_data(CLI::App* cmd, DataArgs& a, bool need_costs = true) {
    cmd->add_option("--data", a.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    cmd->add_option("--label", a.label, "name of the 0/1 label column")->required();
    auto* c = cmd->add_option("--costs", a.costs, "JSON cost file")->check(CLI::ExistingFile);
    if (need_costs) c->required();
}

void add_costs(CLI::App* cmd, CostArgs& a, bool grid) {
    auto* fp = cmd->add_option("--fp-cost", a.fp, grid ? "false-positive cost(s); several values run a grid"
                                                        : "false-positive cost");
    if (grid) fp->delimiter(','); else fp->expected(1);
    auto* fn = cmd->add_option("--fn-cost", a.fn, "false-negative cost");
    auto* ratio = cmd->add_option("--fn-ratio", a.fn_ratio, "false-negative cost as a multiple of the false-positive cost");
    auto* recall = cmd->add_option("--target-recall", a.target_recall, "target recall in (0,1] instead of a false-negative cost");
    fn->excludes(recall);
    fn->excludes(ratio);
    ratio->excludes(recall);
    cmd->add_option("--correct-cost", a.correct, "cost of a correct classification");
}

void add_model(CLI::App* cmd, ModelArgs& a, bool with_folds) {
    cmd->add_option("--mode", a.mode, "adacos, cos or full")->check(CLI::IsMember({"adacos", "cos", "full"}));
    cmd->add_option("--selection", a.selection, "lasso or forward")->check(CLI::IsMember({"lasso", "forward"}));
    cmd->add_option("--xi", a.xi, "segments of the piecewise sigmoid")->check(CLI::Range(2, 100000));
    cmd->add_option("--splines", a.splines, "spline basis size per covariate")->check(CLI::Range(1, 1000));
    if (with_folds) cmd->add_option("--folds", a.folds, "outer cross-validation folds")->check(CLI::Range(2, 1000));
    cmd->add_option("--inner-folds", a.inner_folds, "inner cross-validation folds")->check(CLI::Range(2, 1000));
    cmd->add_option("--seed", a.seed, "random seed for fold assignment");
}

Dataset read_data(const DataArgs& a) {
    return load_dataset(a.data, a.label);
}

// Cost models for every requested false-positive cost.
std::vector<CostModel> resolve_costs(const CostModel& base, const CostArgs& a) {
    std::vector<double> fps = a.fp.empty() ? std::vector<double>{base.fp_cost} : a.fp;
    std::vector<CostModel> out;
    for (double fp : fps) {
        CostModel c = base;
        c.fp_cost = fp;
        if (a.correct) c.correct_cost = *a.correct;
        if (a.target_recall) c.fn_cost.reset();
        else if (a.fn) c.fn_cost = *a.fn;
        else if (a.fn_ratio) c.fn_cost = *a.fn_ratio * fp;
        out.push_back(c);
    }
    return out;
}

ExperimentConfig make_config(const CostModel& costs, const CostArgs& c, const ModelArgs& m) {
    ExperimentConfig cfg;
    cfg.mode = parse_mode(m.mode);
    cfg.selection = parse_selection(m.selection);
    cfg.costs = costs;
    cfg.target_recall = c.target_recall;
    cfg.xi = m.xi;
    cfg.splines = m.splines;
    cfg.folds = m.folds;
    cfg.inner_folds = m.inner_folds;
    cfg.seed = m.seed;
    return cfg;
}

std::string set_text(const CovariateSet& s, const std::vector<std::string>& names) {
    std::string out = "{";
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (k) out += ", ";
        out += names.empty() ? std::to_string(s[k]) : names[static_cast<std::size_t>(s[k])];
    }
    return out + "}";
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

int run_fit(const DataArgs& d, const CostArgs& c, const ModelArgs& m, const std::string& out_path) {
    const Dataset data = read_data(d);
    const CostModel base = load_costs(d.costs, data.covariate_names);
    const auto costs = resolve_costs(base, c);
    if (costs.size() != 1) throw InputError("fit takes a single false-positive cost");
    const ExperimentConfig cfg = make_config(costs.front(), c, m);
    const TrainedBundle bundle = train_bundle(data, cfg, m.seed);
    save_bundle(bundle, out_path);
    std::cout << "trained on " << data.rows() << " samples; sequence:";
    for (const auto& s : bundle.sequence().sets) std::cout << ' ' << set_text(s, data.covariate_names);
    std::cout << "\nfalse-negative cost " << *bundle.costs.fn_cost;
    if (bundle.recall) std::cout << " (threshold " << bundle.recall->threshold << ")";
    std::cout << "\nwrote " << out_path << "\n";
    if (!bundle.path_message.empty()) std::cerr << "warning: " << bundle.path_message << "\n";
    return 0;
}

int run_path(const DataArgs& d, int grid) {
    const Dataset data = impute_missing(read_data(d));
    const CostModel costs = load_costs(d.costs, data.covariate_names);
    const auto features = SplineFeatures::build(data);
    const auto design = DesignMatrix::build(features, data.samples);
    PathOptions opt;
    opt.grid_size = grid;
    const LassoPath path = fit_group_lasso_path(design, data.labels, costs, opt);
    const CovariateSequence seq = nested_sets_from_path(path);
    std::cout << "lambda_max " << path.lambdas.front() << ", " << path.lambdas.size() << " grid points\n\n";
    std::cout << std::left << std::setw(4) << "k" << std::setw(16) << "added" << std::setw(16) << "lambda"
              << std::setw(12) << "cum_cost" << "set\n";
    for (int k = 0; k < seq.size(); ++k) {
        const auto& s = seq.sets[static_cast<std::size_t>(k)];
        std::cout << std::left << std::setw(4) << k + 1;
        if (seq.order.empty()) std::cout << std::setw(16) << "-" << std::setw(16) << "-";
        else std::cout << std::setw(16) << data.covariate_names[static_cast<std::size_t>(seq.order[static_cast<std::size_t>(k)])]
                       << std::setw(16) << seq.activation_lambdas[static_cast<std::size_t>(k)];
        std::cout << std::setw(12) << costs.acquisition_cost(s) << set_text(s, data.covariate_names) << "\n";
    }
    if (path.truncated) std::cerr << "warning: " << path.message << "\n";
    return 0;
}

int run_forward(const DataArgs& d, const CostArgs& c, int inner_folds, std::uint64_t seed, double smooth) {
    const Dataset data = impute_missing(read_data(d));
    const auto costs = resolve_costs(load_costs(d.costs, data.covariate_names), c);
    if (costs.size() != 1) throw InputError("forward-select takes a single false-positive cost");
    if (!costs.front().fn_cost) throw InputError("forward selection needs a false-negative cost");
    costs.front().validate(data.cols());
    const auto features = SplineFeatures::build(data);
    const auto design = DesignMatrix::build(features, data.samples);
    const auto folds = make_folds(data.rows(), inner_folds, seed);
    const TrainingView view{design, features, data.labels, folds, {smooth, kRidgeFloor}};
    const CovariateSequence seq = forward_select(view, costs.front());
    std::cout << std::left << std::setw(4) << "k" << std::setw(14) << "cv_cost" << std::setw(12) << "cum_cost" << "set\n";
    for (int k = 0; k < seq.size(); ++k) {
        const auto& s = seq.sets[static_cast<std::size_t>(k)];
        std::cout << std::left << std::setw(4) << k + 1 << std::setw(14) << cv_expected_cost(view, s, costs.front())
                  << std::setw(12) << costs.front().acquisition_cost(s) << set_text(s, data.covariate_names) << "\n";
    }
    return 0;
}

int run_evaluate(const DataArgs& d, const CostArgs& c, const ModelArgs& m, const std::string& json_path,
                 const std::string& csv_path) {
    const Dataset data = read_data(d);
    const auto costs = resolve_costs(load_costs(d.costs, data.covariate_names), c);
    std::vector<ExperimentReport> reports;
    nlohmann::json all = nlohmann::json::array();
    const std::string name = std::filesystem::path(d.data).stem().string();
    for (const auto& cm : costs) {
        const ExperimentConfig cfg = make_config(cm, c, m);
        reports.push_back(run_experiment(data, cfg, name));
        std::cout << report_text(reports.back()) << "\n";
        all.push_back(to_json(reports.back()));
    }
    if (!json_path.empty()) write_file(json_path, (reports.size() == 1 ? all.front() : all).dump(2) + "\n");
    if (!csv_path.empty()) write_file(csv_path, report_csv(reports));
    return 0;
}

int run_classify(const std::string& model_path, const DataArgs& d, const std::string& out_path) {
    const TrainedBundle bundle = load_bundle(model_path);
    const Dataset data = read_data(d);
    const auto traces = classify_all(bundle, data);
    std::ostringstream csv;
    csv << "sample,stage,acquired,label,truth,covariate_cost,misclassification_cost,total_cost\n";
    for (const auto& t : traces) {
        std::string acquired;
        for (const auto& s : t.acquired)
            for (int c : s) acquired += (acquired.empty() ? "" : ";") + data.covariate_names[static_cast<std::size_t>(c)];
        csv << t.sample << ',' << t.stage + 1 << ',' << acquired << ',' << t.label << ',';
        if (t.truth) csv << *t.truth;
        csv << ',' << t.covariate_cost << ',';
        if (t.truth) csv << t.misclassification_cost << ',' << t.total_cost();
        else csv << ',';
        csv << "\n";
    }
    if (out_path.empty()) std::cout << csv.str();
    else write_file(out_path, csv.str());
    if (traces.front().truth) {
        const auto metrics = compute_metrics(traces, data.labels, bundle.costs);
        std::cerr << "avg total cost " << metrics.avg_total_cost << ", avg covariates " << metrics.avg_num_covariates
                  << ", weighted accuracy " << metrics.weighted_accuracy << "\n";
    }
    return 0;
}

// Scores file: CSV with a header, one column per covariate set, one row per positive sample.
int run_threshold(const std::string& scores_path, double r, std::optional<double> fp) {
    std::ifstream in(scores_path);
    if (!in) throw InputError("cannot open " + scores_path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("scores file is empty");
    const auto width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
    std::vector<std::vector<double>> sets(width);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k >= width) throw InputError("scores row has too many columns");
            try {
                sets[k++].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InputError("bad score '" + cell + "'");
            }
        }
        if (k != width) throw InputError("scores row has too few columns");
    }
    const double t = solve_threshold_adaptive(sets, r);
    std::cout << "threshold " << std::setprecision(10) << t << "\n";
    std::cout << "joint recall " << empirical_recall(joint_minimum(sets), t) << "\n";
    if (fp) {
        std::string warning;
        std::cout << "implied fn_cost " << implicit_fn_cost(t, *fp, &warning) << "\n";
        if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    }
    return 0;
}

int run_oracle(const std::string& path, bool show_policy) {
    const DiscreteInstance inst = load_instance(path);
    const OraclePolicy pol = solve_exact(inst);
    std::cout << "expected loss " << std::setprecision(12) << pol.expected_loss << "\n";
    if (!show_policy) return 0;
    const std::size_t outcomes = inst.outcomes();
    for (std::uint32_t mask = 0; mask < (1u << inst.p()); ++mask) {
        std::vector<int> x(static_cast<std::size_t>(inst.p()), 0);
        for (std::size_t idx = 0; idx < outcomes; ++idx) {
            std::size_t rest = idx;
            bool canonical = true;
            for (std::size_t i = x.size(); i-- > 0;) {
                x[i] = static_cast<int>(rest % static_cast<std::size_t>(inst.alphabets[i]));
                rest /= static_cast<std::size_t>(inst.alphabets[i]);
                if (!((mask >> i) & 1u) && x[i] != 0) canonical = false;
            }
            if (!canonical) continue;
            std::cout << "state {";
            bool first = true;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!((mask >> i) & 1u)) continue;
                std::cout << (first ? "" : ", ") << "x" << i + 1 << "=" << x[i];
                first = false;
            }
            const Decision dec = pol.decision[mask * outcomes + idx];
            std::cout << "} -> ";
            if (dec.kind == Decision::Kind::classify) std::cout << "classify " << dec.label;
            else std::cout << "acquire x" << dec.covariates.front() + 1;
            std::cout << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cost-sensitive classification with adaptive covariate acquisition"};
    app.require_subcommand(1);

    DataArgs data;
    CostArgs costs;
    ModelArgs model;
    std::string out_path, json_path, csv_path, model_path, scores_path, instance_path;
    int grid = 50;
    double smooth = 1.0;
    double target = 0.95;
    std::optional<double> fp_single;
    bool show_policy = false;

    auto* fit = app.add_subcommand("fit", "train a model bundle on a whole dataset");
    add_data(fit, data);
    add_costs(fit, costs, false);
    add_model(fit, model, false);
    fit->add_option("--out", out_path, "bundle file to write")->required();

    auto* path = app.add_subcommand("path", "print the nested sets from the cost-scaled group lasso path");
    add_data(path, data);
    path->add_option("--grid-size", grid, "number of lambda values")->check(CLI::Range(1, 10000));

    auto* fwd = app.add_subcommand("forward-select", "print the forward-selection sequence");
    add_data(fwd, data);
    add_costs(fwd, costs, false);
    fwd->add_option("--folds", model.inner_folds, "cross-validation folds")->check(CLI::Range(2, 1000));
    fwd->add_option("--seed", model.seed, "random seed for fold assignment");
    fwd->add_option("--smooth", smooth, "smoothness penalty")->check(CLI::NonNegativeNumber);

    auto* eval = app.add_subcommand("evaluate", "cross-validated evaluation");
    add_data(eval, data);
    add_costs(eval, costs, true);
    add_model(eval, model, true);
    eval->add_option("--json", json_path, "write the report as JSON");
    eval->add_option("--csv", csv_path, "write aggregate metrics as CSV");

    auto* cls = app.add_subcommand("classify", "classify samples with a trained bundle and print traces");
    cls->add_option("--model", model_path, "bundle written by fit")->required()->check(CLI::ExistingFile);
    add_data(cls, data, false);
    cls->add_option("--out", out_path, "trace CSV (default: stdout)");

    auto* thr = app.add_subcommand("threshold", "solve the recall threshold from held-out scores");
    thr->add_option("--scores", scores_path, "CSV of positive-sample scores, one column per set")->required()->check(CLI::ExistingFile);
    thr->add_option("--target-recall", target, "target recall")->check(CLI::Range(0.0, 1.0));
    thr->add_option("--fp-cost", fp_single, "false-positive cost, to report the implied false-negative cost");

    auto* orc = app.add_subcommand("oracle", "exact Bayes policy for a discrete instance");
    orc->add_option("instance", instance_path, "instance JSON file")->required()->check(CLI::ExistingFile);
    orc->add_flag("--policy", show_policy, "print the decision for every state");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*fit) return run_fit(data, costs, model, out_path);
        if (*path) return run_path(data, grid);
        if (*fwd) return run_forward(data, costs, model.inner_folds, model.seed, smooth);
        if (*eval) return run_evaluate(data, costs, model, json_path, csv_path);
        if (*cls) return run_classify(model_path, data, out_path);
        if (*thr) return run_threshold(scores_path, target, fp_single);
        if (*orc) return run_oracle(instance_path, show_policy);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
